//! Exact rational polyhedra: Fourier–Motzkin elimination, linear
//! programming and three-dimensional convex hulls.

mod fm;
mod hull;
mod lp;

pub use fm::{fm_eliminate, fm_eliminate_all, fm_project_rates, fm_project_rates_with, FmOptions, FmResult, FmStage};
pub use hull::{hull3, Hull3};
pub use lp::{feasible_point, lp_feasible, maximize, simplex_exact, simplex_guided, simplex_nonneg, LpOutcome};

use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{parse_rational, rat_from_f64, rat_to_f64, rat_to_string};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

impl RowSense {
    pub fn symbol(self) -> &'static str {
        match self {
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
            RowSense::Eq => "=",
        }
    }

    fn parse(s: &str) -> Result<RowSense> {
        match s {
            "<=" | "≤" => Ok(RowSense::Le),
            ">=" | "≥" => Ok(RowSense::Ge),
            "=" | "==" => Ok(RowSense::Eq),
            other => Err(Error::InvalidParameter(format!("unknown row sense `{other}`"))),
        }
    }
}

/// `coeffs · x  sense  rhs`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Row {
    pub coeffs: Vec<BigRational>,
    pub sense: RowSense,
    pub rhs: BigRational,
}

impl Row {
    pub fn lhs(&self, x: &[BigRational]) -> BigRational {
        self.coeffs.iter().zip(x).filter(|(a, _)| !a.is_zero()).map(|(a, v)| a * v).sum()
    }

    pub fn holds(&self, x: &[BigRational]) -> bool {
        let lhs = self.lhs(x);
        match self.sense {
            RowSense::Le => lhs <= self.rhs,
            RowSense::Ge => lhs >= self.rhs,
            RowSense::Eq => lhs == self.rhs,
        }
    }

    /// Amount by which a float point violates the row (zero if it holds).
    pub fn violation_f64(&self, x: &[f64]) -> f64 {
        let lhs: f64 = self.coeffs.iter().zip(x).filter(|(a, _)| !a.is_zero()).map(|(a, v)| rat_to_f64(a) * v).sum();
        let rhs = rat_to_f64(&self.rhs);
        match self.sense {
            RowSense::Le => (lhs - rhs).max(0.0),
            RowSense::Ge => (rhs - lhs).max(0.0),
            RowSense::Eq => (lhs - rhs).abs(),
        }
    }

    /// The row as one or two `≤` rows.
    pub fn as_le(&self) -> Vec<(Vec<BigRational>, BigRational)> {
        let neg = || (self.coeffs.iter().map(|c| -c).collect(), -self.rhs.clone());
        match self.sense {
            RowSense::Le => vec![(self.coeffs.clone(), self.rhs.clone())],
            RowSense::Ge => vec![neg()],
            RowSense::Eq => vec![(self.coeffs.clone(), self.rhs.clone()), neg()],
        }
    }
}

/// A conjunction of linear rows over named variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatePolyhedron {
    pub vars: Vec<String>,
    pub rows: Vec<Row>,
}

impl RatePolyhedron {
    pub fn new(vars: Vec<String>) -> Self {
        RatePolyhedron { vars, rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.vars.iter().position(|v| v == name).ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn push(&mut self, coeffs: Vec<BigRational>, sense: RowSense, rhs: BigRational) -> Result<()> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("row has {} coefficients, polyhedron has {} variables", coeffs.len(), self.dim())));
        }
        self.rows.push(Row { coeffs, sense, rhs });
        Ok(())
    }

    /// Adds `Σ w · var  sense  rhs` from named terms.
    pub fn push_named(&mut self, terms: &[(&str, BigRational)], sense: RowSense, rhs: BigRational) -> Result<()> {
        let mut coeffs = vec![BigRational::zero(); self.dim()];
        for (name, w) in terms {
            coeffs[self.var_index(name)?] += w;
        }
        self.push(coeffs, sense, rhs)
    }

    /// Adds `var ≥ 0` for every variable.
    pub fn push_nonnegativity(&mut self) {
        for i in 0..self.dim() {
            let mut coeffs = vec![BigRational::zero(); self.dim()];
            coeffs[i] = BigRational::from_integer(1.into());
            self.rows.push(Row { coeffs, sense: RowSense::Ge, rhs: BigRational::zero() });
        }
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!("point has {n} coordinates, polyhedron has {} variables", self.dim())))
        }
    }

    pub fn contains(&self, point: &[BigRational]) -> Result<bool> {
        self.check_dim(point.len())?;
        Ok(self.rows.iter().all(|r| r.holds(point)))
    }

    pub fn max_violation_f64(&self, point: &[f64]) -> Result<f64> {
        self.check_dim(point.len())?;
        Ok(self.rows.iter().map(|r| r.violation_f64(point)).fold(0.0, f64::max))
    }

    pub fn contains_f64(&self, point: &[f64], tol: f64) -> Result<bool> {
        Ok(self.max_violation_f64(point)? <= tol)
    }

    /// All rows in `≤` form.
    pub fn le_rows(&self) -> Vec<(Vec<BigRational>, BigRational)> {
        self.rows.iter().flat_map(Row::as_le).collect()
    }

    /// True if some row has no variables and cannot hold.
    pub fn has_contradiction(&self) -> bool {
        self.rows.iter().any(|r| r.coeffs.iter().all(Zero::is_zero) && !r.holds(&vec![BigRational::zero(); self.dim()]))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PolyFile::from(self)).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        crate::io::parse_json::<PolyFile>(text)?.try_into()
    }

    /// Float copy of the rows, for plotting or quick screening.
    pub fn rows_f64(&self) -> Vec<(Vec<f64>, RowSense, f64)> {
        self.rows.iter().map(|r| (r.coeffs.iter().map(rat_to_f64).collect(), r.sense, rat_to_f64(&r.rhs))).collect()
    }
}

/// Lower bound on `x` on the grid `2^-bits`, so the rounded constant never
/// enlarges a `≤` row.
pub fn floor_dyadic(x: f64, bits: i32) -> BigRational {
    let scale = 2f64.powi(bits);
    let v = (x * scale).floor();
    rat_from_f64(v) / rat_from_f64(scale)
}

impl fmt::Display for RatePolyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            let mut terms = Vec::new();
            for (c, v) in r.coeffs.iter().zip(&self.vars) {
                if c.is_zero() {
                    continue;
                }
                let mag = c.abs();
                let sign = if c.is_negative() { "-" } else { "+" };
                if mag == BigRational::from_integer(1.into()) {
                    terms.push(format!("{sign} {v}"));
                } else {
                    terms.push(format!("{sign} {}·{v}", rat_to_string(&mag)));
                }
            }
            let mut lhs = if terms.is_empty() { "0".to_string() } else { terms.join(" ") };
            if let Some(rest) = lhs.strip_prefix("+ ") {
                lhs = rest.to_string();
            }
            writeln!(f, "{lhs} {} {}", r.sense.symbol(), rat_to_string(&r.rhs))?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct RowFile {
    coeffs: Vec<String>,
    sense: String,
    rhs: String,
}

#[derive(Serialize, Deserialize)]
struct PolyFile {
    vars: Vec<String>,
    rows: Vec<RowFile>,
}

impl From<&RatePolyhedron> for PolyFile {
    fn from(p: &RatePolyhedron) -> Self {
        PolyFile {
            vars: p.vars.clone(),
            rows: p
                .rows
                .iter()
                .map(|r| RowFile {
                    coeffs: r.coeffs.iter().map(rat_to_string).collect(),
                    sense: r.sense.symbol().to_string(),
                    rhs: rat_to_string(&r.rhs),
                })
                .collect(),
        }
    }
}

impl TryFrom<PolyFile> for RatePolyhedron {
    type Error = Error;
    fn try_from(f: PolyFile) -> Result<Self> {
        let mut p = RatePolyhedron::new(f.vars);
        for (n, r) in f.rows.into_iter().enumerate() {
            let coeffs = r.coeffs.iter().map(|c| parse_rational(c)).collect::<Result<Vec<_>>>().map_err(|e| Error::Parse {
                path: format!("rows[{n}].coeffs"),
                message: e.to_string(),
            })?;
            let rhs = parse_rational(&r.rhs).map_err(|e| Error::Parse { path: format!("rows[{n}].rhs"), message: e.to_string() })?;
            p.push(coeffs, RowSense::parse(&r.sense)?, rhs)?;
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn json_round_trip_is_exact() {
        let mut p = RatePolyhedron::new(vec!["x".into(), "y".into()]);
        p.push(vec![rat(1, 3), rat(-2, 7)], RowSense::Le, rat(5, 11)).unwrap();
        p.push(vec![rat(1, 1), rat(0, 1)], RowSense::Eq, rat(-3, 1)).unwrap();
        p.push_nonnegativity();
        let back = RatePolyhedron::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        assert!(p.to_json().contains("\"1/3\""));
        assert!(p.push(vec![rat(1, 1)], RowSense::Le, rat(0, 1)).is_err());
    }

    #[test]
    fn floor_dyadic_never_rounds_up() {
        for x in [0.1, 1.0 / 3.0, 2.5, -0.7, 1e-9] {
            let r = floor_dyadic(x, 32);
            assert!(r <= rat_from_f64(x));
            assert!(x - rat_to_f64(&r) < 1e-9);
        }
    }
}
