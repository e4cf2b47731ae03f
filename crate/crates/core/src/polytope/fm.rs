//! Fourier–Motzkin elimination with exact arithmetic.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::lp::{maximize, LpOutcome};
use super::{RatePolyhedron, Row, RowSense};
use crate::channel::USERS;
use crate::error::{Error, Result};
use crate::rates::RateCoord;

#[derive(Clone, Debug)]
pub struct FmOptions {
    /// Above this many rows, rows implied by the others are removed by
    /// exact linear programming.
    pub redundancy_threshold: usize,
    /// Discard combinations whose ancestry exceeds the Chernikov bound.
    pub chernikov: bool,
    /// Fixed elimination order; otherwise a greedy order is used.
    pub order: Option<Vec<String>>,
    /// Remove redundant rows from the final system by linear programming
    /// when it has at most this many rows.
    pub final_cleanup: usize,
    /// Give up with `BudgetExceeded` once an intermediate system has more
    /// rows than this.
    pub row_limit: Option<usize>,
}

impl Default for FmOptions {
    fn default() -> Self {
        FmOptions { redundancy_threshold: 400, chernikov: true, order: None, final_cleanup: 2000, row_limit: None }
    }
}

/// The system as it stood right before one variable was eliminated; kept
/// so that projected points can be lifted back.
#[derive(Clone, Debug)]
pub struct FmStage {
    pub var: usize,
    pub equality: Option<Row>,
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug)]
pub struct FmResult {
    pub poly: RatePolyhedron,
    /// Variables of the input polyhedron, for interpreting `stages`.
    pub input_vars: Vec<String>,
    pub stages: Vec<FmStage>,
    pub max_rows: usize,
}

#[derive(Clone, Debug)]
struct Ineq {
    a: Vec<BigRational>,
    b: BigRational,
    hist: Vec<u32>,
}

struct State {
    n: usize,
    ineqs: Vec<Ineq>,
    eqs: Vec<(Vec<BigRational>, BigRational)>,
    eliminated_since_reset: usize,
    infeasible: bool,
}

fn scaled_key(a: &[BigRational], b: &BigRational) -> (Vec<BigRational>, BigRational) {
    let lead = a.iter().find(|v| !v.is_zero()).map(|v| v.abs()).unwrap_or_else(BigRational::one);
    (a.iter().map(|v| v / &lead).collect(), b / &lead)
}

impl State {
    fn new(poly: &RatePolyhedron) -> Self {
        let mut st = State { n: poly.dim(), ineqs: Vec::new(), eqs: Vec::new(), eliminated_since_reset: 0, infeasible: false };
        for r in &poly.rows {
            match r.sense {
                RowSense::Eq => st.eqs.push((r.coeffs.clone(), r.rhs.clone())),
                _ => {
                    for (a, b) in r.as_le() {
                        st.ineqs.push(Ineq { a, b, hist: Vec::new() });
                    }
                }
            }
        }
        st.reset_history();
        st.normalize();
        st
    }

    fn reset_history(&mut self) {
        for (i, q) in self.ineqs.iter_mut().enumerate() {
            q.hist = vec![i as u32];
        }
        self.eliminated_since_reset = 0;
    }

    fn rows(&self) -> Vec<Row> {
        let mut out: Vec<Row> =
            self.eqs.iter().map(|(a, b)| Row { coeffs: a.clone(), sense: RowSense::Eq, rhs: b.clone() }).collect();
        out.extend(self.ineqs.iter().map(|q| Row { coeffs: q.a.clone(), sense: RowSense::Le, rhs: q.b.clone() }));
        out
    }

    /// Drops trivial rows, detects contradictions, and merges rows equal up
    /// to positive scaling (keeping the tightest).
    fn normalize(&mut self) {
        let mut seen: HashMap<Vec<BigRational>, usize> = HashMap::new();
        let mut kept: Vec<Ineq> = Vec::with_capacity(self.ineqs.len());
        for q in std::mem::take(&mut self.ineqs) {
            if q.a.iter().all(Zero::is_zero) {
                if q.b.is_negative() {
                    self.infeasible = true;
                }
                continue;
            }
            let (a, b) = scaled_key(&q.a, &q.b);
            match seen.get(&a) {
                Some(&idx) => {
                    let other = &mut kept[idx];
                    if b < other.b || (b == other.b && q.hist.len() < other.hist.len()) {
                        *other = Ineq { a: other.a.clone(), b, hist: q.hist };
                    }
                }
                None => {
                    seen.insert(a.clone(), kept.len());
                    kept.push(Ineq { a, b, hist: q.hist });
                }
            }
        }
        self.ineqs = kept;
        let mut eqs = Vec::new();
        for (a, b) in std::mem::take(&mut self.eqs) {
            if a.iter().all(Zero::is_zero) {
                if !b.is_zero() {
                    self.infeasible = true;
                }
                continue;
            }
            let (a, b) = scaled_key(&a, &b);
            if !eqs.iter().any(|(x, y): &(Vec<BigRational>, BigRational)| *x == a && *y == b) {
                eqs.push((a, b));
            }
        }
        self.eqs = eqs;
        if self.infeasible {
            self.ineqs = vec![Ineq { a: vec![BigRational::zero(); self.n], b: -BigRational::one(), hist: Vec::new() }];
            self.eqs.clear();
        }
    }

    fn counts(&self, v: usize) -> (usize, usize) {
        let pos = self.ineqs.iter().filter(|q| q.a[v].is_positive()).count();
        let neg = self.ineqs.iter().filter(|q| q.a[v].is_negative()).count();
        (pos, neg)
    }

    fn equality_for(&self, v: usize) -> Option<usize> {
        self.eqs
            .iter()
            .enumerate()
            .filter(|(_, (a, _))| !a[v].is_zero())
            .min_by_key(|(_, (a, _))| a.iter().filter(|x| !x.is_zero()).count())
            .map(|(i, _)| i)
    }

    fn eliminate(&mut self, v: usize, opts: &FmOptions) -> Option<Row> {
        if self.infeasible {
            return None;
        }
        if let Some(e) = self.equality_for(v) {
            let (ea, eb) = self.eqs.remove(e);
            let pivot = ea[v].clone();
            let substitute = |a: &mut Vec<BigRational>, b: &mut BigRational| {
                let c = a[v].clone();
                if c.is_zero() {
                    return;
                }
                let f = &c / &pivot;
                for (x, y) in a.iter_mut().zip(&ea) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
                *b -= &f * &eb;
                a[v] = BigRational::zero();
            };
            for q in &mut self.ineqs {
                substitute(&mut q.a, &mut q.b);
            }
            for (a, b) in &mut self.eqs {
                substitute(a, b);
            }
            self.reset_history();
            self.normalize();
            return Some(Row { coeffs: ea, sense: RowSense::Eq, rhs: eb });
        }
        let (mut pos, mut neg, mut zero) = (Vec::new(), Vec::new(), Vec::new());
        for q in std::mem::take(&mut self.ineqs) {
            if q.a[v].is_positive() {
                pos.push(q);
            } else if q.a[v].is_negative() {
                neg.push(q);
            } else {
                zero.push(q);
            }
        }
        self.eliminated_since_reset += 1;
        let limit = self.eliminated_since_reset + 1;
        for p in &pos {
            for q in &neg {
                let mut hist: Vec<u32> = p.hist.iter().chain(&q.hist).copied().collect();
                hist.sort_unstable();
                hist.dedup();
                if opts.chernikov && hist.len() > limit {
                    continue;
                }
                // p.a[v] > 0, q.a[v] < 0: combine with positive weights
                let wp = -&q.a[v];
                let wq = p.a[v].clone();
                let a: Vec<BigRational> = p
                    .a
                    .iter()
                    .zip(&q.a)
                    .map(|(x, y)| match (x.is_zero(), y.is_zero()) {
                        (true, true) => BigRational::zero(),
                        (false, true) => x * &wp,
                        (true, false) => y * &wq,
                        (false, false) => x * &wp + y * &wq,
                    })
                    .collect();
                let b = &p.b * &wp + &q.b * &wq;
                let mut a = a;
                a[v] = BigRational::zero();
                zero.push(Ineq { a, b, hist });
            }
        }
        self.ineqs = zero;
        self.normalize();
        if self.ineqs.len() > opts.redundancy_threshold {
            self.remove_redundant(usize::MAX);
        }
        None
    }

    /// Removes every row implied by the remaining ones.
    fn remove_redundant(&mut self, max_rows: usize) {
        if self.infeasible || self.ineqs.len() > max_rows {
            return;
        }
        let active: Vec<usize> = (0..self.n).filter(|&j| self.ineqs.iter().any(|q| !q.a[j].is_zero()) || self.eqs.iter().any(|(a, _)| !a[j].is_zero())).collect();
        let project = |a: &[BigRational]| -> Vec<BigRational> { active.iter().map(|&j| a[j].clone()).collect() };
        let mut keep = vec![true; self.ineqs.len()];
        // rows already shown irredundant; most redundant rows are implied
        // by these alone, which takes a far smaller program to show
        let mut core: Vec<usize> = Vec::new();
        let system = |rows: &mut dyn Iterator<Item = usize>| {
            let mut p = RatePolyhedron::new(active.iter().map(|j| format!("v{j}")).collect());
            for (a, b) in &self.eqs {
                p.rows.push(Row { coeffs: project(a), sense: RowSense::Eq, rhs: b.clone() });
            }
            for k in rows {
                p.rows.push(Row { coeffs: project(&self.ineqs[k].a), sense: RowSense::Le, rhs: self.ineqs[k].b.clone() });
            }
            p
        };
        for i in 0..self.ineqs.len() {
            let objective = project(&self.ineqs[i].a);
            let small = system(&mut core.iter().copied());
            match maximize(&small, &objective) {
                Ok(LpOutcome::Optimal { value, .. }) if value <= self.ineqs[i].b => {
                    keep[i] = false;
                    continue;
                }
                Ok(LpOutcome::Infeasible) => {
                    self.infeasible = true;
                    self.normalize();
                    return;
                }
                _ => {}
            }
            let full = system(&mut (0..self.ineqs.len()).filter(|&k| k != i && keep[k]));
            match maximize(&full, &objective) {
                Ok(LpOutcome::Optimal { value, .. }) if value <= self.ineqs[i].b => keep[i] = false,
                Ok(LpOutcome::Infeasible) => {
                    self.infeasible = true;
                    self.normalize();
                    return;
                }
                _ => core.push(i),
            }
        }
        let mut k = 0;
        self.ineqs.retain(|_| {
            k += 1;
            keep[k - 1]
        });
        // the ancestry bound is only valid for systems that were generated
        // by plain combination; after pruning, start counting afresh
        self.reset_history();
    }
}

fn check_unknown(poly: &RatePolyhedron, names: &[String]) -> Result<Vec<usize>> {
    names.iter().map(|n| poly.var_index(n)).collect()
}

/// Eliminates `vars` from `poly`, returning the projection onto the other
/// variables together with the stages needed to lift points back.
pub fn fm_eliminate_all(poly: &RatePolyhedron, vars: &[String], opts: &FmOptions) -> Result<FmResult> {
    let targets = check_unknown(poly, vars)?;
    let fixed_order = match &opts.order {
        Some(o) => {
            let idx = check_unknown(poly, o)?;
            if idx.len() != targets.len() || !targets.iter().all(|t| idx.contains(t)) {
                return Err(Error::InvalidParameter("elimination order must list exactly the eliminated variables".into()));
            }
            Some(idx)
        }
        None => None,
    };
    let mut st = State::new(poly);
    let mut remaining = targets.clone();
    let mut stages = Vec::new();
    let mut max_rows = st.ineqs.len() + st.eqs.len();
    while !remaining.is_empty() {
        let v = match &fixed_order {
            Some(o) => o[stages.len()],
            None => {
                let with_eq = remaining.iter().copied().filter(|&v| st.equality_for(v).is_some()).min();
                with_eq.unwrap_or_else(|| {
                    *remaining
                        .iter()
                        .min_by_key(|&&v| {
                            let (p, n) = st.counts(v);
                            (p * n, p + n, v)
                        })
                        .unwrap()
                })
            }
        };
        remaining.retain(|&x| x != v);
        let rows = st.rows();
        let equality = st.eliminate(v, opts);
        stages.push(FmStage { var: v, equality, rows });
        max_rows = max_rows.max(st.ineqs.len() + st.eqs.len());
        if let Some(limit) = opts.row_limit {
            if max_rows > limit {
                return Err(Error::BudgetExceeded(format!("elimination reached {max_rows} rows (limit {limit})")));
            }
        }
    }
    st.remove_redundant(opts.final_cleanup);
    let keep: Vec<usize> = (0..poly.dim()).filter(|j| !targets.contains(j)).collect();
    let mut out = RatePolyhedron::new(keep.iter().map(|&j| poly.vars[j].clone()).collect());
    for r in st.rows() {
        out.rows.push(Row { coeffs: keep.iter().map(|&j| r.coeffs[j].clone()).collect(), sense: r.sense, rhs: r.rhs });
    }
    Ok(FmResult { poly: out, input_vars: poly.vars.clone(), stages, max_rows })
}

/// Projection of `poly` along one variable.
pub fn fm_eliminate(poly: &RatePolyhedron, var: &str) -> Result<RatePolyhedron> {
    let opts = FmOptions { final_cleanup: 0, ..FmOptions::default() };
    Ok(fm_eliminate_all(poly, &[var.to_string()], &opts)?.poly)
}

impl FmResult {
    /// Extends a point of the projection to a point of the input polyhedron.
    pub fn lift(&self, point: &[BigRational]) -> Option<Vec<BigRational>> {
        let n = self.input_vars.len();
        let eliminated: Vec<usize> = self.stages.iter().map(|s| s.var).collect();
        let mut x = vec![BigRational::zero(); n];
        let mut it = point.iter();
        for (j, slot) in x.iter_mut().enumerate() {
            if !eliminated.contains(&j) {
                *slot = it.next()?.clone();
            }
        }
        for stage in self.stages.iter().rev() {
            let v = stage.var;
            if let Some(eq) = &stage.equality {
                let rest: BigRational = eq.coeffs.iter().zip(&x).enumerate().filter(|(j, _)| *j != v).map(|(_, (a, y))| a * y).sum();
                x[v] = (&eq.rhs - rest) / &eq.coeffs[v];
                continue;
            }
            let mut lo: Option<BigRational> = None;
            let mut hi: Option<BigRational> = None;
            for r in &stage.rows {
                let a = &r.coeffs[v];
                let rest: BigRational = r.coeffs.iter().zip(&x).enumerate().filter(|(j, (c, _))| *j != v && !c.is_zero()).map(|(_, (c, y))| c * y).sum();
                if a.is_zero() {
                    if !r.holds(&x) {
                        return None;
                    }
                    continue;
                }
                let bound = (&r.rhs - rest) / a;
                let tighten_hi = |h: &mut Option<BigRational>| {
                    if h.as_ref().is_none_or(|cur| bound < *cur) {
                        *h = Some(bound.clone());
                    }
                };
                let tighten_lo = |l: &mut Option<BigRational>| {
                    if l.as_ref().is_none_or(|cur| bound > *cur) {
                        *l = Some(bound.clone());
                    }
                };
                match (r.sense, a.is_positive()) {
                    (RowSense::Le, true) | (RowSense::Ge, false) => tighten_hi(&mut hi),
                    (RowSense::Le, false) | (RowSense::Ge, true) => tighten_lo(&mut lo),
                    (RowSense::Eq, _) => {
                        tighten_hi(&mut hi);
                        tighten_lo(&mut lo);
                    }
                }
            }
            x[v] = match (lo, hi) {
                (Some(l), Some(h)) if l > h => return None,
                (Some(l), Some(h)) => (l + h) / BigRational::from_integer(2.into()),
                (Some(l), None) => l,
                (None, Some(h)) => h,
                (None, None) => BigRational::zero(),
            };
        }
        Some(x)
    }
}

pub const TOTAL_NAMES: [&str; USERS] = ["R1", "R2", "R3"];

/// Adds `R_l = Σ` message parts of sender `l` and eliminates every split
/// coordinate, leaving a system over `(R1, R2, R3)`.
pub fn fm_project_rates(poly: &RatePolyhedron) -> Result<RatePolyhedron> {
    Ok(fm_project_rates_with(poly, &FmOptions::default())?.poly)
}

pub fn fm_project_rates_with(poly: &RatePolyhedron, opts: &FmOptions) -> Result<FmResult> {
    let coords = RateCoord::all();
    let split_names: Vec<String> = coords.iter().map(|c| c.name()).collect();
    if poly.dim() != coords.len() || !split_names.iter().all(|n| poly.vars.contains(n)) {
        return Err(Error::DimensionMismatch(format!("expected the {} split-rate coordinates, got {:?}", coords.len(), poly.vars)));
    }
    let mut vars = poly.vars.clone();
    vars.extend(TOTAL_NAMES.iter().map(|s| s.to_string()));
    let mut ext = RatePolyhedron::new(vars);
    for r in &poly.rows {
        let mut coeffs = r.coeffs.clone();
        coeffs.extend(std::iter::repeat_n(BigRational::zero(), USERS));
        ext.rows.push(Row { coeffs, sense: r.sense, rhs: r.rhs.clone() });
    }
    for l in 0..USERS {
        let mut coeffs = vec![BigRational::zero(); ext.dim()];
        coeffs[poly.dim() + l] = BigRational::one();
        for c in coords.iter().filter(|c| c.sender() == l && c.is_message_part()) {
            coeffs[ext.var_index(&c.name())?] = -BigRational::one();
        }
        ext.push(coeffs, RowSense::Eq, BigRational::zero())?;
    }
    fm_eliminate_all(&ext, &split_names, opts)
}
