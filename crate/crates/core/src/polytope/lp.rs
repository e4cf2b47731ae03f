//! Exact simplex method on rational dictionaries.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::RatePolyhedron;
use crate::error::Result;
use crate::rational::rat_to_f64;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { x: Vec<BigRational>, value: BigRational },
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }
}

/// `x_basis[i] = consts[i] + Σ_j rows[i][j] · x_nonbasis[j]`,
/// `z = obj_const + Σ_j obj[j] · x_nonbasis[j]`.
struct Dictionary {
    basis: Vec<usize>,
    nonbasis: Vec<usize>,
    consts: Vec<BigRational>,
    rows: Vec<Vec<BigRational>>,
    obj: Vec<BigRational>,
    obj_const: BigRational,
}

/// After this many consecutive degenerate pivots the largest-coefficient
/// rule is abandoned for Bland's rule, which cannot cycle.
const DEGENERATE_STREAK: usize = 30;

enum Step {
    Optimal,
    Unbounded,
    Pivoted,
}

impl Dictionary {
    fn pivot(&mut self, r: usize, e: usize) {
        let a = self.rows[r][e].clone();
        let inv = BigRational::from_integer(1.into()) / &a;
        let leaving = self.basis[r];
        let entering = self.nonbasis[e];
        // solve row r for the entering variable
        let mut new_row: Vec<BigRational> = self.rows[r].iter().map(|c| -(c * &inv)).collect();
        new_row[e] = inv.clone();
        let new_const = -(&self.consts[r] * &inv);
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let coef = std::mem::take(&mut self.rows[i][e]);
            if coef.is_zero() {
                continue;
            }
            let row = &mut self.rows[i];
            for (j, v) in new_row.iter().enumerate() {
                if j == e {
                    row[j] = &coef * v;
                } else if !v.is_zero() {
                    row[j] += &coef * v;
                }
            }
            self.consts[i] += &coef * &new_const;
        }
        let coef = std::mem::take(&mut self.obj[e]);
        if !coef.is_zero() {
            for (j, v) in new_row.iter().enumerate() {
                if j == e {
                    self.obj[j] = &coef * v;
                } else if !v.is_zero() {
                    self.obj[j] += &coef * v;
                }
            }
            self.obj_const += &coef * &new_const;
        }
        self.rows[r] = new_row;
        self.consts[r] = new_const;
        self.basis[r] = entering;
        self.nonbasis[e] = leaving;
    }

    fn step(&mut self, bland: bool) -> Step {
        let entering = if bland {
            (0..self.obj.len()).filter(|&j| self.obj[j].is_positive()).min_by_key(|&j| self.nonbasis[j])
        } else {
            let mut best: Option<usize> = None;
            for j in 0..self.obj.len() {
                if self.obj[j].is_positive() && best.is_none_or(|b| self.obj[j] > self.obj[b]) {
                    best = Some(j);
                }
            }
            best
        };
        let Some(e) = entering else {
            return Step::Optimal;
        };
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..self.rows.len() {
            let a = &self.rows[i][e];
            if !a.is_negative() {
                continue;
            }
            let ratio = -(&self.consts[i] / a);
            let better = match &leave {
                None => true,
                Some((b, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*b]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        match leave {
            None => Step::Unbounded,
            Some((r, _)) => {
                self.pivot(r, e);
                Step::Pivoted
            }
        }
    }

    fn optimize(&mut self) -> bool {
        let mut bland = false;
        let mut streak = 0;
        loop {
            let before = self.obj_const.clone();
            match self.step(bland) {
                Step::Optimal => return true,
                Step::Unbounded => return false,
                Step::Pivoted => {
                    if self.obj_const == before {
                        streak += 1;
                        if streak >= DEGENERATE_STREAK {
                            bland = true;
                        }
                    } else {
                        streak = 0;
                    }
                }
            }
        }
    }
}

fn slack_dictionary(a: &[Vec<BigRational>], b: &[BigRational], c: &[BigRational]) -> Dictionary {
    let (m, n) = (a.len(), c.len());
    Dictionary {
        basis: (n..n + m).collect(),
        nonbasis: (0..n).collect(),
        consts: b.to_vec(),
        rows: a.iter().map(|row| row.iter().map(|v| -v).collect()).collect(),
        obj: c.to_vec(),
        obj_const: BigRational::zero(),
    }
}

fn solution(d: &Dictionary, n: usize) -> LpOutcome {
    let mut x = vec![BigRational::zero(); n];
    for (i, &v) in d.basis.iter().enumerate() {
        if v < n {
            x[v] = d.consts[i].clone();
        }
    }
    LpOutcome::Optimal { x, value: d.obj_const.clone() }
}

/// Maximizes `c · x` subject to `A x ≤ b` and `x ≥ 0`, exactly.
pub fn simplex_nonneg(a: &[Vec<BigRational>], b: &[BigRational], c: &[BigRational]) -> LpOutcome {
    simplex_exact(a, b, c)
}

/// Same result as [`simplex_nonneg`], usually much faster on larger
/// programs. A floating-point simplex guesses the optimal basis; the guess
/// is then certified exactly (primal and dual feasibility of a square
/// system), or used to warm-start the exact simplex. Floats only ever pick
/// the basis; every returned value is exact.
pub fn simplex_guided(a: &[Vec<BigRational>], b: &[BigRational], c: &[BigRational]) -> LpOutcome {
    let n = c.len();
    if let Some((target, bounded)) = float_basis(a, b, c) {
        if bounded {
            if let Some(out) = certify_basis(a, b, c, &target) {
                return out;
            }
        }
        if let Some(mut d) = warm_dictionary(a, b, c, &target) {
            if d.optimize() {
                return solution(&d, n);
            }
            return LpOutcome::Unbounded;
        }
    }
    simplex_exact(a, b, c)
}

/// Solves a square system by Gaussian elimination; `None` if singular.
fn solve_square(mut m: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let k = rhs.len();
    for col in 0..k {
        let p = (col..k).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, p);
        rhs.swap(col, p);
        let inv = BigRational::from_integer(1.into()) / &m[col][col];
        for r in col + 1..k {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] * &inv;
            for j in col..k {
                if !m[col][j].is_zero() {
                    let t = &f * &m[col][j];
                    m[r][j] -= t;
                }
            }
            let t = &f * &rhs[col];
            rhs[r] -= t;
        }
    }
    let mut x = vec![BigRational::zero(); k];
    for r in (0..k).rev() {
        let mut acc = rhs[r].clone();
        for j in r + 1..k {
            if !m[r][j].is_zero() {
                acc -= &m[r][j] * &x[j];
            }
        }
        x[r] = acc / &m[r][r];
    }
    Some(x)
}

/// Checks exactly that `basis` is primal and dual feasible, returning the
/// optimum if so. Only a square system in the basic original variables
/// and the tight rows is solved, never the whole dictionary.
fn certify_basis(a: &[Vec<BigRational>], b: &[BigRational], c: &[BigRational], basis: &[usize]) -> Option<LpOutcome> {
    let (m, n) = (a.len(), c.len());
    let cols: Vec<usize> = basis.iter().copied().filter(|&v| v < n).collect();
    let tight: Vec<usize> = (0..m).filter(|i| !basis.contains(&(n + i))).collect();
    if cols.len() != tight.len() {
        return None;
    }
    let k = cols.len();
    let primal = solve_square(
        tight.iter().map(|&i| cols.iter().map(|&j| a[i][j].clone()).collect()).collect(),
        tight.iter().map(|&i| b[i].clone()).collect(),
    )?;
    if primal.iter().any(|v| v.is_negative()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); n];
    for (&j, v) in cols.iter().zip(&primal) {
        x[j] = v.clone();
    }
    for i in 0..m {
        let lhs: BigRational = cols.iter().filter(|&&j| !a[i][j].is_zero() && !x[j].is_zero()).map(|&j| &a[i][j] * &x[j]).sum();
        if lhs > b[i] {
            return None;
        }
    }
    // duals on the tight rows: Σ_i y_i a_ij = c_j over basic columns
    let y = if k == 0 {
        Vec::new()
    } else {
        solve_square(
            cols.iter().map(|&j| tight.iter().map(|&i| a[i][j].clone()).collect()).collect(),
            cols.iter().map(|&j| c[j].clone()).collect(),
        )?
    };
    if y.iter().any(|v| v.is_negative()) {
        return None;
    }
    for j in (0..n).filter(|j| !cols.contains(j)) {
        let reduced: BigRational = tight.iter().zip(&y).filter(|(_, yi)| !yi.is_zero()).map(|(&i, yi)| yi * &a[i][j]).sum();
        if c[j] > reduced {
            return None;
        }
    }
    let value: BigRational = c.iter().zip(&x).map(|(p, q)| p * q).sum();
    Some(LpOutcome::Optimal { x, value })
}

/// Pivots the slack dictionary to `target` (labels of basic variables).
fn warm_dictionary(a: &[Vec<BigRational>], b: &[BigRational], c: &[BigRational], target: &[usize]) -> Option<Dictionary> {
    let n = c.len();
    let mut d = slack_dictionary(a, b, c);
    for &v in target.iter().filter(|&&v| v < n) {
        let e = d.nonbasis.iter().position(|&x| x == v)?;
        let r = (0..d.rows.len())
            .filter(|&i| !target.contains(&d.basis[i]) && !d.rows[i][e].is_zero())
            .max_by(|&i, &j| d.rows[i][e].abs().cmp(&d.rows[j][e].abs()))?;
        d.pivot(r, e);
    }
    if d.consts.iter().any(|v| v.is_negative()) {
        return None;
    }
    Some(d)
}

const FLOAT_EPS: f64 = 1e-9;

/// Floating-point twin of [`Dictionary`], used only to guess a basis.
struct FloatDictionary {
    basis: Vec<usize>,
    nonbasis: Vec<usize>,
    consts: Vec<f64>,
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
}

impl FloatDictionary {
    fn pivot(&mut self, r: usize, e: usize) {
        let inv = 1.0 / self.rows[r][e];
        let mut new_row: Vec<f64> = self.rows[r].iter().map(|c| -c * inv).collect();
        new_row[e] = inv;
        let new_const = -self.consts[r] * inv;
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let coef = std::mem::take(&mut self.rows[i][e]);
            if coef == 0.0 {
                continue;
            }
            for (j, v) in new_row.iter().enumerate() {
                if j == e {
                    self.rows[i][j] = coef * v;
                } else {
                    self.rows[i][j] += coef * v;
                }
            }
            self.consts[i] += coef * new_const;
        }
        let coef = std::mem::take(&mut self.obj[e]);
        for (j, v) in new_row.iter().enumerate() {
            if j == e {
                self.obj[j] = coef * v;
            } else {
                self.obj[j] += coef * v;
            }
        }
        self.rows[r] = new_row;
        self.consts[r] = new_const;
        std::mem::swap(&mut self.basis[r], &mut self.nonbasis[e]);
    }

    /// `Some(true)` optimal, `Some(false)` unbounded, `None` gave up.
    fn optimize(&mut self) -> Option<bool> {
        let limit = 50 * (self.rows.len() + self.obj.len()) + 100;
        for it in 0..limit {
            let bland = it > limit / 2;
            let entering = (0..self.obj.len()).filter(|&j| self.obj[j] > FLOAT_EPS).min_by(|&i, &j| {
                if bland {
                    self.nonbasis[i].cmp(&self.nonbasis[j])
                } else {
                    self.obj[j].total_cmp(&self.obj[i])
                }
            });
            let Some(e) = entering else { return Some(true) };
            let leave = (0..self.rows.len())
                .filter(|&i| self.rows[i][e] < -FLOAT_EPS)
                .map(|i| (i, -self.consts[i].max(0.0) / self.rows[i][e]))
                .min_by(|x, y| x.1.total_cmp(&y.1).then(self.basis[x.0].cmp(&self.basis[y.0])));
            let Some((r, _)) = leave else { return Some(false) };
            self.pivot(r, e);
        }
        None
    }
}

/// Labels of the basic variables where the floating-point simplex stopped,
/// and whether it stopped at an optimum (rather than an unbounded ray).
fn float_basis(a: &[Vec<BigRational>], b: &[BigRational], c: &[BigRational]) -> Option<(Vec<usize>, bool)> {
    let (m, n) = (a.len(), c.len());
    let aux = n + m;
    let mut d = FloatDictionary {
        basis: (n..n + m).collect(),
        nonbasis: (0..n).collect(),
        consts: b.iter().map(rat_to_f64).collect(),
        rows: a.iter().map(|row| row.iter().map(|v| -rat_to_f64(v)).collect()).collect(),
        obj: c.iter().map(rat_to_f64).collect(),
    };
    let worst = (0..m).filter(|&i| d.consts[i] < 0.0).min_by(|&i, &j| d.consts[i].total_cmp(&d.consts[j]));
    if let Some(r) = worst {
        for row in &mut d.rows {
            row.push(1.0);
        }
        d.nonbasis.push(aux);
        let original = std::mem::replace(&mut d.obj, vec![0.0; n]);
        d.obj.push(-1.0);
        d.pivot(r, n);
        if !d.optimize()? {
            return None;
        }
        if let Some(r) = d.basis.iter().position(|&v| v == aux) {
            if d.consts[r] > FLOAT_EPS {
                return None;
            }
            let e = (0..d.nonbasis.len()).max_by(|&i, &j| d.rows[r][i].abs().total_cmp(&d.rows[r][j].abs()))?;
            if d.rows[r][e].abs() <= FLOAT_EPS {
                return None;
            }
            d.pivot(r, e);
        }
        let col = d.nonbasis.iter().position(|&v| v == aux)?;
        for row in &mut d.rows {
            row.remove(col);
        }
        d.nonbasis.remove(col);
        let mut obj = vec![0.0; d.nonbasis.len()];
        for (v, w) in original.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            if let Some(j) = d.nonbasis.iter().position(|&x| x == v) {
                obj[j] += w;
            } else if let Some(i) = d.basis.iter().position(|&x| x == v) {
                for (j, coef) in d.rows[i].iter().enumerate() {
                    obj[j] += w * coef;
                }
            }
        }
        d.obj = obj;
    }
    let bounded = d.optimize()?;
    Some((d.basis, bounded))
}

/// The exact two-phase simplex method from the slack basis.
pub fn simplex_exact(a: &[Vec<BigRational>], b: &[BigRational], c: &[BigRational]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    // variables: 0..n original, n..n+m slacks, n+m auxiliary
    let aux = n + m;
    let mut d = slack_dictionary(a, b, c);
    let worst = (0..m).filter(|&i| d.consts[i].is_negative()).min_by(|&i, &j| d.consts[i].cmp(&d.consts[j]));
    if let Some(r) = worst {
        // phase one: maximize -x_aux
        for row in &mut d.rows {
            row.push(BigRational::from_integer(1.into()));
        }
        d.nonbasis.push(aux);
        let original_obj = std::mem::replace(&mut d.obj, vec![BigRational::zero(); n]);
        d.obj.push(BigRational::from_integer((-1).into()));
        d.pivot(r, n);
        d.optimize();
        if d.obj_const.is_negative() {
            return LpOutcome::Infeasible;
        }
        if let Some(r) = d.basis.iter().position(|&v| v == aux) {
            // degenerate: the auxiliary variable is basic at zero
            let e = (0..d.nonbasis.len()).find(|&j| !d.rows[r][j].is_zero()).expect("auxiliary row is not empty");
            d.pivot(r, e);
        }
        let col = d.nonbasis.iter().position(|&v| v == aux).unwrap();
        for row in &mut d.rows {
            row.remove(col);
        }
        d.nonbasis.remove(col);
        // restate the objective over the current nonbasis
        let mut obj = vec![BigRational::zero(); d.nonbasis.len()];
        let mut obj_const = BigRational::zero();
        for (v, w) in original_obj.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            if let Some(j) = d.nonbasis.iter().position(|&x| x == v) {
                obj[j] += w;
            } else if let Some(i) = d.basis.iter().position(|&x| x == v) {
                obj_const += w * &d.consts[i];
                for (j, coef) in d.rows[i].iter().enumerate() {
                    if !coef.is_zero() {
                        obj[j] += w * coef;
                    }
                }
            }
        }
        d.obj = obj;
        d.obj_const = obj_const;
    }
    if !d.optimize() {
        return LpOutcome::Unbounded;
    }
    solution(&d, n)
}

/// Maximizes `objective · x` over a polyhedron with free variables.
pub fn maximize(poly: &RatePolyhedron, objective: &[BigRational]) -> Result<LpOutcome> {
    poly.check_dim(objective.len())?;
    let n = poly.dim();
    // x = p - q with p, q ≥ 0
    let rows = poly.le_rows();
    let a: Vec<Vec<BigRational>> =
        rows.iter().map(|(coeffs, _)| coeffs.iter().cloned().chain(coeffs.iter().map(|v| -v)).collect()).collect();
    let b: Vec<BigRational> = rows.into_iter().map(|(_, rhs)| rhs).collect();
    let c: Vec<BigRational> = objective.iter().cloned().chain(objective.iter().map(|v| -v)).collect();
    Ok(match simplex_guided(&a, &b, &c) {
        LpOutcome::Optimal { x, value } => LpOutcome::Optimal { x: (0..n).map(|i| &x[i] - &x[n + i]).collect(), value },
        other => other,
    })
}

/// Some point of the polyhedron, if it is nonempty.
pub fn feasible_point(poly: &RatePolyhedron) -> Result<Option<Vec<BigRational>>> {
    Ok(match maximize(poly, &vec![BigRational::zero(); poly.dim()])? {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    })
}

/// With a point: exact substitution. Without: exact emptiness test.
pub fn lp_feasible(poly: &RatePolyhedron, point: Option<&[BigRational]>) -> Result<bool> {
    match point {
        Some(p) => poly.contains(p),
        None => Ok(feasible_point(poly)?.is_some()),
    }
}

#[cfg(test)]
mod tests {
    use super::super::RowSense;
    use super::*;
    use crate::rational::rat;

    fn poly(rows: &[(&[i64], RowSense, i64)]) -> RatePolyhedron {
        let n = rows[0].0.len();
        let mut p = RatePolyhedron::new((0..n).map(|i| format!("x{i}")).collect());
        for (c, s, r) in rows {
            p.push(c.iter().map(|&v| rat(v, 1)).collect(), *s, rat(*r, 1)).unwrap();
        }
        p
    }

    #[test]
    fn small_cases() {
        let p = poly(&[(&[1], RowSense::Le, 1), (&[1], RowSense::Ge, 2)]);
        assert!(!lp_feasible(&p, None).unwrap());
        let mut q = poly(&[(&[1, 1], RowSense::Le, 4)]);
        q.push_nonnegativity();
        assert!(lp_feasible(&q, Some(&[rat(0, 1), rat(0, 1)])).unwrap());
        assert!(lp_feasible(&q, Some(&[rat(0, 1)])).is_err());
        match maximize(&q, &[rat(1, 1), rat(2, 1)]).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(8, 1)),
            other => panic!("{other:?}"),
        }
        let free = poly(&[(&[1, 0], RowSense::Le, 1)]);
        assert_eq!(maximize(&free, &[rat(0, 1), rat(1, 1)]).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn needs_phase_one() {
        // x + y ≥ 3, x ≤ 2, y ≤ 2, maximize -x
        let p = poly(&[(&[1, 1], RowSense::Ge, 3), (&[1, 0], RowSense::Le, 2), (&[0, 1], RowSense::Le, 2)]);
        match maximize(&p, &[rat(-1, 1), rat(0, 1)]).unwrap() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, rat(-1, 1));
                assert_eq!(x, vec![rat(1, 1), rat(2, 1)]);
            }
            other => panic!("{other:?}"),
        }
        let eq = poly(&[(&[1, 1], RowSense::Eq, 1), (&[1, -1], RowSense::Eq, 0)]);
        assert_eq!(feasible_point(&eq).unwrap(), Some(vec![rat(1, 2), rat(1, 2)]));
    }

    proptest::proptest! {
        #[test]
        fn warm_start_agrees_with_exact(
            n in 1usize..5,
            rows in proptest::collection::vec((proptest::collection::vec(-5i64..6, 5), -3i64..10), 1..9),
            c in proptest::collection::vec(-3i64..6, 5),
        ) {
            let a: Vec<Vec<BigRational>> = rows.iter().map(|(r, _)| r[..n].iter().map(|&v| rat(v, 1)).collect()).collect();
            let b: Vec<BigRational> = rows.iter().map(|(_, v)| rat(*v, 3)).collect();
            let c: Vec<BigRational> = c[..n].iter().map(|&v| rat(v, 2)).collect();
            let fast = simplex_guided(&a, &b, &c);
            let slow = simplex_exact(&a, &b, &c);
            match (&fast, &slow) {
                (LpOutcome::Optimal { x, value }, LpOutcome::Optimal { value: v2, .. }) => {
                    proptest::prop_assert_eq!(value, v2);
                    for (row, bi) in a.iter().zip(&b) {
                        let lhs: BigRational = row.iter().zip(x).map(|(p, q)| p * q).sum();
                        proptest::prop_assert!(lhs <= *bi);
                    }
                    proptest::prop_assert!(x.iter().all(|v| !v.is_negative()));
                }
                _ => proptest::prop_assert_eq!(fast, slow),
            }
        }
    }
}
