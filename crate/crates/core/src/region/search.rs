use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::selection::selected_rows;
use super::{RateSystem, SelectionAssignment, MEMBERSHIP_TOL};
use crate::channel::USERS;
use crate::error::{Error, Result};
use crate::polytope::{simplex_guided, LpOutcome};
use crate::rates::{Rate18, RateCoord, RATE_DIM};
use crate::rational::{rat_from_f64, rat_to_f64};
use crate::tables::INTERFERER_ROWS;

/// What one linear program over a selection polyhedron optimizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Goal {
    /// Maximize `d · (R1, R2, R3)`.
    Support([f64; USERS]),
    /// Maximize `t` with `(R1, R2, R3) = t d`.
    Ray([f64; USERS]),
    /// Maximize `t ≤ 1` with `(R1, R2, R3) = t p`; the point is reached iff
    /// the value is 1.
    Point([f64; USERS]),
}

impl Goal {
    fn direction(&self) -> &[f64; USERS] {
        match self {
            Goal::Support(d) | Goal::Ray(d) | Goal::Point(d) => d,
        }
    }

    fn uses_t(&self) -> bool {
        !matches!(self, Goal::Support(_))
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub selection: SelectionAssignment,
    pub value: BigRational,
    /// Exact optimizer over the 18 split coordinates.
    pub witness_exact: Vec<BigRational>,
    pub witness: Rate18,
    /// Linear programs solved.
    pub lps: usize,
}

impl SearchOutcome {
    pub fn value_f64(&self) -> f64 {
        rat_to_f64(&self.value)
    }

    pub fn totals(&self) -> [f64; USERS] {
        self.witness.totals()
    }
}

/// `A x ≤ b` rows of the selection polyhedron over the 18 coordinates;
/// nonnegativity is left implicit.
pub fn selection_rows(system: &RateSystem, sel: &SelectionAssignment) -> Result<(Vec<Vec<BigRational>>, Vec<BigRational>)> {
    sel.validate()?;
    Ok(selected_rows(system, sel).into_iter().unzip())
}

fn part_row(l: usize) -> Vec<BigRational> {
    let mut row = vec![BigRational::zero(); RATE_DIM];
    for c in RateCoord::all().into_iter().filter(|c| c.sender() == l && c.is_message_part()) {
        row[c.index()] = BigRational::one();
    }
    row
}

/// Solves one goal over one selection. `None` when the polyhedron is empty.
pub fn solve_for_selection(system: &RateSystem, sel: &SelectionAssignment, goal: &Goal) -> Result<Option<(BigRational, Vec<BigRational>)>> {
    let (mut a, mut b) = selection_rows(system, sel)?;
    let d: Vec<BigRational> = goal.direction().iter().map(|&v| rat_from_f64(v)).collect();
    if goal.uses_t() {
        if d.iter().any(|v| v < &BigRational::zero()) || (matches!(goal, Goal::Ray(_)) && d.iter().all(Zero::is_zero)) {
            return Err(Error::InvalidParameter(format!("ray direction must be nonnegative and nonzero: {:?}", goal.direction())));
        }
        for row in &mut a {
            row.push(BigRational::zero());
        }
        for (l, dl) in d.iter().enumerate() {
            let mut row = part_row(l);
            row.push(-dl);
            a.push(row.iter().map(|v| -v).collect());
            a.push(row);
            b.push(BigRational::zero());
            b.push(BigRational::zero());
        }
        if matches!(goal, Goal::Point(_)) {
            let mut row = vec![BigRational::zero(); RATE_DIM + 1];
            row[RATE_DIM] = BigRational::one();
            a.push(row);
            b.push(BigRational::one());
        }
    }
    let c: Vec<BigRational> = if goal.uses_t() {
        let mut c = vec![BigRational::zero(); RATE_DIM + 1];
        c[RATE_DIM] = BigRational::one();
        c
    } else {
        let mut c = vec![BigRational::zero(); RATE_DIM];
        for (l, dl) in d.iter().enumerate() {
            for (slot, v) in c.iter_mut().zip(part_row(l)) {
                if !v.is_zero() {
                    *slot = dl.clone();
                }
            }
        }
        c
    };
    match simplex_guided(&a, &b, &c) {
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::InvalidParameter(format!("unbounded goal {goal:?} for selection {}", sel.id()))),
        LpOutcome::Optimal { mut x, value } => {
            x.truncate(RATE_DIM);
            Ok(Some((value, x)))
        }
    }
}

/// Switches worth trying at `r`: for every `(l, j, k)` group in which some
/// condition is tight under `sel`, the other alternatives that `r` also
/// satisfies (so the switched polyhedron still contains `r`).
fn switch_candidates(system: &RateSystem, sel: &SelectionAssignment, r: &Rate18) -> Vec<(usize, usize, usize, usize)> {
    let mut out = Vec::new();
    for rx in &system.receivers {
        for j in 1..=INTERFERER_ROWS {
            for k in 1..=INTERFERER_ROWS {
                let chosen = sel.get(rx.receiver, j, k);
                let group: Vec<_> = rx.conditions.iter().filter(|c| c.j == j && c.k == k).collect();
                let alts = &group[0].alternatives;
                let alt_value: Vec<f64> = alts.iter().map(|a| a.rate.dot(r) + a.term_value).collect();
                // slack of the loosest-to-tightest condition in the group under alternative n
                let slack = |n: usize| group.iter().map(|c| c.rhs - c.base.dot(r) - alt_value[n]).fold(f64::INFINITY, f64::min);
                if slack(chosen) > MEMBERSHIP_TOL {
                    continue;
                }
                for n in 0..alts.len() {
                    if n != chosen && slack(n) >= -MEMBERSHIP_TOL {
                        out.push((rx.receiver, j, k, n));
                    }
                }
            }
        }
    }
    out
}

/// Local search over selections: each start is solved, then the best
/// point's own minimizing selection is tried, then single switches of the
/// alternatives in tight groups, until nothing improves or `max_lps` runs
/// out. Returns `None` when every tried selection is empty.
pub fn search(system: &RateSystem, goal: &Goal, starts: &[SelectionAssignment], max_lps: usize) -> Result<Option<SearchOutcome>> {
    let mut cache: HashMap<SelectionAssignment, Option<(BigRational, Vec<BigRational>)>> = HashMap::new();
    let mut lps = 0usize;
    let mut solve = |sel: &SelectionAssignment, lps: &mut usize| -> Result<Option<(BigRational, Vec<BigRational>)>> {
        if let Some(hit) = cache.get(sel) {
            return Ok(hit.clone());
        }
        *lps += 1;
        let out = solve_for_selection(system, sel, goal)?;
        cache.insert(*sel, out.clone());
        Ok(out)
    };
    let mut best: Option<(SelectionAssignment, BigRational, Vec<BigRational>)> = None;
    let consider = |sel: SelectionAssignment, res: Option<(BigRational, Vec<BigRational>)>, best: &mut Option<(SelectionAssignment, BigRational, Vec<BigRational>)>| -> bool {
        match (res, best.as_ref()) {
            (Some((v, x)), None) => {
                *best = Some((sel, v, x));
                true
            }
            (Some((v, x)), Some((_, bv, _))) if v > *bv => {
                *best = Some((sel, v, x));
                true
            }
            _ => false,
        }
    };
    for s in starts {
        if lps >= max_lps.max(1) {
            break;
        }
        let res = solve(s, &mut lps)?;
        consider(*s, res, &mut best);
    }
    loop {
        let Some((sel, _, x)) = best.clone() else { break };
        if matches!(goal, Goal::Point(_)) && best.as_ref().is_some_and(|b| b.1.is_one()) {
            break;
        }
        let r = Rate18::from_rationals(&x);
        let mut improved = false;
        let own = SelectionAssignment::pointwise(system, &r);
        if own != sel && lps < max_lps {
            let res = solve(&own, &mut lps)?;
            improved = consider(own, res, &mut best);
        }
        if !improved {
            for (l, j, k, alt) in switch_candidates(system, &sel, &r) {
                if lps >= max_lps {
                    break;
                }
                let cand = sel.with(l, j, k, alt);
                let res = solve(&cand, &mut lps)?;
                if consider(cand, res, &mut best) {
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok(best.map(|(selection, value, witness_exact)| SearchOutcome {
        selection,
        witness: Rate18::from_rationals(&witness_exact),
        value,
        witness_exact,
        lps,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_modulo_example, validate_channel};
    use crate::pmf::{build_full_joint, InputPmf};
    use crate::rational::Prob;
    use crate::region::check_membership;

    fn system(flip: &str) -> RateSystem {
        let ch = validate_channel(build_modulo_example(2, flip.parse::<Prob>().unwrap()).unwrap()).unwrap();
        RateSystem::new(&build_full_joint(&InputPmf::uniform_u_equals_x([2; 3]), &ch).unwrap()).unwrap()
    }

    #[test]
    fn support_and_ray_witnesses_are_members() {
        let sys = system("1/5");
        let starts = [SelectionAssignment::argmin(&sys), SelectionAssignment::treat_as_noise(), SelectionAssignment::resolve_all()];
        let t = std::time::Instant::now();
        let out = search(&sys, &Goal::Support([1.0, 1.0, 1.0]), &starts, 200).unwrap().unwrap();
        eprintln!("support {} lps {} in {:?}", out.value_f64(), out.lps, t.elapsed());
        assert!(check_membership(&sys, &out.witness).member);
        let ray = search(&sys, &Goal::Ray([1.0, 0.5, 0.25]), &starts, 200).unwrap().unwrap();
        assert!(check_membership(&sys, &ray.witness).member);
        let tot = ray.totals();
        assert!((tot[1] - 0.5 * tot[0]).abs() < 1e-9);
        let p = search(&sys, &Goal::Point([0.0, 0.0, 0.0]), &starts, 10).unwrap().unwrap();
        assert!(p.value.is_one());
    }
}
