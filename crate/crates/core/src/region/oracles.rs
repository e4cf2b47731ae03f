//! Independent reference regions for two special cases: treating
//! interference as noise, and the compact Han–Kobayashi region of the
//! two-pair channel left when the third pair is degenerate.

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::membership::check_membership;
use super::RateSystem;
use crate::channel::{ValidatedChannel, USERS};
use crate::error::{Error, Result};
use crate::pmf::{FullJoint, InputPmf};
use crate::polytope::{hull3, maximize, Hull3, LpOutcome, RatePolyhedron, RowSense};
use crate::rates::{Rate18, RateCoord};
use crate::rational::{rat_from_f64, rat_to_f64, Prob};
use crate::vars::{Var, VarSet};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TinReport {
    /// `(I(X1;Y1|Q), I(X2;Y2|Q), I(X3;Y3|Q))`
    pub point: [f64; USERS],
    /// `R_l0 = R_l`, everything else zero.
    pub witness: Rate18,
    pub member: bool,
    pub min_slack: f64,
}

impl TinReport {
    /// Support function of the box `[0, point]`.
    pub fn support(&self, d: &[f64; USERS]) -> f64 {
        d.iter().zip(&self.point).map(|(a, b)| a.max(0.0) * b).sum()
    }
}

/// The treat-as-noise corner and the membership of its prescribed split.
pub fn tin_point(joint: &FullJoint, system: &RateSystem) -> Result<TinReport> {
    if !joint.input().has_u_equal_x() {
        return Err(Error::InvalidParameter("the treat-as-noise point needs U_l = X_l".into()));
    }
    let mut point = [0.0; USERS];
    let mut witness = Rate18::zero();
    for (l, slot) in point.iter_mut().enumerate() {
        *slot = joint.cond_mutual_info(&VarSet::of([Var::X(l)]), &VarSet::of([Var::Y(l)]), &VarSet::of([Var::Q]))?.max(0.0);
        witness.set(RateCoord::Common(l), *slot);
    }
    let report = check_membership(system, &witness);
    Ok(TinReport { point, witness, member: report.member, min_slack: report.min_slack })
}

/// The box spanned by the treat-as-noise corner.
pub fn tin_region(report: &TinReport) -> Hull3 {
    let p = report.point;
    let corners: Vec<[f64; USERS]> =
        (0..8).map(|m| std::array::from_fn(|i| if m >> i & 1 == 1 { p[i] } else { 0.0 })).collect();
    hull3(&corners)
}

/// Input pmf where the cloud of sender `l` (for the two active pairs) is
/// exactly what reaches the other active receiver.
pub fn hk_layered_input(channel: &ValidatedChannel, p_x: [Vec<Prob>; USERS]) -> InputPmf {
    let maps: [Vec<usize>; USERS] = std::array::from_fn(|l| {
        let n = p_x[l].len();
        if l < 2 {
            (0..n).map(|x| channel.link(l, 1 - l, x)).collect()
        } else {
            vec![0; n]
        }
    });
    InputPmf::u_function_of_x(p_x, maps)
}

fn mi(joint: &FullJoint, a: &VarSet, b: &VarSet, c: &VarSet) -> Result<f64> {
    joint.cond_mutual_info(&a.minus(c), b, &c.minus(b))
}

/// Compact Han–Kobayashi region over `(R1, R2)`: seven families of
/// inequalities in the common layers `W_l = (U_l, X_{l,other})` and the full
/// codewords `(U_l, X_l)`.
pub fn hk_oracle(joint: &FullJoint) -> Result<RatePolyhedron> {
    if !joint.channel().is_third_pair_degenerate() {
        return Err(Error::NotDegenerate("sender 3 must have one input symbol and no link to receiver 3".into()));
    }
    let w = |l: usize| VarSet::of([Var::U(l), Var::Link(l, 1 - l)]);
    let x = |l: usize| VarSet::of([Var::U(l), Var::X(l)]);
    let y = |l: usize| VarSet::of([Var::Y(l)]);
    let q = VarSet::of([Var::Q]);
    let (w1, w2, x1, x2, y1, y2) = (w(0), w(1), x(0), x(1), y(0), y(1));
    let w12 = w1.union(&w2).union(&q);
    let a = mi(joint, &x1, &y1, &w2.union(&q))?;
    let b = mi(joint, &x2, &y2, &w1.union(&q))?;
    let x1w2_y1 = mi(joint, &x1.union(&w2), &y1, &q)?;
    let x2w1_y2 = mi(joint, &x2.union(&w1), &y2, &q)?;
    let x1_y1_w = mi(joint, &x1, &y1, &w12)?;
    let x2_y2_w = mi(joint, &x2, &y2, &w12)?;
    let x1w2_y1_w1 = mi(joint, &x1.union(&w2), &y1, &w1.union(&q))?;
    let x2w1_y2_w2 = mi(joint, &x2.union(&w1), &y2, &w2.union(&q))?;
    let rows: [([i64; 2], f64); 7] = [
        ([1, 0], a),
        ([0, 1], b),
        ([1, 1], x1w2_y1 + x2_y2_w),
        ([1, 1], x2w1_y2 + x1_y1_w),
        ([1, 1], x1w2_y1_w1 + x2w1_y2_w2),
        ([2, 1], x1w2_y1 + x1_y1_w + x2w1_y2_w2),
        ([1, 2], x2w1_y2 + x2_y2_w + x1w2_y1_w1),
    ];
    let mut poly = RatePolyhedron::new(vec!["R1".into(), "R2".into()]);
    poly.push_nonnegativity();
    for (c, v) in rows {
        poly.push(c.iter().map(|&k| BigRational::from_integer(k.into())).collect(), RowSense::Le, rat_from_f64(v.max(0.0)))?;
    }
    Ok(poly)
}

/// Support value of a two-variable polyhedron along `(d1, d2)`.
pub fn support_2d(poly: &RatePolyhedron, d: &[f64; USERS]) -> Result<f64> {
    let obj = vec![rat_from_f64(d[0]), rat_from_f64(d[1])];
    match maximize(poly, &obj)? {
        LpOutcome::Optimal { value, .. } => Ok(rat_to_f64(&value)),
        LpOutcome::Unbounded => Ok(f64::INFINITY),
        LpOutcome::Infeasible => Ok(f64::NEG_INFINITY),
    }
}

/// Vertices of a bounded two-variable polyhedron.
pub fn hk_vertices(poly: &RatePolyhedron) -> Result<Vec<[f64; 2]>> {
    if poly.dim() != 2 {
        return Err(Error::DimensionMismatch(format!("expected 2 variables, got {}", poly.dim())));
    }
    let rows = poly.le_rows();
    let mut out: Vec<Vec<BigRational>> = Vec::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let (a, b) = (&rows[i], &rows[j]);
            let det = &a.0[0] * &b.0[1] - &a.0[1] * &b.0[0];
            if det.is_zero() {
                continue;
            }
            let p = vec![(&a.1 * &b.0[1] - &b.1 * &a.0[1]) / &det, (&a.0[0] * &b.1 - &b.0[0] * &a.1) / &det];
            if poly.contains(&p)? && !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out.sort();
    Ok(out.iter().map(|p| [rat_to_f64(&p[0]), rat_to_f64(&p[1])]).collect())
}

/// The oracle region embedded in `(R1, R2, 0)`.
pub fn hk_hull(poly: &RatePolyhedron) -> Result<Hull3> {
    Ok(hull3(&hk_vertices(poly)?.iter().map(|v| [v[0], v[1], 0.0]).collect::<Vec<_>>()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_modulo_example, degenerate_third_pair, validate_channel};
    use crate::pmf::build_full_joint;

    #[test]
    fn tin_point_is_member_on_modulo_instance() {
        let ch = validate_channel(build_modulo_example(2, Prob::ratio(1, 10)).unwrap()).unwrap();
        let joint = build_full_joint(&InputPmf::uniform_u_equals_x([2; 3]), &ch).unwrap();
        let sys = RateSystem::new(&joint).unwrap();
        let tin = tin_point(&joint, &sys).unwrap();
        assert!(tin.member, "slack {}", tin.min_slack);
        // Y1 = X1 + S1' with S1' uniform: nothing gets through
        assert!(tin.point.iter().all(|v| v.abs() < 1e-12));
        assert_eq!(tin_region(&tin).dimension, 0);
    }

    #[test]
    fn hk_oracle_on_interference_free_instance_is_a_box() {
        let mut spec = degenerate_third_pair(&build_modulo_example(2, Prob::zero()).unwrap());
        // senders 1 and 2 no longer reach each other's receiver
        spec.g[0][1] = vec![0, 0];
        spec.g[1][0] = vec![0, 0];
        let ch = validate_channel(spec).unwrap();
        let joint = build_full_joint(&hk_layered_input(&ch, [vec![Prob::ratio(1, 2); 2], vec![Prob::ratio(1, 2); 2], vec![Prob::one()]]), &ch)
            .unwrap();
        let poly = hk_oracle(&joint).unwrap();
        let verts = hk_vertices(&poly).unwrap();
        assert_eq!(verts, vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]);
    }
}
