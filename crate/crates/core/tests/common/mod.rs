#![allow(dead_code)]

use ic3region::channel::{build_modulo_example, validate_channel, ValidatedChannel};
use ic3region::pmf::{build_full_joint, FullJoint, InputPmf};
use ic3region::polytope::{lp_feasible, RatePolyhedron, RowSense};
use ic3region::rational::{rat, Prob};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;

pub fn modulo(q: usize, flip: &str) -> ValidatedChannel {
    validate_channel(build_modulo_example(q, flip.parse::<Prob>().unwrap()).unwrap()).unwrap()
}

pub fn uniform_joint(q: usize, flip: &str) -> FullJoint {
    build_full_joint(&InputPmf::uniform_u_equals_x([q; 3]), &modulo(q, flip)).unwrap()
}

/// Random system over `n` variables: `rows` random rows plus a box
/// `|x_i| ≤ 6`, so it is bounded; coefficients in −3..=3.
pub fn random_system<R: Rng>(rng: &mut R, n: usize, rows: usize) -> RatePolyhedron {
    let mut poly = RatePolyhedron::new((0..n).map(|i| format!("x{i}")).collect());
    for i in 0..n {
        let mut c = vec![rat(0, 1); n];
        c[i] = rat(1, 1);
        poly.push(c.clone(), RowSense::Le, rat(6, 1)).unwrap();
        poly.push(c, RowSense::Ge, rat(-6, 1)).unwrap();
    }
    for _ in 0..rows {
        let c: Vec<BigRational> = (0..n).map(|_| rat(rng.random_range(-3..=3), 1)).collect();
        let sense = if rng.random_bool(0.1) { RowSense::Ge } else { RowSense::Le };
        let rhs = rat(rng.random_range(-2..=8), rng.random_range(1..=3));
        poly.push(c, sense, rhs).unwrap();
    }
    poly
}

/// Whether `point` (over `keep`) extends to a point of `poly`. The point
/// is substituted first; one free variable is decided by intersecting
/// intervals, more by an exact LP over the free variables only.
pub fn lifts(poly: &RatePolyhedron, keep: &[usize], point: &[BigRational]) -> bool {
    let free: Vec<usize> = (0..poly.dim()).filter(|j| !keep.contains(j)).collect();
    let mut rest = RatePolyhedron::new(free.iter().map(|&j| poly.vars[j].clone()).collect());
    for row in &poly.rows {
        let mut rhs = row.rhs.clone();
        for (&j, v) in keep.iter().zip(point) {
            rhs -= &row.coeffs[j] * v;
        }
        rest.push(free.iter().map(|&j| row.coeffs[j].clone()).collect(), row.sense, rhs).unwrap();
    }
    if free.len() == 1 {
        return interval_nonempty(&rest);
    }
    lp_feasible(&rest, None).unwrap()
}

fn interval_nonempty(poly: &RatePolyhedron) -> bool {
    let (mut lo, mut hi): (Option<BigRational>, Option<BigRational>) = (None, None);
    for (a, b) in poly.le_rows() {
        let a = &a[0];
        if a.is_zero() {
            if b.is_negative() {
                return false;
            }
        } else if a.is_positive() {
            let v = b / a;
            hi = Some(hi.map_or(v.clone(), |h| h.min(v)));
        } else {
            let v = b / a;
            lo = Some(lo.map_or(v.clone(), |l| l.max(v)));
        }
    }
    match (lo, hi) {
        (Some(l), Some(h)) => l <= h,
        _ => true,
    }
}

/// Points on a grid of step 1/4 in the box, half of them near projections
/// of actual points of `poly` so both outcomes are exercised.
pub fn sample_points<R: Rng>(rng: &mut R, poly: &RatePolyhedron, keep: &[usize], n: usize) -> Vec<Vec<BigRational>> {
    let anchor = ic3region::polytope::feasible_point(poly).unwrap();
    (0..n)
        .map(|k| match (&anchor, k % 2) {
            (Some(a), 0) => keep.iter().map(|&j| &a[j] + rat(rng.random_range(-4..=4), 4)).collect(),
            _ => keep.iter().map(|_| rat(rng.random_range(-28..=28), 4)).collect(),
        })
        .collect()
}

/// Random feasible system with `rows` rows and no box: every row holds at
/// a random anchor, with slack on inequalities. Each coefficient is nonzero
/// with probability `density`.
pub fn random_open_system<R: Rng>(rng: &mut R, n: usize, rows: usize, density: f64) -> RatePolyhedron {
    let mut poly = RatePolyhedron::new((0..n).map(|i| format!("x{i}")).collect());
    let anchor: Vec<BigRational> = (0..n).map(|_| rat(rng.random_range(-8..=8), 2)).collect();
    for _ in 0..rows {
        let c: Vec<BigRational> = (0..n)
            .map(|_| if rng.random_bool(density) { rat(rng.random_range(-3..=3), 1) } else { rat(0, 1) })
            .collect();
        let at: BigRational = c.iter().zip(&anchor).map(|(a, x)| a * x).sum();
        let slack = rat(rng.random_range(0..=6), rng.random_range(1..=3));
        let (sense, rhs) = match rng.random_range(0..10) {
            0 => (RowSense::Ge, at - slack),
            1 => (RowSense::Eq, at),
            _ => (RowSense::Le, at + slack),
        };
        poly.push(c, sense, rhs).unwrap();
    }
    poly
}
