use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::USERS;

/// `n` unit directions in the nonnegative orthant of the first `dims`
/// coordinates (2 or 3): the axes and the diagonal first, then seeded
/// uniform draws on the sphere folded into the orthant.
pub fn sample_directions(n: usize, dims: usize, seed: u64) -> Vec<[f64; USERS]> {
    let dims = dims.clamp(1, USERS);
    let mut out: Vec<[f64; USERS]> = Vec::with_capacity(n);
    for axis in 0..dims {
        let mut d = [0.0; USERS];
        d[axis] = 1.0;
        out.push(d);
    }
    let mut diag = [0.0; USERS];
    for v in diag.iter_mut().take(dims) {
        *v = 1.0 / (dims as f64).sqrt();
    }
    if dims > 1 {
        out.push(diag);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < n {
        let mut d = [0.0; USERS];
        for v in d.iter_mut().take(dims) {
            // |N(0,1)| via Box–Muller
            let (u1, u2): (f64, f64) = (rng.random::<f64>().max(f64::MIN_POSITIVE), rng.random());
            *v = ((-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()).abs();
        }
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-6 {
            out.push(d.map(|v| v / norm));
        }
    }
    out.truncate(n);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionReport {
    pub directions: usize,
    /// `min_d (h_B(d) − h_A(d))`: negative when A sticks out of B.
    pub deficit_a_in_b: f64,
    /// `min_d (h_A(d) − h_B(d))`.
    pub deficit_b_in_a: f64,
    pub worst_a_in_b: [f64; USERS],
    pub worst_b_in_a: [f64; USERS],
}

impl InclusionReport {
    pub fn a_in_b(&self, tol: f64) -> bool {
        self.deficit_a_in_b >= -tol
    }

    pub fn b_in_a(&self, tol: f64) -> bool {
        self.deficit_b_in_a >= -tol
    }

    /// Largest one-sided gap between the two support functions.
    pub fn mutual_deficit(&self) -> f64 {
        (-self.deficit_a_in_b).max(-self.deficit_b_in_a).max(0.0)
    }
}

/// Compares two convex sets through their support functions `h_a`, `h_b`
/// along `directions`.
pub fn compare_regions<A, B>(h_a: A, h_b: B, directions: &[[f64; USERS]]) -> InclusionReport
where
    A: Fn(&[f64; USERS]) -> f64,
    B: Fn(&[f64; USERS]) -> f64,
{
    let mut report = InclusionReport {
        directions: directions.len(),
        deficit_a_in_b: f64::INFINITY,
        deficit_b_in_a: f64::INFINITY,
        worst_a_in_b: [0.0; USERS],
        worst_b_in_a: [0.0; USERS],
    };
    for d in directions {
        let (a, b) = (h_a(d), h_b(d));
        if b - a < report.deficit_a_in_b {
            report.deficit_a_in_b = b - a;
            report.worst_a_in_b = *d;
        }
        if a - b < report.deficit_b_in_a {
            report.deficit_b_in_a = a - b;
            report.worst_b_in_a = *d;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_are_deterministic_units() {
        let a = sample_directions(64, 3, 9);
        assert_eq!(a, sample_directions(64, 3, 9));
        assert_ne!(a, sample_directions(64, 3, 10));
        assert_eq!(a.len(), 64);
        for d in &a {
            assert!(d.iter().all(|v| *v >= 0.0));
            assert!((d.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(sample_directions(10, 2, 1).iter().all(|d| d[2] == 0.0));
    }

    #[test]
    fn equal_sets_have_zero_deficit() {
        let h = |d: &[f64; USERS]| d[0] + 2.0 * d[1];
        let r = compare_regions(h, h, &sample_directions(16, 3, 1));
        assert_eq!(r.mutual_deficit(), 0.0);
        let smaller = |d: &[f64; USERS]| 0.5 * d[0] + 2.0 * d[1];
        let r = compare_regions(smaller, h, &sample_directions(16, 3, 1));
        assert!(r.a_in_b(0.0) && !r.b_in_a(1e-3));
    }
}
