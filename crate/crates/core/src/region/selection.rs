use std::collections::{HashMap, HashSet};


use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ExactRows, RateSystem};
use crate::constraints::ReceiverSystem;
use crate::channel::USERS;
use crate::constraints::{LinearIneq, Sense};
use crate::pmf::FullJoint;
use crate::error::{Error, Result};
use crate::polytope::{floor_dyadic, RatePolyhedron, Row, RowSense};
use crate::rates::{coord_names, Rate18, RATE_DIM};
use crate::tables::{alternative_count, INTERFERER_ROWS};

/// Bits kept when an evaluated constant enters an exact polyhedron. Upper
/// bounds are rounded down and lower bounds up, so the exact polyhedron is
/// never larger than the true one.
pub const CONSTANT_BITS: i32 = 40;

fn upper(v: f64) -> BigRational {
    floor_dyadic(v, CONSTANT_BITS)
}

fn lower(v: f64) -> BigRational {
    -floor_dyadic(-v, CONSTANT_BITS)
}

/// A resolved choice of `(j', k')` for every receiver and every `(j, k)`,
/// stored as the index into the alternative list (`k'` outer, `j'` inner).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SelectionAssignment {
    choices: [[[u8; INTERFERER_ROWS]; INTERFERER_ROWS]; USERS],
}

fn count(j: usize, k: usize) -> usize {
    alternative_count(j) * alternative_count(k)
}

impl SelectionAssignment {
    pub fn from_fn(f: impl Fn(usize, usize, usize) -> usize) -> Self {
        let choices = std::array::from_fn(|l| std::array::from_fn(|j| std::array::from_fn(|k| f(l, j + 1, k + 1) as u8)));
        SelectionAssignment { choices }
    }

    /// `(j', k') = (1, 1)` everywhere: no interference is resolved.
    pub fn treat_as_noise() -> Self {
        SelectionAssignment::from_fn(|_, _, _| 0)
    }

    /// `(j', k') = (j, k)` everywhere: every unknown layer is resolved.
    pub fn resolve_all() -> Self {
        SelectionAssignment::from_fn(|_, j, k| count(j, k) - 1)
    }

    /// The alternative with the smallest saturation term per `(j, k)`.
    pub fn argmin(system: &RateSystem) -> Self {
        SelectionAssignment::from_fn(|l, j, k| system.receivers[l].argmin[j - 1][k - 1])
    }

    /// The alternative attaining each min at the rate point `r`.
    pub fn pointwise(system: &RateSystem, r: &Rate18) -> Self {
        SelectionAssignment::from_fn(|l, j, k| system.receivers[l].condition(1, j, k).min_alternative(r).0)
    }

    pub fn get(&self, l: usize, j: usize, k: usize) -> usize {
        self.choices[l][j - 1][k - 1] as usize
    }

    pub fn with(&self, l: usize, j: usize, k: usize, alt: usize) -> Self {
        let mut out = *self;
        out.choices[l][j - 1][k - 1] = alt as u8;
        out
    }

    pub fn validate(&self) -> Result<()> {
        for l in 0..USERS {
            for j in 1..=INTERFERER_ROWS {
                for k in 1..=INTERFERER_ROWS {
                    let c = self.get(l, j, k);
                    if c >= count(j, k) {
                        return Err(Error::InvalidSelection(format!(
                            "receiver {} (j,k)=({j},{k}) chooses alternative {} of {}",
                            l + 1,
                            c + 1,
                            count(j, k)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Every assignment differing in exactly one `(l, j, k)`.
    pub fn perturbations(&self) -> Vec<Self> {
        let mut out = Vec::new();
        for l in 0..USERS {
            for j in 1..=INTERFERER_ROWS {
                for k in 1..=INTERFERER_ROWS {
                    for alt in 0..count(j, k) {
                        if alt != self.get(l, j, k) {
                            out.push(self.with(l, j, k, alt));
                        }
                    }
                }
            }
        }
        out
    }

    /// Digits of the chosen alternatives, receivers separated by dots.
    pub fn id(&self) -> String {
        (0..USERS)
            .map(|l| self.choices[l].iter().flatten().map(|c| char::from(b'0' + c)).collect::<String>())
            .collect::<Vec<_>>()
            .join(".")
    }

    pub fn parse(id: &str) -> Result<Self> {
        let bad = || Error::InvalidSelection(format!("malformed selection id `{id}`"));
        let parts: Vec<&str> = id.split('.').collect();
        if parts.len() != USERS || parts.iter().any(|p| p.len() != INTERFERER_ROWS * INTERFERER_ROWS) {
            return Err(bad());
        }
        let mut out = SelectionAssignment::treat_as_noise();
        for (l, p) in parts.iter().enumerate() {
            for (n, ch) in p.chars().enumerate() {
                let d = ch.to_digit(10).ok_or_else(bad)? as usize;
                out = out.with(l, n / INTERFERER_ROWS + 1, n % INTERFERER_ROWS + 1, d);
            }
        }
        out.validate()?;
        Ok(out)
    }

    /// All assignments of receiver `l` (46656), the others held fixed.
    pub fn sweep_receiver(&self, l: usize) -> Vec<Self> {
        let mut out = vec![*self];
        for j in 1..=INTERFERER_ROWS {
            for k in 1..=INTERFERER_ROWS {
                out = out.into_iter().flat_map(|s| (0..count(j, k)).map(move |alt| s.with(l, j, k, alt))).collect();
            }
        }
        out
    }
}

impl Serialize for SelectionAssignment {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.id())
    }
}

impl<'de> Deserialize<'de> for SelectionAssignment {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        SelectionAssignment::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Selections for the exact path: the argmin assignment, its single-choice
/// perturbations, then the two extreme assignments; or, with `full`, a
/// sweep of every receiver's assignments around the argmin.
pub fn candidate_selections(system: &RateSystem, max: usize, full: bool) -> Vec<SelectionAssignment> {
    let base = SelectionAssignment::argmin(system);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut push = |s: SelectionAssignment, out: &mut Vec<SelectionAssignment>| {
        if out.len() < max && seen.insert(s) {
            out.push(s);
        }
    };
    push(base, &mut out);
    if full {
        for l in 0..USERS {
            for s in base.sweep_receiver(l) {
                push(s, &mut out);
            }
        }
    }
    for s in base.perturbations() {
        push(s, &mut out);
    }
    push(SelectionAssignment::treat_as_noise(), &mut out);
    push(SelectionAssignment::resolve_all(), &mut out);
    out
}

/// Constants this close to zero are decided exactly on rational joints.
const ZERO_PROBE: f64 = 1e-9;

/// The evaluated constant of `ineq`, with an exact zero kept at zero so
/// that rounding cannot turn `0 ≤ 0` into a contradiction.
fn constant(ineq: &LinearIneq, joint: &FullJoint) -> f64 {
    let v = ineq.value.expect("evaluated");
    if v.abs() < ZERO_PROBE && joint.is_exact() && ineq.constant.evaluate_exact(joint).ok().flatten().is_some_and(|e| e.is_zero()) {
        return 0.0;
    }
    v
}

pub(super) fn exact_rows(receivers: &[ReceiverSystem], joint: &FullJoint) -> ExactRows {
    let mut marton = Vec::new();
    for rx in receivers {
        for m in &rx.marton {
            let v = constant(m, joint);
            let coeffs = m.coeffs.coeffs().to_vec();
            match m.sense {
                Sense::Le => marton.push((coeffs, upper(v))),
                Sense::Ge => marton.push((coeffs.iter().map(|c| -c).collect(), -lower(v))),
            }
        }
    }
    let conditions = receivers
        .iter()
        .map(|rx| {
            rx.conditions
                .iter()
                .map(|c| {
                    (0..c.alternatives.len())
                        .map(|n| {
                            let ineq = c.with_alternative(n);
                            (ineq.coeffs.coeffs().to_vec(), upper(constant(&ineq, joint)))
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    ExactRows { marton, conditions }
}

/// `A x ≤ b` rows for `sel`, without nonnegativity and with exact
/// duplicates merged (keeping the tightest constant).
pub(super) fn selected_rows(system: &RateSystem, sel: &SelectionAssignment) -> Vec<(Vec<BigRational>, BigRational)> {
    let mut out: Vec<(Vec<BigRational>, BigRational)> = system.rows.marton.clone();
    let mut seen: HashMap<&[BigRational], usize> = HashMap::new();
    for (l, rx) in system.receivers.iter().enumerate() {
        for (n, c) in rx.conditions.iter().enumerate() {
            let (coeffs, rhs) = &system.rows.conditions[l][n][sel.get(l, c.j, c.k)];
            match seen.get(coeffs.as_slice()) {
                Some(&i) => {
                    if *rhs < out[i].1 {
                        out[i].1 = rhs.clone();
                    }
                }
                None => {
                    seen.insert(coeffs, out.len());
                    out.push((coeffs.clone(), rhs.clone()));
                }
            }
        }
    }
    out
}

/// The 18-dimensional polyhedron with every existential resolved by `sel`.
pub fn polyhedron_for_selection(system: &RateSystem, sel: &SelectionAssignment) -> Result<RatePolyhedron> {
    sel.validate()?;
    let mut poly = RatePolyhedron::new(coord_names());
    poly.push_nonnegativity();
    for (coeffs, rhs) in selected_rows(system, sel) {
        poly.rows.push(Row { coeffs, sense: RowSense::Le, rhs });
    }
    debug_assert_eq!(poly.dim(), RATE_DIM);
    Ok(poly)
}
