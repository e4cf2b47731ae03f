//! The 18 split-rate coordinates and linear forms over them.

use std::fmt;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::channel::USERS;
use crate::error::{Error, Result};
use crate::rational::{rat_to_f64, rat_to_string};

pub const RATE_DIM: usize = 18;

/// One split rate of sender `l` (zero-based).
///
/// The fixed ordering is, per sender `l` with `b = l+1`, `c = l+2` (mod 3):
/// `R_l0, R_ll, R_lb, R_lc, R~_lb, R~_lc`, which reproduces
/// `R10 R11 R12 R13 R~12 R~13 R20 R22 R23 R21 R~23 R~21 R30 R33 R31 R32 R~31 R~32`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RateCoord {
    Common(usize),
    Private(usize),
    /// `R_{lk}`, the part of sender `l`'s message carried towards receiver `k`
    Split(usize, usize),
    /// `R~_{lk}`, the Marton auxiliary rate
    Aux(usize, usize),
}

impl RateCoord {
    pub fn all() -> [RateCoord; RATE_DIM] {
        std::array::from_fn(RateCoord::from_index)
    }

    pub fn from_index(i: usize) -> RateCoord {
        let l = i / 6;
        let (b, c) = ((l + 1) % USERS, (l + 2) % USERS);
        match i % 6 {
            0 => RateCoord::Common(l),
            1 => RateCoord::Private(l),
            2 => RateCoord::Split(l, b),
            3 => RateCoord::Split(l, c),
            4 => RateCoord::Aux(l, b),
            _ => RateCoord::Aux(l, c),
        }
    }

    pub fn index(self) -> usize {
        let offset = |l: usize, k: usize| if k == (l + 1) % USERS { 0 } else { 1 };
        match self {
            RateCoord::Common(l) => 6 * l,
            RateCoord::Private(l) => 6 * l + 1,
            RateCoord::Split(l, k) => 6 * l + 2 + offset(l, k),
            RateCoord::Aux(l, k) => 6 * l + 4 + offset(l, k),
        }
    }

    pub fn sender(self) -> usize {
        match self {
            RateCoord::Common(l) | RateCoord::Private(l) | RateCoord::Split(l, _) | RateCoord::Aux(l, _) => l,
        }
    }

    /// Counts towards the total rate `R_l` (everything except auxiliaries).
    pub fn is_message_part(self) -> bool {
        !matches!(self, RateCoord::Aux(..))
    }

    /// ASCII name used in files: `R10`, `R11`, `R12`, `Rt12`.
    pub fn name(self) -> String {
        match self {
            RateCoord::Common(l) => format!("R{}0", l + 1),
            RateCoord::Private(l) => format!("R{}{}", l + 1, l + 1),
            RateCoord::Split(l, k) => format!("R{}{}", l + 1, k + 1),
            RateCoord::Aux(l, k) => format!("Rt{}{}", l + 1, k + 1),
        }
    }

    /// Name with a combining tilde for auxiliaries: `R̃12`.
    pub fn pretty(self) -> String {
        match self {
            RateCoord::Aux(l, k) => format!("R\u{303}{}{}", l + 1, k + 1),
            other => other.name(),
        }
    }

    pub fn parse(name: &str) -> Result<RateCoord> {
        RateCoord::all()
            .into_iter()
            .find(|c| c.name() == name || c.pretty() == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }
}

impl fmt::Display for RateCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

pub fn coord_names() -> Vec<String> {
    RateCoord::all().iter().map(|c| c.name()).collect()
}

/// A point in the 18-dimensional split-rate space (bits per channel use).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rate18(pub [f64; RATE_DIM]);

impl Rate18 {
    pub fn zero() -> Self {
        Rate18([0.0; RATE_DIM])
    }

    pub fn get(&self, c: RateCoord) -> f64 {
        self.0[c.index()]
    }

    pub fn set(&mut self, c: RateCoord, v: f64) {
        self.0[c.index()] = v;
    }

    /// `(R1, R2, R3)` with `R_l = R_l0 + R_ll + R_lm + R_ln`.
    pub fn totals(&self) -> [f64; USERS] {
        let mut out = [0.0; USERS];
        for c in RateCoord::all() {
            if c.is_message_part() {
                out[c.sender()] += self.get(c);
            }
        }
        out
    }

    pub fn from_rationals(values: &[BigRational]) -> Self {
        Rate18(std::array::from_fn(|i| rat_to_f64(&values[i])))
    }
}

/// Rational coefficients over the 18 coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RateVec(Vec<BigRational>);

impl RateVec {
    pub fn zero() -> Self {
        RateVec(vec![BigRational::zero(); RATE_DIM])
    }

    pub fn unit(c: RateCoord) -> Self {
        RateVec::zero().plus(c, BigRational::from_integer(1.into()))
    }

    pub fn sum_of(coords: &[RateCoord]) -> Self {
        coords.iter().fold(RateVec::zero(), |acc, &c| acc.plus(c, BigRational::from_integer(1.into())))
    }

    pub fn plus(mut self, c: RateCoord, w: BigRational) -> Self {
        self.0[c.index()] += w;
        self
    }

    pub fn add(&self, other: &RateVec) -> RateVec {
        RateVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn coeff(&self, c: RateCoord) -> &BigRational {
        &self.0[c.index()]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn dot(&self, r: &Rate18) -> f64 {
        self.0.iter().zip(r.0.iter()).filter(|(a, _)| !a.is_zero()).map(|(a, x)| a.to_f64().unwrap() * x).sum()
    }

    /// Nonzero coefficients keyed by coordinate name.
    pub fn named(&self) -> std::collections::BTreeMap<String, String> {
        RateCoord::all()
            .iter()
            .filter(|c| !self.coeff(**c).is_zero())
            .map(|c| (c.name(), rat_to_string(self.coeff(*c))))
            .collect()
    }

    /// Sum rendered in the usual notation, e.g. `R20 + R̃21`, or `0`.
    pub fn pretty(&self) -> String {
        let mut parts = Vec::new();
        for c in RateCoord::all() {
            let w = self.coeff(c);
            if w.is_zero() {
                continue;
            }
            let one = BigRational::from_integer(1.into());
            let term = if *w == one {
                c.pretty()
            } else if *w == -one {
                format!("-{}", c.pretty())
            } else {
                format!("{}·{}", rat_to_string(w), c.pretty())
            };
            parts.push(term);
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ").replace("+ -", "- ")
        }
    }
}

impl Serialize for RateVec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.named().serialize(serializer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_matches_the_published_vector() {
        let names: Vec<String> = RateCoord::all().iter().map(|c| c.name()).collect();
        assert_eq!(
            names,
            [
                "R10", "R11", "R12", "R13", "Rt12", "Rt13", "R20", "R22", "R23", "R21", "Rt23", "Rt21", "R30", "R33",
                "R31", "R32", "Rt31", "Rt32"
            ]
        );
        for (i, c) in RateCoord::all().into_iter().enumerate() {
            assert_eq!(c.index(), i);
            assert_eq!(RateCoord::parse(&c.name()).unwrap(), c);
            assert_eq!(RateCoord::parse(&c.pretty()).unwrap(), c);
        }
    }

    #[test]
    fn totals_skip_auxiliaries() {
        let mut r = Rate18::zero();
        r.set(RateCoord::Common(1), 0.5);
        r.set(RateCoord::Split(1, 0), 0.25);
        r.set(RateCoord::Aux(1, 0), 9.0);
        assert_eq!(r.totals(), [0.0, 0.75, 0.0]);
        let v = RateVec::sum_of(&[RateCoord::Common(1), RateCoord::Aux(1, 0)]);
        assert_eq!(v.pretty(), "R20 + R\u{303}21");
        assert_eq!(v.dot(&r), 9.5);
    }
}
