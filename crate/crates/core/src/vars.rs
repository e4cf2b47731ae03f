//! Named random variables of the full joint and ordered sets of them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::USERS;
use crate::error::{Error, Result};

/// One coordinate of the full joint distribution (user indices zero-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Q,
    U(usize),
    X(usize),
    /// `X_{lk}`: what sender `l` delivers to receiver `k`
    Link(usize, usize),
    S(usize),
    /// `S'_l`
    SNoisy(usize),
    Y(usize),
}

impl Var {
    fn users(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            Var::Q => (None, None),
            Var::U(l) | Var::X(l) | Var::S(l) | Var::SNoisy(l) | Var::Y(l) => (Some(l), None),
            Var::Link(l, k) => (Some(l), Some(k)),
        };
        a.into_iter().chain(b)
    }

    pub fn is_valid(&self) -> bool {
        self.users().all(|l| l < USERS)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Var::Q => f.write_str("Q"),
            Var::U(l) => write!(f, "U{}", l + 1),
            Var::X(l) => write!(f, "X{}", l + 1),
            Var::Link(l, k) => write!(f, "X{}{}", l + 1, k + 1),
            Var::S(l) => write!(f, "S{}", l + 1),
            Var::SNoisy(l) => write!(f, "S{}'", l + 1),
            Var::Y(l) => write!(f, "Y{}", l + 1),
        }
    }
}

impl FromStr for Var {
    type Err = Error;
    fn from_str(s: &str) -> Result<Var> {
        let unknown = || Error::UnknownVariable(s.to_string());
        if s == "Q" {
            return Ok(Var::Q);
        }
        let digit = |c: char| c.to_digit(10).map(|d| d as usize).filter(|&d| (1..=USERS).contains(&d)).map(|d| d - 1);
        let mut chars = s.chars();
        let head = chars.next().ok_or_else(unknown)?;
        let rest: Vec<char> = chars.collect();
        let var = match (head, rest.as_slice()) {
            ('U', [a]) => Var::U(digit(*a).ok_or_else(unknown)?),
            ('X', [a]) => Var::X(digit(*a).ok_or_else(unknown)?),
            ('X', [a, b]) => Var::Link(digit(*a).ok_or_else(unknown)?, digit(*b).ok_or_else(unknown)?),
            ('S', [a]) => Var::S(digit(*a).ok_or_else(unknown)?),
            ('S', [a, '\'']) => Var::SNoisy(digit(*a).ok_or_else(unknown)?),
            ('Y', [a]) => Var::Y(digit(*a).ok_or_else(unknown)?),
            _ => return Err(unknown()),
        };
        Ok(var)
    }
}

impl Serialize for Var {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Var {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A canonical (sorted, duplicate-free) set of variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarSet(Vec<Var>);

impl VarSet {
    pub fn empty() -> Self {
        VarSet(Vec::new())
    }

    /// Builds a set, rejecting duplicates and out-of-range indices.
    pub fn new(vars: impl IntoIterator<Item = Var>) -> Result<Self> {
        let mut v: Vec<Var> = vars.into_iter().collect();
        if let Some(bad) = v.iter().find(|x| !x.is_valid()) {
            return Err(Error::UnknownVariable(format!("{bad:?}")));
        }
        v.sort();
        if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::OverlappingSets(w[0].to_string()));
        }
        Ok(VarSet(v))
    }

    /// Builds a set, silently merging duplicates.
    pub fn of(vars: impl IntoIterator<Item = Var>) -> Self {
        let mut v: Vec<Var> = vars.into_iter().collect();
        v.sort();
        v.dedup();
        VarSet(v)
    }

    pub fn parse_list(names: &[&str]) -> Result<Self> {
        let vars = names.iter().map(|n| n.parse()).collect::<Result<Vec<Var>>>()?;
        VarSet::new(vars)
    }

    pub fn vars(&self) -> &[Var] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Var) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        VarSet::of(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn with(&self, v: Var) -> VarSet {
        VarSet::of(self.0.iter().copied().chain(std::iter::once(v)))
    }

    pub fn minus(&self, other: &VarSet) -> VarSet {
        VarSet(self.0.iter().copied().filter(|v| !other.contains(*v)).collect())
    }

    pub fn intersection(&self, other: &VarSet) -> VarSet {
        VarSet(self.0.iter().copied().filter(|v| other.contains(*v)).collect())
    }

    pub fn is_disjoint(&self, other: &VarSet) -> bool {
        self.intersection(other).is_empty()
    }
}

impl FromIterator<Var> for VarSet {
    fn from_iter<T: IntoIterator<Item = Var>>(iter: T) -> Self {
        VarSet::of(iter)
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("∅");
        }
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        let all = [Var::Q, Var::U(0), Var::X(2), Var::Link(1, 0), Var::S(2), Var::SNoisy(0), Var::Y(1)];
        for v in all {
            assert_eq!(v.to_string().parse::<Var>().unwrap(), v);
        }
        assert_eq!(Var::SNoisy(0).to_string(), "S1'");
        assert_eq!(Var::Link(0, 2).to_string(), "X13");
        assert!("X4".parse::<Var>().is_err());
        assert!("Z13".parse::<Var>().is_err());
    }

    #[test]
    fn sets_are_canonical() {
        let a = VarSet::parse_list(&["X13", "U1"]).unwrap();
        let b = VarSet::parse_list(&["U1", "X13"]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "U1,X13");
        assert!(VarSet::parse_list(&["U1", "U1"]).is_err());
        assert_eq!(VarSet::empty().to_string(), "∅");
        assert_eq!(a.minus(&VarSet::of([Var::U(0)])), VarSet::of([Var::Link(0, 2)]));
    }
}
