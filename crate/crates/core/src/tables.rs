//! Shorthand tables for the decoding conditions at one receiver.
//!
//! Everything is written once for receiver 1 and renamed for the others:
//! receiver `l` plays the role of receiver 1, sender `l+1` (mod 3) the role
//! of sender 2 and sender `l+2` the role of sender 3. This reproduces the
//! renamings `1↦2↦3↦1` for receiver 2 and `1↦3↦2↦1` for receiver 3.

use crate::channel::USERS;
use crate::error::{Error, Result};
use crate::rates::{RateCoord, RateVec};
use crate::vars::{Var, VarSet};

pub const OWN_ROWS: usize = 5;
pub const INTERFERER_ROWS: usize = 3;

/// Which interfering sender a table describes, relative to the receiver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    /// sender `l+1`, described by the second table
    First,
    /// sender `l+2`, described by the third table
    Second,
}

impl Role {
    pub fn sender(self, receiver: usize) -> usize {
        match self {
            Role::First => (receiver + 1) % USERS,
            Role::Second => (receiver + 2) % USERS,
        }
    }
}

/// One table row: a rate sum, a conditioning set (without `Q`), and whether
/// the Marton penalty `I(X_lb; X_lc | U_l, Q)` is added to the bound.
#[derive(Clone, Debug, PartialEq)]
pub struct TableEntry {
    pub rate: RateVec,
    pub set: VarSet,
    pub penalty: bool,
}

/// Number of alternatives `j'` available for row `j` of an interferer table.
pub fn alternative_count(j: usize) -> usize {
    j
}

/// Row `i ∈ 1..=5` of the own-sender table at `receiver`.
pub fn own_row(receiver: usize, i: usize) -> Result<TableEntry> {
    let a = receiver;
    let (b, c) = ((a + 1) % USERS, (a + 2) % USERS);
    let (private, common) = (RateCoord::Private(a), RateCoord::Common(a));
    let (aux_b, aux_c) = (RateCoord::Aux(a, b), RateCoord::Aux(a, c));
    let (u, xb, xc) = (Var::U(a), Var::Link(a, b), Var::Link(a, c));
    let (coords, set, penalty): (Vec<RateCoord>, Vec<Var>, bool) = match i {
        1 => (vec![private], vec![u, xb, xc], false),
        2 => (vec![aux_b, private], vec![u, xc], true),
        3 => (vec![aux_c, private], vec![u, xb], true),
        4 => (vec![aux_b, aux_c, private], vec![u], true),
        5 => (vec![common, aux_b, aux_c, private], vec![], true),
        _ => return Err(Error::IndexOutOfRange { what: "own-sender table row".into(), index: i }),
    };
    Ok(TableEntry { rate: RateVec::sum_of(&coords), set: VarSet::of(set), penalty })
}

/// Layer levels of an interfering codebook: nothing, the cloud `U`, the
/// satellite `X`.
fn level_set(sender: usize, level: usize) -> VarSet {
    match level {
        0 => VarSet::empty(),
        1 => VarSet::of([Var::U(sender)]),
        _ => VarSet::of([Var::X(sender)]),
    }
}

/// Conditioning set `c_{·j}` of row `j ∈ 1..=3` for an interferer.
pub fn interferer_known(role: Role, receiver: usize, j: usize) -> Result<VarSet> {
    if !(1..=INTERFERER_ROWS).contains(&j) {
        return Err(Error::IndexOutOfRange { what: "interferer table row".into(), index: j });
    }
    Ok(level_set(role.sender(receiver), INTERFERER_ROWS - j))
}

/// Alternative `j' ∈ 1..=j` of row `j`: the extra interfering rate counted
/// and the set `c_{·j'}` it resolves.
pub fn interferer_alt(role: Role, receiver: usize, j: usize, alt: usize) -> Result<TableEntry> {
    if !(1..=INTERFERER_ROWS).contains(&j) {
        return Err(Error::IndexOutOfRange { what: "interferer table row".into(), index: j });
    }
    if !(1..=alternative_count(j)).contains(&alt) {
        return Err(Error::IndexOutOfRange { what: format!("alternative for row {j}"), index: alt });
    }
    let sender = role.sender(receiver);
    let known = INTERFERER_ROWS - j;
    let resolved = known + alt - 1;
    let mut coords = Vec::new();
    if known < 1 && resolved >= 1 {
        coords.push(RateCoord::Common(sender));
    }
    if known < 2 && resolved >= 2 {
        coords.push(RateCoord::Aux(sender, receiver));
    }
    Ok(TableEntry { rate: RateVec::sum_of(&coords), set: level_set(sender, resolved), penalty: false })
}

/// Table lookup by number: `which = 1` returns own row `index` (and ignores
/// `alt`); `which = 2 | 3` returns alternative `alt` of interferer row `index`.
pub fn table_row(which: usize, receiver: usize, index: usize, alt: usize) -> Result<TableEntry> {
    match which {
        1 => own_row(receiver, index),
        2 => interferer_alt(Role::First, receiver, index, alt),
        3 => interferer_alt(Role::Second, receiver, index, alt),
        _ => Err(Error::IndexOutOfRange { what: "table".into(), index: which }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(names: &[&str]) -> VarSet {
        VarSet::parse_list(names).unwrap()
    }

    #[test]
    fn own_table_rows_for_receiver_one() {
        let r1 = table_row(1, 0, 1, 0).unwrap();
        assert_eq!(r1.rate.pretty(), "R11");
        assert_eq!(r1.set, set(&["U1", "X12", "X13"]));
        assert!(!r1.penalty);
        let r4 = table_row(1, 0, 4, 0).unwrap();
        assert_eq!(r4.rate.pretty(), "R11 + R\u{303}12 + R\u{303}13");
        assert_eq!(r4.set, set(&["U1"]));
        assert!(r4.penalty);
        let r5 = table_row(1, 0, 5, 0).unwrap();
        assert_eq!(r5.rate.pretty(), "R10 + R11 + R\u{303}12 + R\u{303}13");
        assert!(r5.set.is_empty());
        assert!(table_row(1, 0, 6, 0).is_err());
    }

    #[test]
    fn interferer_tables_for_receiver_one() {
        let e = table_row(2, 0, 3, 2).unwrap();
        assert_eq!((e.rate.pretty(), e.set.clone()), ("R20".to_string(), set(&["U2"])));
        let e = table_row(3, 0, 2, 2).unwrap();
        assert_eq!((e.rate.pretty(), e.set.clone()), ("R\u{303}31".to_string(), set(&["X3"])));
        let e = table_row(2, 0, 3, 3).unwrap();
        assert_eq!(e.rate.pretty(), "R20 + R\u{303}21");
        assert_eq!(e.set, set(&["X2"]));
        for j in 1..=3 {
            let first = interferer_alt(Role::First, 0, j, 1).unwrap();
            assert!(first.rate.is_zero());
            assert_eq!(first.set, interferer_known(Role::First, 0, j).unwrap());
        }
        assert_eq!(interferer_known(Role::Second, 0, 1).unwrap(), set(&["X3"]));
        assert!(interferer_alt(Role::First, 0, 2, 3).is_err());
        assert!(interferer_known(Role::First, 0, 4).is_err());
    }

    #[test]
    fn renaming_for_other_receivers() {
        // receiver 2: 1↦2, 2↦3, 3↦1
        let r = own_row(1, 2).unwrap();
        assert_eq!(r.rate.pretty(), "R22 + R\u{303}23");
        assert_eq!(r.set, set(&["U2", "X21"]));
        let e = interferer_alt(Role::First, 1, 3, 3).unwrap();
        assert_eq!(e.rate.pretty(), "R30 + R\u{303}32");
        let e = interferer_alt(Role::Second, 1, 2, 2).unwrap();
        assert_eq!(e.rate.pretty(), "R\u{303}12");
        // receiver 3: 1↦3, 3↦2, 2↦1
        let r = own_row(2, 3).unwrap();
        assert_eq!(r.rate.pretty(), "R33 + R\u{303}32");
        assert_eq!(r.set, set(&["U3", "X31"]));
        let e = interferer_alt(Role::First, 2, 3, 2).unwrap();
        assert_eq!((e.rate.pretty(), e.set), ("R10".to_string(), set(&["U1"])));
        let e = interferer_alt(Role::Second, 2, 2, 2).unwrap();
        assert_eq!(e.rate.pretty(), "R\u{303}23");
    }
}
