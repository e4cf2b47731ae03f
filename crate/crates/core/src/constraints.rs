//! The split-rate constraint system: excess-rate constraints per transmitter
//! and the indexed min-conditions per receiver.

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::channel::USERS;
use crate::error::Result;
use crate::logform::LogForm;
use crate::pmf::FullJoint;
use crate::rates::{Rate18, RateCoord, RateVec};
use crate::rational::rat;
use crate::tables::{alternative_count, interferer_alt, interferer_known, own_row, Role, INTERFERER_ROWS, OWN_ROWS};
use crate::vars::{Var, VarSet};

/// Conditions per receiver: `5 · 3 · 3`.
pub const CONDITIONS_PER_RECEIVER: usize = OWN_ROWS * INTERFERER_ROWS * INTERFERER_ROWS;

/// A single information quantity over the full joint.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum InfoTerm {
    /// `H(A | C)`
    Entropy { a: VarSet, given: VarSet },
    /// `I(A; B | C)`
    Mutual { a: VarSet, b: VarSet, given: VarSet },
}

impl InfoTerm {
    pub fn entropy(a: VarSet, given: VarSet) -> Self {
        InfoTerm::Entropy { a, given }
    }

    pub fn mutual(a: VarSet, b: VarSet, given: VarSet) -> Self {
        InfoTerm::Mutual { a, b, given }
    }

    pub fn evaluate(&self, joint: &FullJoint) -> Result<f64> {
        match self {
            InfoTerm::Entropy { a, given } => joint.cond_entropy(a, given),
            InfoTerm::Mutual { a, b, given } => joint.cond_mutual_info(a, b, given),
        }
    }

    pub fn evaluate_exact(&self, joint: &FullJoint) -> Result<Option<LogForm>> {
        match self {
            InfoTerm::Entropy { a, given } => joint.cond_entropy_exact(a, given),
            InfoTerm::Mutual { a, b, given } => joint.cond_mutual_info_exact(a, b, given),
        }
    }
}

impl fmt::Display for InfoTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (head, given) = match self {
            InfoTerm::Entropy { a, given } => (format!("H({a}"), given),
            InfoTerm::Mutual { a, b, given } => (format!("I({a};{b}"), given),
        };
        if given.is_empty() {
            write!(f, "{head})")
        } else {
            write!(f, "{head}|{given})")
        }
    }
}

/// Integer combination of information terms; the empty sum is zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct InfoExpr(pub Vec<(i64, InfoTerm)>);

impl InfoExpr {
    pub fn zero() -> Self {
        InfoExpr(Vec::new())
    }

    pub fn term(t: InfoTerm) -> Self {
        InfoExpr(vec![(1, t)])
    }

    pub fn plus(mut self, other: InfoExpr) -> Self {
        self.0.extend(other.0);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn evaluate(&self, joint: &FullJoint) -> Result<f64> {
        let mut total = 0.0;
        for (c, t) in &self.0 {
            total += *c as f64 * t.evaluate(joint)?;
        }
        Ok(total)
    }

    pub fn evaluate_exact(&self, joint: &FullJoint) -> Result<Option<LogForm>> {
        let mut out = LogForm::zero();
        for (c, t) in &self.0 {
            match t.evaluate_exact(joint)? {
                Some(v) => out.add_scaled(&v, *c),
                None => return Ok(None),
            }
        }
        Ok(Some(out))
    }
}

impl fmt::Display for InfoExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        for (n, (c, t)) in self.0.iter().enumerate() {
            match (n, *c) {
                (0, 1) => write!(f, "{t}")?,
                (0, -1) => write!(f, "-{t}")?,
                (0, c) => write!(f, "{c}·{t}")?,
                (_, 1) => write!(f, " + {t}")?,
                (_, -1) => write!(f, " - {t}")?,
                (_, c) if c < 0 => write!(f, " - {}·{t}", -c)?,
                (_, c) => write!(f, " + {c}·{t}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for InfoExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
}

impl Serialize for Sense {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
        })
    }
}

/// `coeffs · r  (≤ | ≥)  constant`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearIneq {
    pub label: String,
    pub coeffs: RateVec,
    pub sense: Sense,
    pub constant: InfoExpr,
    /// The constant evaluated on a joint, once known.
    pub value: Option<f64>,
}

impl LinearIneq {
    pub fn evaluated(mut self, joint: &FullJoint) -> Result<Self> {
        self.value = Some(self.constant.evaluate(joint)?);
        Ok(self)
    }

    /// Signed slack, nonnegative when satisfied. Panics if unevaluated.
    pub fn slack(&self, r: &Rate18) -> f64 {
        let value = self.value.expect("constant not evaluated");
        let lhs = self.coeffs.dot(r);
        match self.sense {
            Sense::Le => value - lhs,
            Sense::Ge => lhs - value,
        }
    }

    /// Normalized to `coeffs · r ≤ value` with rational coefficients.
    pub fn as_le(&self) -> (Vec<BigRational>, f64) {
        let value = self.value.expect("constant not evaluated");
        match self.sense {
            Sense::Le => (self.coeffs.coeffs().to_vec(), value),
            Sense::Ge => (self.coeffs.coeffs().iter().map(|c| -c).collect(), -value),
        }
    }

    pub fn render(&self) -> String {
        let sense = match self.sense {
            Sense::Le => "≤",
            Sense::Ge => "≥",
        };
        format!("{} {sense} {}", self.coeffs.pretty(), self.constant)
    }
}

/// `I(X_lb; X_lc | U_l, Q)` for transmitter `l`.
pub fn marton_penalty(l: usize) -> InfoTerm {
    let (b, c) = ((l + 1) % USERS, (l + 2) % USERS);
    InfoTerm::mutual(VarSet::of([Var::Link(l, b)]), VarSet::of([Var::Link(l, c)]), VarSet::of([Var::U(l), Var::Q]))
}

/// The five excess-rate constraints of transmitter `l` (constants symbolic).
pub fn marton_system(l: usize) -> Vec<LinearIneq> {
    let (b, c) = ((l + 1) % USERS, (l + 2) % USERS);
    let one = rat(1, 1);
    let half = rat(1, 2);
    let excess = |wb: &BigRational, wc: &BigRational| {
        RateVec::zero()
            .plus(RateCoord::Aux(l, b), wb.clone())
            .plus(RateCoord::Split(l, b), -wb.clone())
            .plus(RateCoord::Aux(l, c), wc.clone())
            .plus(RateCoord::Split(l, c), -wc.clone())
    };
    let penalty = InfoExpr::term(marton_penalty(l));
    let tx = l + 1;
    let ineq = |label: String, coeffs: RateVec, sense: Sense, constant: InfoExpr| LinearIneq {
        label,
        coeffs,
        sense,
        constant,
        value: None,
    };
    vec![
        ineq(format!("excess-sum[{tx}]"), excess(&one, &one), Sense::Ge, penalty.clone()),
        ineq(format!("excess-cap-{}[{tx}]", b + 1), excess(&one, &half), Sense::Le, penalty.clone()),
        ineq(format!("excess-cap-{}[{tx}]", c + 1), excess(&half, &one), Sense::Le, penalty),
        ineq(format!("aux-ge-split-{}[{tx}]", b + 1), excess(&one, &BigRational::zero()), Sense::Ge, InfoExpr::zero()),
        ineq(format!("aux-ge-split-{}[{tx}]", c + 1), excess(&BigRational::zero(), &one), Sense::Ge, InfoExpr::zero()),
    ]
}

/// Which quantity plays the role of the saturation term of an alternative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TermVariant {
    /// `I(S_l; S'_l | c_j', c_k', Q)`
    #[default]
    Noisy,
    /// `H(X_bl | c_j', Q) + H(X_cl | c_k', Q)`, the separate-interferer
    /// bound used for deterministic channels before the joint term.
    Separate,
}

/// One `(j', k')` choice of a min-condition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Alternative {
    pub j_alt: usize,
    pub k_alt: usize,
    /// `r_{·j'} + r_{·k'}`
    pub rate: RateVec,
    pub set_first: VarSet,
    pub set_second: VarSet,
    pub term: InfoExpr,
    pub term_value: f64,
}

impl Alternative {
    pub fn conditioning(&self) -> VarSet {
        self.set_first.union(&self.set_second).with(Var::Q)
    }
}

/// One indexed condition: `r_i + min_alt (rate_alt + term_alt) ≤ rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinCondition {
    pub receiver: usize,
    pub i: usize,
    pub j: usize,
    pub k: usize,
    /// `r_{li}`
    pub base: RateVec,
    pub own_set: VarSet,
    pub known_first: VarSet,
    pub known_second: VarSet,
    pub penalty: bool,
    pub rhs_expr: InfoExpr,
    pub rhs: f64,
    pub alternatives: Vec<Alternative>,
}

/// `(X_1, X_2, X_3) \ C`
fn inputs_outside(c: &VarSet) -> VarSet {
    VarSet::of((0..USERS).map(Var::X)).minus(c)
}

impl MinCondition {
    /// `c_i ∪ c_j ∪ c_k ∪ {Q}`
    pub fn conditioning(&self) -> VarSet {
        self.own_set.union(&self.known_first).union(&self.known_second).with(Var::Q)
    }

    /// Index of the alternative attaining the min at `r` and the min value;
    /// ties go to the smallest `(j', k')`.
    pub fn min_alternative(&self, r: &Rate18) -> (usize, f64) {
        let mut best: Option<(usize, f64)> = None;
        for (n, a) in self.alternatives.iter().enumerate() {
            let v = a.rate.dot(r) + a.term_value;
            let better = match best {
                None => true,
                Some((m, bv)) => {
                    v < bv - 1e-15 || (v <= bv + 1e-15 && (a.j_alt, a.k_alt) < (self.alternatives[m].j_alt, self.alternatives[m].k_alt))
                }
            };
            if better {
                best = Some((n, v));
            }
        }
        best.expect("condition without alternatives")
    }

    /// `rhs − r_i(r) − min`, nonnegative when satisfied.
    pub fn slack(&self, r: &Rate18) -> f64 {
        self.rhs - self.base.dot(r) - self.min_alternative(r).1
    }

    /// The condition with alternative `n` chosen, as a linear inequality.
    pub fn with_alternative(&self, n: usize) -> LinearIneq {
        let a = &self.alternatives[n];
        LinearIneq {
            label: self.label_with(a),
            coeffs: self.base.add(&a.rate),
            sense: Sense::Le,
            constant: self.rhs_expr.clone().plus(InfoExpr(a.term.0.iter().map(|(c, t)| (-c, t.clone())).collect())),
            value: Some(self.rhs - a.term_value),
        }
    }

    pub fn label(&self) -> String {
        format!("rx{}({},{},{})", self.receiver + 1, self.i, self.j, self.k)
    }

    fn label_with(&self, a: &Alternative) -> String {
        format!("{}[{},{}]", self.label(), a.j_alt, a.k_alt)
    }

    /// Text form in the usual notation.
    pub fn render(&self) -> String {
        let terms: Vec<String> = self
            .alternatives
            .iter()
            .map(|a| match (a.rate.is_zero(), a.term.is_zero()) {
                (true, _) => a.term.to_string(),
                (false, true) => a.rate.pretty(),
                (false, false) => format!("{} + {}", a.rate.pretty(), a.term),
            })
            .collect();
        format!("{}: {} + min{{ {} }} ≤ {}", self.label(), self.base.pretty(), terms.join(", "), self.rhs_expr)
    }
}

/// Rewrites each alternative as `r_i + r_j' + r_k' ≤ I(X_l, c_j', c_k'; Y_l | C) + t_i`.
pub fn to_alternative_form(cond: &MinCondition, joint: &FullJoint) -> Result<Vec<LinearIneq>> {
    let c = cond.conditioning();
    let l = cond.receiver;
    let mut out = Vec::with_capacity(cond.alternatives.len());
    for a in &cond.alternatives {
        let lhs = VarSet::of([Var::X(l)]).union(&a.set_first).union(&a.set_second).minus(&c);
        let mut constant = InfoExpr::term(InfoTerm::mutual(lhs, VarSet::of([Var::Y(l)]), c.clone()));
        if cond.penalty {
            constant = constant.plus(InfoExpr::term(marton_penalty(l)));
        }
        let value = constant.evaluate(joint)?;
        out.push(LinearIneq {
            label: cond.label_with(a),
            coeffs: cond.base.add(&a.rate),
            sense: Sense::Le,
            constant,
            value: Some(value),
        });
    }
    Ok(out)
}

/// Everything receiver `l` (and transmitter `l`) contributes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReceiverSystem {
    pub receiver: usize,
    pub marton: Vec<LinearIneq>,
    /// Ordered by `i`, then `j`, then `k`.
    pub conditions: Vec<MinCondition>,
    /// Per `(j, k)`, the alternative with the smallest saturation term.
    pub argmin: [[usize; INTERFERER_ROWS]; INTERFERER_ROWS],
}

pub fn condition_index(i: usize, j: usize, k: usize) -> usize {
    (i - 1) * INTERFERER_ROWS * INTERFERER_ROWS + (j - 1) * INTERFERER_ROWS + (k - 1)
}

fn saturation_term(variant: TermVariant, l: usize, first: &VarSet, second: &VarSet) -> InfoExpr {
    match variant {
        TermVariant::Noisy => InfoExpr::term(InfoTerm::mutual(
            VarSet::of([Var::S(l)]),
            VarSet::of([Var::SNoisy(l)]),
            first.union(second).with(Var::Q),
        )),
        TermVariant::Separate => {
            let b = Role::First.sender(l);
            let c = Role::Second.sender(l);
            InfoExpr::term(InfoTerm::entropy(VarSet::of([Var::Link(b, l)]), first.with(Var::Q)))
                .plus(InfoExpr::term(InfoTerm::entropy(VarSet::of([Var::Link(c, l)]), second.with(Var::Q))))
        }
    }
}

/// Symbolic alternatives for `(j, k)` at receiver `l`, `k'` outer and `j'` inner.
pub fn alternatives_for(variant: TermVariant, l: usize, j: usize, k: usize) -> Result<Vec<Alternative>> {
    let mut out = Vec::new();
    for k_alt in 1..=alternative_count(k) {
        let second = interferer_alt(Role::Second, l, k, k_alt)?;
        for j_alt in 1..=alternative_count(j) {
            let first = interferer_alt(Role::First, l, j, j_alt)?;
            out.push(Alternative {
                j_alt,
                k_alt,
                rate: first.rate.add(&second.rate),
                term: saturation_term(variant, l, &first.set, &second.set),
                set_first: first.set,
                set_second: second.set.clone(),
                term_value: f64::NAN,
            });
        }
    }
    Ok(out)
}

/// All 45 conditions and the five excess-rate constraints of receiver `l`,
/// with every constant evaluated on `joint`.
pub fn receiver_system(joint: &FullJoint, l: usize) -> Result<ReceiverSystem> {
    receiver_system_with(joint, l, TermVariant::Noisy)
}

pub fn receiver_system_with(joint: &FullJoint, l: usize, variant: TermVariant) -> Result<ReceiverSystem> {
    let marton = marton_system(l).into_iter().map(|m| m.evaluated(joint)).collect::<Result<Vec<_>>>()?;
    let penalty = InfoExpr::term(marton_penalty(l));
    let mut alts = Vec::new();
    let mut argmin = [[0usize; INTERFERER_ROWS]; INTERFERER_ROWS];
    for j in 1..=INTERFERER_ROWS {
        let mut row = Vec::new();
        for k in 1..=INTERFERER_ROWS {
            let mut list = alternatives_for(variant, l, j, k)?;
            for a in &mut list {
                a.term_value = a.term.evaluate(joint)?;
            }
            argmin[j - 1][k - 1] = argmin_term(&list);
            row.push(list);
        }
        alts.push(row);
    }
    let mut conditions = Vec::with_capacity(CONDITIONS_PER_RECEIVER);
    for i in 1..=OWN_ROWS {
        let own = own_row(l, i)?;
        for j in 1..=INTERFERER_ROWS {
            let known_first = interferer_known(Role::First, l, j)?;
            for k in 1..=INTERFERER_ROWS {
                let known_second = interferer_known(Role::Second, l, k)?;
                let c = own.set.union(&known_first).union(&known_second).with(Var::Q);
                let mut rhs_expr = InfoExpr::term(InfoTerm::mutual(inputs_outside(&c), VarSet::of([Var::Y(l)]), c.clone()));
                if own.penalty {
                    rhs_expr = rhs_expr.plus(penalty.clone());
                }
                let rhs = rhs_expr.evaluate(joint)?;
                conditions.push(MinCondition {
                    receiver: l,
                    i,
                    j,
                    k,
                    base: own.rate.clone(),
                    own_set: own.set.clone(),
                    known_first: known_first.clone(),
                    known_second,
                    penalty: own.penalty,
                    rhs_expr,
                    rhs,
                    alternatives: alts[j - 1][k - 1].clone(),
                });
            }
        }
    }
    Ok(ReceiverSystem { receiver: l, marton, conditions, argmin })
}

fn argmin_term(list: &[Alternative]) -> usize {
    let mut best = 0;
    for (n, a) in list.iter().enumerate().skip(1) {
        let b = &list[best];
        if a.term_value < b.term_value - 1e-12
            || (a.term_value <= b.term_value + 1e-12 && (a.j_alt, a.k_alt) < (b.j_alt, b.k_alt))
        {
            best = n;
        }
    }
    best
}

impl ReceiverSystem {
    pub fn condition(&self, i: usize, j: usize, k: usize) -> &MinCondition {
        &self.conditions[condition_index(i, j, k)]
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for m in &self.marton {
            out.push_str(&format!("{}: {}\n", m.label, m.render()));
        }
        for c in &self.conditions {
            out.push_str(&c.render());
            out.push('\n');
        }
        out
    }
}

/// Systems for all three receivers.
pub fn full_system(joint: &FullJoint) -> Result<Vec<ReceiverSystem>> {
    (0..USERS).map(|l| receiver_system(joint, l)).collect()
}
