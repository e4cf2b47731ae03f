//! Numerical checks of the entropy identities behind the decoding
//! conditions, in floating point and, for rational joints, exactly.

use serde::Serialize;

use crate::channel::USERS;
use crate::constraints::{alternatives_for, InfoExpr, InfoTerm, TermVariant};
use crate::error::Result;
use crate::pmf::FullJoint;
use crate::tables::{interferer_known, own_row, Role, INTERFERER_ROWS, OWN_ROWS};
use crate::vars::{Var, VarSet};

/// Outcome of checking every identity at one receiver.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IdentityReport {
    pub receiver: usize,
    /// Number of `(i, j, k, j', k')` combinations compared.
    pub combinations: usize,
    pub max_discrepancy: f64,
    /// Label of the worst combination.
    pub worst: String,
    /// `None` when the joint is not rational; otherwise whether every
    /// identity held exactly.
    pub exact: Option<bool>,
    pub exact_failures: Vec<String>,
}

impl IdentityReport {
    fn record(&mut self, label: &str, lhs: f64, rhs: f64) {
        let d = (lhs - rhs).abs();
        if d > self.max_discrepancy || self.worst.is_empty() {
            self.max_discrepancy = self.max_discrepancy.max(d);
            self.worst = label.to_string();
        }
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max_discrepancy < tol && self.exact != Some(false)
    }
}

fn set(vars: impl IntoIterator<Item = Var>) -> VarSet {
    VarSet::of(vars)
}

/// Pairs of expressions that must agree for receiver `l`, with labels.
pub fn identity_pairs(l: usize) -> Result<Vec<(String, InfoExpr, InfoExpr)>> {
    let (b, c) = (Role::First.sender(l), Role::Second.sender(l));
    let inputs = set((0..USERS).map(Var::X));
    let y = set([Var::Y(l)]);
    let mut out = Vec::new();
    let noise = InfoExpr::term(InfoTerm::entropy(set([Var::SNoisy(l)]), set([Var::S(l)])));
    out.push((
        format!("rx{}: H(S'|U_m,U_n,S) = H(S'|S)", l + 1),
        InfoExpr::term(InfoTerm::entropy(set([Var::SNoisy(l)]), set([Var::U(b), Var::U(c), Var::S(l)]))),
        noise.clone(),
    ));
    out.push((
        format!("rx{}: H(Y|U_l,X_lm,U_n,X_1,X_2,X_3) = H(S'|S)", l + 1),
        InfoExpr::term(InfoTerm::entropy(y.clone(), set([Var::U(l), Var::Link(l, b), Var::U(c)]).union(&inputs))),
        noise,
    ));
    for i in 1..=OWN_ROWS {
        let own = own_row(l, i)?;
        for j in 1..=INTERFERER_ROWS {
            let known_first = interferer_known(Role::First, l, j)?;
            for k in 1..=INTERFERER_ROWS {
                let known_second = interferer_known(Role::Second, l, k)?;
                let cond = own.set.union(&known_first).union(&known_second).with(Var::Q);
                let full = InfoTerm::mutual(inputs.minus(&cond), y.clone(), cond.clone());
                for alt in alternatives_for(TermVariant::Noisy, l, j, k)? {
                    let lhs = InfoExpr::term(full.clone()).plus(InfoExpr(alt.term.0.iter().map(|(w, t)| (-w, t.clone())).collect()));
                    let reduced = set([Var::X(l)]).union(&alt.set_first).union(&alt.set_second).minus(&cond);
                    let rhs = InfoExpr::term(InfoTerm::mutual(reduced, y.clone(), cond.clone()));
                    out.push((format!("rx{}({i},{j},{k})[{},{}]", l + 1, alt.j_alt, alt.k_alt), lhs, rhs));
                }
            }
        }
    }
    Ok(out)
}

/// Evaluates both sides of every identity at receiver `l`. When `exact` is
/// set and the joint is rational, also decides exact equality.
pub fn verify_identity_chain(joint: &FullJoint, l: usize, exact: bool) -> Result<IdentityReport> {
    let pairs = identity_pairs(l)?;
    let mut report = IdentityReport { receiver: l, combinations: pairs.len() - 2, ..Default::default() };
    let do_exact = exact && joint.is_exact();
    if do_exact {
        report.exact = Some(true);
    }
    for (label, lhs, rhs) in &pairs {
        report.record(label, lhs.evaluate(joint)?, rhs.evaluate(joint)?);
        if do_exact {
            let a = lhs.evaluate_exact(joint)?.expect("rational joint");
            let b = rhs.evaluate_exact(joint)?.expect("rational joint");
            if !a.exactly_equals(&b) {
                report.exact = Some(false);
                report.exact_failures.push(label.clone());
            }
        }
    }
    Ok(report)
}

/// Outcome of comparing every saturation term with its noiseless form.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct NoiselessReport {
    /// Alternatives compared over all receivers.
    pub terms: usize,
    pub max_discrepancy: f64,
    pub exact: Option<bool>,
    pub failures: Vec<String>,
}

impl NoiselessReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_discrepancy < tol && self.exact != Some(false) && self.failures.is_empty()
    }
}

/// `I(S_l; S'_l | C)` rewritten as `H(S_l | C)`; other terms unchanged.
fn noiseless_form(term: &InfoTerm, l: usize) -> InfoTerm {
    match term {
        InfoTerm::Mutual { a, b, given } if *b == set([Var::SNoisy(l)]) && *a == set([Var::S(l)]) => {
            InfoTerm::entropy(a.clone(), given.clone())
        }
        other => other.clone(),
    }
}

/// On a channel with identity noise, checks that every alternative's
/// saturation term equals the corresponding conditional entropy of `S_l`.
pub fn verify_noiseless(joint: &FullJoint, exact: bool) -> Result<NoiselessReport> {
    let mut report = NoiselessReport::default();
    if !joint.channel().is_noiseless() {
        report.failures.push("channel has non-identity noise".into());
        return Ok(report);
    }
    let do_exact = exact && joint.is_exact();
    if do_exact {
        report.exact = Some(true);
    }
    for l in 0..USERS {
        for j in 1..=INTERFERER_ROWS {
            for k in 1..=INTERFERER_ROWS {
                for alt in alternatives_for(TermVariant::Noisy, l, j, k)? {
                    let label = format!("rx{}({j},{k})[{},{}]", l + 1, alt.j_alt, alt.k_alt);
                    let entropic = InfoExpr(alt.term.0.iter().map(|(w, t)| (*w, noiseless_form(t, l))).collect());
                    report.terms += 1;
                    let d = (alt.term.evaluate(joint)? - entropic.evaluate(joint)?).abs();
                    report.max_discrepancy = report.max_discrepancy.max(d);
                    if do_exact {
                        let a = alt.term.evaluate_exact(joint)?.expect("rational joint");
                        let b = entropic.evaluate_exact(joint)?.expect("rational joint");
                        if !a.exactly_equals(&b) {
                            report.exact = Some(false);
                            report.failures.push(label);
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_modulo_example, validate_channel};
    use crate::pmf::{build_full_joint, InputPmf};
    use crate::rational::Prob;

    #[test]
    fn modulo_instance_satisfies_all_identities() {
        let ch = validate_channel(build_modulo_example(2, "1/10".parse::<Prob>().unwrap()).unwrap()).unwrap();
        let joint = build_full_joint(&InputPmf::uniform_u_equals_x([2; 3]), &ch).unwrap();
        for l in 0..USERS {
            let r = verify_identity_chain(&joint, l, true).unwrap();
            assert_eq!(r.combinations, 5 * 36);
            assert!(r.max_discrepancy < 1e-12, "{r:?}");
            assert_eq!(r.exact, Some(true), "{:?}", r.exact_failures);
        }
    }

    #[test]
    fn noiseless_appendix_identities_vanish() {
        let ch = validate_channel(build_modulo_example(3, Prob::zero()).unwrap()).unwrap();
        let joint = build_full_joint(&InputPmf::uniform_u_equals_x([3; 3]), &ch).unwrap();
        let pairs = identity_pairs(0).unwrap();
        for (_, lhs, rhs) in &pairs[..2] {
            assert_eq!(lhs.evaluate(&joint).unwrap(), 0.0);
            assert_eq!(rhs.evaluate(&joint).unwrap(), 0.0);
        }
    }

    #[test]
    fn noiseless_terms_are_entropies() {
        let ch = validate_channel(build_modulo_example(2, Prob::zero()).unwrap()).unwrap();
        let joint = build_full_joint(&InputPmf::uniform_u_equals_x([2; 3]), &ch).unwrap();
        let r = verify_noiseless(&joint, true).unwrap();
        assert_eq!(r.terms, 3 * 36);
        assert!(r.passed(1e-9), "{r:?}");
        let noisy = validate_channel(build_modulo_example(2, Prob::ratio(1, 10)).unwrap()).unwrap();
        let joint = build_full_joint(&InputPmf::uniform_u_equals_x([2; 3]), &noisy).unwrap();
        assert!(!verify_noiseless(&joint, true).unwrap().passed(1e-9));
    }
}
