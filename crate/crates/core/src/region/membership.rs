use serde::Serialize;

use super::{RateSystem, MEMBERSHIP_TOL};
use crate::error::Result;
use crate::pmf::FullJoint;
use crate::rates::{Rate18, RateCoord};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: String,
    /// Negative: by how much the constraint fails.
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipReport {
    pub member: bool,
    pub min_slack: f64,
    pub checked: usize,
    pub violations: Vec<Violation>,
}

/// Checks nonnegativity, the excess-rate constraints and every min-condition.
pub fn check_membership(system: &RateSystem, r: &Rate18) -> MembershipReport {
    let mut report = MembershipReport { member: true, min_slack: f64::INFINITY, checked: 0, violations: Vec::new() };
    let mut record = |label: &dyn Fn() -> String, slack: f64| {
        report.checked += 1;
        report.min_slack = report.min_slack.min(slack);
        if slack < -MEMBERSHIP_TOL {
            report.member = false;
            report.violations.push(Violation { constraint: label(), slack });
        }
    };
    for c in RateCoord::all() {
        record(&|| format!("{} >= 0", c.name()), r.get(c));
    }
    for rx in &system.receivers {
        for m in &rx.marton {
            record(&|| m.label.clone(), m.slack(r));
        }
        for c in &rx.conditions {
            record(&|| c.label(), c.slack(r));
        }
    }
    report
}

pub fn membership(joint: &FullJoint, r: &Rate18) -> Result<MembershipReport> {
    Ok(check_membership(&RateSystem::new(joint)?, r))
}
