//! The achievable region: membership, selections of the existential
//! choices, projection to `(R1, R2, R3)`, special-case oracles and region
//! comparison.

mod compare;
mod membership;
mod oracles;
mod project;
mod search;
mod selection;

pub use compare::{compare_regions, sample_directions, InclusionReport};
pub use membership::{check_membership, membership, MembershipReport, Violation};
pub use oracles::{hk_hull, hk_layered_input, hk_oracle, hk_vertices, support_2d, tin_point, tin_region, TinReport};
pub use project::{
    feasible_3d, lift_vertex, pmf_id, polytope_vertices, project_region, project_region_with, union_regions, Feasibility,
    PointSource, Region3, RegionBudget, RegionPoint, Strategy,
};
pub use search::{search, selection_rows, solve_for_selection, Goal, SearchOutcome};
pub use selection::{candidate_selections, polyhedron_for_selection, SelectionAssignment};

use std::sync::Arc;

use num_rational::BigRational;

use crate::constraints::{receiver_system_with, ReceiverSystem, TermVariant};
use crate::channel::USERS;
use crate::error::Result;
use crate::pmf::FullJoint;

/// Absolute tolerance for comparing information quantities.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Tolerance for region inclusion checks, limited by sampling.
pub const INCLUSION_TOL: f64 = 1e-3;

/// The evaluated constraint systems of all three receivers for one joint.
#[derive(Clone, Debug)]
pub struct RateSystem {
    pub receivers: Vec<ReceiverSystem>,
    pub variant: TermVariant,
    rows: Arc<ExactRows>,
}

/// Exact `≤` rows with conservatively rounded constants, built once.
#[derive(Debug)]
struct ExactRows {
    /// Marton rows of all receivers.
    marton: Vec<(Vec<BigRational>, BigRational)>,
    /// `[receiver][condition][alternative]`
    conditions: Vec<Vec<Vec<(Vec<BigRational>, BigRational)>>>,
}

impl RateSystem {
    pub fn new(joint: &FullJoint) -> Result<Self> {
        RateSystem::with_variant(joint, TermVariant::Noisy)
    }

    pub fn with_variant(joint: &FullJoint, variant: TermVariant) -> Result<Self> {
        let receivers = (0..USERS).map(|l| receiver_system_with(joint, l, variant)).collect::<Result<Vec<_>>>()?;
        let rows = Arc::new(selection::exact_rows(&receivers, joint));
        Ok(RateSystem { receivers, variant, rows })
    }
}
