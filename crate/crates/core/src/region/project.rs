use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::compare::sample_directions;
use super::membership::check_membership;
use super::search::{search, Goal};
use super::selection::{candidate_selections, polyhedron_for_selection};
use super::{RateSystem, SelectionAssignment, MEMBERSHIP_TOL};
use crate::channel::USERS;
use crate::constraints::Sense;
use crate::error::{Error, Result};
use crate::io::sha256_hex;
use crate::pmf::FullJoint;
use crate::polytope::{fm_project_rates_with, hull3, FmOptions, FmResult, Hull3, RatePolyhedron};
use crate::rates::{Rate18, RateCoord};
use crate::rational::rat_to_f64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionBudget {
    /// Selections projected exactly by Fourier–Motzkin elimination.
    pub fm_selections: usize,
    /// Cap on the enumerated candidate selections.
    pub max_selections: usize,
    /// Enumerate every assignment of each receiver around the argmin one.
    pub full_enumeration: bool,
    /// Sampled directions; each gives one ray point and one support point.
    pub rays: usize,
    /// Linear programs per local search.
    pub max_lps: usize,
    /// Row cap for one elimination.
    pub fm_row_limit: usize,
    /// Row count above which eliminations prune redundant rows.
    pub fm_redundancy_threshold: usize,
    pub seed: u64,
}

impl Default for RegionBudget {
    fn default() -> Self {
        RegionBudget { fm_selections: 1, max_selections: 512, full_enumeration: false, rays: 32, max_lps: 120, fm_row_limit: 4000, fm_redundancy_threshold: 100, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointSource {
    Origin,
    FmVertex,
    Ray,
    Support,
}

/// An achieved `(R1, R2, R3)` together with the split and selection that
/// certify it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionPoint {
    pub rates: [f64; USERS],
    pub witness: Rate18,
    pub selection: SelectionAssignment,
    pub pmf_id: String,
    pub source: PointSource,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Region3 {
    pub pmf_ids: Vec<String>,
    pub points: Vec<RegionPoint>,
    pub hull: Hull3,
    /// Some elimination or search stopped at its budget; the region is
    /// still sound, only possibly smaller.
    pub budget_exceeded: bool,
    /// Candidate points dropped because their witness failed membership.
    pub rejected: usize,
    pub lps: usize,
}

impl Region3 {
    pub fn support(&self, d: &[f64; USERS]) -> f64 {
        self.hull.support(d)
    }

    /// Re-verifies every stored point against `systems`, keyed by pmf id.
    pub fn verify(&self, systems: &[(String, RateSystem)]) -> usize {
        self.points
            .iter()
            .filter(|p| {
                let sys = systems.iter().find(|(id, _)| *id == p.pmf_id).map(|(_, s)| s);
                let totals_match = p.witness.totals().iter().zip(&p.rates).all(|(a, b)| (a - b).abs() <= 1e-12);
                sys.is_some_and(|s| check_membership(s, &p.witness).member) && totals_match
            })
            .count()
    }
}

/// Identifies an input pmf by the hash of its JSON form.
pub fn pmf_id(joint: &FullJoint) -> String {
    let text = serde_json::to_string(joint.input()).expect("pmf serializes");
    sha256_hex(text.as_bytes())[..16].to_string()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// One linear program per selection visited by a local search, with
    /// the three totals fixed.
    SelectionExact,
    /// Each total split on a lattice of `steps` parts, auxiliary excesses
    /// from a few fixed patterns, and a membership test per combination.
    Grid { steps: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub witness: Option<Rate18>,
    pub selection: Option<SelectionAssignment>,
}

fn default_starts(system: &RateSystem) -> Vec<SelectionAssignment> {
    vec![SelectionAssignment::argmin(system), SelectionAssignment::treat_as_noise(), SelectionAssignment::resolve_all()]
}

/// Whether `(R1, R2, R3)` is reachable by some split, up to
/// `MEMBERSHIP_TOL` in each total; a returned witness always passes
/// membership.
pub fn feasible_3d(system: &RateSystem, point: [f64; USERS], strategy: Strategy, budget: &RegionBudget) -> Result<Feasibility> {
    if point.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("rates must be finite and nonnegative: {point:?}")));
    }
    let infeasible = Feasibility { feasible: false, witness: None, selection: None };
    match strategy {
        Strategy::SelectionExact => {
            let Some(out) = search(system, &Goal::Point(point), &default_starts(system), budget.max_lps)? else {
                return Ok(infeasible);
            };
            // constants are rounded inward, so a boundary point can come back
            // a hair short of t = 1
            let reach = out.witness.totals().iter().zip(&point).map(|(a, b)| b - a).fold(0.0, f64::max);
            if reach > MEMBERSHIP_TOL || !check_membership(system, &out.witness).member {
                return Ok(infeasible);
            }
            Ok(Feasibility { feasible: true, witness: Some(out.witness), selection: Some(out.selection) })
        }
        Strategy::Grid { steps } => Ok(grid_search(system, point, steps.max(1)).unwrap_or(infeasible)),
    }
}

fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    (0..=n)
        .flat_map(|first| {
            compositions(n - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn marton_excess(system: &RateSystem, l: usize) -> f64 {
    system.receivers[l].marton.iter().find(|m| m.sense == Sense::Ge).and_then(|m| m.value).unwrap_or(0.0).max(0.0)
}

fn grid_search(system: &RateSystem, point: [f64; USERS], steps: usize) -> Option<Feasibility> {
    let comps = compositions(steps, 4);
    let patterns = [(0.5, 0.5), (1.0, 0.0), (0.0, 1.0)];
    let per_sender: Vec<Vec<Vec<(RateCoord, f64)>>> = (0..USERS)
        .map(|l| {
            let (b, c) = ((l + 1) % USERS, (l + 2) % USERS);
            let excess = marton_excess(system, l);
            let mut out = Vec::new();
            for comp in &comps {
                let share = |n: usize| point[l] * comp[n] as f64 / steps as f64;
                for (eb, ec) in patterns {
                    out.push(vec![
                        (RateCoord::Common(l), share(0)),
                        (RateCoord::Private(l), share(1)),
                        (RateCoord::Split(l, b), share(2)),
                        (RateCoord::Split(l, c), share(3)),
                        (RateCoord::Aux(l, b), share(2) + eb * excess),
                        (RateCoord::Aux(l, c), share(3) + ec * excess),
                    ]);
                }
            }
            out
        })
        .collect();
    for a in &per_sender[0] {
        for b in &per_sender[1] {
            for c in &per_sender[2] {
                let mut r = Rate18::zero();
                for (coord, v) in a.iter().chain(b).chain(c) {
                    r.set(*coord, *v);
                }
                if check_membership(system, &r).member {
                    let selection = SelectionAssignment::pointwise(system, &r);
                    return Some(Feasibility { feasible: true, witness: Some(r), selection: Some(selection) });
                }
            }
        }
    }
    None
}

fn det3(m: &[[BigRational; 3]; 3]) -> BigRational {
    &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1]) - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
}

fn det3f(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Exact vertices of a bounded polyhedron in three variables, found by
/// intersecting triples of constraint planes.
pub fn polytope_vertices(poly: &RatePolyhedron) -> Result<Vec<Vec<BigRational>>> {
    if poly.dim() != 3 {
        return Err(Error::DimensionMismatch(format!("vertex enumeration needs 3 variables, got {}", poly.dim())));
    }
    let rows = poly.le_rows();
    let rows_f: Vec<([f64; 3], f64)> =
        rows.iter().map(|(a, b)| ([rat_to_f64(&a[0]), rat_to_f64(&a[1]), rat_to_f64(&a[2])], rat_to_f64(b))).collect();
    let scale = rows_f.iter().map(|(a, b)| a.iter().fold(b.abs(), |m, v| m.max(v.abs()))).fold(1.0, f64::max);
    let mut found: BTreeSet<Vec<BigRational>> = BTreeSet::new();
    let n = rows.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let m = [rows_f[i].0, rows_f[j].0, rows_f[k].0];
                let d = det3f(&m);
                if d.abs() <= 1e-12 * scale * scale * scale {
                    continue;
                }
                let rhs = [rows_f[i].1, rows_f[j].1, rows_f[k].1];
                let x: [f64; 3] = std::array::from_fn(|c| {
                    let mut mc = m;
                    for r in 0..3 {
                        mc[r][c] = rhs[r];
                    }
                    det3f(&mc) / d
                });
                let slack = 1e-7 * scale * (1.0 + x.iter().fold(0.0f64, |a, v| a.max(v.abs())));
                if rows_f.iter().any(|(a, b)| a[0] * x[0] + a[1] * x[1] + a[2] * x[2] > b + slack) {
                    continue;
                }
                let me: [[BigRational; 3]; 3] = [i, j, k].map(|r| std::array::from_fn(|c| rows[r].0[c].clone()));
                let de = det3(&me);
                if de.is_zero() {
                    continue;
                }
                let xe: Vec<BigRational> = (0..3)
                    .map(|c| {
                        let mut mc = me.clone();
                        for (r, idx) in [i, j, k].into_iter().enumerate() {
                            mc[r][c] = rows[idx].1.clone();
                        }
                        det3(&mc) / &de
                    })
                    .collect();
                let inside = rows.iter().all(|(a, b)| a.iter().zip(&xe).map(|(p, q)| p * q).sum::<BigRational>() <= *b);
                if inside {
                    found.insert(xe);
                }
            }
        }
    }
    Ok(found.into_iter().collect())
}

/// Lifts a vertex of the projection to a full split; `None` if lifting
/// fails, which would mean the projection is wrong.
pub fn lift_vertex(fm: &FmResult, vertex: &[BigRational]) -> Option<Vec<BigRational>> {
    let mut full = fm.lift(vertex)?;
    full.truncate(RateCoord::all().len());
    Some(full)
}

struct Collector<'a> {
    system: &'a RateSystem,
    pmf_id: &'a str,
    points: Vec<RegionPoint>,
    rejected: usize,
}

impl Collector<'_> {
    fn offer(&mut self, witness: Rate18, selection: SelectionAssignment, source: PointSource) {
        if check_membership(self.system, &witness).member {
            self.points.push(RegionPoint { rates: witness.totals(), witness, selection, pmf_id: self.pmf_id.to_string(), source });
        } else {
            self.rejected += 1;
        }
    }
}

pub fn project_region(joint: &FullJoint, budget: &RegionBudget) -> Result<Region3> {
    project_region_with(&RateSystem::new(joint)?, &pmf_id(joint), budget)
}

/// Inner approximation of the fixed-pmf region: exact projections of the
/// leading candidate selections, plus ray and support points from local
/// searches along sampled directions, all hulled together.
pub fn project_region_with(system: &RateSystem, pmf_id: &str, budget: &RegionBudget) -> Result<Region3> {
    let mut col = Collector { system, pmf_id, points: Vec::new(), rejected: 0 };
    let mut budget_exceeded = false;
    let mut lps = 0;
    let starts = default_starts(system);
    if let Some(o) = search(system, &Goal::Point([0.0; USERS]), &starts, budget.max_lps)? {
        lps += o.lps;
        if o.value.is_one() {
            col.offer(o.witness, o.selection, PointSource::Origin);
        }
    }
    let candidates = candidate_selections(system, budget.max_selections, budget.full_enumeration);
    let fm_opts = FmOptions { row_limit: Some(budget.fm_row_limit), redundancy_threshold: budget.fm_redundancy_threshold, ..FmOptions::default() };
    let projected: Vec<(SelectionAssignment, Result<Vec<Vec<BigRational>>>)> = candidates
        .par_iter()
        .take(budget.fm_selections)
        .map(|sel| {
            let res = polyhedron_for_selection(system, sel).and_then(|poly| {
                let fm = fm_project_rates_with(&poly, &fm_opts)?;
                let vertices = polytope_vertices(&fm.poly)?;
                Ok(vertices.iter().filter_map(|v| lift_vertex(&fm, v)).collect())
            });
            (*sel, res)
        })
        .collect();
    for (sel, res) in projected {
        match res {
            Ok(witnesses) => {
                for w in witnesses {
                    col.offer(Rate18::from_rationals(&w), sel, PointSource::FmVertex);
                }
            }
            Err(Error::BudgetExceeded(_)) => budget_exceeded = true,
            Err(e) => return Err(e),
        }
    }
    let directions = sample_directions(budget.rays, USERS, budget.seed);
    let sampled: Vec<Result<Vec<(PointSource, Option<super::SearchOutcome>)>>> = directions
        .par_iter()
        .map(|d| {
            Ok(vec![
                (PointSource::Ray, search(system, &Goal::Ray(*d), &starts, budget.max_lps)?),
                (PointSource::Support, search(system, &Goal::Support(*d), &starts, budget.max_lps)?),
            ])
        })
        .collect();
    for res in sampled {
        for (source, out) in res? {
            if let Some(o) = out {
                lps += o.lps;
                budget_exceeded |= o.lps >= budget.max_lps;
                col.offer(o.witness, o.selection, source);
            }
        }
    }
    let Collector { points, rejected, .. } = col;
    let hull = hull3(&points.iter().map(|p| p.rates).collect::<Vec<_>>());
    Ok(Region3 { pmf_ids: vec![pmf_id.to_string()], points, hull, budget_exceeded, rejected, lps })
}

/// Convex hull of several regions, typically one per input pmf.
pub fn union_regions(regions: &[Region3]) -> Region3 {
    let mut pmf_ids: Vec<String> = Vec::new();
    for r in regions {
        for id in &r.pmf_ids {
            if !pmf_ids.contains(id) {
                pmf_ids.push(id.clone());
            }
        }
    }
    let points: Vec<RegionPoint> = regions.iter().flat_map(|r| r.points.iter().cloned()).collect();
    let hull = hull3(&points.iter().map(|p| p.rates).collect::<Vec<_>>());
    Region3 {
        pmf_ids,
        points,
        hull,
        budget_exceeded: regions.iter().any(|r| r.budget_exceeded),
        rejected: regions.iter().map(|r| r.rejected).sum(),
        lps: regions.iter().map(|r| r.lps).sum(),
    }
}
