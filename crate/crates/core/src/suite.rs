//! Batch run of every oracle check over a configured instance set. The run
//! writes a manifest and the region artifacts; everything but the timing
//! block is a pure function of the configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    build_modulo_example, degenerate_third_pair, random_channel, random_row, validate_channel, ChannelSpec, RandomChannelConfig,
    ValidatedChannel, USERS,
};
use crate::error::{Error, Result};
use crate::identities::{verify_identity_chain, verify_noiseless};
use crate::io::{read_json_file, sha256_hex};
use crate::pmf::{build_full_joint, FullJoint, InputPmf};
use crate::polytope::RowSense;
use crate::rational::{rat_to_f64, Prob};
use crate::region::{
    compare_regions, feasible_3d, hk_layered_input, hk_oracle, hk_vertices, pmf_id, project_region_with, sample_directions, search,
    support_2d, tin_point, union_regions, Goal, RateSystem, Region3, RegionBudget, SelectionAssignment, Strategy, INCLUSION_TOL,
};

pub const IDENTITY_TOL: f64 = 1e-9;
/// Slack allowed when the treat-as-noise box is compared with the region.
pub const TIN_TOL: f64 = 1e-9;
const MAX_REPORTED_FAILURES: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuloInstance {
    pub q: usize,
    pub flip: Prob,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub modulo: Vec<ModuloInstance>,
    /// Extra channel JSON files, checked like the modulo instances.
    pub channel_files: Vec<PathBuf>,
    /// Input pmfs drawn per instance for the identity, noiseless and
    /// treat-as-noise checks.
    pub pmf_samples: usize,
    /// `|Q|` of the pmfs used by the identity checks.
    pub q_size: usize,
    pub random_identity_channels: usize,
    pub noiseless_channels: usize,
    /// Layered pmfs per instance for the two-pair comparison.
    pub hk_samples: usize,
    /// Dirichlet pmfs hulled into each exported region.
    pub region_samples: usize,
    pub directions: usize,
    pub budget: RegionBudget,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let flips = [Prob::zero(), Prob::ratio(1, 10), Prob::ratio(1, 2)];
        SuiteConfig {
            seed: 0,
            modulo: [2, 3].iter().flat_map(|&q| flips.iter().map(move |f| ModuloInstance { q, flip: f.clone() })).collect(),
            channel_files: Vec::new(),
            pmf_samples: 20,
            q_size: 1,
            random_identity_channels: 20,
            noiseless_channels: 20,
            hk_samples: 2,
            region_samples: 2,
            directions: 64,
            budget: RegionBudget { rays: 16, ..RegionBudget::default() },
        }
    }
}

impl SuiteConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        read_json_file(path)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.q_size) {
            return Err(Error::InvalidParameter(format!("q_size must be in 1..=4, got {}", self.q_size)));
        }
        if self.directions == 0 {
            return Err(Error::InvalidParameter("directions must be positive".into()));
        }
        Ok(())
    }

    /// Short id of this configuration, stamped on every artifact.
    pub fn run_id(&self) -> String {
        sha256_hex(self.to_json_string().as_bytes())[..16].to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Joints (or regions) examined.
    pub instances: usize,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub tolerance: f64,
    /// Digest of the ids of every input pmf used.
    pub pmf_digest: String,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix: u64,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub run_id: String,
    pub seed: u64,
    pub config_sha256: String,
    /// Channel name to the hash of its JSON form.
    pub channels: BTreeMap<String, String>,
    pub budget: RegionBudget,
    pub checks: Vec<CheckResult>,
    pub artifacts: Vec<ArtifactRecord>,
    pub passed: bool,
    pub timing: Timing,
}

impl RunManifest {
    /// The manifest with the timing block zeroed, for run-to-run comparison.
    pub fn without_timing(&self) -> RunManifest {
        RunManifest { timing: Timing { started_unix: 0, wall_seconds: 0.0 }, ..self.clone() }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// Process exit code for an error that stopped a run before any check.
pub const INPUT_ERROR_EXIT: i32 = 2;

#[derive(Clone)]
struct Instance {
    name: String,
    spec: ChannelSpec,
    channel: ValidatedChannel,
}

impl Instance {
    fn new(name: String, spec: ChannelSpec) -> Result<Self> {
        let channel = validate_channel(spec.clone()).map_err(|v| Error::InvalidParameter(format!("{name}: {v}")))?;
        Ok(Instance { name, spec, channel })
    }

    fn sha256(&self) -> String {
        sha256_hex(self.spec.to_json_string().as_bytes())
    }

    fn x_sizes(&self) -> [usize; USERS] {
        self.channel.alphabets().x
    }
}

fn flip_label(p: &Prob) -> String {
    p.to_string().replace('/', "_")
}

fn load_instances(config: &SuiteConfig) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for m in &config.modulo {
        out.push(Instance::new(format!("modulo-q{}-flip{}", m.q, flip_label(&m.flip)), build_modulo_example(m.q, m.flip.clone())?)?);
    }
    for path in &config.channel_files {
        let spec: ChannelSpec = read_json_file(path)?;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "channel".into());
        out.push(Instance::new(format!("file-{stem}"), spec)?);
    }
    Ok(out)
}

struct Job {
    label: String,
    joint: FullJoint,
}

fn job(instance: &Instance, tag: &str, n: usize, input: &InputPmf) -> Result<Job> {
    Ok(Job { label: format!("{}/{tag}{n}", instance.name), joint: build_full_joint(input, &instance.channel)? })
}

fn digest(jobs: &[Job]) -> String {
    let ids: Vec<String> = jobs.iter().map(|j| pmf_id(&j.joint)).collect();
    sha256_hex(ids.join(",").as_bytes())[..16].to_string()
}

/// Folds per-job `(worst, failure)` pairs into one check.
fn finish(name: &str, jobs: &[Job], tolerance: f64, results: Vec<Result<(f64, Option<String>)>>) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut failed = 0;
    for r in results {
        let (w, fail) = r?;
        if w.is_finite() {
            worst = worst.max(w);
        }
        if let Some(f) = fail {
            failed += 1;
            if failures.len() < MAX_REPORTED_FAILURES {
                failures.push(f);
            }
        }
    }
    Ok(CheckResult {
        name: name.into(),
        passed: failed == 0,
        instances: jobs.len(),
        worst,
        tolerance,
        pmf_digest: digest(jobs),
        failures,
    })
}

fn identity_check(jobs: &[Job]) -> Result<CheckResult> {
    let results = jobs
        .par_iter()
        .map(|j| {
            let mut worst = 0.0f64;
            let mut fail = None;
            for l in 0..USERS {
                let r = verify_identity_chain(&j.joint, l, true)?;
                worst = worst.max(r.max_discrepancy);
                if !r.passed(IDENTITY_TOL) {
                    fail = Some(format!("{} rx{}: worst {} ({:e}), exact failures {:?}", j.label, l + 1, r.worst, r.max_discrepancy, r.exact_failures));
                }
            }
            Ok((worst, fail))
        })
        .collect();
    finish("identities", jobs, IDENTITY_TOL, results)
}

fn noiseless_check(jobs: &[Job]) -> Result<CheckResult> {
    let results = jobs
        .par_iter()
        .map(|j| {
            let r = verify_noiseless(&j.joint, true)?;
            let fail = (!r.passed(IDENTITY_TOL)).then(|| format!("{}: {:e}, {:?}", j.label, r.max_discrepancy, r.failures));
            Ok((r.max_discrepancy, fail))
        })
        .collect();
    finish("noiseless", jobs, IDENTITY_TOL, results)
}

/// The treat-as-noise corner must be reachable with its prescribed split,
/// and the box it spans must not stick out of the region along any sampled
/// direction. Region support is bounded below by a short search started at
/// the corner's own selection.
pub fn tin_inclusion(joint: &FullJoint, directions: &[[f64; USERS]], budget: &RegionBudget) -> Result<(f64, Option<String>)> {
    let system = RateSystem::new(joint)?;
    let tin = tin_point(joint, &system)?;
    if !tin.member {
        return Ok((f64::INFINITY, Some(format!("prescribed split fails membership (slack {:e})", tin.min_slack))));
    }
    let feas = feasible_3d(&system, tin.point, Strategy::SelectionExact, budget)?;
    if !feas.feasible {
        return Ok((f64::INFINITY, Some(format!("corner {:?} not reached by the selection search", tin.point))));
    }
    let starts = [SelectionAssignment::pointwise(&system, &tin.witness), SelectionAssignment::treat_as_noise()];
    let mut lower = Vec::with_capacity(directions.len());
    for d in directions {
        let v = search(&system, &Goal::Support(*d), &starts, starts.len())?.map(|o| o.value_f64()).unwrap_or(f64::NEG_INFINITY);
        lower.push(v);
    }
    let report = compare_regions(
        |d| tin.support(d),
        |d| directions.iter().position(|e| e == d).map(|i| lower[i]).unwrap_or(f64::NEG_INFINITY),
        directions,
    );
    let deficit = (-report.deficit_a_in_b).max(0.0);
    let fail = (!report.a_in_b(TIN_TOL)).then(|| format!("box exceeds region by {deficit:e} along {:?}", report.worst_a_in_b));
    Ok((deficit, fail))
}

fn tin_check(jobs: &[Job], directions: &[[f64; USERS]], budget: &RegionBudget) -> Result<CheckResult> {
    let results = jobs
        .par_iter()
        .map(|j| tin_inclusion(&j.joint, directions, budget).map(|(w, f)| (w, f.map(|f| format!("{}: {f}", j.label)))))
        .collect();
    finish("tin-inclusion", jobs, TIN_TOL, results)
}

/// Outcome of comparing a projected region with the two-pair oracle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HkComparison {
    /// Largest one-sided support gap along the sampled directions.
    pub mutual_deficit: f64,
    /// Largest violation of an oracle row by a region point, with `R3`
    /// counted as a violation of `R3 ≤ 0`.
    pub points_outside_oracle: f64,
    /// Largest distance of an oracle vertex outside the region hull.
    pub oracle_outside_region: f64,
    pub sound: bool,
}

impl HkComparison {
    pub fn worst(&self) -> f64 {
        self.mutual_deficit.max(self.points_outside_oracle).max(self.oracle_outside_region)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.sound && self.worst() <= tol
    }
}

/// Projects the region of a degenerate-third-pair joint and compares it
/// with the oracle in both directions.
pub fn hk_comparison(joint: &FullJoint, directions: &[[f64; USERS]], budget: &RegionBudget) -> Result<(Region3, HkComparison)> {
    let system = RateSystem::new(joint)?;
    let id = pmf_id(joint);
    let oracle = hk_oracle(joint)?;
    let region = project_region_with(&system, &id, budget)?;
    let mut oracle_support = Vec::with_capacity(directions.len());
    for d in directions {
        oracle_support.push(support_2d(&oracle, d)?);
    }
    let report = compare_regions(
        |d| region.support(d),
        |d| directions.iter().position(|e| e == d).map(|i| oracle_support[i]).unwrap_or(f64::NEG_INFINITY),
        directions,
    );
    let rows: Vec<([f64; 2], f64)> = oracle
        .rows
        .iter()
        .map(|r| {
            let sign = if r.sense == RowSense::Ge { -1.0 } else { 1.0 };
            ([sign * rat_to_f64(&r.coeffs[0]), sign * rat_to_f64(&r.coeffs[1])], sign * rat_to_f64(&r.rhs))
        })
        .collect();
    let points_outside_oracle = region
        .points
        .iter()
        .map(|p| rows.iter().map(|(a, b)| a[0] * p.rates[0] + a[1] * p.rates[1] - b).fold(p.rates[2].abs(), f64::max))
        .fold(0.0, f64::max);
    let oracle_outside_region = hk_vertices(&oracle)?.iter().map(|v| region.hull.violation(&[v[0], v[1], 0.0])).fold(0.0, f64::max);
    let sound = region.verify(&[(id, system)]) == region.points.len();
    let cmp = HkComparison { mutual_deficit: report.mutual_deficit(), points_outside_oracle, oracle_outside_region, sound };
    Ok((region, cmp))
}

fn hk_check(jobs: &[Job], directions: &[[f64; USERS]], budget: &RegionBudget) -> Result<(CheckResult, Vec<(usize, usize)>)> {
    let outcomes: Vec<Result<(Region3, HkComparison)>> = jobs.par_iter().map(|j| hk_comparison(&j.joint, directions, budget)).collect();
    let mut results = Vec::new();
    let mut soundness = Vec::new();
    for (j, o) in jobs.iter().zip(outcomes) {
        results.push(o.map(|(region, cmp)| {
            soundness.push((region.points.len(), if cmp.sound { region.points.len() } else { 0 }));
            let fail = (!cmp.passed(INCLUSION_TOL)).then(|| format!("{}: {cmp:?}", j.label));
            (cmp.worst(), fail)
        }));
    }
    Ok((finish("hk-recovery", jobs, INCLUSION_TOL, results)?, soundness))
}

#[derive(Serialize)]
struct RegionArtifact<'a> {
    run_id: &'a str,
    instance: &'a str,
    region: &'a Region3,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    #[serde(rename = "R1")]
    r1: f64,
    #[serde(rename = "R2")]
    r2: f64,
    #[serde(rename = "R3")]
    r3: f64,
    selection_id: String,
    pmf_id: &'a str,
}

/// Boundary samples as `R1,R2,R3,selection_id,pmf_id` rows.
pub fn region_csv(region: &Region3) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in &region.points {
        w.serialize(CsvRow { r1: p.rates[0], r2: p.rates[1], r3: p.rates[2], selection_id: p.selection.id(), pmf_id: &p.pmf_id })
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// Every file of a run is staged here and written in one pass at the end.
struct Writer {
    files: Vec<(String, String)>,
}

impl Writer {
    fn stage(&mut self, path: String, contents: String) {
        self.files.push((path, contents));
    }

    fn records(&self) -> Vec<ArtifactRecord> {
        self.files.iter().map(|(p, c)| ArtifactRecord { path: p.clone(), sha256: sha256_hex(c.as_bytes()) }).collect()
    }

    fn flush(&self, out_dir: &Path) -> Result<()> {
        for (rel, contents) in &self.files {
            let path = out_dir.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }
}

/// Region of each modulo instance hulled over Dirichlet pmf samples with
/// `U_l = X_l`.
fn exported_regions(
    instances: &[Instance],
    config: &SuiteConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(String, Region3, Vec<(String, RateSystem)>)>> {
    let mut jobs = Vec::new();
    for inst in instances.iter().take(config.modulo.len()) {
        let x = inst.x_sizes();
        for _ in 0..config.region_samples {
            let pmf = InputPmf::random_dirichlet_u_equals_x(rng, config.q_size, x);
            jobs.push((inst.name.clone(), build_full_joint(&pmf, &inst.channel)?));
        }
    }
    let projected: Vec<Result<(String, Region3, (String, RateSystem))>> = jobs
        .par_iter()
        .map(|(name, joint)| {
            let system = RateSystem::new(joint)?;
            let id = pmf_id(joint);
            let region = project_region_with(&system, &id, &config.budget)?;
            Ok((name.clone(), region, (id, system)))
        })
        .collect();
    let mut out: Vec<(String, Region3, Vec<(String, RateSystem)>)> = Vec::new();
    let mut parts: Vec<Region3> = Vec::new();
    let mut systems = Vec::new();
    let mut current: Option<String> = None;
    for res in projected {
        let (name, region, sys) = res?;
        if current.as_ref().is_some_and(|c| *c != name) {
            out.push((current.take().unwrap(), union_regions(&parts), std::mem::take(&mut systems)));
            parts.clear();
        }
        current = Some(name);
        parts.push(region);
        systems.push(sys);
    }
    if let Some(name) = current {
        out.push((name, union_regions(&parts), systems));
    }
    Ok(out)
}

/// Runs every check on the configured instances and writes the manifest
/// and region artifacts under `out_dir`.
pub fn run_suite(config: &SuiteConfig, out_dir: &Path) -> Result<RunManifest> {
    config.validate()?;
    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let run_id = config.run_id();
    let instances = load_instances(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut identity_jobs = Vec::new();
    let mut noiseless_jobs = Vec::new();
    let mut tin_jobs = Vec::new();
    for inst in &instances {
        let x = inst.x_sizes();
        for n in 0..config.pmf_samples {
            let pmf = InputPmf::random_rational(&mut rng, config.q_size, [2; USERS], x);
            identity_jobs.push(job(inst, "pmf", n, &pmf)?);
            if inst.channel.is_noiseless() {
                noiseless_jobs.push(job(inst, "pmf", n, &pmf)?);
            }
            tin_jobs.push(job(inst, "tin", n, &InputPmf::random_u_equals_x(&mut rng, x))?);
        }
    }
    for (n, noiseless) in (0..config.random_identity_channels).map(|n| (n, false)).chain((0..config.noiseless_channels).map(|n| (n, true))) {
        let cfg = RandomChannelConfig { noiseless, ..RandomChannelConfig::default() };
        let prefix = if noiseless { "random-noiseless" } else { "random" };
        let inst = Instance::new(format!("{prefix}-{n}"), random_channel(&mut rng, &cfg))?;
        let pmf = InputPmf::random_rational(&mut rng, config.q_size, [2; USERS], inst.x_sizes());
        let j = job(&inst, "pmf", 0, &pmf)?;
        if noiseless {
            noiseless_jobs.push(j);
        } else {
            identity_jobs.push(j);
        }
    }
    let mut hk_jobs = Vec::new();
    for inst in instances.iter().take(config.modulo.len()) {
        let deg = Instance::new(format!("{}-two-pair", inst.name), degenerate_third_pair(&inst.spec))?;
        for n in 0..config.hk_samples {
            let p_x: [Vec<Prob>; USERS] = std::array::from_fn(|l| {
                let size = deg.x_sizes()[l];
                if l < 2 {
                    random_row(&mut rng, size, true)
                } else {
                    vec![Prob::one(); size]
                }
            });
            hk_jobs.push(job(&deg, "hk", n, &hk_layered_input(&deg.channel, p_x))?);
        }
    }

    let directions3 = sample_directions(config.directions, USERS, config.seed);
    let directions2 = sample_directions(config.directions, 2, config.seed);
    let mut checks = vec![
        identity_check(&identity_jobs)?,
        noiseless_check(&noiseless_jobs)?,
        tin_check(&tin_jobs, &directions3, &config.budget)?,
    ];
    let (hk, mut soundness) = hk_check(&hk_jobs, &directions2, &config.budget)?;
    checks.push(hk);

    let mut writer = Writer { files: Vec::new() };
    let regions = exported_regions(&instances, config, &mut rng)?;
    for (name, region, systems) in &regions {
        soundness.push((region.points.len(), region.verify(systems)));
        let stem = format!("regions/{name}-{run_id}");
        let artifact = RegionArtifact { run_id: &run_id, instance: name, region };
        writer.stage(format!("{stem}.json"), serde_json::to_string_pretty(&artifact).expect("region serializes"));
        writer.stage(format!("{stem}.off"), region.hull.to_off());
        writer.stage(format!("{stem}.csv"), region_csv(region)?);
    }
    let total: usize = soundness.iter().map(|s| s.0).sum();
    let verified: usize = soundness.iter().map(|s| s.1).sum();
    checks.push(CheckResult {
        name: "soundness".into(),
        passed: total == verified,
        instances: soundness.len(),
        worst: (total - verified) as f64,
        tolerance: 0.0,
        pmf_digest: sha256_hex(regions.iter().flat_map(|r| r.1.pmf_ids.clone()).collect::<Vec<_>>().join(",").as_bytes())[..16].to_string(),
        failures: if total == verified { Vec::new() } else { vec![format!("{} of {total} points failed re-verification", total - verified)] },
    });

    let mut channels = BTreeMap::new();
    for inst in &instances {
        channels.insert(inst.name.clone(), inst.sha256());
    }
    let passed = checks.iter().all(|c| c.passed);
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        run_id,
        seed: config.seed,
        config_sha256: sha256_hex(config.to_json_string().as_bytes()),
        channels,
        budget: config.budget.clone(),
        checks,
        artifacts: writer.records(),
        passed,
        timing: Timing { started_unix, wall_seconds: started.elapsed().as_secs_f64() },
    };
    writer.stage("manifest.json".into(), manifest.to_json_string());
    writer.flush(out_dir)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig {
            modulo: vec![ModuloInstance { q: 2, flip: Prob::ratio(1, 10) }, ModuloInstance { q: 2, flip: Prob::zero() }],
            pmf_samples: 2,
            random_identity_channels: 2,
            noiseless_channels: 2,
            hk_samples: 1,
            region_samples: 1,
            directions: 8,
            budget: RegionBudget { rays: 6, ..RegionBudget::default() },
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn small_suite_passes_and_writes_artifacts() {
        let dir = std::env::temp_dir().join(format!("ic3region-suite-{}", std::process::id()));
        let m = run_suite(&small(), &dir).unwrap();
        assert!(m.passed, "{}", m.to_json_string());
        assert_eq!(m.exit_code(), 0);
        assert_eq!(m.artifacts.len(), 6);
        let csv = std::fs::read_to_string(dir.join(&m.artifacts[2].path)).unwrap();
        assert!(csv.starts_with("R1,R2,R3,selection_id,pmf_id\n"), "{csv}");
        assert!(dir.join("manifest.json").exists());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn config_round_trips_and_rejects_unknown_fields() {
        let c = small();
        let back: SuiteConfig = crate::io::parse_json(&c.to_json_string()).unwrap();
        assert_eq!(back, c);
        assert!(crate::io::parse_json::<SuiteConfig>("{\"seeed\": 1}").is_err());
        let partial: SuiteConfig = crate::io::parse_json("{\"seed\": 5}").unwrap();
        assert_eq!(partial.seed, 5);
        assert_eq!(partial.modulo.len(), 6);
    }
}
