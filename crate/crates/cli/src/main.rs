use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use ic3region::channel::{build_modulo_example, degenerate_third_pair, random_row, validate_channel, ChannelSpec, ValidatedChannel, USERS};
use ic3region::rational::Prob;
use ic3region::constraints::{receiver_system_with, TermVariant};
use ic3region::identities::{verify_identity_chain, verify_noiseless};
use ic3region::io::read_json_file;
use ic3region::pmf::{build_full_joint, FullJoint, InputPmf};
use ic3region::rates::{coord_names, Rate18, RATE_DIM};
use ic3region::region::{
    check_membership, compare_regions, hk_layered_input, hk_vertices, pmf_id, project_region_with, sample_directions, tin_point, union_regions, RateSystem,
    RegionBudget, INCLUSION_TOL,
};
use ic3region::suite::{hk_comparison, region_csv, run_suite, tin_inclusion, SuiteConfig, IDENTITY_TOL, INPUT_ERROR_EXIT};

#[derive(Parser)]
#[command(name = "ic3region", version, about = "Achievable rate regions of three-pair interference channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a channel file and report every violation.
    Validate { channel: PathBuf },
    /// Print every evaluated constant of the rate system as JSON.
    Measures(Inputs),
    /// Print the rate system in text form.
    Constraints {
        #[command(flatten)]
        inputs: Inputs,
        /// Only this receiver (1-based).
        #[arg(long)]
        receiver: Option<usize>,
        #[arg(long, value_enum, default_value_t = Variant::Noisy)]
        variant: Variant,
    },
    /// Test a split-rate point; exit code 1 when it is outside.
    Member {
        #[command(flatten)]
        inputs: Inputs,
        /// 18 comma-separated rates in the order printed by `--list-coords`.
        #[arg(long, allow_hyphen_values = true)]
        rates: Option<String>,
        #[arg(long)]
        list_coords: bool,
    },
    /// Inner approximation of the region, hulled over the given pmfs.
    Project(ProjectArgs),
    /// Run one oracle check; exit code 0 on pass.
    Verify {
        #[arg(value_enum)]
        check: Check,
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 64)]
        directions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Budget JSON for the checks that project a region.
        #[arg(long)]
        budget: Option<PathBuf>,
    },
    /// Compare two region artifacts through their support functions.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 64)]
        directions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = INCLUSION_TOL)]
        tol: f64,
    },
    /// Write an example channel or input pmf as JSON to stdout.
    #[command(subcommand)]
    Generate(Generate),
    /// Run the full check suite and write the manifest and artifacts.
    Suite {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "suite-out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        pmf_samples: Option<usize>,
        /// Print the effective configuration and exit.
        #[arg(long)]
        print_config: bool,
    },
}

#[derive(Subcommand)]
enum Generate {
    /// The modulo-additive channel over `Z_q` with symmetric noise.
    Modulo {
        #[arg(long, default_value_t = 2)]
        q: usize,
        /// Error probability of the noise kernel, e.g. `1/10`.
        #[arg(long, default_value = "0")]
        flip: String,
        /// Remove the third pair.
        #[arg(long)]
        two_pair: bool,
    },
    /// An input pmf for a channel: uniform with `U_l = X_l` by default.
    Pmf {
        channel: PathBuf,
        /// Random rational marginals with `U_l = X_l` from this seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Clouds equal to what each sender delivers to the other active
        /// receiver (for the two-pair check).
        #[arg(long)]
        layered: bool,
    },
}

#[derive(Args)]
struct Inputs {
    channel: PathBuf,
    pmf: PathBuf,
}

#[derive(Args)]
struct ProjectArgs {
    channel: PathBuf,
    /// Input pmf files; when none are given, `--samples` pmfs are drawn.
    pmfs: Vec<PathBuf>,
    #[arg(long)]
    budget: Option<PathBuf>,
    #[arg(long)]
    rays: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Dirichlet pmfs with `U_l = X_l` to draw when no pmf file is given.
    #[arg(long, default_value_t = 4)]
    samples: usize,
    #[arg(long)]
    full_enumeration: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value = "region")]
    name: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Noisy,
    Separate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    Tin,
    Hk,
    Noiseless,
    Identities,
}

fn load_channel(path: &Path) -> anyhow::Result<ValidatedChannel> {
    let spec: ChannelSpec = read_json_file(path)?;
    validate_channel(spec).map_err(|v| {
        let lines: Vec<String> = v.0.iter().map(|e| format!("  {e}")).collect();
        anyhow!("{}: invalid channel\n{}", path.display(), lines.join("\n"))
    })
}

fn load_joint(inputs: &Inputs) -> anyhow::Result<FullJoint> {
    let channel = load_channel(&inputs.channel)?;
    let pmf: InputPmf = read_json_file(&inputs.pmf)?;
    Ok(build_full_joint(&pmf, &channel)?)
}

fn load_budget(path: Option<&Path>) -> anyhow::Result<RegionBudget> {
    match path {
        Some(p) => Ok(read_json_file(p)?),
        None => Ok(RegionBudget::default()),
    }
}

fn print_json<T: Serialize>(v: &T) {
    // a closed pipe (e.g. `| head`) is not an error
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn pass_fail(passed: bool) -> u8 {
    if passed {
        0
    } else {
        1
    }
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct AlternativeValue {
    j_alt: usize,
    k_alt: usize,
    term: String,
    value: f64,
}

#[derive(Serialize)]
struct ConditionValue {
    label: String,
    rhs: f64,
    alternatives: Vec<AlternativeValue>,
}

#[derive(Serialize)]
struct ReceiverMeasures {
    receiver: usize,
    marton: Vec<(String, f64)>,
    conditions: Vec<ConditionValue>,
}

fn measures(joint: &FullJoint) -> anyhow::Result<Vec<ReceiverMeasures>> {
    let system = RateSystem::new(joint)?;
    Ok(system
        .receivers
        .iter()
        .map(|rx| ReceiverMeasures {
            receiver: rx.receiver + 1,
            marton: rx.marton.iter().map(|m| (m.label.clone(), m.value.unwrap_or(f64::NAN))).collect(),
            conditions: rx
                .conditions
                .iter()
                .map(|c| ConditionValue {
                    label: c.label(),
                    rhs: c.rhs,
                    alternatives: c
                        .alternatives
                        .iter()
                        .map(|a| AlternativeValue { j_alt: a.j_alt, k_alt: a.k_alt, term: a.term.to_string(), value: a.term_value })
                        .collect(),
                })
                .collect(),
        })
        .collect())
}

fn parse_rates(text: &str) -> anyhow::Result<Rate18> {
    let values: Vec<f64> = text
        .split([',', ' '])
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("bad rate `{s}`")))
        .collect::<anyhow::Result<_>>()?;
    if values.len() != RATE_DIM {
        return Err(anyhow!("expected {RATE_DIM} rates, got {}", values.len()));
    }
    Ok(Rate18(std::array::from_fn(|i| values[i])))
}

fn project(args: &ProjectArgs) -> anyhow::Result<u8> {
    let channel = load_channel(&args.channel)?;
    let mut budget = load_budget(args.budget.as_deref())?;
    if let Some(r) = args.rays {
        budget.rays = r;
    }
    if let Some(s) = args.seed {
        budget.seed = s;
    }
    budget.full_enumeration |= args.full_enumeration;
    let pmfs: Vec<InputPmf> = if args.pmfs.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        (0..args.samples.max(1)).map(|_| InputPmf::random_dirichlet_u_equals_x(&mut rng, 1, channel.alphabets().x)).collect()
    } else {
        args.pmfs.iter().map(|p| read_json_file(p).map_err(anyhow::Error::from)).collect::<anyhow::Result<_>>()?
    };
    let mut regions = Vec::new();
    let mut systems = Vec::new();
    for pmf in &pmfs {
        let joint = build_full_joint(pmf, &channel)?;
        let system = RateSystem::new(&joint)?;
        let id = pmf_id(&joint);
        regions.push(project_region_with(&system, &id, &budget)?);
        systems.push((id, system));
    }
    let region = union_regions(&regions);
    let verified = region.verify(&systems);
    let stem = args.out.join(&args.name);
    let json = serde_json::json!({ "budget": budget, "region": region });
    write_file(&stem.with_extension("json"), &serde_json::to_string_pretty(&json)?)?;
    write_file(&stem.with_extension("off"), &region.hull.to_off())?;
    write_file(&stem.with_extension("csv"), &region_csv(&region)?)?;
    eprintln!(
        "{} points ({} re-verified), hull dimension {}, {} vertices, budget exceeded: {}",
        region.points.len(),
        verified,
        region.hull.dimension,
        region.hull.vertices.len(),
        region.budget_exceeded
    );
    Ok(pass_fail(verified == region.points.len()))
}

fn verify(check: Check, inputs: &Inputs, directions: usize, seed: u64, budget: Option<&Path>) -> anyhow::Result<u8> {
    let joint = load_joint(inputs)?;
    let passed = match check {
        Check::Identities => {
            let reports = (0..USERS).map(|l| verify_identity_chain(&joint, l, true)).collect::<Result<Vec<_>, _>>()?;
            print_json(&reports);
            reports.iter().all(|r| r.passed(IDENTITY_TOL))
        }
        Check::Noiseless => {
            let r = verify_noiseless(&joint, true)?;
            print_json(&r);
            r.passed(IDENTITY_TOL)
        }
        Check::Tin => {
            let system = RateSystem::new(&joint)?;
            let report = tin_point(&joint, &system)?;
            let (deficit, failure) = tin_inclusion(&joint, &sample_directions(directions, USERS, seed), &load_budget(budget)?)?;
            print_json(&serde_json::json!({ "tin": report, "deficit": deficit, "failure": failure }));
            failure.is_none()
        }
        Check::Hk => {
            let mut b = load_budget(budget)?;
            b.seed = seed;
            if !joint.channel().is_third_pair_degenerate() {
                return Err(anyhow!("the hk check needs a channel whose third pair is degenerate"));
            }
            let (region, cmp) = hk_comparison(&joint, &sample_directions(directions, 2, seed), &b)?;
            let oracle = ic3region::region::hk_oracle(&joint)?;
            print_json(&serde_json::json!({ "comparison": cmp, "oracle_vertices": hk_vertices(&oracle)?, "points": region.points.len() }));
            cmp.passed(INCLUSION_TOL)
        }
    };
    Ok(pass_fail(passed))
}

/// Support function of the hull stored in a region artifact.
fn artifact_vertices(path: &Path) -> anyhow::Result<Vec<[f64; USERS]>> {
    let v: Value = read_json_file(path)?;
    let verts = v
        .pointer("/region/hull/vertices")
        .or_else(|| v.pointer("/hull/vertices"))
        .ok_or_else(|| anyhow!("{}: no region hull found", path.display()))?;
    serde_json::from_value(verts.clone()).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn support(vertices: &[[f64; USERS]], d: &[f64; USERS]) -> f64 {
    vertices.iter().map(|v| v.iter().zip(d).map(|(a, b)| a * b).sum()).fold(f64::NEG_INFINITY, f64::max)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Validate { channel } => {
            let ch = load_channel(&channel)?;
            let a = ch.alphabets();
            println!("valid: |X| = {:?}, |S| = {:?}, |S'| = {:?}, |Y| = {:?}", a.x, a.s, a.s_noisy, a.y);
            println!("noiseless: {}, degenerate third pair: {}", ch.is_noiseless(), ch.is_third_pair_degenerate());
            Ok(0)
        }
        Command::Measures(inputs) => {
            print_json(&measures(&load_joint(&inputs)?)?);
            Ok(0)
        }
        Command::Constraints { inputs, receiver, variant } => {
            let joint = load_joint(&inputs)?;
            let variant = match variant {
                Variant::Noisy => TermVariant::Noisy,
                Variant::Separate => TermVariant::Separate,
            };
            let receivers: Vec<usize> = match receiver {
                Some(r) if (1..=USERS).contains(&r) => vec![r - 1],
                Some(r) => return Err(anyhow!("receiver must be 1, 2 or 3, got {r}")),
                None => (0..USERS).collect(),
            };
            for l in receivers {
                print!("{}", receiver_system_with(&joint, l, variant)?.render());
            }
            Ok(0)
        }
        Command::Member { inputs, rates, list_coords } => {
            if list_coords {
                println!("{}", coord_names().join(","));
                return Ok(0);
            }
            let rates = rates.ok_or_else(|| anyhow!("--rates is required"))?;
            let r = parse_rates(&rates)?;
            let joint = load_joint(&inputs)?;
            let report = check_membership(&RateSystem::new(&joint)?, &r);
            print_json(&report);
            Ok(pass_fail(report.member))
        }
        Command::Project(args) => project(&args),
        Command::Verify { check, inputs, directions, seed, budget } => verify(check, &inputs, directions, seed, budget.as_deref()),
        Command::Compare { a, b, directions, seed, tol } => {
            let (va, vb) = (artifact_vertices(&a)?, artifact_vertices(&b)?);
            if va.is_empty() || vb.is_empty() {
                bail!("cannot compare an empty region");
            }
            let report = compare_regions(|d| support(&va, d), |d| support(&vb, d), &sample_directions(directions, USERS, seed));
            print_json(&serde_json::json!({
                "report": report,
                "a_in_b": report.a_in_b(tol),
                "b_in_a": report.b_in_a(tol),
            }));
            Ok(pass_fail(report.a_in_b(tol) && report.b_in_a(tol)))
        }
        Command::Generate(Generate::Modulo { q, flip, two_pair }) => {
            let flip: Prob = flip.parse()?;
            let spec = build_modulo_example(q, flip)?;
            let spec = if two_pair { degenerate_third_pair(&spec) } else { spec };
            println!("{}", spec.to_json_string());
            Ok(0)
        }
        Command::Generate(Generate::Pmf { channel, seed, layered }) => {
            let ch = load_channel(&channel)?;
            let x = ch.alphabets().x;
            let p_x: [Vec<Prob>; USERS] = match seed {
                Some(s) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(s);
                    x.map(|n| random_row(&mut rng, n, true))
                }
                None => x.map(|n| vec![Prob::ratio(1, n as i64); n]),
            };
            let pmf = if layered { hk_layered_input(&ch, p_x) } else { InputPmf::u_equals_x(p_x) };
            print_json(&pmf);
            Ok(0)
        }
        Command::Suite { config, out, seed, pmf_samples, print_config } => {
            let mut cfg = match config {
                Some(p) => SuiteConfig::from_file(&p)?,
                None => SuiteConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = pmf_samples {
                cfg.pmf_samples = n;
            }
            if print_config {
                println!("{}", cfg.to_json_string());
                return Ok(0);
            }
            let manifest = run_suite(&cfg, &out)?;
            for c in &manifest.checks {
                println!("{:<16} {} ({} instances, worst {:e})", c.name, if c.passed { "pass" } else { "FAIL" }, c.instances, c.worst);
                for f in &c.failures {
                    println!("    {f}");
                }
            }
            println!("manifest: {}", out.join("manifest.json").display());
            Ok(manifest.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(INPUT_ERROR_EXIT as u8)
        }
    }
}
