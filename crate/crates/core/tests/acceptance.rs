//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::path::Path;
use std::time::Instant;

use common::{lifts, random_open_system, sample_points, uniform_joint};
use ic3region::channel::{build_modulo_example, degenerate_third_pair, random_channel, random_row, validate_channel, RandomChannelConfig, USERS};
use ic3region::constraints::{alternatives_for, receiver_system, TermVariant};
use ic3region::identities::{verify_identity_chain, verify_noiseless};
use ic3region::pmf::{build_full_joint, InputPmf};
use ic3region::polytope::{fm_eliminate_all, FmOptions, RatePolyhedron};
use ic3region::rational::Prob;
use ic3region::region::{
    hk_layered_input, pmf_id, project_region_with, sample_directions, union_regions, RateSystem, Region3, RegionBudget,
    INCLUSION_TOL,
};
use ic3region::suite::{hk_comparison, run_suite, tin_inclusion, ModuloInstance, SuiteConfig, IDENTITY_TOL, TIN_TOL};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DIRECTIONS: usize = 64;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn identity_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst, mut inexact, mut failed) = (0.0f64, 0, 0);
    let instances = 100;
    for _ in 0..instances {
        let channel = validate_channel(random_channel(&mut rng, &RandomChannelConfig::default())).unwrap();
        let pmf = InputPmf::random_rational(&mut rng, 2, [2; USERS], channel.alphabets().x);
        let joint = build_full_joint(&pmf, &channel).unwrap();
        for l in 0..USERS {
            let r = verify_identity_chain(&joint, l, true).unwrap();
            worst = worst.max(r.max_discrepancy);
            if r.exact != Some(true) {
                inexact += 1;
            }
            if !r.passed(IDENTITY_TOL) {
                failed += 1;
            }
        }
    }
    outcome(
        failed == 0 && inexact == 0,
        format!("{instances} instances, max float discrepancy {worst:.2e} (< {IDENTITY_TOL:e}), {inexact} receivers not exactly equal"),
    )
}

fn constraint_fidelity() -> Outcome {
    let joint = uniform_joint(2, "1/10");
    let sys = receiver_system(&joint, 0).unwrap();
    let c = sys.condition(3, 3, 2);
    let rates: Vec<String> = c.alternatives.iter().map(|a| a.rate.pretty()).collect();
    let sets: Vec<String> = c.alternatives.iter().map(|a| a.conditioning().to_string()).collect();
    let sixth_zero = c.alternatives.len() == 6 && c.alternatives[5].term.evaluate_exact(&joint).unwrap().is_some_and(|v| v.is_zero());
    let counts: Vec<usize> = (1..=3)
        .flat_map(|j| (1..=3).map(move |k| alternatives_for(TermVariant::Noisy, 0, j, k).unwrap().len()))
        .collect();
    let ok = c.base.pretty() == "R11 + R\u{303}13"
        && rates == ["0", "R20", "R20 + R\u{303}21", "R\u{303}31", "R20 + R\u{303}31", "R20 + R\u{303}21 + R\u{303}31"]
        && sets == ["Q,U3", "Q,U2,U3", "Q,U3,X2", "Q,X3", "Q,U2,X3", "Q,X2,X3"]
        && sixth_zero
        && counts == [1, 2, 3, 2, 4, 6, 3, 6, 9];
    outcome(ok, format!(
            "(3,3,2) alternatives [{}] over [{}], sixth term exactly zero: {sixth_zero}, counts {counts:?}",
            rates.join("; "),
            sets.join("; ")
        ))
}

fn noiseless_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut terms, mut failed) = (0, 0);
    let instances = 20;
    for _ in 0..instances {
        let cfg = RandomChannelConfig { noiseless: true, ..RandomChannelConfig::default() };
        let channel = validate_channel(random_channel(&mut rng, &cfg)).unwrap();
        let pmf = InputPmf::random_rational(&mut rng, 2, [2; USERS], channel.alphabets().x);
        let r = verify_noiseless(&build_full_joint(&pmf, &channel).unwrap(), true).unwrap();
        terms += r.terms;
        if r.exact != Some(true) || !r.failures.is_empty() {
            failed += 1;
        }
    }
    outcome(failed == 0, format!("{instances} deterministic instances, {terms} terms, {failed} instances not exactly equal"))
}

fn tin_suite(budget: &RegionBudget) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let directions = sample_directions(DIRECTIONS, USERS, 404);
    let (mut worst, mut failures) = (0.0f64, Vec::new());
    let instances = 50;
    for n in 0..instances {
        let channel = validate_channel(random_channel(&mut rng, &RandomChannelConfig::default())).unwrap();
        let pmf = InputPmf::random_u_equals_x(&mut rng, channel.alphabets().x);
        let (deficit, fail) = tin_inclusion(&build_full_joint(&pmf, &channel).unwrap(), &directions, budget).unwrap();
        worst = worst.max(deficit);
        if let Some(f) = fail {
            failures.push(format!("#{n}: {f}"));
        }
    }
    outcome(
        failures.is_empty(),
        format!("{instances} instances, worst TIN-box excess {worst:.2e} (≤ {TIN_TOL:e}) along {DIRECTIONS} directions {failures:?}"),
    )
}

fn hk_suite(budget: &RegionBudget, regions: &mut Vec<(Region3, Vec<(String, RateSystem)>)>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let directions = sample_directions(DIRECTIONS, 2, 505);
    let (mut worst, mut failures, mut instances) = (0.0f64, Vec::new(), 0);
    for q in [2, 3] {
        for flip in ["0", "1/10", "1/5", "1/2"] {
            let spec = degenerate_third_pair(&build_modulo_example(q, flip.parse().unwrap()).unwrap());
            let channel = validate_channel(spec).unwrap();
            for _ in 0..if q == 2 { 2 } else { 1 } {
                let p_x: [Vec<Prob>; USERS] = std::array::from_fn(|l| {
                    let size = channel.alphabets().x[l];
                    if l < 2 {
                        random_row(&mut rng, size, true)
                    } else {
                        vec![Prob::one(); size]
                    }
                });
                let joint = build_full_joint(&hk_layered_input(&channel, p_x), &channel).unwrap();
                let (region, cmp) = hk_comparison(&joint, &directions, budget).unwrap();
                instances += 1;
                worst = worst.max(cmp.worst());
                if !cmp.passed(INCLUSION_TOL) {
                    failures.push(format!("q={q} flip={flip}: {cmp:?}"));
                }
                regions.push((region, vec![(pmf_id(&joint), RateSystem::new(&joint).unwrap())]));
            }
        }
    }
    outcome(
        failures.is_empty() && instances >= 10,
        format!("{instances} two-pair instances, worst mutual deficit {worst:.2e} (≤ {INCLUSION_TOL:e}) along {DIRECTIONS} directions {failures:?}"),
    )
}

/// One random system, its projection, and how many sampled points disagree
/// with lift-feasibility of the original.
fn fm_disagreements(rng: &mut ChaCha8Rng, points: usize) -> (usize, usize) {
    let n = rng.random_range(2..=8);
    let k = rng.random_range(1..=3.min(n - 1));
    let rows = rng.random_range(4..=20);
    let poly = random_open_system(rng, n, rows, 0.6);
    let vars: Vec<String> = poly.vars[..k].to_vec();
    let out = fm_eliminate_all(&poly, &vars, &FmOptions::default()).unwrap();
    let keep: Vec<usize> = (k..n).collect();
    let mut bad = 0;
    let mut inside = 0;
    for p in sample_points(rng, &poly, &keep, points) {
        let projected = out.poly.contains(&p).unwrap();
        let lifted = match projected {
            true => out.lift(&p).is_some_and(|x| poly.contains(&x).unwrap()),
            false => lifts(&poly, &keep, &p),
        };
        // a point the projection accepts must come with a witness; one it
        // rejects must not extend
        if projected != lifted || (projected && !lifts(&poly, &keep, &p)) {
            bad += 1;
        }
        inside += usize::from(projected);
    }
    (bad, inside)
}

fn order_disagreements(rng: &mut ChaCha8Rng, points: usize) -> usize {
    let n = rng.random_range(5..=8);
    let rows = rng.random_range(8..=16);
    let poly = random_open_system(rng, n, rows, 0.6);
    let vars: Vec<String> = poly.vars[..3].to_vec();
    let mut shuffled = vars.clone();
    shuffled.shuffle(rng);
    let mut reversed = vars.clone();
    reversed.reverse();
    let outs: Vec<RatePolyhedron> = [vars.clone(), reversed, shuffled]
        .into_iter()
        .map(|order| fm_eliminate_all(&poly, &vars, &FmOptions { order: Some(order), ..FmOptions::default() }).unwrap().poly)
        .collect();
    let keep: Vec<usize> = (3..n).collect();
    sample_points(rng, &poly, &keep, points)
        .iter()
        .filter(|p| {
            let first = outs[0].contains(p).unwrap();
            outs[1..].iter().any(|o| o.contains(p).unwrap() != first)
        })
        .count()
}

fn fm_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (systems, points) = (200, 500);
    let (mut bad, mut inside) = (0, 0);
    for _ in 0..systems {
        let (b, i) = fm_disagreements(&mut rng, points);
        bad += b;
        inside += i;
    }
    let order_systems = 20;
    let order_bad: usize = (0..order_systems).map(|_| order_disagreements(&mut rng, points)).sum();
    outcome(
        bad == 0 && order_bad == 0,
        format!(
            "{systems} systems × {points} points: {bad} disagreements ({inside} inside); order independence on {order_systems} systems: {order_bad} disagreements"
        ),
    )
}

fn soundness(budget: &RegionBudget, mut regions: Vec<(Region3, Vec<(String, RateSystem)>)>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    for q in [2, 3] {
        for flip in ["0", "1/10", "1/2"] {
            let channel = validate_channel(build_modulo_example(q, flip.parse().unwrap()).unwrap()).unwrap();
            let mut parts = Vec::new();
            let mut systems = Vec::new();
            for _ in 0..2 {
                let pmf = InputPmf::random_dirichlet_u_equals_x(&mut rng, 1, channel.alphabets().x);
                let joint = build_full_joint(&pmf, &channel).unwrap();
                let system = RateSystem::new(&joint).unwrap();
                let id = pmf_id(&joint);
                parts.push(project_region_with(&system, &id, budget).unwrap());
                systems.push((id, system));
            }
            regions.push((union_regions(&parts), systems));
        }
    }
    let total: usize = regions.iter().map(|(r, _)| r.points.len()).sum();
    let verified: usize = regions.iter().map(|(r, s)| r.verify(s)).sum();
    outcome(total > 0 && verified == total, format!("{} regions, {verified}/{total} boundary samples re-verified", regions.len()))
}

fn read_tree(dir: &Path, rel: &str, out: &mut Vec<(String, Vec<u8>)>) {
    let mut entries: Vec<_> = std::fs::read_dir(dir.join(rel)).unwrap().map(|e| e.unwrap()).collect();
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let name = format!("{rel}{}", e.file_name().to_string_lossy());
        if e.file_type().unwrap().is_dir() {
            read_tree(dir, &format!("{name}/"), out);
        } else if name != "manifest.json" {
            out.push((name.clone(), std::fs::read(dir.join(&name)).unwrap()));
        }
    }
}

fn determinism() -> Outcome {
    let config = SuiteConfig {
        seed: 8,
        modulo: vec![ModuloInstance { q: 2, flip: Prob::ratio(1, 10) }, ModuloInstance { q: 3, flip: Prob::zero() }],
        pmf_samples: 3,
        random_identity_channels: 3,
        noiseless_channels: 3,
        hk_samples: 1,
        region_samples: 2,
        directions: 16,
        budget: RegionBudget { rays: 8, ..RegionBudget::default() },
        ..SuiteConfig::default()
    };
    let base = std::env::temp_dir().join(format!("ic3region-acceptance-{}", std::process::id()));
    let runs: Vec<_> = (0..2)
        .map(|i| {
            let dir = base.join(format!("run{i}"));
            let manifest = run_suite(&config, &dir).unwrap();
            let mut files = Vec::new();
            read_tree(&dir, "", &mut files);
            (manifest, files)
        })
        .collect();
    let _ = std::fs::remove_dir_all(&base);
    let same_manifest = runs[0].0.without_timing() == runs[1].0.without_timing();
    let same_files = runs[0].1 == runs[1].1;
    outcome(
        same_manifest && same_files && runs[0].0.passed,
        format!(
            "manifests equal without timing: {same_manifest}, {} artifact files byte-identical: {same_files}, suite passed: {}",
            runs[0].1.len(),
            runs[0].0.passed
        ),
    )
}

fn main() {
    let budget = RegionBudget { rays: 16, ..RegionBudget::default() };
    let mut regions = Vec::new();
    let criteria: Vec<(&str, Box<dyn FnOnce(&mut Vec<_>) -> Outcome>)> = vec![
        ("identity suite", Box::new(|_| identity_suite())),
        ("constraint fidelity", Box::new(|_| constraint_fidelity())),
        ("noiseless reduction", Box::new(|_| noiseless_reduction())),
        ("TIN inclusion", Box::new(|_| tin_suite(&budget))),
        ("two-pair recovery", Box::new(|r| hk_suite(&budget, r))),
        ("FM correctness", Box::new(|_| fm_correctness())),
        ("soundness", Box::new(|r| soundness(&budget, std::mem::take(r)))),
        ("determinism", Box::new(|_| determinism())),
    ];
    let mut all = true;
    for (n, (name, run)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let o = run(&mut regions);
        all &= o.passed;
        println!(
            "criterion {}: {} {name} [{:.1}s] {}",
            n + 1,
            if o.passed { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if !all {
        std::process::exit(1);
    }
}
