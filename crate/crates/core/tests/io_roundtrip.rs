mod common;

use ic3region::channel::{random_channel, ChannelSpec, RandomChannelConfig};
use ic3region::io::parse_json;
use ic3region::pmf::InputPmf;
use ic3region::polytope::RatePolyhedron;
use ic3region::region::SelectionAssignment;
use ic3region::suite::SuiteConfig;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn channels_round_trip(seed in any::<u64>(), exact in any::<bool>(), noiseless in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_channel(&mut rng, &RandomChannelConfig { max_input: 3, noiseless, exact });
        let back = ChannelSpec::from_json_str(&spec.to_json_string()).unwrap();
        prop_assert_eq!(back, spec);
    }

    #[test]
    fn pmfs_round_trip(seed in any::<u64>(), q in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pmf = if seed % 2 == 0 {
            InputPmf::random_rational(&mut rng, q, [2, 1, 3], [2, 3, 2])
        } else {
            InputPmf::random_dirichlet(&mut rng, q, [2, 2, 1], [3, 2, 2])
        };
        let back: InputPmf = parse_json(&serde_json::to_string(&pmf).unwrap()).unwrap();
        prop_assert_eq!(back, pmf);
    }

    #[test]
    fn polyhedra_round_trip(seed in any::<u64>(), n in 1usize..=5, rows in 0usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let poly = common::random_system(&mut rng, n, rows);
        prop_assert_eq!(RatePolyhedron::from_json(&poly.to_json()).unwrap(), poly);
    }

    #[test]
    fn selections_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sel = SelectionAssignment::treat_as_noise();
        for s in sel.perturbations() {
            if rng.random_bool(0.3) {
                sel = s;
            }
        }
        prop_assert_eq!(SelectionAssignment::parse(&sel.id()).unwrap(), sel);
        let json = serde_json::to_string(&sel).unwrap();
        prop_assert_eq!(serde_json::from_str::<SelectionAssignment>(&json).unwrap(), sel);
    }

    #[test]
    fn suite_configs_round_trip(seed in any::<u64>(), samples in 1usize..50, rays in 4usize..40) {
        let mut cfg = SuiteConfig { seed, pmf_samples: samples, ..SuiteConfig::default() };
        cfg.budget.rays = rays;
        let back: SuiteConfig = parse_json(&cfg.to_json_string()).unwrap();
        prop_assert_eq!(back.run_id(), cfg.run_id());
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn malformed_selection_ids_are_rejected() {
    for id in ["", "012135258", "012135258.012135258.01213525x", "912135258.012135258.012135258"] {
        assert!(SelectionAssignment::parse(id).is_err(), "{id}");
    }
}

#[test]
fn unknown_polyhedron_sense_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let text = common::random_system(&mut rng, 2, 1).to_json().replacen("\"<=\"", "\"<>\"", 1);
    assert!(RatePolyhedron::from_json(&text).is_err());
}
