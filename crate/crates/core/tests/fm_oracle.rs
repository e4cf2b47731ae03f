mod common;

use common::{lifts, random_system, sample_points};
use ic3region::polytope::{fm_eliminate, fm_eliminate_all, FmOptions};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn check_projection(seed: u64, eliminate: usize, points: usize) -> Result<(), TestCaseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(eliminate + 1..=6);
    let rows = rng.random_range(3..=12);
    let poly = random_system(&mut rng, n, rows);
    let vars: Vec<String> = poly.vars[..eliminate].to_vec();
    let out = fm_eliminate_all(&poly, &vars, &FmOptions::default()).unwrap();
    let keep: Vec<usize> = (eliminate..n).collect();
    for p in sample_points(&mut rng, &poly, &keep, points) {
        let projected = out.poly.contains(&p).unwrap();
        prop_assert_eq!(projected, lifts(&poly, &keep, &p), "point {:?}", p);
        if projected {
            let full = out.lift(&p);
            prop_assert!(full.is_some_and(|x| poly.contains(&x).unwrap()));
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn single_elimination_matches_lifting(seed in any::<u64>()) {
        check_projection(seed, 1, 40)?;
    }

    #[test]
    fn multi_elimination_matches_lifting(seed in any::<u64>(), k in 2usize..=3) {
        check_projection(seed, k, 30)?;
    }

    #[test]
    fn elimination_order_does_not_matter(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let poly = random_system(&mut rng, 5, 10);
        let vars: Vec<String> = poly.vars[..3].to_vec();
        let mut reversed = vars.clone();
        reversed.reverse();
        let a = fm_eliminate_all(&poly, &vars, &FmOptions { order: Some(vars.clone()), ..FmOptions::default() }).unwrap();
        let b = fm_eliminate_all(&poly, &vars, &FmOptions { order: Some(reversed), ..FmOptions::default() }).unwrap();
        for p in sample_points(&mut rng, &poly, &[3, 4], 60) {
            prop_assert_eq!(a.poly.contains(&p).unwrap(), b.poly.contains(&p).unwrap());
        }
    }

    #[test]
    fn chernikov_pruning_keeps_the_projection(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let poly = random_system(&mut rng, 5, 8);
        let vars: Vec<String> = poly.vars[..3].to_vec();
        let opts = FmOptions { redundancy_threshold: 30, ..FmOptions::default() };
        let a = fm_eliminate_all(&poly, &vars, &opts).unwrap();
        let b = fm_eliminate_all(&poly, &vars, &FmOptions { chernikov: false, ..opts }).unwrap();
        for p in sample_points(&mut rng, &poly, &[3, 4], 40) {
            prop_assert_eq!(a.poly.contains(&p).unwrap(), b.poly.contains(&p).unwrap());
        }
    }
}

#[test]
fn eliminating_an_unknown_variable_fails() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let poly = random_system(&mut rng, 3, 4);
    assert!(fm_eliminate(&poly, "y").is_err());
}
