use proptest::prelude::*;

use novistoke::corpus::{random_arc, random_factor, random_small_factor, rng};
use novistoke::oracle::{oracle_dominance, oracle_hom, OracleGrid};
use novistoke::sector::{dominance, standard_cover, stokes_directions, DominanceVerdict, Region};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn negation_flips_negative_divergence(seed in any::<u64>()) {
        let mut g = rng(seed);
        let phi = random_factor(&mut g);
        let region = Region::Sector(random_arc(&mut g));
        if dominance(&phi, &region).unwrap() == DominanceVerdict::NegDivergent {
            prop_assert_eq!(dominance(&-&phi, &region).unwrap(), DominanceVerdict::PosDivergent);
        }
    }

    #[test]
    fn stokes_directions_ignore_argument_order(seed in any::<u64>()) {
        let mut g = rng(seed);
        let (a, b) = (random_factor(&mut g), random_factor(&mut g));
        prop_assume!(a != b);
        prop_assert_eq!(stokes_directions(&a, &b).unwrap(), stokes_directions(&b, &a).unwrap());
    }

    #[test]
    fn symbolic_verdict_matches_sampling(seed in any::<u64>()) {
        let mut g = rng(seed);
        let phi = random_small_factor(&mut g);
        let region = Region::Sector(random_arc(&mut g));
        // the oracle samples the closed arc, so an endpoint zero reads as bounded;
        // compare the hom dimensions the two verdicts imply
        let sampled = oracle_dominance(&phi, &region, OracleGrid::default());
        if let Some(h) = oracle_hom(sampled) {
            let exact = dominance(&phi, &region).unwrap();
            prop_assert_eq!(usize::from(exact.is_bounded_above()), h, "{} on {}", phi, region);
        }
    }

    #[test]
    fn standard_cover_arcs_get_definite_verdicts(seed in any::<u64>()) {
        let mut g = rng(seed);
        let factors: Vec<_> = (0..3).map(|_| random_small_factor(&mut g)).collect();
        let cover = standard_cover(&factors).unwrap();
        for arc in cover.arcs().iter().chain(&cover.overlaps()) {
            for a in &factors {
                for b in &factors {
                    let v = dominance(&(a - b), &Region::Sector(arc.clone()));
                    prop_assert!(v.is_ok(), "{} - {} on {}", a, b, arc);
                }
            }
        }
    }
}
