use proptest::prelude::*;

use novistoke::complex::{
    classical_image, classical_is_perverse, hom_complex, is_perverse, open_restriction, recollement,
    stalk_at_puncture, truncate, verdier_dual, Perversity, TruncationSide,
};
use novistoke::corpus::{random_complex, random_perverse_complex, rng};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn double_dual_is_identity(seed in any::<u64>()) {
        let c = random_complex(&mut rng(seed));
        prop_assert_eq!(verdier_dual(&verdier_dual(&c)), c);
    }

    #[test]
    fn dual_turns_shifts_around(seed in any::<u64>(), k in -3i64..=3) {
        let c = random_complex(&mut rng(seed));
        prop_assert_eq!(verdier_dual(&c.shift(k)), verdier_dual(&c).shift(-k));
        prop_assert_eq!(c.shift(k).shift(-k), c);
    }

    #[test]
    fn truncations_split_the_complex(seed in any::<u64>()) {
        let c = random_complex(&mut rng(seed));
        let (low, high) = (truncate(&c, TruncationSide::LeZero), truncate(&c, TruncationSide::GeOne));
        prop_assert_eq!(low.direct_sum(&high), c);
        prop_assert_eq!(truncate(&low, TruncationSide::LeZero), low.clone());
        prop_assert!(truncate(&low, TruncationSide::GeOne).is_zero());
        prop_assert_eq!(hom_complex(&low, &high).unwrap().get(&0).copied().unwrap_or(0), 0);
    }

    #[test]
    fn recollement_keeps_open_part_and_stalk(seed in any::<u64>()) {
        let c = random_complex(&mut rng(seed));
        let r = recollement(&c).unwrap();
        let ranks = |v: Vec<(i64, novistoke::irregular::StokesLocalSystem)>| {
            v.into_iter().map(|(d, l)| (d, l.rank())).collect::<Vec<_>>()
        };
        prop_assert_eq!(ranks(open_restriction(&r.open)), ranks(open_restriction(&c)));
        prop_assert!(stalk_at_puncture(&r.open).unwrap().is_empty());
        prop_assert_eq!(stalk_at_puncture(&r.closed).unwrap(), stalk_at_puncture(&c).unwrap());
        prop_assert!(open_restriction(&r.closed).is_empty());
    }

    #[test]
    fn perversity_agrees_with_the_classical_image(seed in any::<u64>()) {
        let c = random_complex(&mut rng(seed));
        let ours = matches!(is_perverse(&c).unwrap(), Perversity::Yes);
        prop_assert_eq!(ours, classical_is_perverse(&classical_image(&c)));
    }

    #[test]
    fn perverse_degrees_give_perverse_complexes(seed in any::<u64>()) {
        let c = random_perverse_complex(&mut rng(seed));
        prop_assert_eq!(is_perverse(&c).unwrap(), Perversity::Yes);
        prop_assert_eq!(is_perverse(&verdier_dual(&c)).unwrap(), Perversity::Yes);
    }
}
