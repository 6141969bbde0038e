use std::collections::BTreeMap;

use num_traits::Zero;
use proptest::prelude::*;
use rand::Rng;

use novistoke::barcode::{hom_degree, hom_reduced, tensor, Barcode, GradedMorphism, Interval};
use novistoke::corpus::{random_barcode, random_graded_morphism, rng};
use novistoke::error::Error;
use novistoke::field::{q, FieldScalar, Q};
use novistoke::linalg::Matrix;

fn morphism_between<R: Rng>(g: &mut R, source: &Barcode, target: &Barcode, degree: Q) -> GradedMorphism {
    let mut m = Matrix::zeros(target.len(), source.len());
    for j in 0..target.len() {
        for i in 0..source.len() {
            m.set(j, i, FieldScalar::from_int(g.gen_range(-2..=2)));
        }
    }
    loop {
        match GradedMorphism::new(source.clone(), target.clone(), degree.clone(), m.clone()) {
            Ok(f) => return f,
            Err(Error::ForbiddenEntry { row, col, .. }) => m.set(row, col, FieldScalar::zero()),
            Err(e) => panic!("{e}"),
        }
    }
}

/// Intervals keyed by death, births sorted; free intervals under `None`.
fn by_death(b: &Barcode) -> BTreeMap<Option<Q>, Vec<Q>> {
    let mut m: BTreeMap<Option<Q>, Vec<Q>> = BTreeMap::new();
    for i in b.intervals() {
        m.entry(i.death()).or_default().push(i.birth().clone());
    }
    for v in m.values_mut() {
        v.sort();
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tensor_is_symmetric_associative_and_unital(seed in any::<u64>()) {
        let mut g = rng(seed);
        let (a, b, c) = (random_barcode(&mut g, 3), random_barcode(&mut g, 3), random_barcode(&mut g, 3));
        prop_assert_eq!(tensor(&a, &b), tensor(&b, &a));
        prop_assert_eq!(tensor(&tensor(&a, &b), &c), tensor(&a, &tensor(&b, &c)));
        prop_assert_eq!(tensor(&Barcode::free(Q::from_integer(0.into())), &a), a);
    }

    #[test]
    fn reduced_hom_matches_high_degree_homs(seed in any::<u64>()) {
        let mut g = rng(seed);
        let (v, w) = (random_barcode(&mut g, 4), random_barcode(&mut g, 4));
        // all births and lengths stay below 6, so degree 100 is past every torsion window
        let far = hom_degree(&v, &w, &q(100, 1)).len();
        prop_assert_eq!(hom_reduced(&v, &w).len(), far);
    }

    #[test]
    fn composition_adds_degrees_and_commutes_with_t(seed in any::<u64>()) {
        let mut g = rng(seed);
        let f = random_graded_morphism(&mut g);
        let x = random_barcode(&mut g, 3);
        let dh = q(g.gen_range(-2..=2), 4);
        let h = morphism_between(&mut g, f.target(), &x, dh);
        let a = q(g.gen_range(0..=4), 4);
        let gf = f.then(&h).unwrap();
        prop_assert_eq!(gf.degree(), &(f.degree() + h.degree()));
        prop_assert_eq!(f.t_multiple(&a).then(&h).unwrap(), gf.t_multiple(&a));
    }

    #[test]
    fn kernel_of_t_multiple_differs_by_short_torsion(seed in any::<u64>()) {
        let mut g = rng(seed);
        let f = random_graded_morphism(&mut g);
        let a = q(g.gen_range(0..=8), 4);
        let (k1, k2) = (by_death(&f.kernel()), by_death(&f.t_multiple(&a).kernel()));
        let empty = Vec::new();
        for d in k1.keys().chain(k2.keys()) {
            let (b1, b2) = (k1.get(d).unwrap_or(&empty), k2.get(d).unwrap_or(&empty));
            let m = b1.len().min(b2.len());
            for (x, y) in b1[..m].iter().zip(&b2[..m]) {
                prop_assert!(y <= x && x - y <= a, "births {} and {}", x, y);
            }
            for b in b1[m..].iter().chain(&b2[m..]) {
                let d = d.as_ref().expect("free intervals pair up");
                prop_assert!(d - b <= a);
            }
        }
    }

    #[test]
    fn grading_shift_moves_every_birth(seed in any::<u64>()) {
        let mut g = rng(seed);
        let v = random_barcode(&mut g, 4);
        let a = q(g.gen_range(-4..=4), 4);
        let shifted = v.grading_shift(&a);
        let expect = Barcode::new(v.intervals().iter().map(|i| i.shifted_births(&-a.clone())).collect::<Vec<Interval>>());
        prop_assert_eq!(shifted.grading_shift(&-a.clone()), v);
        prop_assert_eq!(shifted, expect);
    }
}
