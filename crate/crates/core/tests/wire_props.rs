use std::path::PathBuf;

use proptest::prelude::*;
use serde_json::json;

use novistoke::corpus::{random_arc, random_barcode, random_factor, rng};
use novistoke::par::Execution;
use novistoke::scenario::{run_scenario, Scenario};
use novistoke::wire::{arc_json, barcode_json, build_barcode, factor_json, WireBarcode, WireFactor};

fn generated_scenario(seed: u64) -> String {
    let mut g = rng(seed);
    let factors: serde_json::Map<_, _> =
        (0..3).map(|i| (format!("f{i}"), factor_json(&random_factor(&mut g)))).collect();
    let regions: serde_json::Map<_, _> =
        (0..2).map(|i| (format!("r{i}"), json!({"arc": arc_json(&random_arc(&mut g))}))).collect();
    let barcodes: serde_json::Map<_, _> =
        (0..2).map(|i| (format!("b{i}"), barcode_json(&random_barcode(&mut g, 3)))).collect();
    let c = |f: &str, r: &str| json!({"factor": f, "region": r});
    let doc = json!({
        "version": 1,
        "factors": factors,
        "regions": regions,
        "barcodes": barcodes,
        "commands": [
            {"op": "dominance", "args": {"factor": "f0", "region": "r0"}},
            {"op": "stokes", "args": {"factors": ["f0", "f1", "f2"]}},
            {"id": "h", "op": "hom_constant", "args": {"source": c("f1", "r1"), "target": c("f2", "r1")}},
            {"op": "tensor", "args": {"a": c("f0", "r0"), "b": c("f1", "r0")}},
            {"op": "barcode_hom", "args": {"source": "b0", "target": "b1"}},
            {"op": "barcode_dual", "args": {"barcode": "b1"}},
        ],
    });
    serde_json::to_string(&doc).unwrap()
}

fn assert_stable(text: &str) {
    let sc = Scenario::parse(text).unwrap();
    let canon = sc.canonical();
    let again = Scenario::parse(&canon).unwrap();
    assert_eq!(again, sc);
    assert_eq!(again.canonical(), canon);
    assert_eq!(again.hash(), sc.hash());
    let seq = run_scenario(&sc, None, Execution::Sequential).to_json();
    assert_eq!(run_scenario(&again, None, Execution::Parallel).to_json(), seq);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn factors_round_trip_through_json(seed in any::<u64>()) {
        let f = random_factor(&mut rng(seed));
        let w: WireFactor = serde_json::from_value(factor_json(&f)).unwrap();
        prop_assert_eq!(w.build().unwrap(), f);
    }

    #[test]
    fn barcodes_round_trip_through_json(seed in any::<u64>()) {
        let b = random_barcode(&mut rng(seed), 4);
        let w: WireBarcode = serde_json::from_value(barcode_json(&b)).unwrap();
        prop_assert_eq!(build_barcode(&w), b);
    }

    #[test]
    fn generated_scenarios_are_canonical_and_stable(seed in any::<u64>()) {
        assert_stable(&generated_scenario(seed));
    }
}

#[test]
fn shipped_scenarios_are_canonical_and_stable() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            assert_stable(&std::fs::read_to_string(&path).unwrap());
            n += 1;
        }
    }
    assert!(n > 0);
}
