// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, HashSet};

use bsdsynth::emit::{check_equivalence, CheckMode, DesignFile};
use bsdsynth::harness::exact_config;
use bsdsynth::oracle::TableOracle;
use bsdsynth::sampling::RngStream;
use bsdsynth::{builtin, learn, BitVec, LearnConfig, OracleHandle, Provenance, SampleSet};
use proptest::prelude::*;

fn table(n: usize, m: usize, f: &[Vec<bool>]) -> OracleHandle {
    let rows: BTreeMap<BitVec, BitVec> = (0..1usize << n)
        .map(|i| {
            let y: Vec<bool> = (0..m).map(|j| f[j][i]).collect();
            (BitVec::from_u128(i as u128, n), BitVec::from_bools(&y))
        })
        .collect();
    OracleHandle::new(TableOracle::new(n, m, rows))
}

/// Size of the reduced ordered diagram of `f` under `order`, terminals
/// included, counted from distinct cofactors level by level.
fn reference_size(f: &[bool], n: usize, order: &[usize]) -> usize {
    let mut nodes = 0;
    for k in 0..n {
        let mut seen: HashSet<Vec<bool>> = HashSet::new();
        for a in 0..1usize << k {
            let rest = n - k;
            let g: Vec<bool> = (0..1usize << rest)
                .map(|j| {
                    let mut x = 0usize;
                    for (t, &v) in order[..k].iter().enumerate() {
                        x |= (a >> t & 1) << v;
                    }
                    for (t, &v) in order[k..].iter().enumerate() {
                        x |= (j >> t & 1) << v;
                    }
                    f[x]
                })
                .collect();
            if (0..g.len()).step_by(2).any(|j| g[j] != g[j + 1]) {
                seen.insert(g);
            }
        }
        nodes += seen.len();
    }
    let terminals = [false, true].iter().filter(|v| f.contains(v)).count();
    nodes + terminals
}

fn full_order(order: &[usize], n: usize) -> Vec<usize> {
    let mut all = order.to_vec();
    all.extend((0..n).filter(|v| !order.contains(v)));
    all
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_regime_gives_the_reduced_diagram(n in 1usize..=6, seed in any::<u64>(), bits in prop::collection::vec(any::<bool>(), 64)) {
        let f: Vec<bool> = bits[..1 << n].to_vec();
        let oracle = table(n, 1, std::slice::from_ref(&f));
        let (d, report) = learn(&oracle, &SampleSet::new(n, 1), &exact_config(n, seed)).unwrap();
        for (i, &y) in f.iter().enumerate() {
            prop_assert_eq!(d.evaluate(&BitVec::from_u128(i as u128, n)).unwrap().get(0), y);
        }
        prop_assert!(d.is_canonical());
        let order = full_order(&report.clusters[0].order, n);
        prop_assert_eq!(d.node_count(), reference_size(&f, n, &order));
        prop_assert_eq!(report.final_nodes, d.node_count());
        prop_assert!(report.target_met);
    }

    #[test]
    fn small_multi_output_tables_are_learned_exactly(n in 2usize..=6, bits in prop::collection::vec(any::<bool>(), 3 * 64)) {
        let f: Vec<Vec<bool>> = (0..3).map(|j| bits[j * 64..j * 64 + (1 << n)].to_vec()).collect();
        let oracle = table(n, 3, &f);
        let (d, _) = learn(&oracle, &SampleSet::new(n, 3), &LearnConfig::default()).unwrap();
        let v = check_equivalence(&d, &oracle, CheckMode::Table, 1 << 20, &RngStream::new(0, "t", &[])).unwrap();
        prop_assert!(v.is_equivalent());
    }
}

#[test]
fn learning_is_reproducible() {
    let oracle = builtin("comparator:5").unwrap();
    let cfg = LearnConfig {
        seed: 11,
        ..LearnConfig::default()
    };
    let none = SampleSet::new(10, 3);
    let (a, ra) = learn(&oracle, &none, &cfg).unwrap();
    let (b, rb) = learn(&oracle, &none, &cfg).unwrap();
    assert_eq!(DesignFile::new(&a, Some(&cfg), None).to_json(), DesignFile::new(&b, Some(&cfg), None).to_json());
    assert_eq!(serde_json::to_string(&ra).unwrap(), serde_json::to_string(&rb).unwrap());
}

#[test]
fn seeds_change_sampling_but_not_exact_results() {
    let oracle = builtin("adder:4").unwrap();
    let none = SampleSet::new(8, 5);
    for seed in [1, 2, 3] {
        let cfg = LearnConfig {
            seed,
            ..LearnConfig::default()
        };
        let (d, report) = learn(&oracle, &none, &cfg).unwrap();
        let v = check_equivalence(&d, &oracle, CheckMode::Exhaustive, 1 << 20, &RngStream::new(0, "t", &[])).unwrap();
        assert!(v.is_equivalent(), "seed {seed}");
        assert!(report.target_met);
    }
}

fn alu_samples(count: usize) -> (OracleHandle, SampleSet) {
    let oracle = builtin("miniALU:3").unwrap();
    let (n, m) = (oracle.inputs(), oracle.outputs());
    let mut given = SampleSet::new(n, m);
    let mut rng = RngStream::new(5, "given", &[]).rng();
    for _ in 0..count {
        let x = bsdsynth::sampling::random_input(n, &mut rng);
        let y = oracle.query_one(&x).unwrap();
        given.push(x, y, Provenance::Given).unwrap();
    }
    (oracle, given)
}

#[test]
fn given_samples_are_reproduced_with_few_probes() {
    let (oracle, given) = alu_samples(40);
    let cfg = LearnConfig {
        spec_samples: 16,
        ordering_samples: 16,
        merge_samples: 16,
        ..LearnConfig::default()
    };
    let (d, report) = learn(&oracle, &given, &cfg).unwrap();
    assert_eq!(report.given_correct, report.given_samples);
    for s in &given {
        assert_eq!(d.evaluate(&s.input).unwrap(), s.output);
    }
}

#[test]
fn width_cap_shortfall_is_flagged() {
    let (oracle, given) = alu_samples(40);
    let cfg = LearnConfig {
        spec_samples: 16,
        ordering_samples: 16,
        merge_samples: 16,
        width_cap: 8,
        ..LearnConfig::default()
    };
    let (d, report) = learn(&oracle, &given, &cfg).unwrap();
    let reproduced = given.iter().filter(|s| d.evaluate(&s.input).unwrap() == s.output).count();
    assert_eq!(report.given_correct, reproduced);
    assert!(reproduced < given.len());
    assert!(!report.target_met);
    assert!(report.warnings.iter().any(|w| w.contains("given samples not reproduced")));
    assert!(report.clusters.iter().any(|c| c.stop == Some(bsdsynth::engine::StopReason::WidthCap)));
}

#[test]
fn reference_size_of_small_functions() {
    // x0 | x1
    assert_eq!(reference_size(&[false, true, true, true], 2, &[0, 1]), 4);
    // x0 ^ x1 ^ x2 needs two nodes per inner level
    let parity: Vec<bool> = (0..8u32).map(|i| i.count_ones() % 2 == 1).collect();
    assert_eq!(reference_size(&parity, 3, &[0, 1, 2]), 7);
    assert_eq!(reference_size(&[true; 4], 2, &[1, 0]), 1);
}
