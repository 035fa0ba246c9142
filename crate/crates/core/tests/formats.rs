// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use bsdsynth::emit::{to_dot, to_netlist, DesignFile, Netlist, NetlistStyle};
use bsdsynth::oracle::TableOracle;
use bsdsynth::{learn, BitVec, LearnConfig, OracleHandle, Provenance, SampleSet};
use proptest::prelude::*;

fn bitvec(width: usize) -> impl Strategy<Value = BitVec> {
    prop::collection::vec(any::<bool>(), width).prop_map(|b| BitVec::from_bools(&b))
}

proptest! {
    #[test]
    fn bits_print_and_parse(b in (1usize..200).prop_flat_map(bitvec)) {
        let text = b.to_string();
        prop_assert_eq!(text.len(), b.width());
        prop_assert_eq!(BitVec::parse(&text).unwrap(), b);
    }

    #[test]
    fn ios_round_trip(rows in (1usize..20, 1usize..6).prop_flat_map(|(n, m)| prop::collection::btree_map(bitvec(n), bitvec(m), 0..30))) {
        let (n, m) = rows
            .iter()
            .next()
            .map(|(x, y)| (x.width(), y.width()))
            .unwrap_or((3, 2));
        let mut set = SampleSet::new(n, m);
        for (x, y) in &rows {
            set.push(x.clone(), y.clone(), Provenance::Given).unwrap();
        }
        let back = SampleSet::parse_ios(&set.to_ios(), Provenance::Given).unwrap();
        prop_assert_eq!(back.to_table().unwrap(), rows);
    }

    #[test]
    fn learned_designs_survive_every_format(n in 1usize..=7, m in 1usize..=3, bits in prop::collection::vec(any::<bool>(), 3 * 128)) {
        let rows: BTreeMap<BitVec, BitVec> = (0..1usize << n)
            .map(|i| {
                let y: Vec<bool> = (0..m).map(|j| bits[j * 128 + i]).collect();
                (BitVec::from_u128(i as u128, n), BitVec::from_bools(&y))
            })
            .collect();
        let oracle = OracleHandle::new(TableOracle::new(n, m, rows.clone()));
        let cfg = LearnConfig::default();
        let (d, _) = learn(&oracle, &SampleSet::new(n, m), &cfg).unwrap();

        let file = DesignFile::new(&d, Some(&cfg), None);
        let json = file.to_json();
        let reread = DesignFile::from_json(&json).unwrap();
        prop_assert_eq!(reread.to_json(), json);
        let d2 = reread.to_bsd().unwrap();

        let nets: Vec<Netlist> = [NetlistStyle::Basis, NetlistStyle::Mux]
            .into_iter()
            .map(|s| Netlist::parse(&to_netlist(&d, s).unwrap().to_text()).unwrap())
            .collect();
        for (x, y) in &rows {
            prop_assert_eq!(&d.evaluate(x).unwrap(), y);
            prop_assert_eq!(&d2.evaluate(x).unwrap(), y);
            for net in &nets {
                prop_assert_eq!(&net.evaluate(x).unwrap(), y);
            }
        }
        prop_assert_eq!(to_dot(&d), to_dot(&d2));
    }
}

#[test]
fn malformed_ios_names_the_line() {
    let err = SampleSet::parse_ios("inputs=2 outputs=1\n00 0\n01 1\n01 0\n", Provenance::Given).unwrap_err();
    assert!(err.to_string().contains("line 4"), "{err}");
    let err = SampleSet::parse_ios("inputs=2 outputs=1\n00  0\n", Provenance::Given).unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
    assert!(SampleSet::parse_ios("inputs=2 outputs=1\r\n00 0\n", Provenance::Given).is_err());
}

#[test]
fn netlist_parser_rejects_double_drivers() {
    let text = "module bsd(x, y);\ninput [0:0] x;\noutput [0:0] y;\nwire w;\nassign w = x[0];\nassign w = ~x[0];\nassign y[0] = w;\nendmodule\n";
    assert!(Netlist::parse(text).is_err());
}
