mod common;

use artforge_core::chain::ChainStore;
use artforge_core::features::{extract_features, zero_hop_features, SENTINEL};
use common::oracle;

#[test]
fn features_match_raw_recomputation() {
    for chain_seed in [11u64, 12] {
        let c = common::chain(chain_seed, 200);
        let store = ChainStore::from_records(c.records.clone()).unwrap();
        for rec in c.records.iter().step_by(7) {
            let seed = rec.tx_id.as_str();
            let got = extract_features(&store, seed, 2).unwrap();
            let want = oracle::features(&c.records, seed, 2);
            assert_eq!(got.values.len(), 42);
            for (i, (a, b)) in got.values.iter().zip(&want).enumerate() {
                assert!(oracle::rel_close(*a, *b, 1e-9), "seed {seed} feature {i}: {a} vs {b}");
            }
            assert_eq!(&zero_hop_features(&store, seed).unwrap()[..], &got.values[..10]);
        }
    }
}

#[test]
fn genuine_values_are_nonnegative_and_stable() {
    let c = common::chain(4, 200);
    let store = ChainStore::from_records(c.records.clone()).unwrap();
    for rec in &c.records {
        let a = extract_features(&store, rec.tx_id.as_str(), 2).unwrap();
        let b = extract_features(&store, rec.tx_id.as_str(), 2).unwrap();
        assert_eq!(a, b);
        assert!(a.values.iter().all(|&v| v == SENTINEL || v >= 0.0));
    }
}
