mod common;

use artforge_core::chain::ChainStore;
use artforge_core::graph::ArtGraph;
use artforge_core::rng;
use rand::Rng;

#[test]
fn hop_sets_match_brute_force() {
    for chain_seed in 0..5u64 {
        let c = common::chain(chain_seed, 300);
        let store = ChainStore::from_records(c.records.clone()).unwrap();
        let mut pick = rng::seeded(chain_seed + 100);
        for _ in 0..15 {
            let seed = &c.records[pick.random_range(0..c.records.len())].tx_id;
            let g = ArtGraph::build(&store, seed.as_str(), 2).unwrap();
            assert_eq!(common::as_oracle(&g), common::oracle::graph(&c.records, seed.as_str(), 2));
        }
    }
}

#[test]
fn hop_sets_partition_nodes_and_grow_with_hops() {
    let c = common::chain(77, 300);
    let store = ChainStore::from_records(c.records.clone()).unwrap();
    for rec in c.records.iter().step_by(17) {
        let seed = rec.tx_id.as_str();
        let g1 = ArtGraph::build(&store, seed, 1).unwrap();
        let g2 = ArtGraph::build(&store, seed, 2).unwrap();
        let g3 = ArtGraph::build(&store, seed, 3).unwrap();

        let mut total = 0;
        for hop in 0..=3 {
            total += g3.hop_transactions(hop).unwrap().len();
        }
        assert_eq!(total, g3.tx_nodes().len());
        assert_eq!(g3.hop_transactions(0).unwrap(), vec![g3.seed()]);

        for (small, big) in [(&g1, &g2), (&g2, &g3)] {
            for (id, d) in small.tx_nodes() {
                assert_eq!(big.depth(id.as_str()), Some(*d));
            }
            assert!(small.address_nodes().iter().all(|a| big.address_nodes().contains(a)));
            assert!(small.ring_nodes().iter().all(|r| big.ring_nodes().contains(r)));
        }

        // Hop-d transactions never precede every producer feeding them.
        for (id, d) in g3.tx_nodes() {
            if *d == 0 {
                continue;
            }
            let t = store.tx(id.as_str()).unwrap();
            let earliest_feeder = g3
                .tx_nodes()
                .iter()
                .filter(|(_, pd)| *pd + 1 == *d)
                .map(|(p, _)| store.tx(p.as_str()).unwrap().timestamp)
                .min()
                .unwrap();
            assert!(t.timestamp >= earliest_feeder);
        }
    }
}

#[test]
fn build_is_deterministic() {
    let c = common::chain(5, 200);
    let store = ChainStore::from_records(c.records.clone()).unwrap();
    let seed = c.records[40].tx_id.as_str();
    assert_eq!(ArtGraph::build(&store, seed, 2).unwrap(), ArtGraph::build(&store, seed, 2).unwrap());
}
