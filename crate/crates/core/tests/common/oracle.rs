//! Index-free reference implementations used to check the indexed code paths.
//! Everything here works from raw records by full scans.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use artforge_core::chain::TxRecord;

/// `global_index -> (tx_id, output position)` by scanning every record.
pub fn producer(records: &[TxRecord], g: u64) -> Option<(String, usize)> {
    for rec in records {
        for (pos, out) in rec.outputs.iter().enumerate() {
            if out.0 == g {
                return Some((rec.tx_id.to_string(), pos));
            }
        }
    }
    None
}

/// Every `(tx_id, ring position)` whose ring lists `g`, ordered by
/// (height, tx_id, ring position).
pub fn referencing(records: &[TxRecord], g: u64) -> Vec<(String, usize)> {
    let mut hits = Vec::new();
    for rec in records {
        for (r, ring) in rec.rings.iter().enumerate() {
            if ring.members.iter().any(|m| m.0 == g) {
                hits.push((rec.height, rec.tx_id.to_string(), r));
            }
        }
    }
    hits.sort();
    hits.into_iter().map(|(_, id, r)| (id, r)).collect()
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct OracleGraph {
    pub depths: BTreeMap<String, u32>,
    pub rings: BTreeSet<(String, u32)>,
    pub addresses: BTreeSet<u64>,
    pub edges: BTreeSet<(&'static str, String, String)>,
}

fn find<'a>(records: &'a [TxRecord], id: &str) -> &'a TxRecord {
    records.iter().find(|r| r.tx_id.as_str() == id).expect("tx exists")
}

/// Hop depths by definition: a transaction sits at depth d+1 when one of its
/// rings lists an output of a depth-d transaction and it has no smaller depth.
pub fn depths(records: &[TxRecord], seed: &str, n_hops: u32) -> BTreeMap<String, u32> {
    let mut depths = BTreeMap::new();
    depths.insert(seed.to_string(), 0u32);
    for d in 0..n_hops {
        let outs: BTreeSet<u64> = records
            .iter()
            .filter(|r| depths.get(r.tx_id.as_str()) == Some(&d))
            .flat_map(|r| r.outputs.iter().map(|o| o.0))
            .collect();
        let mut next = Vec::new();
        for rec in records {
            if depths.contains_key(rec.tx_id.as_str()) {
                continue;
            }
            if rec.rings.iter().any(|ring| ring.members.iter().any(|m| outs.contains(&m.0))) {
                next.push(rec.tx_id.to_string());
            }
        }
        for id in next {
            depths.insert(id, d + 1);
        }
    }
    depths
}

pub fn graph(records: &[TxRecord], seed: &str, n_hops: u32) -> OracleGraph {
    let depths = depths(records, seed, n_hops);
    let seed_rec = find(records, seed);

    let expanded: BTreeSet<u64> = records
        .iter()
        .filter(|r| depths.get(r.tx_id.as_str()).is_some_and(|&d| d < n_hops))
        .flat_map(|r| r.outputs.iter().map(|o| o.0))
        .collect();
    let mut addresses = expanded.clone();
    addresses.extend(seed_rec.rings.iter().flat_map(|r| r.members.iter().map(|m| m.0)));

    let mut rings = BTreeSet::new();
    for (r, _) in seed_rec.rings.iter().enumerate() {
        rings.insert((seed.to_string(), r as u32));
    }
    for rec in records {
        for (r, ring) in rec.rings.iter().enumerate() {
            if ring.members.iter().any(|m| expanded.contains(&m.0)) {
                rings.insert((rec.tx_id.to_string(), r as u32));
            }
        }
    }

    let mut edges = BTreeSet::new();
    for rec in records {
        if !depths.contains_key(rec.tx_id.as_str()) {
            continue;
        }
        for o in &rec.outputs {
            if addresses.contains(&o.0) {
                edges.insert(("PROD", rec.tx_id.to_string(), o.0.to_string()));
            }
        }
    }
    for (tx, r) in &rings {
        let ring_name = format!("{tx}:{r}");
        for m in &find(records, tx).rings[*r as usize].members {
            if addresses.contains(&m.0) {
                edges.insert(("MEMB", m.0.to_string(), ring_name.clone()));
            }
        }
        edges.insert(("INPT", ring_name, tx.clone()));
    }

    OracleGraph { depths, rings, addresses, edges }
}

/// Reference statistics in (mean, std, min, max, median) order, -1 for empty.
pub fn stats(values: &[f64]) -> [f64; 5] {
    if values.is_empty() {
        return [-1.0; 5];
    }
    let n = values.len() as f64;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &v in values {
        min = min.min(v);
        max = max.max(v);
        sum += v;
    }
    let mean = sum / n;
    let mut sq = 0.0;
    for &v in values {
        sq += (v - mean).powi(2);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = sorted.len();
    let median = if m.is_multiple_of(2) { 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]) } else { sorted[m / 2] };
    [mean, (sq / n).sqrt(), min, max, median]
}

/// Full feature vector recomputed from raw records (hop_tx_count included).
pub fn features(records: &[TxRecord], seed: &str, n_hops: u32) -> Vec<f64> {
    let seed_rec = find(records, seed);
    let ts_of_output = |g: u64| -> f64 {
        let (id, _) = producer(records, g).expect("member produced");
        find(records, &id).timestamp as f64
    };

    let mut v = Vec::new();
    let n_rings = seed_rec.rings.len();
    v.push(n_rings as f64);
    v.push(if n_rings == 0 {
        -1.0
    } else {
        seed_rec.rings.iter().map(|r| r.members.len()).sum::<usize>() as f64 / n_rings as f64
    });
    v.push(seed_rec.outputs.len() as f64);
    v.push(seed_rec.fee as f64);
    let unique: BTreeSet<u64> = seed_rec.rings.iter().flat_map(|r| r.members.iter().map(|m| m.0)).collect();
    v.push(unique.len() as f64);
    let dt0: Vec<f64> = seed_rec
        .rings
        .iter()
        .flat_map(|r| r.members.iter())
        .map(|m| seed_rec.timestamp as f64 - ts_of_output(m.0))
        .collect();
    v.extend(stats(&dt0));

    let depths = depths(records, seed, n_hops);
    for hop in 1..=n_hops {
        let txs: Vec<&TxRecord> = records.iter().filter(|r| depths.get(r.tx_id.as_str()) == Some(&hop)).collect();
        v.push(txs.len() as f64);
        let per_tx: Vec<f64> = txs.iter().map(|t| t.rings.len() as f64).collect();
        let sizes: Vec<f64> = txs.iter().flat_map(|t| t.rings.iter().map(|r| r.members.len() as f64)).collect();
        let dt: Vec<f64> = txs.iter().map(|t| t.timestamp as f64 - seed_rec.timestamp as f64).collect();
        v.extend(stats(&per_tx));
        v.extend(stats(&sizes));
        v.extend(stats(&dt));
    }
    v
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Brute-force k-NN radius of row `i`: the k-th smallest distance to any
/// other row.
pub fn knn_radius(rows: &[Vec<f64>], i: usize, k: usize) -> f64 {
    let mut d: Vec<f64> = (0..rows.len())
        .filter(|&j| j != i)
        .map(|j| rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .collect();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    d[k - 1]
}

/// True when `p` is `x + t (y - x)` for some `t` in [0, 1] (within `tol`).
pub fn on_segment(p: &[f64], x: &[f64], y: &[f64], tol: f64) -> bool {
    let dir: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - a).collect();
    let len2: f64 = dir.iter().map(|v| v * v).sum();
    if len2 == 0.0 {
        return p.iter().zip(x).all(|(a, b)| (a - b).abs() <= tol);
    }
    let t = p.iter().zip(x).zip(&dir).map(|((pv, xv), dv)| (pv - xv) * dv).sum::<f64>() / len2;
    if !(-tol..=1.0 + tol).contains(&t) {
        return false;
    }
    p.iter().zip(x).zip(&dir).all(|((pv, xv), dv)| (pv - (xv + t * dv)).abs() <= tol)
}

/// The SMOTE convex-combination property for one synthetic point: it lies on
/// a segment from some minority row to another row within that row's k-NN
/// radius.
pub fn smote_point_ok(minority: &[Vec<f64>], k: usize, p: &[f64]) -> bool {
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    (0..minority.len()).any(|i| {
        let radius = knn_radius(minority, i, k);
        (0..minority.len()).any(|j| {
            j != i && dist(&minority[i], &minority[j]) <= radius + 1e-12 && on_segment(p, &minority[i], &minority[j], 1e-9)
        })
    })
}
