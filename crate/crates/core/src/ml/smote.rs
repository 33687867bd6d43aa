use alloc::vec::Vec;

use rand::Rng;

use super::MlError;
use crate::rng;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The `k` nearest other rows of `rows[i]` by Euclidean distance, ties broken
/// by row index.
pub fn nearest_neighbors(rows: &[Vec<f64>], i: usize, k: usize) -> Vec<usize> {
    let mut cand: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, r)| (sq_dist(&rows[i], r), j))
        .collect();
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    cand.truncate(k);
    cand.into_iter().map(|(_, j)| j).collect()
}

/// Synthetic minority rows, each `x + lambda * (nn - x)` for a uniformly
/// chosen minority row `x`, one of its `k` nearest minority neighbours `nn`
/// and `lambda` uniform in `[0, 1)`.
pub fn smote(minority: &[Vec<f64>], k: usize, n_synthetic: usize, seed: u64) -> Result<Vec<Vec<f64>>, MlError> {
    if minority.len() < 2 {
        return Err(MlError::TooFewMinority(minority.len()));
    }
    if k == 0 || k > minority.len() - 1 {
        return Err(MlError::KTooLarge { k, max: minority.len() - 1 });
    }
    let neighbors: Vec<Vec<usize>> = (0..minority.len()).map(|i| nearest_neighbors(minority, i, k)).collect();
    let mut rng = rng::seeded(seed);
    let mut out = Vec::with_capacity(n_synthetic);
    for _ in 0..n_synthetic {
        let i = rng.random_range(0..minority.len());
        let nn = neighbors[i][rng.random_range(0..k)];
        let lambda: f64 = rng.random();
        let x = &minority[i];
        let y = &minority[nn];
        out.push(x.iter().zip(y).map(|(a, b)| a + lambda * (b - a)).collect());
    }
    Ok(out)
}
