use alloc::vec::Vec;

/// Per-feature z-scoring fitted on training rows. Zero-variance columns keep
/// scale 1 so they pass through shifted only.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let width = rows.first().map_or(0, Vec::len);
        let n = rows.len() as f64;
        let mut mean = alloc::vec![0.0; width];
        let mut std = alloc::vec![1.0; width];
        if rows.is_empty() {
            return Standardizer { mean, std };
        }
        for (j, m) in mean.iter_mut().enumerate() {
            *m = rows.iter().map(|r| r[j]).sum::<f64>() / n;
        }
        for (j, s) in std.iter_mut().enumerate() {
            let var = rows.iter().map(|r| (r[j] - mean[j]) * (r[j] - mean[j])).sum::<f64>() / n;
            let sd = libm::sqrt(var);
            *s = if sd > 0.0 { sd } else { 1.0 };
        }
        Standardizer { mean, std }
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}
