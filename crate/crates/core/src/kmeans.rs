//! k-means with k-means++ seeding and Lloyd iterations.

use nalgebra::DMatrix;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone)]
pub struct KMeans {
    /// `k × f` cluster centers.
    pub centers: DMatrix<f64>,
    /// Cluster of each fitted row.
    pub labels: Vec<usize>,
    /// Inertia after seeding and after every Lloyd iteration.
    pub inertia_history: Vec<f64>,
    pub converged: bool,
}

impl KMeans {
    pub fn inertia(&self) -> f64 {
        *self.inertia_history.last().unwrap_or(&0.0)
    }

    /// Nearest-center assignment of new rows.
    pub fn predict(&self, rows: &DMatrix<f64>) -> Vec<usize> {
        assign(rows, &self.centers).0
    }
}

fn sq_dist(rows: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    (0..rows.ncols())
        .map(|j| {
            let t = rows[(i, j)] - centers[(c, j)];
            t * t
        })
        .sum()
}

/// Labels and per-row squared distance to the nearest center.
fn assign(rows: &DMatrix<f64>, centers: &DMatrix<f64>) -> (Vec<usize>, Vec<f64>) {
    // ‖x − c‖² = ‖x‖² − 2 x·c + ‖c‖², with the cross term as one product.
    let cross = rows * centers.transpose();
    let row_sq: Vec<f64> = rows.row_iter().map(|r| r.norm_squared()).collect();
    let center_sq: Vec<f64> = centers.row_iter().map(|r| r.norm_squared()).collect();
    let mut labels = Vec::with_capacity(rows.nrows());
    let mut dist = Vec::with_capacity(rows.nrows());
    for i in 0..rows.nrows() {
        let mut best = (0, f64::INFINITY);
        for (c, &csq) in center_sq.iter().enumerate() {
            let d = (row_sq[i] - 2.0 * cross[(i, c)] + csq).max(0.0);
            if d < best.1 {
                best = (c, d);
            }
        }
        labels.push(best.0);
        dist.push(best.1);
    }
    (labels, dist)
}

fn seed_centers(rows: &DMatrix<f64>, k: usize, rng: &mut rng::Rng) -> DMatrix<f64> {
    let (n, f) = rows.shape();
    let mut centers = DMatrix::zeros(k, f);
    let first = rng.random_range(0..n);
    centers.row_mut(0).copy_from(&rows.row(first));
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(rows, i, &centers, 0)).collect();
    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            // Every row coincides with a center already; duplicates are fine.
            rng.random_range(0..n)
        };
        centers.row_mut(c).copy_from(&rows.row(pick));
        for (i, best) in nearest.iter_mut().enumerate() {
            *best = best.min(sq_dist(rows, i, &centers, c));
        }
    }
    centers
}

pub fn kmeans(rows: &DMatrix<f64>, k: usize, seed: u64, max_iter: usize) -> Result<KMeans> {
    let (n, f) = rows.shape();
    if k == 0 {
        return Err(Error::input("k-means needs k >= 1"));
    }
    if n == 0 {
        return Err(Error::input("k-means needs at least one row"));
    }
    let mut rng = rng::stream(seed, "kmeans");
    let mut centers = seed_centers(rows, k, &mut rng);
    let (mut labels, mut dist) = assign(rows, &centers);
    let mut history = vec![dist.iter().sum::<f64>()];
    let mut converged = false;
    for _ in 0..max_iter {
        let mut sums = DMatrix::zeros(k, f);
        let mut counts = vec![0usize; k];
        for (i, &c) in labels.iter().enumerate() {
            counts[c] += 1;
            let mut row = sums.row_mut(c);
            row += rows.row(i);
        }
        let mut taken = vec![false; n];
        for c in 0..k {
            if counts[c] > 0 {
                let mut row = sums.row_mut(c);
                row /= counts[c] as f64;
            } else {
                // Re-seed an empty cluster at the point worst served so far.
                let far = (0..n)
                    .filter(|&i| !taken[i])
                    .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
                    .unwrap_or(0);
                taken[far] = true;
                sums.row_mut(c).copy_from(&rows.row(far));
                dist[far] = 0.0;
            }
        }
        centers = sums;
        let (new_labels, new_dist) = assign(rows, &centers);
        let inertia: f64 = new_dist.iter().sum();
        let stable = new_labels == labels;
        labels = new_labels;
        dist = new_dist;
        history.push(inertia);
        if stable {
            converged = true;
            break;
        }
    }
    Ok(KMeans {
        centers,
        labels,
        inertia_history: history,
        converged,
    })
}
