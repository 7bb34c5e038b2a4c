//! Dense linear algebra used by the embedding pipeline: randomized truncated
//! SVD, PCA and the column / row normalizations.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::rng;
use crate::sparse::LinearOperator;

/// Extra random probes beyond the target rank.
pub const SVD_OVERSAMPLE: usize = 10;
/// Subspace (power) iterations of the randomized range finder.
pub const SVD_POWER_ITERS: usize = 2;
/// Above this many columns PCA switches from an exact covariance
/// eigendecomposition to the randomized SVD.
pub const PCA_EXACT_MAX_COLS: usize = 2048;

/// Leading left singular vectors and values.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    /// `rows × d`, orthonormal columns (zero columns past the numerical rank).
    pub left: DMatrix<f64>,
    /// Non-increasing, length `d`.
    pub singular_values: Vec<f64>,
    /// Set when fewer than `d` nonzero singular values exist and the tail was
    /// zero-padded.
    pub padded: bool,
}

fn orthonormal_basis(y: DMatrix<f64>) -> DMatrix<f64> {
    y.qr().q()
}

fn gaussian_block(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng::stream(seed, "gaussian-probe");
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

/// Flip each column so its largest-magnitude entry is positive.
pub fn fix_column_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mut best = 0.0f64;
        for &v in col.iter() {
            if v.abs() > best.abs() {
                best = v;
            }
        }
        if best < 0.0 {
            col.neg_mut();
        }
    }
}

/// Randomized truncated SVD (range finder with oversampling and power
/// iterations, followed by an exact SVD of the small projected matrix).
pub fn truncated_svd<A: LinearOperator + ?Sized>(a: &A, d: usize, seed: u64) -> TruncatedSvd {
    let (m, n) = (a.nrows(), a.ncols());
    let max_rank = m.min(n);
    let k = d.min(max_rank);
    let mut left = DMatrix::zeros(m, d);
    let mut singular_values = vec![0.0; d];
    if k == 0 {
        return TruncatedSvd {
            left,
            singular_values,
            padded: d > 0,
        };
    }
    let width = (k + SVD_OVERSAMPLE).min(max_rank);
    let omega = gaussian_block(n, width, seed);
    let mut q = orthonormal_basis(a.apply(&omega));
    for _ in 0..SVD_POWER_ITERS {
        let z = orthonormal_basis(a.apply_transpose(&q));
        q = orthonormal_basis(a.apply(&z));
    }
    // Bᵀ = Aᵀ Q  (n × width); B = W Σ Vᵀ  ⇒  Bᵀ = V Σ Wᵀ.
    let b_t = a.apply_transpose(&q);
    let svd = b_t.svd(false, true);
    let w_t = svd.v_t.expect("requested right vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = top * 1e-10 * (m.max(n) as f64);
    let mut padded = d > k;
    for (out_col, &src) in order.iter().take(k).enumerate() {
        let sigma = svd.singular_values[src];
        if sigma <= cutoff || sigma == 0.0 {
            padded = true;
            continue;
        }
        let w = w_t.row(src).transpose();
        left.set_column(out_col, &(&q * w));
        singular_values[out_col] = sigma;
    }
    fix_column_signs(&mut left);
    TruncatedSvd {
        left,
        singular_values,
        padded,
    }
}

/// Result of a principal component analysis.
#[derive(Debug, Clone)]
pub struct Pca {
    /// Component scores, `rows × d`.
    pub scores: DMatrix<f64>,
    /// Principal directions, `cols × d`.
    pub loadings: DMatrix<f64>,
    /// Variance captured by each component (sample variance, `n - 1`).
    pub explained_variance: Vec<f64>,
    pub means: DVector<f64>,
    pub padded: bool,
}

impl Pca {
    /// Map scores back to the input space.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut out = &self.scores * self.loadings.transpose();
        for mut row in out.row_iter_mut() {
            row += self.means.transpose();
        }
        out
    }
}

struct Centered<'a> {
    data: &'a DMatrix<f64>,
    means: &'a DVector<f64>,
}

impl LinearOperator for Centered<'_> {
    fn nrows(&self) -> usize {
        self.data.nrows()
    }
    fn ncols(&self) -> usize {
        self.data.ncols()
    }
    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        // (X - 1 μᵀ) x = X x - 1 (μᵀ x)
        let mut out = self.data * x;
        let shift = self.means.transpose() * x;
        for mut row in out.row_iter_mut() {
            row -= &shift;
        }
        out
    }
    fn apply_transpose(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        // (X - 1 μᵀ)ᵀ x = Xᵀ x - μ (1ᵀ x)
        let mut out = self.data.tr_mul(x);
        let col_sums = DMatrix::from_fn(1, x.ncols(), |_, j| x.column(j).sum());
        out -= self.means * col_sums;
        out
    }
}

pub fn column_means(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows().max(1) as f64;
    DVector::from_iterator(m.ncols(), m.column_iter().map(|c| c.sum() / n))
}

/// Project the centered rows of `m` onto the top-`d` principal directions.
/// If `d` exceeds the number of columns the tail is zero-padded.
pub fn pca(m: &DMatrix<f64>, d: usize, seed: u64) -> Pca {
    let (n, f) = (m.nrows(), m.ncols());
    let means = column_means(m);
    let k = d.min(f);
    let mut loadings = DMatrix::zeros(f, d);
    let mut explained_variance = vec![0.0; d];
    let denom = (n.max(2) - 1) as f64;

    if f <= PCA_EXACT_MAX_COLS {
        let mut centered = m.clone();
        for mut row in centered.row_iter_mut() {
            row -= means.transpose();
        }
        let cov = centered.tr_mul(&centered) / denom;
        let eig = cov.symmetric_eigen();
        let mut order: Vec<usize> = (0..f).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        for (out_col, &src) in order.iter().take(k).enumerate() {
            loadings.set_column(out_col, &eig.eigenvectors.column(src));
            explained_variance[out_col] = eig.eigenvalues[src].max(0.0);
        }
    } else {
        let op = Centered { data: m, means: &means };
        // Right singular vectors of the centered data are the left singular
        // vectors of its transpose.
        let svd = truncated_svd(&Transposed(&op), k, seed);
        for j in 0..k {
            loadings.set_column(j, &svd.left.column(j));
            explained_variance[j] = svd.singular_values[j].powi(2) / denom;
        }
    }
    fix_column_signs(&mut loadings);
    let centered_scores = Centered { data: m, means: &means }.apply(&loadings);
    Pca {
        scores: centered_scores,
        loadings,
        explained_variance,
        means,
        padded: d > f,
    }
}

struct Transposed<'a, A: LinearOperator>(&'a A);

impl<A: LinearOperator> LinearOperator for Transposed<'_, A> {
    fn nrows(&self) -> usize {
        self.0.ncols()
    }
    fn ncols(&self) -> usize {
        self.0.nrows()
    }
    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.0.apply_transpose(x)
    }
    fn apply_transpose(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.0.apply(x)
    }
}

/// Scale every nonzero column to unit L2 norm.
pub fn l2_normalize_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    out
}

/// Scale every nonzero row to unit L2 norm.
pub fn l2_normalize_rows(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for mut row in out.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    out
}

/// Column-wise standardization (population standard deviation; constant
/// columns become zero) followed by row-wise L2 normalization.
pub fn preprocess_hat(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows().max(1) as f64;
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
        let std = (col.norm_squared() / n).sqrt();
        // Relative threshold: columns that are constant up to rounding.
        if std > 1e-12 * (1.0 + mean.abs()) {
            col /= std;
        } else {
            col.fill(0.0);
        }
    }
    l2_normalize_rows(&out)
}

/// Solve `a x = b` for symmetric positive definite `a`, falling back to LU if
/// the Cholesky factorization fails.
pub fn solve_spd(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    match a.clone().cholesky() {
        Some(chol) => Some(chol.solve(b)),
        None => a.clone().lu().solve(b),
    }
}
