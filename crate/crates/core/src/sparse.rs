//! Compressed sparse row matrices and their products with dense blocks.

use nalgebra::DMatrix;

/// Real-valued CSR matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub rows: usize,
    pub cols: usize,
    pub row_offsets: Vec<usize>,
    pub col_indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from `(row, col, value)` triplets. Duplicate coordinates are summed
    /// and columns are sorted within each row.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_offsets = vec![0usize; rows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) outside {rows}x{cols}");
            if last == Some((r, c)) {
                *values.last_mut().expect("nonempty") += v;
                continue;
            }
            row_offsets[r + 1] += 1;
            col_indices.push(c);
            values.push(v);
            last = Some((r, c));
        }
        for r in 0..rows {
            row_offsets[r + 1] += row_offsets[r];
        }
        Self {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[span.clone()], &self.values[span])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).1.iter().sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                out[(i, j)] += v;
            }
        }
        out
    }

    pub fn transpose(&self) -> CsrMatrix {
        let triplets: Vec<(usize, usize, f64)> = (0..self.rows)
            .flat_map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter()
                    .zip(vals)
                    .map(move |(&j, &v)| (j, i, v))
                    .collect::<Vec<_>>()
            })
            .collect();
        CsrMatrix::from_triplets(self.cols, self.rows, &triplets)
    }

    /// `self * x` for a dense block `x` with `self.cols` rows.
    pub fn mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.nrows(), self.cols, "dimension mismatch in sparse product");
        let k = x.ncols();
        let mut out = DMatrix::zeros(self.rows, k);
        for c in 0..k {
            let xc = x.column(c);
            let xs = xc.as_slice();
            let mut oc = out.column_mut(c);
            let os = oc.as_mut_slice();
            for (i, o) in os.iter_mut().enumerate() {
                let (cols, vals) = self.row(i);
                *o = cols.iter().zip(vals).map(|(&j, &v)| v * xs[j]).sum();
            }
        }
        out
    }

    /// `selfᵀ * x` for a dense block `x` with `self.rows` rows.
    pub fn transpose_mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.nrows(), self.rows, "dimension mismatch in sparse product");
        let k = x.ncols();
        let mut out = DMatrix::zeros(self.cols, k);
        for c in 0..k {
            let xc = x.column(c);
            let xs = xc.as_slice();
            let mut oc = out.column_mut(c);
            let os = oc.as_mut_slice();
            for (i, &xi) in xs.iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                let (cols, vals) = self.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    os[j] += v * xi;
                }
            }
        }
        out
    }
}

/// Anything that can multiply dense blocks from the left, with and without
/// transposition. Used by the randomized SVD so it works for both sparse and
/// dense inputs.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `A * x`
    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64>;
    /// `Aᵀ * x`
    fn apply_transpose(&self, x: &DMatrix<f64>) -> DMatrix<f64>;
}

impl LinearOperator for CsrMatrix {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.mul_dense(x)
    }
    fn apply_transpose(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.transpose_mul_dense(x)
    }
}

impl LinearOperator for DMatrix<f64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }
    fn ncols(&self) -> usize {
        self.ncols()
    }
    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self * x
    }
    fn apply_transpose(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.tr_mul(x)
    }
}
