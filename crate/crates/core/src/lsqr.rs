//! LSQR for damped least squares with a warm start.
//!
//! Solves `min ‖A x − b‖² + damp² ‖x‖²` where `A` is only available through
//! the products `A v` and `Aᵀ u`. A starting point `x0` is handled by solving
//! for the correction `δ = x − x0` of the stacked system
//!
//! ```text
//! [   A    ] δ ≈ [ b − A x0  ]
//! [ damp·I ]     [ −damp·x0  ]
//! ```
//!
//! with plain (undamped) Golub–Kahan bidiagonalization, so the damping always
//! applies to the full solution rather than the correction.

#[derive(Debug, Clone, Copy)]
pub struct LsqrOptions {
    pub damp: f64,
    pub max_iter: usize,
    /// Used for both the consistent-system test `‖r‖ ≤ tol(‖b‖ + ‖A‖‖x‖)` and
    /// the least-squares test `‖Aᵀr‖ ≤ tol ‖A‖ ‖r‖`.
    pub tol: f64,
}

impl Default for LsqrOptions {
    fn default() -> Self {
        Self {
            damp: 0.0,
            max_iter: 100,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LsqrResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Norm of the stacked residual after each iteration (index 0 is the
    /// starting point).
    pub residual_history: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn scale(v: &mut [f64], s: f64) {
    v.iter_mut().for_each(|x| *x *= s);
}

/// Run LSQR. `apply_a` maps an `n`-vector to an `m`-vector, `apply_at` the
/// reverse.
pub fn lsqr<FA, FT>(
    apply_a: FA,
    apply_at: FT,
    b: &[f64],
    n: usize,
    x0: Option<&[f64]>,
    opts: LsqrOptions,
) -> LsqrResult
where
    FA: Fn(&[f64]) -> Vec<f64>,
    FT: Fn(&[f64]) -> Vec<f64>,
{
    let m = b.len();
    let damp = opts.damp;
    let start: Vec<f64> = x0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    assert_eq!(start.len(), n, "warm start has wrong length");

    // Stacked operator on vectors of length m + n (the damping rows).
    let stacked_a = |v: &[f64]| -> Vec<f64> {
        let mut out = apply_a(v);
        debug_assert_eq!(out.len(), m);
        out.extend(v.iter().map(|x| damp * x));
        out
    };
    let stacked_at = |u: &[f64]| -> Vec<f64> {
        let mut out = apply_at(&u[..m]);
        for (o, x) in out.iter_mut().zip(&u[m..]) {
            *o += damp * x;
        }
        out
    };

    let ax0 = apply_a(&start);
    let mut u: Vec<f64> = b.iter().zip(&ax0).map(|(bi, ai)| bi - ai).collect();
    u.extend(start.iter().map(|x| -damp * x));

    let mut delta = vec![0.0; n];
    let bnorm = norm(&u);
    let mut beta = bnorm;
    let mut history = vec![bnorm];
    let finish = |delta: Vec<f64>, iterations, converged, history| {
        let x = start.iter().zip(&delta).map(|(a, b)| a + b).collect();
        LsqrResult {
            x,
            iterations,
            converged,
            residual_history: history,
        }
    };
    if beta == 0.0 {
        return finish(delta, 0, true, history);
    }
    scale(&mut u, 1.0 / beta);
    let mut v = stacked_at(&u);
    let mut alpha = norm(&v);
    if alpha == 0.0 {
        // Normal equations already satisfied at the start point.
        return finish(delta, 0, true, history);
    }
    scale(&mut v, 1.0 / alpha);
    let mut w = v.clone();
    let mut phi_bar = beta;
    let mut rho_bar = alpha;
    let mut anorm_sq = 0.0f64;

    for iter in 1..=opts.max_iter {
        // Bidiagonalization step.
        let av = stacked_a(&v);
        for (ui, avi) in u.iter_mut().zip(&av) {
            *ui = avi - alpha * *ui;
        }
        beta = norm(&u);
        if beta > 0.0 {
            scale(&mut u, 1.0 / beta);
        }
        anorm_sq += alpha * alpha + beta * beta;
        let atu = stacked_at(&u);
        for (vi, atui) in v.iter_mut().zip(&atu) {
            *vi = atui - beta * *vi;
        }
        alpha = norm(&v);
        if alpha > 0.0 {
            scale(&mut v, 1.0 / alpha);
        }

        // Plane rotation eliminating the subdiagonal.
        let rho = rho_bar.hypot(beta);
        let c = rho_bar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        rho_bar = -c * alpha;
        let phi = c * phi_bar;
        phi_bar *= s;

        let step = phi / rho;
        let wscale = theta / rho;
        for ((di, wi), vi) in delta.iter_mut().zip(w.iter_mut()).zip(&v) {
            *di += step * *wi;
            *wi = vi - wscale * *wi;
        }

        let rnorm = phi_bar.abs();
        history.push(rnorm);
        let anorm = anorm_sq.sqrt();
        let xnorm = norm(&delta);
        let arnorm = alpha * (c * phi_bar).abs();
        let consistent = rnorm <= opts.tol * (bnorm + anorm * xnorm);
        let least_squares = rnorm == 0.0 || arnorm <= opts.tol * anorm * rnorm;
        if consistent || least_squares || alpha == 0.0 {
            return finish(delta, iter, true, history);
        }
    }
    finish(delta, opts.max_iter, false, history)
}

/// LSQR on an explicit dense matrix.
pub fn lsqr_dense(
    a: &nalgebra::DMatrix<f64>,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: LsqrOptions,
) -> LsqrResult {
    let apply = |v: &[f64]| (a * nalgebra::DVector::from_column_slice(v)).as_slice().to_vec();
    let apply_t = |u: &[f64]| (a.tr_mul(&nalgebra::DVector::from_column_slice(u))).as_slice().to_vec();
    lsqr(apply, apply_t, b, a.ncols(), x0, opts)
}
