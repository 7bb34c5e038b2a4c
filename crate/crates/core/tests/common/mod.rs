//! Independent dense oracles shared by the `oracles` tests and the acceptance
//! harness. Every check returns the worst error it saw; callers compare it
//! against their tolerance.

#![allow(dead_code)]

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use netinfof_core::act::model::{self, Targets};
use netinfof_core::act::hits_at_k;
use netinfof_core::compat::{self, CoefficientMask, EdgeSample, HStarConfig};
use netinfof_core::embed::{propagate_row, propagate_sym};
use netinfof_core::lsqr::{lsqr_dense, LsqrOptions};
use netinfof_core::rng::{stream, Rng};
use netinfof_core::score::{accuracy_bound, conditional_entropy, netinfof_score, JointCounts};
use netinfof_core::{Edge, SparseGraph};
use rand::Rng as _;
use rand_distr::StandardNormal;

pub fn gaussian(rng: &mut Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// `m` distinct random non-loop edges on `n` nodes, plus a ring so no node is
/// isolated.
pub fn random_graph(rng: &mut Rng, n: usize, m: usize) -> (Vec<Edge>, SparseGraph) {
    let mut set: BTreeSet<Edge> = (0..n).map(|i| canon(i, (i + 1) % n)).collect();
    while set.len() < m + n {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v {
            set.insert(canon(u, v));
        }
    }
    let edges: Vec<Edge> = set.into_iter().collect();
    let g = SparseGraph::from_edges(&edges, n).unwrap();
    (edges, g)
}

fn canon(u: usize, v: usize) -> Edge {
    (u.min(v), u.max(v))
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Least squares by Householder QR: `R x = Qᵀ b`.
fn qr_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let qr = a.clone().qr();
    let rhs = qr.q().transpose() * b;
    qr.r().solve_upper_triangular(&rhs).expect("full column rank")
}

/// `H` against the normal equations of the stacked two-orientation system.
pub fn h_error(seed: u64) -> f64 {
    let mut rng = stream(seed, "oracle-h");
    let (n, d, ridge) = (150, 6, 1e-6);
    let z = gaussian(&mut rng, n, d);
    let (edges, _) = random_graph(&mut rng, n, 400);
    let rows = 2 * edges.len();
    let mut src = DMatrix::zeros(rows, d);
    let mut dst = DMatrix::zeros(rows, d);
    for (k, &(i, j)) in edges.iter().enumerate() {
        src.row_mut(2 * k).copy_from(&z.row(i));
        dst.row_mut(2 * k).copy_from(&z.row(j));
        src.row_mut(2 * k + 1).copy_from(&z.row(j));
        dst.row_mut(2 * k + 1).copy_from(&z.row(i));
    }
    let gram = src.transpose() * &src + DMatrix::identity(d, d) * ridge;
    let oracle = gram.lu().solve(&(src.transpose() * &dst)).unwrap();
    let h = compat::estimate_h(&z, &edges, ridge).unwrap();
    max_abs_diff(&h.values, &oracle)
}

/// `H*` against QR on the explicit flattened design over the active
/// coefficients, with the ridge as extra rows.
pub fn h_star_error(seed: u64) -> f64 {
    let mut rng = stream(seed, "oracle-hstar");
    let (n, d) = (120, 5);
    let z = gaussian(&mut rng, n, d);
    let (pos, g) = random_graph(&mut rng, n, 200);
    let mut neg = Vec::new();
    while neg.len() < 2 * pos.len() {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v && !g.has_edge(u, v) {
            neg.push(canon(u, v));
        }
    }
    let mut mask = CoefficientMask::full(d);
    mask.set(0, 3, false);
    mask.set(1, 4, false);
    let cfg = HStarConfig {
        ridge: 1e-3,
        max_iter: 2000,
        tol: 1e-15,
        negative_weight: 0.7,
    };
    let warm = compat::estimate_h(&z, &pos, 1e-6).unwrap();
    let sample = EdgeSample {
        pool: pos.clone(),
        pos: pos.clone(),
        neg: neg.clone(),
        used_two_core: false,
        seed,
    };
    let h_star = compat::estimate_h_star(&z, &sample, &warm, &mask, &cfg).unwrap();

    let pairs = mask.active_pairs();
    let p = pairs.len();
    let eqs: Vec<(Edge, f64, f64)> = pos
        .iter()
        .map(|&e| (e, 1.0, 1.0))
        .chain(neg.iter().map(|&e| (e, cfg.negative_weight, 0.0)))
        .collect();
    let mut a = DMatrix::zeros(eqs.len() + p, p);
    let mut b = DVector::zeros(eqs.len() + p);
    for (r, &((i, j), w, y)) in eqs.iter().enumerate() {
        let sw = w.sqrt();
        for (c, &(s, t)) in pairs.iter().enumerate() {
            let x = if s == t { z[(i, s)] * z[(j, s)] } else { z[(i, s)] * z[(j, t)] + z[(i, t)] * z[(j, s)] };
            a[(r, c)] = sw * x;
        }
        b[r] = sw * y;
    }
    for c in 0..p {
        a[(eqs.len() + c, c)] = cfg.ridge.sqrt();
    }
    let coef = qr_solve(&a, &b);
    let mut oracle = DMatrix::zeros(d, d);
    for (&(s, t), &v) in pairs.iter().zip(coef.iter()) {
        oracle[(s, t)] = v;
        oracle[(t, s)] = v;
    }
    max_abs_diff(&h_star.values, &oracle)
}

/// LSQR on a 200×20 system, plain and damped, against QR.
pub fn lsqr_error(seed: u64) -> f64 {
    let mut rng = stream(seed, "oracle-lsqr");
    let a = gaussian(&mut rng, 200, 20);
    let b = DVector::from_fn(200, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut worst: f64 = 0.0;
    for damp in [0.0, 0.5] {
        let opts = LsqrOptions {
            damp,
            max_iter: 1000,
            tol: 1e-15,
        };
        let x = lsqr_dense(&a, b.as_slice(), None, opts).x;
        let mut aug = DMatrix::zeros(220, 20);
        aug.rows_mut(0, 200).copy_from(&a);
        for k in 0..20 {
            aug[(200 + k, k)] = damp;
        }
        let mut rhs = DVector::zeros(220);
        rhs.rows_mut(0, 200).copy_from(&b);
        let oracle = if damp == 0.0 { qr_solve(&a, &b) } else { qr_solve(&aug, &rhs) };
        let err = x.iter().zip(oracle.iter()).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        worst = worst.max(err);
    }
    worst
}

/// Hits@K against a full sort, with heavy ties; returns the mismatch count.
pub fn hits_mismatches(seed: u64, trials: usize) -> usize {
    let mut rng = stream(seed, "oracle-hits");
    let mut bad = 0;
    for _ in 0..trials {
        let k = rng.random_range(1..40);
        let neg: Vec<f64> = (0..rng.random_range(k..k + 100)).map(|_| rng.random_range(0..20) as f64).collect();
        let pos: Vec<f64> = (0..rng.random_range(1..60)).map(|_| rng.random_range(0..20) as f64).collect();
        let mut sorted = neg.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let threshold = sorted[k - 1];
        let expect = pos.iter().filter(|&&s| s > threshold).count() as f64 / pos.len() as f64;
        if hits_at_k(&pos, &neg, k).unwrap() != expect {
            bad += 1;
        }
    }
    bad
}

pub fn random_table(rng: &mut Rng, max_rows: usize, max_cols: usize) -> Vec<Vec<u64>> {
    let rows = rng.random_range(1..=max_rows);
    let cols = rng.random_range(1..=max_cols);
    let sparsity: f64 = rng.random();
    let scale = 10u64.pow(rng.random_range(0..5));
    let mut t: Vec<Vec<u64>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| if rng.random::<f64>() < sparsity { 0 } else { rng.random_range(0..=scale) })
                .collect()
        })
        .collect();
    if t.iter().flatten().all(|&c| c == 0) {
        t[0][0] = 1;
    }
    t
}

/// `H(Y|X)` as `H(X,Y) − H(X)` from joint probabilities.
pub fn entropy_direct(t: &[Vec<u64>]) -> f64 {
    let total: f64 = t.iter().flatten().sum::<u64>() as f64;
    let h = |ps: &mut dyn Iterator<Item = f64>| -> f64 { ps.filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum() };
    let joint = h(&mut t.iter().flatten().map(|&c| c as f64 / total));
    let marginal = h(&mut t.iter().map(|r| r.iter().sum::<u64>() as f64 / total));
    joint - marginal
}

pub fn entropy_error(seed: u64, trials: usize) -> f64 {
    let mut rng = stream(seed, "oracle-entropy");
    (0..trials)
        .map(|_| {
            let t = random_table(&mut rng, 64, 16);
            let got = conditional_entropy(&JointCounts::from_table(&t).unwrap()).unwrap();
            (got - entropy_direct(&t).max(0.0)).abs()
        })
        .fold(0.0, f64::max)
}

/// Score ≤ accuracy bound over random tables, and the single-variable form
/// `2^{−H(Y)} ≤ max_y p_y` over random marginals. Returns violation counts.
pub fn bound_violations(seed: u64, tables: usize) -> (usize, usize) {
    let mut rng = stream(seed, "oracle-bound");
    let mut joint = 0;
    let mut marginal = 0;
    for _ in 0..tables {
        let t = random_table(&mut rng, 64, 16);
        let c = JointCounts::from_table(&t).unwrap();
        if netinfof_score(&c).unwrap() > accuracy_bound(&c).unwrap() + 1e-12 {
            joint += 1;
        }
        let m = random_table(&mut rng, 1, 64);
        let total: u64 = m[0].iter().sum();
        let max_p = *m[0].iter().max().unwrap() as f64 / total as f64;
        let h: f64 = m[0]
            .iter()
            .filter(|&&v| v > 0)
            .map(|&v| {
                let p = v as f64 / total as f64;
                -p * p.log2()
            })
            .sum();
        let score = netinfof_score(&JointCounts::from_table(&m).unwrap()).unwrap();
        if (-h).exp2() > max_p + 1e-12 || (score - (-h).exp2()).abs() > 1e-12 {
            marginal += 1;
        }
    }
    (joint, marginal)
}

/// Row and symmetric propagation against dense matrix powers.
pub fn propagation_error(seed: u64) -> f64 {
    let mut rng = stream(seed, "oracle-prop");
    let n = 200;
    let (edges, g) = random_graph(&mut rng, n, 500);
    let x = gaussian(&mut rng, n, 7);
    let mut a = DMatrix::<f64>::zeros(n, n);
    for &(u, v) in &edges {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    let deg: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    let a_row = DMatrix::from_fn(n, n, |i, j| a[(i, j)] / deg[i]);
    let a_sym = DMatrix::from_fn(n, n, |i, j| {
        let aij = a[(i, j)] + if i == j { 1.0 } else { 0.0 };
        aij / ((deg[i] + 1.0) * (deg[j] + 1.0)).sqrt()
    });
    let mut worst: f64 = 0.0;
    for k in 1..=4 {
        let p_row = (0..k).fold(x.clone(), |acc, _| &a_row * acc);
        let p_sym = (0..k).fold(x.clone(), |acc, _| &a_sym * acc);
        worst = worst.max(max_abs_diff(&propagate_row(&g, &x, k), &p_row));
        worst = worst.max(max_abs_diff(&propagate_sym(&g, &x, k), &p_sym));
    }
    worst
}

/// Worst relative error of the analytic loss gradient against central
/// differences, over binary and multi-class instances.
pub fn gradient_error(seed: u64, instances: usize) -> f64 {
    let mut rng = stream(seed, "oracle-grad");
    let mut worst: f64 = 0.0;
    for t in 0..instances {
        let n = rng.random_range(5..40);
        let d = rng.random_range(1..12);
        let x = gaussian(&mut rng, n, d);
        let targets = if t % 2 == 0 {
            Targets::Binary((0..n).map(|_| f64::from(u8::from(rng.random::<bool>()))).collect())
        } else {
            let c = rng.random_range(2..6);
            Targets::Classes {
                labels: (0..n).map(|_| rng.random_range(0..c)).collect(),
                num_classes: c,
            }
        };
        let outputs = targets.outputs();
        let w = gaussian(&mut rng, d, outputs);
        let b = DVector::from_fn(outputs, |_, _| rng.sample::<f64, _>(StandardNormal));
        let (_, gw, gb) = model::loss_and_grad(&w, &b, &x, &targets);

        let eps = 1e-5;
        let mut fd_w = DMatrix::zeros(d, outputs);
        for idx in 0..w.len() {
            let (mut wp, mut wm) = (w.clone(), w.clone());
            wp[idx] += eps;
            wm[idx] -= eps;
            fd_w[idx] = (model::loss(&wp, &b, &x, &targets) - model::loss(&wm, &b, &x, &targets)) / (2.0 * eps);
        }
        let mut fd_b = DVector::zeros(outputs);
        for idx in 0..outputs {
            let (mut bp, mut bm) = (b.clone(), b.clone());
            bp[idx] += eps;
            bm[idx] -= eps;
            fd_b[idx] = (model::loss(&w, &bp, &x, &targets) - model::loss(&w, &bm, &x, &targets)) / (2.0 * eps);
        }
        let diff = ((&gw - &fd_w).norm_squared() + (&gb - &fd_b).norm_squared()).sqrt();
        let scale = (gw.norm_squared() + gb.norm_squared()).sqrt().max((fd_w.norm_squared() + fd_b.norm_squared()).sqrt());
        worst = worst.max(diff / scale.max(1e-12));
    }
    worst
}
