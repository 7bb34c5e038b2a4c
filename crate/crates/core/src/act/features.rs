//! Edge and node feature vectors for the linear predictors.

use nalgebra::DMatrix;

use crate::compat::CompatMatrix;
use crate::embed::{Component, EmbeddingSet};
use crate::graph::Edge;
use crate::linalg;

use super::model::Standardizer;

/// Precomputed per-component `Ẑ H` and `Ẑ` so an edge feature block is one
/// Hadamard product: `(ẑ_i H) ⊙ ẑ_j`.
#[derive(Debug, Clone)]
pub struct LpFeatureBuilder {
    pub components: Vec<Component>,
    /// `Ẑ H` per component, `n × d`.
    left: Vec<DMatrix<f64>>,
    /// `Ẑ` per component.
    right: Vec<DMatrix<f64>>,
    widths: Vec<usize>,
}

impl LpFeatureBuilder {
    /// `hs` pairs each component with its compatibility matrix; a `None`
    /// matrix means plain `ẑ_i ⊙ ẑ_j`.
    pub fn new(emb: &EmbeddingSet, hs: &[(Component, Option<&CompatMatrix>)]) -> Self {
        let mut components = Vec::new();
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut widths = Vec::new();
        for &(c, h) in hs {
            let z = emb.preprocessed(c);
            left.push(match h {
                Some(h) => &z * &h.values,
                None => z.clone(),
            });
            widths.push(z.ncols());
            right.push(z);
            components.push(c);
        }
        Self {
            components,
            left,
            right,
            widths,
        }
    }

    pub fn num_features(&self) -> usize {
        self.widths.iter().sum()
    }

    /// Row ranges of each component block.
    pub fn groups(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut at = 0;
        for &w in &self.widths {
            out.push(at..at + w);
            at += w;
        }
        out
    }

    pub fn build_one(&self, (i, j): Edge) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_features());
        for (l, r) in self.left.iter().zip(&self.right) {
            out.extend(l.row(i).iter().zip(r.row(j).iter()).map(|(a, b)| a * b));
        }
        out
    }

    /// One row per edge.
    pub fn build(&self, edges: &[Edge]) -> DMatrix<f64> {
        let f = self.num_features();
        let mut out = DMatrix::zeros(edges.len(), f);
        let mut offset = 0;
        for (l, r) in self.left.iter().zip(&self.right) {
            let d = l.ncols();
            for a in 0..d {
                let (lc, rc) = (l.column(a), r.column(a));
                let mut col = out.column_mut(offset + a);
                for (e, &(i, j)) in edges.iter().enumerate() {
                    col[e] = lc[i] * rc[j];
                }
            }
            offset += d;
        }
        out
    }

    /// Write standardized features of `edges` into rows `offset..` of `out`.
    pub fn fill(&self, edges: &[Edge], out: &mut DMatrix<f64>, offset: usize, scaler: &Standardizer) {
        let mut col_at = 0;
        for (l, r) in self.left.iter().zip(&self.right) {
            for a in 0..l.ncols() {
                let (lc, rc) = (l.column(a), r.column(a));
                let (m, s) = (scaler.means[col_at + a], scaler.scales[col_at + a]);
                let mut col = out.column_mut(col_at + a);
                for (e, &(i, j)) in edges.iter().enumerate() {
                    col[offset + e] = (lc[i] * rc[j] - m) * s;
                }
            }
            col_at += l.ncols();
        }
    }
}

impl LpFeatureBuilder {
    /// Decision values `w · standardize(features(e)) + b` without building
    /// the feature rows.
    pub fn score_edges(&self, edges: &[Edge], weights: &[f64], bias: f64, scaler: &Standardizer) -> Vec<f64> {
        assert_eq!(weights.len(), self.num_features());
        let eff: Vec<f64> = weights.iter().zip(&scaler.scales).map(|(w, s)| w * s).collect();
        let offset = bias - eff.iter().zip(&scaler.means).map(|(e, m)| e * m).sum::<f64>();
        // Transposed so each node's row is contiguous; the left side carries
        // the effective weights.
        let mut blocks = Vec::with_capacity(self.left.len());
        let mut at = 0;
        for (l, r) in self.left.iter().zip(&self.right) {
            let d = l.ncols();
            let mut lt = l.transpose();
            for a in 0..d {
                lt.row_mut(a).scale_mut(eff[at + a]);
            }
            blocks.push((lt, r.transpose()));
            at += d;
        }
        edges
            .iter()
            .map(|&(i, j)| {
                offset
                    + blocks
                        .iter()
                        .map(|(lt, rt)| lt.column(i).dot(&rt.column(j)))
                        .sum::<f64>()
            })
            .collect()
    }
}

/// Edge feature vector over all five components, in `U, R, F, P, S` order.
pub fn build_lp_features(emb: &EmbeddingSet, h_stars: &[CompatMatrix; 5], edge: Edge) -> Vec<f64> {
    let hs: Vec<(Component, Option<&CompatMatrix>)> = Component::ALL
        .iter()
        .zip(h_stars)
        .map(|(&c, h)| (c, Some(h)))
        .collect();
    LpFeatureBuilder::new(emb, &hs).build_one(edge)
}

/// Column-normalized components concatenated per node.
pub fn build_nc_features(emb: &EmbeddingSet, components: &[Component]) -> DMatrix<f64> {
    let blocks: Vec<DMatrix<f64>> = components
        .iter()
        .map(|&c| linalg::l2_normalize_columns(emb.get(c)))
        .collect();
    let n = emb.num_nodes();
    let f: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(n, f);
    let mut offset = 0;
    for b in &blocks {
        out.columns_mut(offset, b.ncols()).copy_from(b);
        offset += b.ncols();
    }
    out
}

pub fn component_groups(emb: &EmbeddingSet, components: &[Component]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut at = 0;
    for &c in components {
        let w = emb.get(c).ncols();
        out.push(at..at + w);
        at += w;
    }
    out
}
