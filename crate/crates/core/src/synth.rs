//! Synthetic attributed graphs with known usable information.
//!
//! Structure comes from repeatedly planting small cliques: within one class
//! (diagonal), across a fixed pair of classes (off-diagonal), or from uniform
//! random pairs. Link-prediction features are random bits or singular vectors
//! of a 2-step walk count matrix, either whole (global) or confined to a
//! class-specific column slice (local). Node-classification features are
//! noisy class centers or random bits.

use std::collections::HashSet;

use nalgebra::DMatrix;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::embed::{self, CountMode};
use crate::error::{Error, Result};
use crate::graph::{self, Edge, SparseGraph};
use crate::linalg;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    Diagonal,
    OffDiagonal,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpFeatures {
    Random,
    Global,
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NcFeatures {
    Useful,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "task", content = "kind")]
pub enum FeatureKind {
    Lp(LpFeatures),
    Nc(NcFeatures),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub name: String,
    pub num_nodes: usize,
    pub num_features: usize,
    pub num_classes: usize,
    pub structure: Structure,
    pub features: FeatureKind,
    /// Average degree the generator stops at.
    pub target_density: f64,
    /// Inclusive node-count range of a planted clique (per side for
    /// bipartite cliques).
    pub clique_size_range: (usize, usize),
    /// Fraction of the final edges that are uniformly random.
    pub noise_rate: f64,
    /// Standard deviation of Gaussian noise added to useful features, in
    /// units of the signal's per-entry scale.
    pub feature_noise: f64,
    /// Walk trials per node for the singular-vector features.
    pub walk_trials: usize,
    pub seed: u64,
}

// Generator knobs with no canonical values, calibrated against reference
// tables (see the README).
pub const DEFAULT_LP_DENSITY: f64 = 10.0;
pub const DEFAULT_LP_NOISE_RATE: f64 = 0.05;
pub const DEFAULT_LP_FEATURE_NOISE: f64 = 0.3;
pub const DEFAULT_NC_DENSITY: f64 = 20.0;
pub const DEFAULT_NC_NOISE_RATE: f64 = 0.34;
pub const DEFAULT_NC_FEATURE_NOISE: f64 = 10.0;

impl SynthSpec {
    pub fn lp(structure: Structure, features: LpFeatures, seed: u64) -> Self {
        let name = format!("lp-{}-{}", lp_features_name(features), structure_name(structure));
        Self {
            name,
            num_nodes: 4000,
            num_features: 800,
            num_classes: 4,
            structure,
            features: FeatureKind::Lp(features),
            target_density: DEFAULT_LP_DENSITY,
            clique_size_range: (4, 8),
            noise_rate: DEFAULT_LP_NOISE_RATE,
            feature_noise: DEFAULT_LP_FEATURE_NOISE,
            walk_trials: 1000,
            seed,
        }
    }

    pub fn nc(structure: Structure, features: NcFeatures, seed: u64) -> Self {
        let name = format!(
            "nc-{}-{}",
            match features {
                NcFeatures::Useful => "useful",
                NcFeatures::Random => "random",
            },
            structure_name(structure)
        );
        Self {
            name,
            features: FeatureKind::Nc(features),
            target_density: DEFAULT_NC_DENSITY,
            noise_rate: DEFAULT_NC_NOISE_RATE,
            feature_noise: DEFAULT_NC_FEATURE_NOISE,
            ..Self::lp(structure, LpFeatures::Random, seed)
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.clique_size_range;
        if self.num_classes == 0 || self.num_nodes % self.num_classes != 0 {
            return Err(Error::input(format!(
                "{} nodes cannot be split equally into {} classes",
                self.num_nodes, self.num_classes
            )));
        }
        if lo < 2 || lo > hi {
            return Err(Error::input(format!("bad clique size range {lo}..={hi}")));
        }
        let class_size = self.num_nodes / self.num_classes;
        if hi > class_size {
            return Err(Error::input("cliques larger than a class"));
        }
        if self.structure == Structure::OffDiagonal && self.num_classes < 2 {
            return Err(Error::input("off-diagonal structure needs at least two classes"));
        }
        if !(0.0..1.0).contains(&self.noise_rate) {
            return Err(Error::input("noise_rate must be in [0, 1)"));
        }
        if self.target_density <= 0.0 || self.feature_noise < 0.0 {
            return Err(Error::input("density must be positive and feature noise non-negative"));
        }
        let max_edges = self.num_nodes * (self.num_nodes - 1) / 2;
        if self.target_edges() > max_edges / 2 {
            return Err(Error::input("target density too high for the node count"));
        }
        Ok(())
    }

    pub fn target_edges(&self) -> usize {
        (self.num_nodes as f64 * self.target_density / 2.0).round() as usize
    }
}

fn structure_name(s: Structure) -> &'static str {
    match s {
        Structure::Diagonal => "diagonal",
        Structure::OffDiagonal => "off-diagonal",
        Structure::Uniform => "uniform",
    }
}

fn lp_features_name(f: LpFeatures) -> &'static str {
    match f {
        LpFeatures::Random => "random",
        LpFeatures::Global => "global",
        LpFeatures::Local => "local",
    }
}

/// Equal-size classes assigned to a random permutation of the nodes.
pub fn gen_labels(spec: &SynthSpec) -> Vec<usize> {
    let per = spec.num_nodes / spec.num_classes;
    let mut labels: Vec<usize> = (0..spec.num_nodes).map(|i| i / per).collect();
    labels.shuffle(&mut rng::stream(spec.seed, "labels"));
    labels
}

/// Off-diagonal pairing: classes `2m` and `2m + 1` plant bipartite cliques
/// only with each other, so every class has one partner. With odd `c` the
/// last class falls back to class 0.
pub fn partner_class(class: usize, num_classes: usize) -> usize {
    let p = class ^ 1;
    if p < num_classes {
        p
    } else {
        (class + 1) % num_classes
    }
}

/// Edges and labels. Structured edges are planted until `(1 − noise_rate)`
/// of the target count is reached, then uniform noise edges fill the rest.
pub fn gen_structure(spec: &SynthSpec) -> Result<(SparseGraph, Vec<usize>)> {
    spec.validate()?;
    let labels = gen_labels(spec);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); spec.num_classes];
    for (node, &l) in labels.iter().enumerate() {
        members[l].push(node);
    }
    let target = spec.target_edges();
    let clean_target = ((1.0 - spec.noise_rate) * target as f64).round() as usize;
    let mut edges: HashSet<Edge> = HashSet::with_capacity(target);
    let mut rng = rng::stream(spec.seed, "structure");
    let (lo, hi) = spec.clique_size_range;

    while edges.len() < clean_target {
        match spec.structure {
            Structure::Diagonal => {
                let class = rng.random_range(0..spec.num_classes);
                let size = rng.random_range(lo..=hi);
                let nodes: Vec<usize> =
                    members[class].choose_multiple(&mut rng, size).copied().collect();
                for (a, &u) in nodes.iter().enumerate() {
                    for &v in &nodes[a + 1..] {
                        edges.insert(graph::canonical(u, v));
                    }
                }
            }
            Structure::OffDiagonal => {
                let class = rng.random_range(0..spec.num_classes);
                let partner = partner_class(class, spec.num_classes);
                let left_size = rng.random_range(lo..=hi);
                let right_size = rng.random_range(lo..=hi);
                let left: Vec<usize> =
                    members[class].choose_multiple(&mut rng, left_size).copied().collect();
                let right: Vec<usize> =
                    members[partner].choose_multiple(&mut rng, right_size).copied().collect();
                for &u in &left {
                    for &v in &right {
                        edges.insert(graph::canonical(u, v));
                    }
                }
            }
            Structure::Uniform => {
                let u = rng.random_range(0..spec.num_nodes);
                let v = rng.random_range(0..spec.num_nodes);
                if u != v {
                    edges.insert(graph::canonical(u, v));
                }
            }
        }
    }
    let noise = target.saturating_sub(edges.len());
    let mut noise_rng = rng::stream(spec.seed, "noise-edges");
    let extra = graph::sample_negatives(spec.num_nodes, &edges, noise, &mut noise_rng);
    edges.extend(extra);
    let mut list: Vec<Edge> = edges.into_iter().collect();
    list.sort_unstable();
    Ok((SparseGraph::from_edges(&list, spec.num_nodes)?, labels))
}

fn gaussian_noise(rows: usize, cols: usize, std: f64, rng: &mut rng::Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| std * Distribution::<f64>::sample(&StandardNormal, rng))
}

fn random_binary(rows: usize, cols: usize, rng: &mut rng::Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| f64::from(u8::from(rng.random::<bool>())))
}

/// Leading left singular vectors of the 2-step walk count matrix, each
/// weighted by its singular value relative to the largest, scaled so the
/// leading column has unit mean square.
fn walk_singular_vectors(g: &SparseGraph, k: usize, trials: usize, seed: u64) -> Result<DMatrix<f64>> {
    let walks = embed::random_walk_counts(g, trials, 2, CountMode::AllSteps, false, seed)?;
    let svd = linalg::truncated_svd(&walks.counts, k, rng::derive_seed(seed, "features-svd"));
    let top = svd.singular_values.first().copied().unwrap_or(0.0);
    let mut x = svd.left * (g.num_nodes() as f64).sqrt();
    if top > 0.0 {
        for (j, mut col) in x.column_iter_mut().enumerate() {
            col *= svd.singular_values[j] / top;
        }
    }
    Ok(x)
}

pub fn gen_features_lp(
    spec: &SynthSpec,
    g: &SparseGraph,
    labels: &[usize],
    kind: LpFeatures,
) -> Result<DMatrix<f64>> {
    let (n, f) = (spec.num_nodes, spec.num_features);
    let mut rng = rng::stream(spec.seed, "features");
    match kind {
        LpFeatures::Random => Ok(random_binary(n, f, &mut rng)),
        LpFeatures::Global => {
            let signal = walk_singular_vectors(g, f, spec.walk_trials, spec.seed)?;
            Ok(signal + gaussian_noise(n, f, spec.feature_noise, &mut rng))
        }
        LpFeatures::Local => {
            let c = spec.num_classes;
            let width = f / c;
            if width == 0 {
                return Err(Error::input("fewer features than classes for local slices"));
            }
            let signal = walk_singular_vectors(g, width, spec.walk_trials, spec.seed)?;
            let mut x = DMatrix::zeros(n, f);
            for (i, &l) in labels.iter().enumerate() {
                for j in 0..width {
                    x[(i, l * width + j)] = signal[(i, j)];
                }
            }
            // Noise only inside each node's own slice keeps supports disjoint.
            for (i, &l) in labels.iter().enumerate() {
                for j in 0..width {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    x[(i, l * width + j)] += spec.feature_noise * z;
                }
            }
            Ok(x)
        }
    }
}

pub fn gen_features_nc(spec: &SynthSpec, labels: &[usize], kind: NcFeatures) -> DMatrix<f64> {
    let (n, f) = (spec.num_nodes, spec.num_features);
    let mut rng = rng::stream(spec.seed, "features");
    match kind {
        NcFeatures::Random => random_binary(n, f, &mut rng),
        NcFeatures::Useful => {
            let centers = gaussian_noise(spec.num_classes, f, 1.0, &mut rng);
            let noise = gaussian_noise(n, f, spec.feature_noise, &mut rng);
            DMatrix::from_fn(n, f, |i, j| centers[(labels[i], j)] + noise[(i, j)])
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub spec: SynthSpec,
    pub graph: SparseGraph,
    pub features: DMatrix<f64>,
    pub labels: Vec<usize>,
}

pub fn generate(spec: &SynthSpec) -> Result<SynthDataset> {
    let (graph, labels) = gen_structure(spec)?;
    let features = match spec.features {
        FeatureKind::Lp(kind) => gen_features_lp(spec, &graph, &labels, kind)?,
        FeatureKind::Nc(kind) => gen_features_nc(spec, &labels, kind),
    };
    Ok(SynthDataset {
        spec: spec.clone(),
        graph,
        features,
        labels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteTask {
    Lp,
    Nc,
}

/// The six link-prediction scenarios ({random, global, local} features ×
/// {diagonal, off-diagonal} structure) or the five node-classification ones.
pub fn scenario_suite(task: SuiteTask, seed: u64) -> Vec<SynthSpec> {
    match task {
        SuiteTask::Lp => {
            let mut out = Vec::new();
            for features in [LpFeatures::Random, LpFeatures::Global, LpFeatures::Local] {
                for structure in [Structure::Diagonal, Structure::OffDiagonal] {
                    out.push(SynthSpec::lp(structure, features, seed));
                }
            }
            out
        }
        SuiteTask::Nc => vec![
            SynthSpec::nc(Structure::Uniform, NcFeatures::Useful, seed),
            SynthSpec::nc(Structure::Diagonal, NcFeatures::Random, seed),
            SynthSpec::nc(Structure::OffDiagonal, NcFeatures::Random, seed),
            SynthSpec::nc(Structure::Diagonal, NcFeatures::Useful, seed),
            SynthSpec::nc(Structure::OffDiagonal, NcFeatures::Useful, seed),
        ],
    }
}

/// Fraction of edges joining same-label nodes.
pub fn homophily_ratio(g: &SparseGraph, labels: &[usize]) -> f64 {
    let edges = g.edges();
    if edges.is_empty() {
        return 0.0;
    }
    let same = edges.iter().filter(|&&(u, v)| labels[u] == labels[v]).count();
    same as f64 / edges.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(structure: Structure, noise_rate: f64) -> SynthSpec {
        SynthSpec {
            num_nodes: 400,
            num_features: 40,
            noise_rate,
            walk_trials: 50,
            ..SynthSpec::lp(structure, LpFeatures::Random, 3)
        }
    }

    #[test]
    fn pairing_is_a_matching_for_even_c() {
        for c in [2, 4, 6] {
            for k in 0..c {
                let p = partner_class(k, c);
                assert_ne!(p, k);
                assert_eq!(partner_class(p, c), k);
            }
        }
        assert_eq!(partner_class(2, 3), 0);
    }

    #[test]
    fn labels_are_balanced() {
        let labels = gen_labels(&small(Structure::Uniform, 0.0));
        for c in 0..4 {
            assert_eq!(labels.iter().filter(|&&l| l == c).count(), 100);
        }
    }

    #[test]
    fn noiseless_structures_respect_classes() {
        let spec = SynthSpec {
            num_classes: 2,
            ..small(Structure::Diagonal, 0.0)
        };
        let (g, labels) = gen_structure(&spec).unwrap();
        assert_eq!(homophily_ratio(&g, &labels), 1.0);
        let spec = SynthSpec {
            structure: Structure::OffDiagonal,
            ..spec
        };
        let (g, labels) = gen_structure(&spec).unwrap();
        assert_eq!(homophily_ratio(&g, &labels), 0.0);
    }

    #[test]
    fn noisy_homophily_ratio_bounds() {
        let (g, labels) = gen_structure(&small(Structure::Diagonal, 0.05)).unwrap();
        assert!(homophily_ratio(&g, &labels) >= 1.0 - 0.05 - 0.02);
        let (g, labels) = gen_structure(&small(Structure::OffDiagonal, 0.05)).unwrap();
        assert!(homophily_ratio(&g, &labels) <= 0.05 + 0.02);
    }

    #[test]
    fn density_hits_target() {
        let spec = SynthSpec::lp(Structure::Diagonal, LpFeatures::Random, 0);
        let (g, _) = gen_structure(&spec).unwrap();
        let avg = 2.0 * g.num_edges() as f64 / g.num_nodes() as f64;
        assert!((avg - spec.target_density).abs() <= 0.1 * spec.target_density, "{avg}");
    }

    #[test]
    fn deterministic_under_seed() {
        let spec = small(Structure::OffDiagonal, 0.05);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.graph.edges(), b.graph.edges());
        assert_eq!(a.features, b.features);
    }

    #[test]
    fn random_features_are_binary() {
        let d = generate(&small(Structure::Diagonal, 0.05)).unwrap();
        assert!(d.features.iter().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn local_slices_are_disjoint() {
        let spec = SynthSpec {
            features: FeatureKind::Lp(LpFeatures::Local),
            ..small(Structure::Diagonal, 0.05)
        };
        let d = generate(&spec).unwrap();
        let width = spec.num_features / spec.num_classes;
        for (i, &l) in d.labels.iter().enumerate() {
            for j in 0..spec.num_features {
                if j / width != l {
                    assert_eq!(d.features[(i, j)], 0.0);
                }
            }
        }
        assert!(d.features.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn noiseless_useful_nc_features_equal_centers() {
        let spec = SynthSpec {
            feature_noise: 0.0,
            ..SynthSpec::nc(Structure::Uniform, NcFeatures::Useful, 1)
        };
        let labels = gen_labels(&spec);
        let x = gen_features_nc(&spec, &labels, NcFeatures::Useful);
        let first: Vec<usize> = (0..4).map(|c| labels.iter().position(|&l| l == c).unwrap()).collect();
        for (i, &l) in labels.iter().enumerate() {
            assert_eq!(x.row(i), x.row(first[l]));
        }
    }

    #[test]
    fn suites_have_expected_shape() {
        let lp = scenario_suite(SuiteTask::Lp, 0);
        assert_eq!(lp.len(), 6);
        assert!(lp.iter().all(|s| s.structure != Structure::Uniform));
        assert_eq!(scenario_suite(SuiteTask::Nc, 0).len(), 5);
    }
}
