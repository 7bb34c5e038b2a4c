//! Fixtures shared by the kernel benchmarks: one mid-sized synthetic graph
//! with its embeddings and compatibility inputs, built once per bench run.

use std::collections::HashSet;

use nalgebra::DMatrix;
use netinfof_core::compat::{self, CompatConfig};
use netinfof_core::embed::{self, EmbedConfig};
use netinfof_core::synth::{self, LpFeatures, Structure, SynthDataset, SynthSpec};
use netinfof_core::{Component, Edge, EdgeSample, EmbeddingSet};

pub struct Fixture {
    pub data: SynthDataset,
    pub emb: EmbeddingSet,
    pub edges: Vec<Edge>,
    /// Preprocessed `P` block.
    pub z_hat: DMatrix<f64>,
    pub sample: EdgeSample,
}

pub fn fixture(num_nodes: usize, dim: usize) -> Fixture {
    let mut spec = SynthSpec::lp(Structure::Diagonal, LpFeatures::Global, 7);
    spec.num_nodes = num_nodes;
    spec.num_features = 200;
    spec.walk_trials = 100;
    let data = synth::generate(&spec).expect("valid synthetic spec");
    let embed_cfg = EmbedConfig {
        dim,
        walk_trials: 100,
        ..EmbedConfig::default()
    };
    let emb = embed::compute_embeddings(&data.graph, &data.features, &embed_cfg).expect("embeddings");
    let edges = data.graph.edges();
    let z_hat = emb.preprocessed(Component::P);
    let forbidden: HashSet<Edge> = edges.iter().copied().collect();
    let sample = compat::sample_edges_for_compat(
        num_nodes,
        &edges,
        &forbidden,
        CompatConfig::default().sample_size,
        dim * (dim + 1) / 2,
        7,
    );
    Fixture {
        data,
        emb,
        edges,
        z_hat,
        sample,
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixture_is_consistent() {
        let f = super::fixture(200, 8);
        assert_eq!(f.z_hat.nrows(), 200);
        assert_eq!(f.z_hat.ncols(), 8);
        assert!(!f.sample.pos.is_empty());
        assert_eq!(f.emb.num_nodes(), f.data.graph.num_nodes());
    }
}
