//! Embeddings keyed by a digest of the graph, the features and the embedding
//! config, stored under `<out>/cache/<key>/`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use netinfof_core::embed::{self, EmbedConfig};
use netinfof_core::{io, Edge, EmbeddingSet, SparseGraph};
use sha2::{Digest, Sha256};

use crate::CliError;

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        write!(s, "{b:02x}").unwrap();
        s
    })
}

pub fn file_sha256(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

pub fn cache_key(edges: &[Edge], num_nodes: usize, x: &DMatrix<f64>, cfg: &EmbedConfig) -> String {
    let mut h = Sha256::new();
    h.update((num_nodes as u64).to_le_bytes());
    h.update((edges.len() as u64).to_le_bytes());
    for &(u, v) in edges {
        h.update((u as u64).to_le_bytes());
        h.update((v as u64).to_le_bytes());
    }
    h.update((x.nrows() as u64).to_le_bytes());
    h.update((x.ncols() as u64).to_le_bytes());
    for v in x.iter() {
        h.update(v.to_le_bytes());
    }
    h.update(serde_json::to_vec(cfg).expect("config serializes"));
    hex(&h.finalize())
}

pub struct Cache {
    root: Option<PathBuf>,
}

impl Cache {
    pub fn new(out: &Path, enabled: bool) -> Self {
        Self {
            root: enabled.then(|| out.join("cache")),
        }
    }

    /// Embeddings of `g` with features `x`, from the cache when possible.
    pub fn embeddings(&self, g: &SparseGraph, x: &DMatrix<f64>, cfg: &EmbedConfig) -> Result<EmbeddingSet, CliError> {
        let Some(root) = &self.root else {
            return Ok(embed::compute_embeddings(g, x, cfg)?);
        };
        let key = cache_key(&g.edges(), g.num_nodes(), x, cfg);
        let dir = root.join(&key);
        if dir.join("provenance.json").exists() {
            match io::read_embeddings(&dir) {
                Ok(emb) if emb.num_nodes() == g.num_nodes() && emb.dim == cfg.dim => {
                    log::info!("embedding cache hit {}", &key[..12]);
                    return Ok(emb);
                }
                Ok(_) => log::warn!("cache entry {} does not match; recomputing", &key[..12]),
                Err(e) => log::warn!("unreadable cache entry {}: {e}; recomputing", &key[..12]),
            }
        }
        let emb = embed::compute_embeddings(g, x, cfg)?;
        // Write to a scratch name and rename so an interrupted run never
        // leaves a half-written entry under the real key.
        let tmp = root.join(format!(".{key}.tmp"));
        let _ = std::fs::remove_dir_all(&tmp);
        std::fs::create_dir_all(&tmp).map_err(|e| CliError::Config(format!("{}: {e}", tmp.display())))?;
        io::write_embeddings(&tmp, &emb)?;
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::rename(&tmp, &dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?;
        log::info!("embedding cache store {}", &key[..12]);
        Ok(emb)
    }
}
