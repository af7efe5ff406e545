//! Co-clustering of weblogs and the words they use.
//!
//! Feeds are reduced to weighted, stemmed word counts, arranged into a
//! blog-by-word characteristic matrix and then into a blog × blog × word
//! adjacency tensor. A greedy rank-one PARAFAC of that tensor yields
//! (hub, authority, term) groups; an NMF of the scaled matrix serves as the
//! baseline, and both are scored with the same similarity and overlap
//! measures.

pub mod config;
pub mod decomp;
pub mod evalmetrics;
pub mod exec;
pub mod feedio;
pub mod matrixbuild;
pub mod pipeline;
pub mod tensorops;
pub mod textprep;

pub use config::PipelineConfig;
pub use decomp::{greedy_parafac, nmf_multiplicative, FactorRecord, NmfConfig, ParafacConfig};
pub use exec::Exec;
pub use matrixbuild::{build_char_matrix, to_adjacency_tensor, CharMatrix};
pub use tensorops::{Matrix, Mode, SparseTensor3, Vector};
