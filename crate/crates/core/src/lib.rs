// SPDX-License-Identifier: MIT OR Apache-2.0
//! Text-embedding decomposition and subspace separation.
//!
//! - [`linalg`]: dense matrices, one-sided Jacobi thin SVD, Gram-Schmidt.
//! - [`embedding`]: `l x d` token embeddings with a word/pad partition, file
//!   I/O and a synthetic pad-coherent generator.
//! - [`decompose`]: component groups, similarity profiles, spectra, norm matching.
//! - [`projection`]: subspace projectors, `X' = X - α X P`, suppression baselines.
//! - [`lora_attention`]: key/value projections with a dual-path LoRA update.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`). The
//! `*64` / `*32` aliases below fix the scalar; the CLI works in `f64`.

pub mod decompose;
pub mod embedding;
mod error;
pub mod format;
pub mod linalg;
pub mod lora_attention;
pub mod projection;
mod scalar;

pub use error::{DecorError, Result};
pub use scalar::Scalar;

pub use decompose::{
    component_groups, component_groups_with, mean_spectrum, norm_match, reconstruct,
    similarity_profile, spectrum, spectrum_of, ComponentGroups, ComponentSelection, GroupRanges,
    SimilarityProfile, SpectrumReport,
};
pub use embedding::{load_embedding, save_embedding, synthesize, EmbeddingHeader, SyntheticSpec};
pub use linalg::{frobenius_norm, gram_schmidt_basis, matmul, row_cosine, thin_svd, OrthoBasis};
pub use lora_attention::{
    forward_decor, forward_standard, load_lora, random_lora, random_lora_in_span, save_lora,
    AttentionOutput, LoraInit,
};
pub use projection::{
    build_projector, decor_embedding, decor_with_projector, load_projector, project_separate,
    remove_target, save_projector, suppress_exclude_components, suppress_zero_words,
    DualPathConfig, ProjectionMethod,
};

pub type Matrix64 = linalg::Matrix<f64>;
pub type Matrix32 = linalg::Matrix<f32>;
pub type Svd64 = linalg::SvdFactorization<f64>;
pub type Svd32 = linalg::SvdFactorization<f32>;
pub type Embedding64 = embedding::EmbeddingMatrix<f64>;
pub type Embedding32 = embedding::EmbeddingMatrix<f32>;
pub type Projector64 = projection::Projector<f64>;
pub type Projector32 = projection::Projector<f32>;
pub type LoraWeights64 = lora_attention::LoraAttentionWeights<f64>;
pub type LoraWeights32 = lora_attention::LoraAttentionWeights<f32>;
pub type Attention64 = lora_attention::AttentionOutput<f64>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
