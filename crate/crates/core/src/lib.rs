//! Language-driven image generation.
//!
//! Word embeddings are projected into a visual feature space by a penalized
//! linear regression ([`crossmodal`]), and the predicted visual vectors are
//! turned into pixels by sparse coding against a paired pixel/feature
//! dictionary ([`inversion`]). Concepts that are rendered this way never
//! contribute data to either trained component; [`evalharness`] enforces that
//! protocol and scores the results with automated feature-space proxies.
//!
//! The crate is organised bottom-up:
//!
//! - [`corpus`]: vector tables, concept catalogs, PGM/PPM images and patch grids.
//! - [`aggregate`]: prototype and exemplar summaries of per-image vectors.
//! - [`crossmodal`]: plain, ridge, lasso and symmetric elastic-net mappings.
//! - [`inversion`]: orthogonal matching pursuit, paired dictionary learning and
//!   image generation from a visual vector.
//! - [`evalharness`]: zero-shot splits, synthetic corpora, discrimination and
//!   macro-category evaluation.
//! - [`cli`]: the `dreamgen` command-line driver.
//!
//! All randomness is derived from explicit 64-bit seeds, see [`rng`].

pub mod aggregate;
pub mod cli;
pub mod corpus;
pub mod crossmodal;
pub mod error;
pub mod evalharness;
mod fsutil;
pub mod inversion;
pub mod provenance;
pub mod rng;

pub use error::{Error, Result};
