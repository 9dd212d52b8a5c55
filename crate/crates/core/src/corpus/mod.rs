//! Ingestion and persistence of every on-disk input.
//!
//! - Vector tables use the word2vec text layout: a `<n> <d>` header followed
//!   by `n` lines of `<label> v1 ... vd`.
//! - Concept catalogs are headerless CSV lines `concept,category,macro`.
//! - Images are binary PGM (`P5`) or PPM (`P6`) with maxval 255.
//!
//! Reals are written as the shortest decimal string that parses back to the
//! same `f64`, see [`format_real`].

mod catalog;
mod image;
mod patch;
mod real;
mod table;

pub use catalog::{read_catalog, write_catalog, CatalogEntry, ConceptCatalog, MacroCategory};
pub use image::{decode_pnm, encode_pnm, read_image, write_image, Image};
pub use patch::{assemble, patchify, PatchGrid};
pub use real::{format_real, parse_real};
pub use table::{parse_vector_table, read_vector_table, write_vector_table, VectorTable};
