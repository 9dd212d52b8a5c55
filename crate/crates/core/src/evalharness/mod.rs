//! Zero-shot protocol and automated evaluation.
//!
//! Human judgments are replaced by cosine comparisons in visual space:
//!
//! - discrimination ([`discrimination_eval`]): a candidate vector for a
//!   held-out concept wins when it is strictly closer to the concept's gold
//!   visual vector than to a confounder's, the confounder being a random
//!   other concept or the nearest word-space neighbour;
//! - macro-category ([`macro_confusion`]): a candidate is assigned to the
//!   closest of the three macro-category centroids built from seen concepts.
//!
//! [`synth`] builds seeded corpora with known ground truth for all of it.

mod discrimination;
mod macros;
mod split;
pub mod synth;

pub use discrimination::{
    discrimination_eval, nearest_neighbor_confounder, ConfounderMode, DiscriminationConfig, EvalReport, PairOutcome,
    Source,
};
pub use macros::{macro_confusion, ConfusionMatrix3};
pub use split::{make_split, ZeroShotSplit};
pub use synth::{psnr, synth_clustered_corpus, synth_corpus, synth_vision, LinearExtractor, SynthCorpus, SynthVision};
