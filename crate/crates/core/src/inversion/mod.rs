//! Feature inversion through a paired pixel/feature dictionary.
//!
//! Image patches `x` (`D` values) and the features `y` (`d` values) of the
//! same patch are modelled as `x = U a`, `y = Vd a` with one sparse code `a`
//! shared by both bases. Learning runs on joint samples
//! `z = [x / sqrt(D); y / sqrt(d)]` with orthogonal matching pursuit for the
//! codes and a least-squares (MOD) refit of the atoms. Inversion codes a
//! feature window against `Vd` alone and emits `U a`.

mod dictionary;
mod generate;
mod io;
mod learn;
mod omp;

pub use dictionary::{CellGeometry, DictMeta, PairedDictionary, PatchGeometry};
pub use generate::{generate_image, training_pairs, window_features};
pub use io::{load_dictionary, parse_dictionary, save_dictionary, write_dictionary};
pub use learn::{initial_atoms, learn_joint, learn_paired_dictionary, DictionaryConfig, JointLearning};
pub use omp::{omp, omp_traced, OmpTrace, SparseCode, UNIT_NORM_TOLERANCE};
