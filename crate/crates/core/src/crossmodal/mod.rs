//! Linear word-to-visual mapping.
//!
//! A mapping `M` (`d1 x d2`) is fit to word vectors `W` (`n x d1`) and visual
//! vectors `V` (`n x d2`) by minimizing the elastic-net objective
//!
//! ```text
//! J(M) = 1/2 ||W M - V||_F^2 + lambda1 ||M||_1 + lambda2/2 ||M||_F^2
//! ```
//!
//! with four penalty settings ([`Variant`]): plain least squares, ridge, lasso
//! and the symmetric elastic net (`lambda1 == lambda2`). Plain and ridge have
//! closed forms; the L1 variants use cyclic coordinate descent, each column of
//! `M` solved independently.

mod cv;
mod fit;
mod io;
mod model;
mod objective;
mod solve;

pub use cv::{assign_folds, cross_validate, CvReport};
pub use fit::{align_tables, fit_mapping, fit_tables, Alignment, FitOptions};
pub use io::{load_mapping, parse_mapping, save_mapping, write_mapping};
pub use model::{MappingModel, TrainMeta, Variant};
pub use objective::objective;
pub use solve::{least_squares_min_norm, ridge_closed_form, soft_threshold, CdOutcome, CoordinateDescent};
