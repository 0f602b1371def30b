//! Filter-based feature selection for continuous data.
//!
//! Feature subsets are scored by how much the per-class densities of each
//! feature overlap (relevance) and by the Wasserstein-1 distance between the
//! overall densities of feature pairs (redundancy). The combined score is
//! minimised with an adaptive genetic algorithm over binary feature masks.
//!
//! The pipeline is:
//!
//! 1. [`dataset`]: load a CSV, min-max normalise, split 8:2 by class.
//! 2. [`density`]: Gaussian KDE per feature, both per class and pooled.
//! 3. [`criterion`]: per-feature overlap ratios, pairwise W1 distances and
//!    the subset score built from them.
//! 4. [`search`]: adaptive GA over masks.
//! 5. [`evaluate`]: KNN, Gaussian naive Bayes and CART on the selected columns.
//!
//! [`cli`] wires these together for the `mvmr-fs` binary.

pub mod cli;
pub mod criterion;
pub mod dataset;
pub mod density;
pub mod error;
pub mod evaluate;
pub mod search;

pub use criterion::{build_cache, mvmr_score, pairwise_mvmr_matrix, FeatureMetricsCache};
pub use dataset::{Dataset, FeatureMask, SplitPair};
pub use density::{ClassDensities, DensityEstimate, GridSpec};
pub use error::{Error, Result};
pub use evaluate::EvalReport;
pub use search::{GaConfig, GaTrace, Individual};
