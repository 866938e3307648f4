//! Robust canonical polyadic (PARAFAC) decomposition of three-way tensors
//! in the presence of outlying slabs.
//!
//! The core fitting routine is an iteratively reweighted alternating least
//! squares (IRALS) scheme: a smoothed group-sparsity objective over
//! per-slab residuals is minimized by cyclic closed-form updates of the
//! three loading factors and of per-slab weights, so that heavily corrupted
//! horizontal slabs are automatically downweighted. Constraints
//! (nonnegativity, box) and regularization (ridge, smoothness, l1) are
//! supported through ADMM subsolvers. A synthetic-experiment harness
//! generates planted-outlier instances and runs Monte-Carlo sweeps.

pub mod align;
pub mod cpd;
pub mod error;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{fold, khatri_rao, kruskal_rank, mttkrp, slab, solve_spd, unfold, Mat, Mode, Tensor3};
