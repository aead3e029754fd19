//! Regularized Gram matrix, block-LDL factorization, 2×2 Hermitian
//! inversion, substitution-based inversion, LMMSE equalization and the
//! baselines used to judge them.
//!
//! Every algorithm is written once against [`BlockEngine`]; [`Reference`]
//! runs it in double precision and [`FixedEngine`] in the bit-accurate
//! fixed-point datapath shared with the architecture model.

mod backsub;
mod bldl;
mod block;
mod channel;
mod engine;
mod equalize;
mod gram;
mod neumann;
mod oracle;
mod pipeline;

pub use backsub::{backward_substitute, InverseMatrix};
pub(crate) use backsub::{l_entry, rhs_entry};
pub use bldl::{bldl_factorize, BldlFactors};
pub use block::{Block2, BlockHermitianMatrix, Conj, ToComplex64};
pub use channel::{normalize_channel, ChannelMatrix, NoiseConfig, Normalization};
pub use engine::{det2x2, inv2x2_hermitian, BlockEngine, FixedConfig, FixedEngine, Reference};
pub use equalize::lmmse_equalize;
pub use gram::{gram_fixed_accumulators, gram_regularized, pack_gram};
pub use neumann::neumann_inverse;
pub use oracle::reference_inverse;
pub use pipeline::{preprocess, preprocess_inverse, Precision, Preprocessed};
