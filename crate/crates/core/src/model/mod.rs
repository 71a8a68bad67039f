//! Problem specification, coupling matrices, index sets and special functions.

mod chain;
mod special;

pub use chain::{
    coupling_matrix, index_set, Alpha, Boundary, ChainSpec, IndexSet, Sites, DEFAULT_DIM_BUDGET,
};
pub(crate) use special::ring_sum;
pub use special::{
    clausen_truncated, eta, hurwitz_zeta, lerch, lerch_truncated, zeta, zeta_eta, LerchSum,
    ThermoCouplings, ZetaEta, DEFAULT_TOL,
};
