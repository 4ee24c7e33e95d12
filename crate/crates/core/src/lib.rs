//! Numerical laboratory for operator-valued Fourier multipliers of bounded
//! `s`-variation.
//!
//! Every object lives on a finite model: Banach spaces are finite-dimensional
//! (`ℓ^p_n`, Schatten classes), functions are sampled paths or step functions,
//! and the real line is replaced by a periodic grid with integer frequencies.
//! The modules mirror that split:
//!
//! - [`spaces`]: norms, operator norms and exponents.
//! - [`variation`]: `V^s`, Hölder, atomic and difference functionals.
//! - [`weights`]: discrete Muckenhoupt constants and weighted `L^p` norms.
//! - [`multiplier`]: DFT, symbols, frequency projections and multiplier norms.
//! - [`carleson`]: Carleson maximal, variational Carleson and Rubio de Francia
//!   functionals.
//! - [`randomized`]: Rademacher averages, type/cotype and `R`-bound estimates.

pub mod carleson;
pub mod error;
pub mod multiplier;
pub mod randomized;
pub mod spaces;
pub mod variation;
pub mod weights;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Independent seed for stream `stream` of a run seeded with `base`
/// (SplitMix64 finalizer over the pair).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
