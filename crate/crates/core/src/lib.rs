//! Rateless coding with sequential threshold decoders.
//!
//! Codewords are infinite and drawn i.i.d. from a codebook prior; the decoder
//! accumulates a per-message score after every channel output and stops the
//! first time a score crosses its threshold. The crate provides the channel
//! models, the known-channel and universal (Jeffreys-mixture) decoders,
//! closed-form rate and converse bounds, and a Monte Carlo engine that checks
//! the bounds empirically.

pub mod channel;
pub mod bounds;
pub mod codebook;
pub mod mixture;
pub mod oracle;
pub mod scalar;
pub mod sequential;
pub mod sim;
pub mod sources;
pub mod verify;

pub use scalar::Real;

/// Default scalar for closed-form evaluation.
pub type Float = f64;
/// Extended-precision scalar for asymptotic sweeps.
pub type ExtendedFloat = num_bigfloat::BigFloat;
