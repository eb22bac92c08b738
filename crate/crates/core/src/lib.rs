//! Bit-exact IEEE 754 binary32 and posit(32,2) codecs, single/double bit-upset
//! injection, and the resilience statistics built on top of them.
//!
//! Every 32-bit pattern is interpreted by both codecs as an exact dyadic
//! rational, so golden-versus-corrupted comparisons carry no secondary
//! rounding. The [`sweep`] module runs the exhaustive or sampled exploration
//! and [`ml`] measures how representation faults in classifier inputs degrade
//! accuracy.

pub mod bitweight;
pub mod exact;
pub mod fault;
pub mod float32;
pub mod ml;
pub mod posit32;
pub mod sweep;
pub mod word;

pub use exact::{BigDyadic, Dyadic};
pub use fault::{draw_second_bit, flip, FaultError, FaultSpec, SeededDraw, UpsetMode};
pub use word::{DecodedNumber, Format, NumberClass, RawWord32};

/// Crate version, echoed into every CSV header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
