//! Capacity bounds and simulation for asynchronous discrete memoryless
//! channels.
//!
//! A transmitter sends one codeword at a time chosen uniformly among
//! `A = e^{alpha n}` slots; outside the codeword the receiver sees the
//! channel's noise symbol. The crate evaluates the tradeoff between rate and
//! the asynchronism exponent `alpha` and simulates sequential decoders that
//! operate under it.

// `!(x >= 0.0)` rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channel_file;
pub mod chernoff;
pub mod error;
pub mod prob;
pub mod sim;
pub mod simplex;

pub use error::{Error, Result};
pub use prob::{Channel, Dist};
