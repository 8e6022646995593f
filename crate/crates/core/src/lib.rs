#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::manual_is_multiple_of)]

pub mod cutoffs;
pub mod error;
pub mod maximal;
pub mod profile;
pub mod propagator;
pub mod quadrature;
pub mod special;
pub mod split;
pub mod transform;

pub use error::{Error, Result};
pub use profile::{FrequencyProfile, Modulated, RadialProfile, Spectrum};
pub use special::{BesselOrder, AsymptoticCertificate, DyadicRange};
pub use propagator::{EvalPoint, SymbolParams, TimeGrid};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
