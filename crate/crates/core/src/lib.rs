//! Rainbow-spectrum analysis of RNA secondary structures.
//!
//! Structures are non-crossing arc diagrams over `n` vertices with minimum
//! arc length `lambda` and minimum stack length `r`. A rainbow is an arc not
//! nested under any other arc. This crate provides
//!
//! * exact big-integer counts and exact finite-`n` distributions of the
//!   longest rainbow and of the number of rainbows of a given length
//!   ([`series`]),
//! * the dominant singularity, singular-expansion constants and the
//!   discrete limit laws derived from them ([`asymptotics`]),
//! * the diagram model, dot-bracket I/O and a brute-force enumerator
//!   ([`structures`]),
//! * an exact uniform sampler with Monte Carlo drivers ([`sampler`]),
//! * named experiments bundling theory and simulation columns
//!   ([`experiments`]).

pub mod asymptotics;
pub mod dist;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod hpreal;
pub mod params;
pub mod poly;
pub mod sampler;
pub mod series;
pub mod structures;

pub use asymptotics::AsymptoticConstants;
pub use dist::{DistKind, DistributionTable};
pub use error::{Error, Result};
pub use exec::Execution;
pub use hpreal::HpReal;
pub use params::Params;
pub use series::CountTable;
pub use structures::{RainbowSpectrum, SecondaryStructure};
