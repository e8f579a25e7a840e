//! Decoders for CSS quantum LDPC codes.
//!
//! Scaled min-sum BP ([`bp`]) is the shared kernel. On top of it sit plain BP,
//! BP+OSD, BP with guided decimation, Relay BP and Restart Belief
//! ([`decoders`]). [`codes`] builds the benchmark codes and [`sim`] runs the
//! Monte Carlo and exhaustive-verification drivers.

pub mod bp;
pub mod codes;
pub mod decoders;
pub mod error;
pub mod gf2;
pub mod sim;

pub use bp::{AlphaSchedule, BpConfig, BpOutcome, TannerGraph};
pub use codes::{CssCode, Sector, SectorKind};
pub use decoders::{DecodeOutcome, DecoderSpec, Termination};
pub use error::{CodeError, Gf2Error, SimError};
pub use gf2::{BitVector, RowSpace, SparseBitMatrix};
