//! Landau-Ginzburg-Devonshire simulation of ferroelectric capacitor stacks
//! (MFM and MFDM), virtual electrical characterization, and KAI/NLS
//! switching-kinetics fitting.

pub mod electrostatics;
pub mod error;
pub mod experiments;
pub mod kinetics;
pub mod lgd;
pub mod material;
mod parallel;
pub mod simplex;
pub mod units;
pub mod waveform;

pub use error::{Error, ErrorKind, Result};
