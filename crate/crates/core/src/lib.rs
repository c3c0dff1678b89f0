//! Finite Heisenberg-Weil signal systems over prime fields.
//!
//! The crate builds the Heisenberg (chirp) system and the split and non-split
//! oscillator systems of length `p`, measures their ambiguity and correlation
//! behaviour, and runs radar and CDMA simulations on top of them.

pub mod applications;
pub mod dft;
pub mod error;
pub mod field;
pub mod heisenberg;
pub mod io;
pub mod metrics;
pub mod oscillator;
pub mod signal;
pub mod spectral;
pub mod system;
pub mod weil;

pub use error::{Error, Result};
pub use field::{PrimeField, Sl2};
pub use signal::{Operator, PhaseSpaceFunction, Signal};
pub use system::{LabeledSignal, SignalLabel, SignalSystem, SystemKind};
