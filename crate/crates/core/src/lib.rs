//! Arrival-time statistics of many-particle sources at absorbing detectors and the
//! Fisher information of the source momentum.

pub mod deltakernel;
pub mod error;
pub mod fisher;
pub mod intensity;
pub mod process;
pub mod propagate;
pub mod quad;
pub mod scenario;
pub mod verify;

pub use error::{Error, Result};
pub use scenario::{FamilyKind, Mode, Scenario, StateFamily, Units};
