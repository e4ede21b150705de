//! Numerical simulation of Kibble-Zurek defect formation in a driven
//! two-qubit Ising chain, together with the discretized NMR protocol that
//! implements it.

pub mod error;
pub mod evolve;
pub mod figures;
pub mod format;
pub mod kzm;
pub mod model;
pub mod protocol;
pub mod smallmat;

pub use error::{Error, Result};
pub use evolve::{Backend, DensityMatrix, ScanTrace, SweepConfig, TracePoint};
pub use figures::{reproduce_figure, Dataset, Figure};
pub use kzm::{KzmParams, ScalingFit, ScalingPoint, ScalingSweep};
pub use model::{GroundState, ModelParams};
pub use smallmat::{ComplexMatrix, SpectralData, StateVector, C64};
