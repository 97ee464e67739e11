//! Two-link binary CEO source coding under logarithmic loss.
//!
//! * [`bounds`]: rate-distortion bounds for BSC test channels and their
//!   Lagrangian optima.
//! * [`gf2`]: packed bit vectors, sparse GF(2) matrices, compound LDGM/LDPC codes.
//! * [`encoder`]: BiP quantization, syndrome binning and rate allocation.
//! * [`decoder`]: sum-product and joint decoding, soft estimation, log-loss.
//! * [`sim`]: seeded end-to-end experiments, table reproduction, sweeps.

pub mod bounds;
pub mod decoder;
pub mod encoder;
pub mod error;
pub mod gf2;
pub mod sim;

pub use bounds::{
    LagrangianWeight, ObservationModel, OptimizerSettings, OptimumLocusEntry, RateDistortionPoint, Region,
    TestChannelPair,
};
pub use error::{Error, Result};
pub use gf2::{BitSequence, CodePair, CodeParameters, CompoundCode, DegreeDistribution, SparseBitMatrix};
pub use encoder::{BipParams, LinkEncoding, RateSplit};
pub use decoder::{PosteriorTable, SoftSequence, SpParams, VirtualChannel};
pub use sim::{ExperimentConfig, RunReport};
