//! Entropy of Lévy process marginals: characteristic exponents, Fourier
//! inversion of densities, differential and quantized entropies, Monte Carlo
//! checks and the experiment suites built on them.

pub mod density;
pub mod entropy;
pub mod error;
pub mod experiments;
pub mod io;
pub mod montecarlo;
pub mod process_model;
pub mod quadrature;
pub mod special;
pub mod stats;

pub use density::{DensityGrid, DensityMethod};
pub use entropy::{EntropyCurve, EntropyEstimate, EntropyMethod, QuantizedLaw};
pub use error::{Error, Result};
pub use experiments::{ExperimentReport, HierarchyTable, Suite, Tolerances, VerifyOptions};
pub use montecarlo::SampleBatch;
pub use process_model::{
    char_exponent, char_function, check_sector, estimate_bg_index, BGIndexEstimate, CharExponentEval, EvalMethod,
    ExponentEvaluator, Family, ProcessSpec, SectorCheck,
};
