//! Pseudo-spectral simulation and verification toolkit for two-dimensional
//! dissipative active scalar equations whose dissipation, constitutive law,
//! and function-space weights are logarithmic-type radial Fourier
//! multipliers.
//!
//! The crate is organized bottom-up:
//! - [`multipliers`]: radial symbol calculus, class verification, and the
//!   admissibility decision for a multiplier suite;
//! - [`spectral`]: doubly periodic grids, FFT plumbing, multiplier
//!   application, dyadic frequency decompositions, and weighted norms;
//! - [`solver`]: the dealiased pseudo-spectral time stepper with integrating
//!   factors;
//! - [`harness`]: reproducible experiments and inequality probes over the
//!   solver and the symbol calculus.

pub mod error;
pub mod harness;
pub mod multipliers;
pub mod solver;
pub mod spectral;

pub use error::{CoreError, Result};
pub use harness::{experiment_names, run_named, ExperimentReport, ProbeSample};
pub use multipliers::{
    admissibility_check, default_gamma_grid, threshold_scan, verify_class, AdmissibilityReport,
    ClassReport, DerivRule, MultiplierSuite, Property, PropertyVerdict, QuadSpec, RadialGrid,
    SymbolClass, SymbolExpr, SymbolFamily, ThresholdMatrix,
};
pub use solver::{
    compute_velocity, flux_divergence, linear_propagator, run, run_observed, step, DtSpec,
    IntegratorKernel, NormRow, NormSeries, QMode, RunConfig, Scheme, TendencyFn, Trajectory,
};
pub use spectral::{
    apply_multiplier, bernstein_probe, besov_norm, custom_weighted_norm, load_field,
    lp_block_weight, lp_partition, partial_derivative, product_padded, save_field, weighted_norm,
    GevreySpec, GridSpec, LPBlocks, NormValue, SpectralField, WeightedNormSpec, ZeroModeRule,
};
