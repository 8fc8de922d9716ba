//! Constellation design for digital over-the-air computation of sums.
//!
//! `K` nodes each map a symbol `s < q·n` onto a `q × n` grid, the channel
//! adds the points together with noise, and the receiver slices the
//! superimposed grid to recover `Σ s_k`. This crate computes MSE-optimal
//! grid spacings and checks them against closed-form and simulated MSE.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod decoder;
pub mod encoder;
mod error;
pub mod experiments;
pub mod model;
pub mod optimizer;

pub use analytic::{mse_map, mse_ml, mse_ndim, qfunc, MseBreakdown};
pub use channel::{sample_noise, superimpose, transmit, RngStream};
pub use decoder::{decode_hybrid, decode_map, decode_ml, decode_ndim, map_scale, slice_axis};
pub use encoder::{
    avg_power, decompose, encode, encode_hybrid, encode_ndim, hybrid_avg_power, GridSpacing, NDimSpacing,
};
pub use error::{Error, Result};
pub use experiments::{
    analytic_mse, design_spacing, estimate_mse, sweep, write_csv, DecoderKind, Design, MseEstimate, SweepPlan,
    SweepRecord, CSV_HEADER,
};
pub use model::{snr_from_db, snr_to_db, Coefficients, DerivedGrid, NoiseModel, SystemConfig};
pub use num_complex::Complex64;
pub use optimizer::{
    find_positive_roots, solve_cauchy, solve_lambert, solve_map, solve_ml, solve_ndim, threshold_xi1,
    OptimizerSolution, Region, RootReport,
};
