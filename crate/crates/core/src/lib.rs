//! Single-image super-resolution by variational estimation of local
//! neighbor weights.
//!
//! Every low-resolution pixel is modeled as a weighted combination of its
//! eight neighbors. The weight planes are found by a total-variation
//! regularized gradient flow ([`solver`]), enlarged bilinearly and applied
//! once as an adaptive filter to an initial high-resolution estimate
//! ([`pipeline`]). Nearest, bilinear, bicubic and digital TV filter
//! upscalers ([`baselines`]) and PSNR / Sobel edge metrics ([`analysis`])
//! are provided for comparison.
//!
//! Intensities are `f64` on `[0, 1]`; PGM files are converted at the
//! boundary ([`pgm`]).

pub mod analysis;
pub mod baselines;
pub mod cli;
pub mod error;
pub mod image;
pub mod pgm;
pub mod phantom;
pub mod pipeline;
pub mod solver;
pub mod weights;

pub use analysis::{compare, edge_count, mse, psnr, sobel_magnitude, CompareReport, Method, Psnr};
pub use baselines::{
    tv_filter, tv_filter_coeffs, tv_filter_upscale, upscale_bicubic, upscale_bilinear,
    upscale_nearest, TvFilterConfig,
};
pub use error::{Error, Result};
pub use image::{downsample_block, Field, Image, NEIGHBOR_OFFSETS};
pub use pgm::{load_pgm, save_pgm, Depth};
pub use pipeline::{apply_adaptive_filter, super_resolve, upsample_weight_field, InitMethod, SrConfig, SrOutput};
pub use solver::{
    estimate_weights, evolve_step, fidelity_energy, fidelity_force, residual, total_energy, tv_curvature,
    tv_energy, SolverConfig, WeightEstimate,
};
pub use weights::{init_weights, renormalize, WeightField};
