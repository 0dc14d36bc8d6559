//! Super-resolution by adaptive filtering with estimated local weights.
//!
//! 1. estimate the eight neighbor-weight planes on the low-resolution image
//! 2. optionally renormalize them to sum to one per pixel
//! 3. bilinearly enlarge each plane to the target size
//! 4. build an initial high-resolution estimate (nearest by default)
//! 5. apply the enlarged weights once as a per-pixel 8-neighbor filter

use std::fmt;
use std::str::FromStr;

use crate::baselines::{upscale_bicubic, upscale_bilinear, upscale_nearest};
use crate::error::{Error, Result};
use crate::image::{stencil_sum, Image};
use crate::solver::{estimate_weights, SolverConfig};
use crate::weights::{renormalize, WeightField};

/// Interpolator used for the initial high-resolution estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InitMethod {
    #[default]
    Nearest,
    Bilinear,
    Bicubic,
}

impl InitMethod {
    pub fn upscale(self, img: &Image, zoom: usize) -> Result<Image> {
        match self {
            InitMethod::Nearest => upscale_nearest(img, zoom),
            InitMethod::Bilinear => upscale_bilinear(img, zoom),
            InitMethod::Bicubic => upscale_bicubic(img, zoom),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InitMethod::Nearest => "nearest",
            InitMethod::Bilinear => "bilinear",
            InitMethod::Bicubic => "bicubic",
        }
    }
}

impl fmt::Display for InitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(InitMethod::Nearest),
            "bilinear" => Ok(InitMethod::Bilinear),
            "bicubic" => Ok(InitMethod::Bicubic),
            other => Err(Error::InvalidConfig(format!("unknown init method {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SrConfig {
    pub zoom: usize,
    pub solver: SolverConfig,
    pub init_method: InitMethod,
    pub renormalize_weights: bool,
    pub renorm_floor: f64,
}

impl SrConfig {
    pub const DEFAULT_ZOOM: usize = 3;
    pub const DEFAULT_RENORM_FLOOR: f64 = 1e-6;

    pub fn validate(&self) -> Result<()> {
        if self.zoom < 2 {
            return Err(Error::InvalidConfig(format!("zoom must be >= 2, got {}", self.zoom)));
        }
        if !(self.renorm_floor > 0.0) {
            return Err(Error::InvalidConfig("renormalization floor must be positive".into()));
        }
        self.solver.validate()
    }
}

impl Default for SrConfig {
    fn default() -> Self {
        Self {
            zoom: Self::DEFAULT_ZOOM,
            solver: SolverConfig::default(),
            init_method: InitMethod::Nearest,
            renormalize_weights: false,
            renorm_floor: Self::DEFAULT_RENORM_FLOOR,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SrOutput {
    pub image: Image,
    pub iters_run: usize,
    pub final_energy: f64,
}

/// Bilinear enlargement of each neighbor plane (anchor, if any, dropped).
pub fn upsample_weight_field(w: &WeightField, zoom: usize) -> Result<WeightField> {
    let planes = w
        .planes()
        .iter()
        .map(|p| upscale_bilinear(p, zoom))
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightField::from_planes_unchecked(planes, None))
}

/// `u(x) = Σ_k w_k(x) û(x + δ_k)`, one pass, replicate boundary, no
/// clamping.
pub fn apply_adaptive_filter(hr_init: &Image, w_hr: &WeightField) -> Result<Image> {
    w_hr.check_dims(hr_init)?;
    Ok(Image::from_fn(hr_init.width(), hr_init.height(), |x, y| {
        let n = hr_init.neighbors(x, y);
        let wk = w_hr.at(x, y);
        stencil_sum(std::array::from_fn(|k| wk[k] * n[k]))
    }))
}

pub fn super_resolve(lr: &Image, cfg: &SrConfig) -> Result<SrOutput> {
    cfg.validate()?;
    let est = estimate_weights(lr, &cfg.solver)?;
    let weights = if cfg.renormalize_weights {
        renormalize(&est.weights, cfg.renorm_floor)
    } else {
        est.weights
    };
    let w_hr = upsample_weight_field(&weights, cfg.zoom)?;
    let hr_init = cfg.init_method.upscale(lr, cfg.zoom)?;
    let filtered = apply_adaptive_filter(&hr_init, &w_hr)?;
    if !filtered.is_finite() {
        return Err(Error::NonFinite {
            stage: "adaptive filter",
            iteration: est.iters_run,
        });
    }
    Ok(SrOutput {
        image: filtered.clamp01(),
        iters_run: est.iters_run,
        final_energy: est.final_energy,
    })
}
