//! Variational estimation of local neighbor weights.
//!
//! Each pixel is modeled as a weighted combination of its eight neighbors,
//! `u(x) ≈ Σ_k w_k(x) u(x + δ_k)`. The weights minimize
//!
//! ```text
//! E(w) = Σ_k TV_eps(w_k) + (λ/2) Σ_x r(x)²,    r = Σ_k w_k u(· + δ_k) − u
//! ```
//!
//! where `TV_eps(f) = Σ_x sqrt(|∇⁺f|² + eps²)`. Note that `λ` weights the
//! fidelity term, not the smoothness term. The minimization runs as an
//! explicit gradient flow
//!
//! ```text
//! w_k ← w_k + dt · ( div(∇⁺w_k / g) − λ · r · u(· + δ_k) )
//! ```
//!
//! with every plane updated from the previous iterate (Jacobi). Gradients use
//! forward differences and the divergence uses backward differences, so the
//! curvature term is exactly the negative gradient of the discrete TV energy.
//! Differences across the image boundary are zero.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{stencil_sum, Field, Image, NEIGHBORS};
use crate::weights::{init_weights, WeightField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Weight of the fidelity term.
    pub lambda: f64,
    /// Explicit Euler time step.
    pub dt: f64,
    /// Floor inside the gradient magnitude, `sqrt(|∇w|² + eps²)`.
    pub eps: f64,
    pub max_iters: usize,
    /// Stop once the largest absolute weight change in a step falls below
    /// this.
    pub stop_tol: f64,
}

impl SolverConfig {
    pub const DEFAULT_LAMBDA: f64 = 0.1;
    pub const DEFAULT_DT: f64 = 0.05;
    /// Explicit steps decrease `E` whenever `dt < 2 / (8/eps + 8λ)` for
    /// intensities in `[0, 1]`; at `dt = 0.05, λ = 0.1` that needs
    /// `eps > 0.204`.
    pub const DEFAULT_EPS: f64 = 0.25;
    pub const DEFAULT_MAX_ITERS: usize = 500;
    pub const DEFAULT_STOP_TOL: f64 = 1e-5;

    pub fn validate(&self) -> Result<()> {
        let ok = self.lambda >= 0.0
            && self.lambda.is_finite()
            && self.dt > 0.0
            && self.dt.is_finite()
            && self.eps > 0.0
            && self.eps.is_finite()
            && self.max_iters >= 1
            && self.stop_tol >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid solver config {self:?}")))
        }
    }

    /// Largest time step for which every explicit step is guaranteed to
    /// decrease the energy on `[0, 1]` images.
    pub fn stable_dt_bound(&self) -> f64 {
        2.0 / (8.0 / self.eps + 8.0 * self.lambda)
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: Self::DEFAULT_LAMBDA,
            dt: Self::DEFAULT_DT,
            eps: Self::DEFAULT_EPS,
            max_iters: Self::DEFAULT_MAX_ITERS,
            stop_tol: Self::DEFAULT_STOP_TOL,
        }
    }
}

/// Result of [`estimate_weights`].
#[derive(Clone, Debug)]
pub struct WeightEstimate {
    pub weights: WeightField,
    pub iters_run: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
}

#[inline]
fn residual_at(img: &Image, w: &WeightField, x: usize, y: usize) -> f64 {
    let n = img.neighbors(x, y);
    let wk = w.at(x, y);
    stencil_sum(std::array::from_fn(|k| wk[k] * n[k])) - img.get(x, y)
}

/// `r(x) = Σ_k w_k(x) u(x + δ_k) − u(x)`.
pub fn residual(img: &Image, w: &WeightField) -> Result<Field> {
    w.check_dims(img)?;
    Ok(Field::from_fn(img.width(), img.height(), |x, y| {
        residual_at(img, w, x, y)
    }))
}

/// `Σ_x r(x)²`.
pub fn fidelity_energy(img: &Image, w: &WeightField) -> Result<f64> {
    Ok(residual(img, w)?.data().iter().map(|r| r * r).sum())
}

#[inline]
fn forward_diffs(f: &Field, x: usize, y: usize) -> (f64, f64) {
    let v = f.get(x, y);
    let dx = if x + 1 < f.width() { f.get(x + 1, y) - v } else { 0.0 };
    let dy = if y + 1 < f.height() { f.get(x, y + 1) - v } else { 0.0 };
    (dx, dy)
}

fn plane_tv(f: &Field, eps: f64) -> f64 {
    let eps2 = eps * eps;
    let mut sum = 0.0;
    for y in 0..f.height() {
        for x in 0..f.width() {
            let (dx, dy) = forward_diffs(f, x, y);
            sum += (dx * dx + dy * dy + eps2).sqrt();
        }
    }
    sum
}

/// Regularized total variation of the eight neighbor planes, without the
/// `λ` factor.
pub fn tv_energy(w: &WeightField, eps: f64) -> f64 {
    w.planes().iter().map(|p| plane_tv(p, eps)).sum()
}

/// `E = tv_energy + (λ/2) · fidelity_energy`, the quantity the flow
/// decreases.
pub fn total_energy(img: &Image, w: &WeightField, cfg: &SolverConfig) -> Result<f64> {
    Ok(tv_energy(w, cfg.eps) + 0.5 * cfg.lambda * fidelity_energy(img, w)?)
}

/// `div(∇⁺f / sqrt(|∇⁺f|² + eps²))` with backward-difference divergence.
pub fn tv_curvature(plane: &Field, eps: f64) -> Field {
    let (w, h) = plane.dims();
    let eps2 = eps * eps;
    let mut px = vec![0.0; w * h];
    let mut py = vec![0.0; w * h];
    px.par_chunks_mut(w)
        .zip(py.par_chunks_mut(w))
        .enumerate()
        .for_each(|(y, (rx, ry))| {
            for x in 0..w {
                let (dx, dy) = forward_diffs(plane, x, y);
                let g = (dx * dx + dy * dy + eps2).sqrt();
                rx[x] = dx / g;
                ry[x] = dy / g;
            }
        });
    Field::from_fn(w, h, |x, y| {
        let i = y * w + x;
        let div_x = if x > 0 { px[i] - px[i - 1] } else { px[i] };
        let div_y = if y > 0 { py[i] - py[i - w] } else { py[i] };
        div_x + div_y
    })
}

/// Fidelity part of the flow, `−λ · r · u(· + δ_k)` for each plane `k`:
/// the negative gradient of `(λ/2) · fidelity_energy`.
pub fn fidelity_force(img: &Image, w: &WeightField, lambda: f64) -> Result<Vec<Field>> {
    let r = residual(img, w)?;
    Ok((0..NEIGHBORS)
        .map(|k| {
            Field::from_fn(img.width(), img.height(), |x, y| {
                -lambda * r.get(x, y) * img.neighbor(x, y, k)
            })
        })
        .collect())
}

fn step_impl(
    img: &Image,
    w: &WeightField,
    cfg: &SolverConfig,
    iteration: usize,
) -> Result<(WeightField, f64)> {
    let fidelity = fidelity_force(img, w, cfg.lambda)?;
    let planes: Vec<Field> = (0..NEIGHBORS)
        .map(|k| {
            let old = w.plane(k);
            let curv = tv_curvature(old, cfg.eps);
            let fid = &fidelity[k];
            Field::from_fn(img.width(), img.height(), |x, y| {
                old.get(x, y) + cfg.dt * (curv.get(x, y) + fid.get(x, y))
            })
        })
        .collect();

    let mut max_update = 0.0f64;
    for (new, old) in planes.iter().zip(w.planes()) {
        for (a, b) in new.data().iter().zip(old.data()) {
            let d = (a - b).abs();
            if !d.is_finite() {
                return Err(Error::NonFinite {
                    stage: "weight evolution",
                    iteration,
                });
            }
            max_update = max_update.max(d);
        }
    }
    Ok((WeightField::from_planes_unchecked(planes, None), max_update))
}

/// One explicit Jacobi step of the weight flow. Returns the new field and
/// the largest absolute weight change.
pub fn evolve_step(
    img: &Image,
    w: &WeightField,
    cfg: &SolverConfig,
) -> Result<(WeightField, f64)> {
    w.check_dims(img)?;
    step_impl(img, w, cfg, 0)
}

/// Runs the flow from uniform weights until the update falls below
/// `stop_tol` or `max_iters` steps have run.
pub fn estimate_weights(img: &Image, cfg: &SolverConfig) -> Result<WeightEstimate> {
    cfg.validate()?;
    let mut w = init_weights(img.width(), img.height());
    let initial_energy = total_energy(img, &w, cfg)?;
    if img.dims() == (1, 1) {
        return Ok(WeightEstimate {
            weights: w,
            iters_run: 0,
            initial_energy,
            final_energy: initial_energy,
        });
    }

    let mut iters_run = 0;
    for it in 1..=cfg.max_iters {
        let (next, max_update) = step_impl(img, &w, cfg, it)?;
        w = next;
        iters_run = it;
        if max_update < cfg.stop_tol {
            break;
        }
    }

    let final_energy = total_energy(img, &w, cfg)?;
    if !final_energy.is_finite() {
        return Err(Error::NonFinite {
            stage: "weight energy",
            iteration: iters_run,
        });
    }
    Ok(WeightEstimate {
        weights: w,
        iters_run,
        initial_energy,
        final_energy,
    })
}
