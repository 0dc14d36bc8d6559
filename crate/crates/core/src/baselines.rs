//! Comparison upscalers: nearest, bilinear, bicubic, and the digital TV
//! filter applied to a nearest-neighbor enlargement.
//!
//! All resamplers share one coordinate convention: output pixel `X` samples
//! the source at `s = (X + 0.5) / z − 0.5`, clamped to `[0, n − 1]`.

use crate::error::{Error, Result};
use crate::image::{stencil_sum, Field, Image, NEIGHBORS};
use crate::weights::WeightField;

fn check_zoom(zoom: usize) -> Result<()> {
    if zoom < 2 {
        return Err(Error::InvalidConfig(format!("zoom must be >= 2, got {zoom}")));
    }
    Ok(())
}

/// Source coordinate of output index `i` under pixel-center alignment.
#[inline]
pub fn source_coord(i: usize, zoom: usize, n: usize) -> f64 {
    let s = (i as f64 + 0.5) / zoom as f64 - 0.5;
    s.clamp(0.0, (n - 1) as f64)
}

/// `a + t (b − a)`, exact when `a == b` and never outside `[a, b]`.
#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    (a + t * (b - a)).clamp(a.min(b), a.max(b))
}

/// Floor index and fraction for a clamped source coordinate.
#[inline]
fn split(s: f64, n: usize) -> (usize, f64) {
    let i0 = (s.floor() as usize).min(n - 1);
    (i0, s - i0 as f64)
}

pub fn upscale_nearest(img: &Image, zoom: usize) -> Result<Image> {
    check_zoom(zoom)?;
    Ok(Image::from_fn(img.width() * zoom, img.height() * zoom, |x, y| {
        img.get(x / zoom, y / zoom)
    }))
}

pub fn upscale_bilinear(img: &Image, zoom: usize) -> Result<Image> {
    check_zoom(zoom)?;
    let (w, h) = img.dims();
    Ok(Image::from_fn(w * zoom, h * zoom, |x, y| {
        let (x0, fx) = split(source_coord(x, zoom, w), w);
        let (y0, fy) = split(source_coord(y, zoom, h), h);
        let x1 = (x0 + 1).min(w - 1);
        let y1 = (y0 + 1).min(h - 1);
        let top = lerp(img.get(x0, y0), img.get(x1, y0), fx);
        let bottom = lerp(img.get(x0, y1), img.get(x1, y1), fx);
        lerp(top, bottom, fy)
    }))
}

/// Catmull-Rom cubic convolution kernel (`a = −0.5`).
#[inline]
pub fn cubic_kernel(t: f64) -> f64 {
    const A: f64 = -0.5;
    let t = t.abs();
    if t <= 1.0 {
        ((A + 2.0) * t - (A + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        ((A * t - 5.0 * A) * t + 8.0 * A) * t - 4.0 * A
    } else {
        0.0
    }
}

/// One-dimensional cubic resampling of `len` samples read through `get`.
///
/// Evaluated as `u(i0) + Σ w_k (u(i_k) − u(i0))`, which equals the plain
/// kernel sum because the weights sum to one, and keeps flat runs exact.
#[inline]
fn cubic_sample(get: impl Fn(usize) -> f64, len: usize, s: f64) -> f64 {
    let (i0, f) = split(s, len);
    let base = get(i0);
    let mut acc = 0.0;
    for (j, off) in (-1isize..=2).enumerate() {
        let idx = (i0 as isize + off).clamp(0, len as isize - 1) as usize;
        let wk = cubic_kernel(f - (j as f64 - 1.0));
        acc += wk * (get(idx) - base);
    }
    base + acc
}

/// Separable Catmull-Rom upscaling, horizontal pass first. Output is not
/// clamped and may overshoot near edges.
pub fn upscale_bicubic(img: &Image, zoom: usize) -> Result<Image> {
    check_zoom(zoom)?;
    let (w, h) = img.dims();
    let wide = Image::from_fn(w * zoom, h, |x, y| {
        cubic_sample(|i| img.get(i, y), w, source_coord(x, zoom, w))
    });
    Ok(Image::from_fn(w * zoom, h * zoom, |x, y| {
        cubic_sample(|i| wide.get(x, i), h, source_coord(y, zoom, h))
    }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TvFilterConfig {
    /// Weight pulling each iterate back toward the original image.
    pub lambda_fit: f64,
    pub eps: f64,
    pub max_iters: usize,
    pub stop_tol: f64,
}

impl TvFilterConfig {
    pub const DEFAULT_LAMBDA_FIT: f64 = 1.0;
    pub const DEFAULT_EPS: f64 = 1e-4;
    pub const DEFAULT_MAX_ITERS: usize = 200;
    pub const DEFAULT_STOP_TOL: f64 = 1e-6;

    pub fn validate(&self) -> Result<()> {
        let ok = self.lambda_fit >= 0.0
            && self.lambda_fit.is_finite()
            && self.eps > 0.0
            && self.max_iters >= 1
            && self.stop_tol >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid TV filter config {self:?}")))
        }
    }
}

impl Default for TvFilterConfig {
    fn default() -> Self {
        Self {
            lambda_fit: Self::DEFAULT_LAMBDA_FIT,
            eps: Self::DEFAULT_EPS,
            max_iters: Self::DEFAULT_MAX_ITERS,
            stop_tol: Self::DEFAULT_STOP_TOL,
        }
    }
}

/// Digital TV filter coefficients for the current image.
///
/// With `g = sqrt(|∇u|² + eps²)` from central differences, the affinity
/// between `x` and a neighbor `y` is `1/g(x) + 1/g(y)`. Plane `k` holds
/// `a_k / (λ + Σ a)` and the anchor plane holds `λ / (λ + Σ a)`.
pub fn tv_filter_coeffs(img: &Image, cfg: &TvFilterConfig) -> WeightField {
    let eps2 = cfg.eps * cfg.eps;
    let inv_g = Field::from_fn(img.width(), img.height(), |x, y| {
        let (xi, yi) = (x as isize, y as isize);
        let gx = 0.5 * (img.get_clamped(xi + 1, yi) - img.get_clamped(xi - 1, yi));
        let gy = 0.5 * (img.get_clamped(xi, yi + 1) - img.get_clamped(xi, yi - 1));
        1.0 / (gx * gx + gy * gy + eps2).sqrt()
    });
    let affinity = |x: usize, y: usize| -> [f64; 8] {
        let own = inv_g.get(x, y);
        let nb = inv_g.neighbors(x, y);
        std::array::from_fn(|k| own + nb[k])
    };
    let denom = Field::from_fn(img.width(), img.height(), |x, y| {
        cfg.lambda_fit + stencil_sum(affinity(x, y))
    });
    let planes = (0..NEIGHBORS)
        .map(|k| {
            Field::from_fn(img.width(), img.height(), |x, y| {
                affinity(x, y)[k] / denom.get(x, y)
            })
        })
        .collect();
    let anchor = denom.map(|d| cfg.lambda_fit / d);
    WeightField::from_planes_unchecked(planes, Some(anchor))
}

/// One digital TV filter iteration: coefficients from `current`, anchored
/// to `original`. Returns the new iterate and the largest absolute change.
pub fn tv_filter_step(
    current: &Image,
    original: &Image,
    cfg: &TvFilterConfig,
) -> Result<(Image, f64)> {
    current.check_same_dims(original)?;
    let h = tv_filter_coeffs(current, cfg);
    let anchor = h.anchor().expect("TV coefficients carry an anchor plane");
    let next = Image::from_fn(current.width(), current.height(), |x, y| {
        let c = current.get(x, y);
        let o = original.get(x, y);
        let nb = current.neighbors(x, y);
        let hk = h.at(x, y);
        // difference form of Σ h_k u_k + h_0 u0, using Σ h = 1
        let delta = stencil_sum(std::array::from_fn(|k| hk[k] * (nb[k] - c)));
        let v = c + (delta + anchor.get(x, y) * (o - c));
        let lo = nb.iter().copied().fold(c.min(o), f64::min);
        let hi = nb.iter().copied().fold(c.max(o), f64::max);
        v.clamp(lo, hi)
    });
    let mut max_update = 0.0f64;
    for (a, b) in next.data().iter().zip(current.data()) {
        max_update = max_update.max((a - b).abs());
    }
    if !max_update.is_finite() || !next.is_finite() {
        return Err(Error::NonFinite {
            stage: "digital TV filter",
            iteration: 0,
        });
    }
    Ok((next, max_update))
}

/// Iterates the digital TV filter from `u0` until the update drops below
/// `stop_tol` or `max_iters` is reached.
pub fn tv_filter(u0: &Image, cfg: &TvFilterConfig) -> Result<Image> {
    cfg.validate()?;
    let mut u = u0.clone();
    for it in 1..=cfg.max_iters {
        let (next, max_update) = tv_filter_step(&u, u0, cfg).map_err(|e| match e {
            Error::NonFinite { stage, .. } => Error::NonFinite { stage, iteration: it },
            e => e,
        })?;
        u = next;
        if max_update < cfg.stop_tol {
            break;
        }
    }
    Ok(u)
}

/// Nearest-neighbor enlargement followed by the digital TV filter.
pub fn tv_filter_upscale(img: &Image, zoom: usize, cfg: &TvFilterConfig) -> Result<Image> {
    tv_filter(&upscale_nearest(img, zoom)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::NEIGHBOR_OFFSETS;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(seed: u64, w: usize, h: usize) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Image::new(w, h, (0..w * h).map(|_| rng.gen::<f64>()).collect()).unwrap()
    }

    #[test]
    fn nearest_examples() {
        let one = Image::filled(1, 1, 0.7);
        let up = upscale_nearest(&one, 3).unwrap();
        assert_eq!(up.dims(), (3, 3));
        assert!(up.data().iter().all(|&v| v == 0.7));

        let row = Image::new(2, 1, vec![0.0, 1.0]).unwrap();
        let up = upscale_nearest(&row, 2).unwrap();
        assert_eq!(up.dims(), (4, 2));
        assert_eq!(&up.data()[..4], &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(&up.data()[4..], &[0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn bilinear_two_pixel_row() {
        // s = -0.25 (clamped to 0), 0.25, 0.75, 1.25 (clamped to 1)
        let row = Image::new(2, 1, vec![0.0, 1.0]).unwrap();
        let up = upscale_bilinear(&row, 2).unwrap();
        assert_eq!(up.dims(), (4, 2));
        assert_eq!(&up.data()[..4], &[0.0, 0.25, 0.75, 1.0]);
        assert_eq!(&up.data()[4..], &[0.0, 0.25, 0.75, 1.0]);
    }

    #[test]
    fn upscalers_preserve_constants_exactly() {
        let c = Image::filled(5, 3, 0.123456789);
        for z in 2..=4 {
            for up in [
                upscale_nearest(&c, z).unwrap(),
                upscale_bilinear(&c, z).unwrap(),
                upscale_bicubic(&c, z).unwrap(),
                tv_filter_upscale(&c, z, &TvFilterConfig::default()).unwrap(),
            ] {
                assert_eq!(up.dims(), (5 * z, 3 * z));
                assert!(up.data().iter().all(|&v| v == 0.123456789));
            }
        }
    }

    #[test]
    fn kernel_properties() {
        assert_eq!(cubic_kernel(0.0), 1.0);
        for t in [1.0, 2.0, -1.0, 2.5] {
            assert_eq!(cubic_kernel(t), 0.0);
        }
        for f in [0.0, 0.1, 0.25, 0.5, 0.9] {
            let taps: Vec<f64> = (-1..=2).map(|j| cubic_kernel(f - j as f64)).collect();
            let sum: f64 = taps.iter().sum();
            let first: f64 = taps.iter().zip(-1..=2).map(|(w, j)| w * j as f64).sum();
            assert!((sum - 1.0).abs() < 1e-15);
            assert!((first - f).abs() < 1e-15);
        }
    }

    #[test]
    fn bicubic_matches_direct_kernel_sum() {
        let row = Image::new(4, 1, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let up = upscale_bicubic(&row, 2).unwrap();
        // output X = 3 samples s = 1.25
        let s = 1.25f64;
        let oracle: f64 = (-2i32..=5)
            .map(|k| cubic_kernel(s - k as f64) * row.get(k.clamp(0, 3) as usize, 0))
            .sum();
        assert!((up.get(3, 0) - oracle).abs() < 1e-15);
        // taps at 2 and 3: K(0.75) + K(1.75) = 0.2265625 - 0.0234375
        assert_eq!(oracle, 0.203125);
    }

    #[test]
    fn affine_reproduced_away_from_borders() {
        let aff = Image::from_fn(8, 7, |x, y| 0.1 + 0.03 * x as f64 + 0.05 * y as f64);
        let z = 3;
        let exact = |x: usize, y: usize| {
            let sx = (x as f64 + 0.5) / z as f64 - 0.5;
            let sy = (y as f64 + 0.5) / z as f64 - 0.5;
            0.1 + 0.03 * sx + 0.05 * sy
        };
        let bl = upscale_bilinear(&aff, z).unwrap();
        let bc = upscale_bicubic(&aff, z).unwrap();
        for y in 0..bl.height() {
            for x in 0..bl.width() {
                let sx = (x as f64 + 0.5) / z as f64 - 0.5;
                let sy = (y as f64 + 0.5) / z as f64 - 0.5;
                if sx >= 0.0 && sy >= 0.0 && sx <= 7.0 && sy <= 6.0 {
                    assert!((bl.get(x, y) - exact(x, y)).abs() < 1e-12);
                }
                if sx >= 1.0 && sy >= 1.0 && sx <= 5.0 && sy <= 4.0 {
                    assert!((bc.get(x, y) - exact(x, y)).abs() < 1e-12);
                }
            }
        }
    }

    /// Oracle: the coefficient formula evaluated with explicit loops.
    fn coeffs_oracle(img: &Image, cfg: &TvFilterConfig) -> Vec<[f64; 9]> {
        let (w, h) = img.dims();
        let px = |x: isize, y: isize| {
            img.data()[(y.clamp(0, h as isize - 1) as usize) * w + x.clamp(0, w as isize - 1) as usize]
        };
        let g = |x: isize, y: isize| {
            let x = x.clamp(0, w as isize - 1);
            let y = y.clamp(0, h as isize - 1);
            let gx = (px(x + 1, y) - px(x - 1, y)) / 2.0;
            let gy = (px(x, y + 1) - px(x, y - 1)) / 2.0;
            (gx * gx + gy * gy + cfg.eps * cfg.eps).sqrt()
        };
        let mut out = Vec::new();
        for y in 0..h as isize {
            for x in 0..w as isize {
                let mut a = [0.0; 8];
                for (k, (dx, dy)) in NEIGHBOR_OFFSETS.iter().enumerate() {
                    a[k] = 1.0 / g(x, y) + 1.0 / g(x + dx, y + dy);
                }
                let den = cfg.lambda_fit + a.iter().sum::<f64>();
                let mut hk = [0.0; 9];
                for k in 0..8 {
                    hk[k] = a[k] / den;
                }
                hk[8] = cfg.lambda_fit / den;
                out.push(hk);
            }
        }
        out
    }

    #[test]
    fn coeffs_match_oracle_and_sum_to_one() {
        let img = random_image(2, 5, 5);
        let cfg = TvFilterConfig::default();
        let h = tv_filter_coeffs(&img, &cfg);
        let oracle = coeffs_oracle(&img, &cfg);
        for y in 0..5 {
            for x in 0..5 {
                let o = oracle[y * 5 + x];
                for k in 0..8 {
                    let v = h.plane(k).get(x, y);
                    assert!((v - o[k]).abs() <= 1e-12 * o[k].abs());
                }
                let a = h.anchor().unwrap().get(x, y);
                assert!((a - o[8]).abs() <= 1e-12 * o[8].abs());
                let total = a + h.at(x, y).iter().sum::<f64>();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coeffs_on_constant_are_symmetric() {
        let h = tv_filter_coeffs(&Image::filled(4, 4, 0.5), &TvFilterConfig::default());
        let first = h.plane(0).get(1, 2);
        for k in 0..8 {
            assert_eq!(h.plane(k).get(1, 2), first);
        }
    }

    #[test]
    fn large_fit_weight_keeps_original() {
        let img = random_image(9, 6, 6);
        let cfg = TvFilterConfig { lambda_fit: 1e12, ..Default::default() };
        let out = tv_filter(&img, &cfg).unwrap();
        for (a, b) in out.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn impulse_spreads_after_one_step() {
        let mut d = vec![0.2; 25];
        d[12] = 1.2;
        let img = Image::new(5, 5, d).unwrap();
        let cfg = TvFilterConfig::default();
        let (next, _) = tv_filter_step(&img, &img, &cfg).unwrap();
        assert!(next.get(2, 2) < 1.2);
        for k in 0..8 {
            let (dx, dy) = NEIGHBOR_OFFSETS[k];
            let (x, y) = ((2 + dx) as usize, (2 + dy) as usize);
            assert!(next.get(x, y) > 0.2, "neighbor ({x},{y})");
        }
        // the 9 affected pixels agree with the oracle coefficients
        let o = coeffs_oracle(&img, &cfg);
        for y in 1..4usize {
            for x in 1..4usize {
                let hk = o[y * 5 + x];
                let mut v = hk[8] * img.get(x, y);
                for (k, (dx, dy)) in NEIGHBOR_OFFSETS.iter().enumerate() {
                    v += hk[k] * img.get_clamped(x as isize + dx, y as isize + dy);
                }
                assert!((next.get(x, y) - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn impulse_upscale_stays_in_range() {
        let mut d = vec![0.1; 9];
        d[4] = 0.9;
        let img = Image::new(3, 3, d).unwrap();
        let out = tv_filter_upscale(&img, 3, &TvFilterConfig::default()).unwrap();
        assert_eq!(out.dims(), (9, 9));
        assert!(out.max() <= 0.9 && out.min() >= 0.1);
    }

    #[test]
    fn zoom_below_two_rejected() {
        let img = Image::filled(2, 2, 0.0);
        assert!(upscale_nearest(&img, 1).is_err());
        assert!(upscale_bicubic(&img, 0).is_err());
    }

    proptest! {
        #[test]
        fn nearest_and_bilinear_within_input_range(
            seed in any::<u64>(), w in 1usize..6, h in 1usize..6, z in 2usize..5,
        ) {
            let img = random_image(seed, w, h);
            let (lo, hi) = (img.min(), img.max());
            for up in [upscale_nearest(&img, z).unwrap(), upscale_bilinear(&img, z).unwrap()] {
                prop_assert!(up.min() >= lo && up.max() <= hi);
            }
        }

        #[test]
        fn tv_iterates_stay_in_original_range(seed in any::<u64>(), w in 2usize..7, h in 2usize..7) {
            let u0 = random_image(seed, w, h);
            let (lo, hi) = (u0.min(), u0.max());
            let cfg = TvFilterConfig::default();
            let mut u = u0.clone();
            for _ in 0..10 {
                u = tv_filter_step(&u, &u0, &cfg).unwrap().0;
                prop_assert!(u.min() >= lo && u.max() <= hi);
            }
        }
    }
}
