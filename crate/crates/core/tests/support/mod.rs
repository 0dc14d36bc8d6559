//! Brute-force reference implementations and random inputs shared by the
//! integration tests. Deliberately written with plain index loops and no
//! calls into the library's stencil code.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varsr::{Field, Image, WeightField};

pub const OFFSETS: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Image {
    Image::new(w, h, (0..w * h).map(|_| rng.gen::<f64>()).collect()).unwrap()
}

pub fn random_weights(rng: &mut ChaCha8Rng, w: usize, h: usize, lo: f64, hi: f64) -> WeightField {
    let planes = (0..8)
        .map(|_| Field::new(w, h, (0..w * h).map(|_| rng.gen_range(lo..hi)).collect()).unwrap())
        .collect();
    WeightField::new(planes, None).unwrap()
}

/// Row-major grid copy for index arithmetic.
pub struct Grid {
    pub w: i64,
    pub h: i64,
    pub v: Vec<f64>,
}

impl Grid {
    pub fn of(f: &Field) -> Self {
        Grid { w: f.width() as i64, h: f.height() as i64, v: f.data().to_vec() }
    }

    pub fn at(&self, x: i64, y: i64) -> f64 {
        let cx = x.max(0).min(self.w - 1);
        let cy = y.max(0).min(self.h - 1);
        self.v[(cy * self.w + cx) as usize]
    }
}

pub fn residual(img: &Image, planes: &[Vec<f64>]) -> Vec<f64> {
    let u = Grid::of(img);
    let mut out = Vec::with_capacity(u.v.len());
    for y in 0..u.h {
        for x in 0..u.w {
            let i = (y * u.w + x) as usize;
            let mut s = 0.0;
            for (k, (dx, dy)) in OFFSETS.iter().enumerate() {
                s += planes[k][i] * u.at(x + dx, y + dy);
            }
            out.push(s - u.at(x, y));
        }
    }
    out
}

pub fn planes_of(w: &WeightField) -> Vec<Vec<f64>> {
    w.planes().iter().map(|p| p.data().to_vec()).collect()
}

pub fn fidelity_energy(img: &Image, planes: &[Vec<f64>]) -> f64 {
    residual(img, planes).iter().map(|r| r * r).sum()
}

pub fn tv_curvature(f: &Field, eps: f64) -> Vec<f64> {
    let g = Grid::of(f);
    let flux = |x: i64, y: i64| -> (f64, f64) {
        if x < 0 || y < 0 {
            return (0.0, 0.0);
        }
        let dx = if x + 1 < g.w { g.at(x + 1, y) - g.at(x, y) } else { 0.0 };
        let dy = if y + 1 < g.h { g.at(x, y + 1) - g.at(x, y) } else { 0.0 };
        let n = (dx * dx + dy * dy + eps * eps).sqrt();
        (dx / n, dy / n)
    };
    let mut out = Vec::new();
    for y in 0..g.h {
        for x in 0..g.w {
            out.push(flux(x, y).0 - flux(x - 1, y).0 + flux(x, y).1 - flux(x, y - 1).1);
        }
    }
    out
}

/// Nine coefficient values per pixel: eight neighbor planes, then anchor.
pub fn tv_filter_coeffs(img: &Image, lambda_fit: f64, eps: f64) -> Vec<[f64; 9]> {
    let u = Grid::of(img);
    let g = |x: i64, y: i64| {
        let x = x.max(0).min(u.w - 1);
        let y = y.max(0).min(u.h - 1);
        let gx = (u.at(x + 1, y) - u.at(x - 1, y)) / 2.0;
        let gy = (u.at(x, y + 1) - u.at(x, y - 1)) / 2.0;
        (gx * gx + gy * gy + eps * eps).sqrt()
    };
    let mut out = Vec::new();
    for y in 0..u.h {
        for x in 0..u.w {
            let mut a = [0.0; 8];
            for (k, (dx, dy)) in OFFSETS.iter().enumerate() {
                a[k] = 1.0 / g(x, y) + 1.0 / g(x + dx, y + dy);
            }
            let den = lambda_fit + a.iter().sum::<f64>();
            let mut h = [0.0; 9];
            for k in 0..8 {
                h[k] = a[k] / den;
            }
            h[8] = lambda_fit / den;
            out.push(h);
        }
    }
    out
}

pub fn sobel_magnitude(img: &Image) -> Vec<f64> {
    let u = Grid::of(img);
    let kx = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
    let ky = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];
    let mut out = Vec::new();
    for y in 0..u.h {
        for x in 0..u.w {
            let (mut gx, mut gy) = (0.0, 0.0);
            for j in 0..3 {
                for i in 0..3 {
                    let v = u.at(x + i as i64 - 1, y + j as i64 - 1);
                    gx += kx[j][i] * v;
                    gy += ky[j][i] * v;
                }
            }
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    out
}

pub fn mse(a: &Image, b: &Image) -> f64 {
    let mut s = 0.0;
    for i in 0..a.data().len() {
        let d = a.data()[i] - b.data()[i];
        s += d * d;
    }
    s / a.data().len() as f64
}

/// Largest elementwise difference relative to the larger of the two
/// fields' max magnitudes.
pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    max_rel_diff_floor(a, b, 0.0)
}

/// As [`max_rel_diff`], with the reference magnitude at least `floor`.
pub fn max_rel_diff_floor(a: &[f64], b: &[f64], floor: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = a.iter().chain(b).fold(floor, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

/// `(8 + x + 2y) / 64`: affine with dyadic values, exact in binary
/// arithmetic.
pub fn dyadic_affine(w: usize, h: usize) -> Image {
    Image::from_fn(w, h, |x, y| (8 + x + 2 * y) as f64 / 64.0)
}
