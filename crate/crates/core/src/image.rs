//! Grayscale image grid and the shared 8-neighbor stencil.
//!
//! Intensities are stored as `f64` in row-major order, nominally in `[0, 1]`.
//! All neighbor access uses replicate (Neumann) boundaries: coordinates
//! falling outside the grid are clamped to the nearest valid pixel.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// The eight neighbor offsets `(dx, dy)` in pixel units, in the fixed order
/// shared by every weight plane, file dump and filter in the crate.
///
/// Index `k` here is neighbor `k + 1` in the 1-based numbering:
///
/// ```text
///   0 1 2
///   3 . 4
///   5 6 7
/// ```
pub const NEIGHBOR_OFFSETS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Number of neighbor planes.
pub const NEIGHBORS: usize = 8;

/// Index of the offset obtained by swapping `dx` and `dy`.
pub const TRANSPOSED_NEIGHBOR: [usize; 8] = [0, 3, 5, 1, 6, 2, 4, 7];

/// Sums eight per-neighbor terms in a balanced tree whose leaf pairs are
/// transposition partners.
///
/// Equal terms sum exactly, and swapping x/y permutes terms only within a
/// pair, so the result is bitwise invariant under transposition.
#[inline]
pub(crate) fn stencil_sum(t: [f64; 8]) -> f64 {
    ((t[0] + t[7]) + (t[1] + t[3])) + ((t[2] + t[5]) + (t[4] + t[6]))
}

#[inline]
pub(crate) fn clamp_index(v: isize, len: usize) -> usize {
    v.clamp(0, len as isize - 1) as usize
}

/// A 2D grid of finite real values. Also used for weight planes and other
/// real-valued fields (see [`Field`]).
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

/// A real-valued field on the pixel grid (residuals, weight planes, Sobel
/// magnitudes). Same representation as [`Image`].
pub type Field = Image;

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidConfig(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidConfig(format!(
                "data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "non-finite value at index {i}"
            )));
        }
        Ok(Self { width, height, data })
    }

    /// Constant image. Panics on zero dimensions.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel, rows in
    /// parallel. Each pixel is computed independently, so the result does not
    /// depend on the thread count.
    pub fn from_fn<F>(width: usize, height: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = vec![0.0; width * height];
        data.par_chunks_mut(width)
            .enumerate()
            .for_each(|(y, row)| {
                for (x, v) in row.iter_mut().enumerate() {
                    *v = f(x, y);
                }
            });
        Self { width, height, data }
    }

    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self { width, height, data }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Value at `(x, y)` with coordinates clamped into the grid.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = clamp_index(x, self.width);
        let cy = clamp_index(y, self.height);
        self.data[cy * self.width + cx]
    }

    /// `u(x + δ_k)` for neighbor index `k` in `0..8`, replicate boundary.
    #[inline]
    pub fn neighbor(&self, x: usize, y: usize, k: usize) -> f64 {
        let (dx, dy) = NEIGHBOR_OFFSETS[k];
        self.get_clamped(x as isize + dx, y as isize + dy)
    }

    /// All eight neighbor values of `(x, y)` in offset order.
    #[inline]
    pub fn neighbors(&self, x: usize, y: usize) -> [f64; 8] {
        std::array::from_fn(|k| self.neighbor(x, y, k))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn clamp01(&self) -> Self {
        self.map(|v| v.clamp(0.0, 1.0))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.height, self.width, |x, y| self.get(y, x))
    }

    pub(crate) fn check_same_dims(&self, other: &Image) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        Ok(())
    }
}

/// Block-average decimation by an integer factor.
pub fn downsample_block(img: &Image, zoom: usize) -> Result<Image> {
    if zoom < 2 {
        return Err(Error::InvalidConfig(format!("zoom must be >= 2, got {zoom}")));
    }
    let (w, h) = img.dims();
    if w % zoom != 0 || h % zoom != 0 {
        return Err(Error::NotDivisible {
            width: w,
            height: h,
            zoom,
        });
    }
    let area = (zoom * zoom) as f64;
    Ok(Image::from_fn(w / zoom, h / zoom, |x, y| {
        let mut sum = 0.0;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for sy in y * zoom..(y + 1) * zoom {
            for sx in x * zoom..(x + 1) * zoom {
                let v = img.get(sx, sy);
                sum += v;
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        // the rounded mean of equal values can drift by an ulp
        if lo == hi {
            lo
        } else {
            (sum / area).clamp(lo, hi)
        }
    }))
}
