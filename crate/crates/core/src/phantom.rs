//! Synthetic test images.

use crate::image::Image;

/// Piecewise-constant `size × size` scene with a vertical step, a diagonal
/// step and a filled disk, sampled at pixel centers.
///
/// Regions, in coordinates normalized to `[0, 1]`:
/// background 0.2; `x ≥ 2/3` → 0.6; `x + y < 7/12` → 0.85; disk of radius
/// 5/32 centered at `(5/12, 31/48)` → 0.95 (later regions win).
pub fn edge_phantom(size: usize) -> Image {
    let n = size as f64;
    Image::from_fn(size, size, |x, y| {
        let px = (x as f64 + 0.5) / n;
        let py = (y as f64 + 0.5) / n;
        let (dx, dy) = (px - 5.0 / 12.0, py - 31.0 / 48.0);
        if dx * dx + dy * dy < (5.0f64 / 32.0).powi(2) {
            0.95
        } else if px + py < 7.0 / 12.0 {
            0.85
        } else if px >= 2.0 / 3.0 {
            0.6
        } else {
            0.2
        }
    })
}

/// Two-level vertical step at the horizontal midpoint.
pub fn vertical_step(width: usize, height: usize, low: f64, high: f64) -> Image {
    Image::from_fn(width, height, |x, _| if 2 * x < width { low } else { high })
}
