//! Per-pixel neighbor weight planes and their binary dump format.
//!
//! A [`WeightField`] holds eight planes, plane `k` aligned with
//! [`NEIGHBOR_OFFSETS`](crate::image::NEIGHBOR_OFFSETS)`[k]`. The digital TV
//! filter additionally carries an anchor plane weighting the original image.
//!
//! Dump layout (`VWF1`):
//!
//! ```text
//! VWF1\n
//! <width> <height> <planes>\n          planes = 8, or 9 with anchor
//! plane 0 .. plane 7 [anchor]          row-major little-endian f64
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{stencil_sum, Field, Image, NEIGHBORS};

const MAGIC: &[u8] = b"VWF1\n";

#[derive(Clone, Debug, PartialEq)]
pub struct WeightField {
    width: usize,
    height: usize,
    planes: Vec<Field>,
    anchor: Option<Field>,
}

impl WeightField {
    pub fn new(planes: Vec<Field>, anchor: Option<Field>) -> Result<Self> {
        if planes.len() != NEIGHBORS {
            return Err(Error::InvalidConfig(format!(
                "expected {NEIGHBORS} weight planes, got {}",
                planes.len()
            )));
        }
        let dims = planes[0].dims();
        for p in planes.iter().chain(anchor.iter()) {
            planes[0].check_same_dims(p)?;
            if !p.is_finite() {
                return Err(Error::InvalidConfig("non-finite weight".into()));
            }
        }
        Ok(Self {
            width: dims.0,
            height: dims.1,
            planes,
            anchor,
        })
    }

    pub(crate) fn from_planes_unchecked(planes: Vec<Field>, anchor: Option<Field>) -> Self {
        let (width, height) = planes[0].dims();
        Self {
            width,
            height,
            planes,
            anchor,
        }
    }

    /// Every neighbor weight set to 1/8, no anchor.
    pub fn uniform(width: usize, height: usize) -> Self {
        let plane = Field::filled(width, height, 1.0 / NEIGHBORS as f64);
        Self::from_planes_unchecked(vec![plane; NEIGHBORS], None)
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
    pub fn plane(&self, k: usize) -> &Field {
        &self.planes[k]
    }

    pub fn planes(&self) -> &[Field] {
        &self.planes
    }

    pub fn anchor(&self) -> Option<&Field> {
        self.anchor.as_ref()
    }

    pub fn plane_count(&self) -> usize {
        self.planes.len() + usize::from(self.anchor.is_some())
    }

    /// The eight neighbor weights at `(x, y)`.
    #[inline]
    pub fn at(&self, x: usize, y: usize) -> [f64; 8] {
        std::array::from_fn(|k| self.planes[k].get(x, y))
    }

    /// Sum of the eight neighbor weights at every pixel.
    pub fn plane_sum(&self) -> Field {
        Field::from_fn(self.width, self.height, |x, y| stencil_sum(self.at(x, y)))
    }

    pub(crate) fn check_dims(&self, img: &Image) -> Result<()> {
        if self.dims() != img.dims() {
            return Err(Error::DimensionMismatch {
                expected: img.dims(),
                actual: self.dims(),
            });
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        out.extend(format!("{} {} {}\n", self.width, self.height, self.plane_count()).bytes());
        for p in self.planes.iter().chain(self.anchor.iter()) {
            for v in p.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let rest = bytes
            .strip_prefix(MAGIC)
            .ok_or_else(|| {
                let magic = String::from_utf8_lossy(&bytes[..bytes.len().min(4)]).into_owned();
                Error::UnsupportedFormat(magic)
            })?;
        let nl = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::MalformedHeader("unterminated VWF1 header".into()))?;
        let header = std::str::from_utf8(&rest[..nl])
            .map_err(|_| Error::MalformedHeader("non-ASCII VWF1 header".into()))?;
        let fields: Vec<usize> = header
            .split(' ')
            .map(|s| s.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::MalformedHeader(format!("bad VWF1 header {header:?}")))?;
        let [width, height, count] = fields[..] else {
            return Err(Error::MalformedHeader(format!("bad VWF1 header {header:?}")));
        };
        if width == 0 || height == 0 || !(count == 8 || count == 9) {
            return Err(Error::MalformedHeader(format!("bad VWF1 header {header:?}")));
        }
        let body = &rest[nl + 1..];
        let n = width * height;
        let expected = n * count;
        if body.len() < expected * 8 {
            return Err(Error::Truncated {
                expected,
                found: body.len() / 8,
            });
        }
        let mut planes: Vec<Field> = body
            .chunks_exact(8)
            .take(expected)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect::<Vec<_>>()
            .chunks_exact(n)
            .map(|d| Image::new(width, height, d.to_vec()))
            .collect::<Result<_>>()?;
        let anchor = (count == 9).then(|| planes.pop().unwrap());
        Self::new(planes, anchor)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

/// Starting point of the solver: all eight planes 1/8.
pub fn init_weights(width: usize, height: usize) -> WeightField {
    WeightField::uniform(width, height)
}

/// Rescales the weights at each pixel to sum to one. Pixels whose sum has
/// magnitude below `floor` are reset to 1/8. Negative weights are kept.
pub fn renormalize(w: &WeightField, floor: f64) -> WeightField {
    let sums = w.plane_sum();
    let planes = (0..NEIGHBORS)
        .map(|k| {
            Field::from_fn(w.width, w.height, |x, y| {
                let s = sums.get(x, y);
                if s.abs() >= floor {
                    w.planes[k].get(x, y) / s
                } else {
                    1.0 / NEIGHBORS as f64
                }
            })
        })
        .collect();
    WeightField::from_planes_unchecked(planes, w.anchor.clone())
}
