//! Quality metrics and the method comparison report.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use crate::baselines::{
    tv_filter_upscale, upscale_bicubic, upscale_bilinear, upscale_nearest, TvFilterConfig,
};
use crate::error::{Error, Result};
use crate::image::{downsample_block, Field, Image};
use crate::pipeline::{super_resolve, SrConfig};

/// Default Sobel magnitude threshold on the `[0, 1]` intensity scale.
pub const DEFAULT_SOBEL_THRESHOLD: f64 = 0.25;

pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    a.check_same_dims(b)?;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.data().len() as f64)
}

/// Peak signal-to-noise ratio with peak 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Psnr {
    Db(f64),
    /// Zero error.
    Identical,
}

impl Psnr {
    pub fn db(self) -> Option<f64> {
        match self {
            Psnr::Db(v) => Some(v),
            Psnr::Identical => None,
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Db(v) => write!(f, "{v:.6}"),
            Psnr::Identical => f.write_str("identical"),
        }
    }
}

pub fn psnr(a: &Image, b: &Image) -> Result<Psnr> {
    let m = mse(a, b)?;
    Ok(if m == 0.0 {
        Psnr::Identical
    } else {
        Psnr::Db(10.0 * (1.0 / m).log10())
    })
}

/// Gradient magnitude from the 3×3 Sobel kernels, replicate boundary.
pub fn sobel_magnitude(img: &Image) -> Field {
    Field::from_fn(img.width(), img.height(), |x, y| {
        let (x, y) = (x as isize, y as isize);
        let p = |dx: isize, dy: isize| img.get_clamped(x + dx, y + dy);
        let gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
        let gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
        (gx * gx + gy * gy).sqrt()
    })
}

/// Number of entries strictly above `threshold`.
pub fn edge_count(mag: &Field, threshold: f64) -> usize {
    mag.data().iter().filter(|&&m| m > threshold).count()
}

/// Binary edge map: 1 where the Sobel magnitude exceeds `threshold`.
pub fn edge_map(img: &Image, threshold: f64) -> Image {
    sobel_magnitude(img).map(|m| if m > threshold { 1.0 } else { 0.0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Ours,
    Bicubic,
    Bilinear,
    Nearest,
    Tv,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Ours,
        Method::Bicubic,
        Method::Bilinear,
        Method::Nearest,
        Method::Tv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ours => "ours",
            Method::Bicubic => "bicubic",
            Method::Bilinear => "bilinear",
            Method::Nearest => "nearest",
            Method::Tv => "tv",
        }
    }

    /// Upscales `lr` by `sr.zoom`. The result is clamped to `[0, 1]`, as it
    /// would be when written to a file.
    pub fn run(self, lr: &Image, sr: &SrConfig, tv: &TvFilterConfig) -> Result<Image> {
        let z = sr.zoom;
        let out = match self {
            Method::Ours => return Ok(super_resolve(lr, sr)?.image),
            Method::Bicubic => upscale_bicubic(lr, z)?,
            Method::Bilinear => upscale_bilinear(lr, z)?,
            Method::Nearest => upscale_nearest(lr, z)?,
            Method::Tv => tv_filter_upscale(lr, z, tv)?,
        };
        Ok(out.clamp01())
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method {s:?}")))
    }
}

/// Parses a comma-separated method list such as `ours,bicubic,tv`.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let methods = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<Vec<_>>>()?;
    if methods.is_empty() {
        return Err(Error::InvalidConfig("empty method list".into()));
    }
    Ok(methods)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub method: Method,
    pub psnr: Psnr,
    pub edge_count: usize,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub reference: String,
    pub zoom: usize,
    pub sobel_threshold: f64,
    pub rows: Vec<CompareRow>,
}

impl CompareReport {
    fn render_records(&self, timing: bool) -> String {
        let mut out = String::from("# varsr compare report\n");
        writeln!(
            out,
            "reference={} zoom={} sobel_threshold={}",
            self.reference, self.zoom, self.sobel_threshold
        )
        .unwrap();
        for row in &self.rows {
            write!(
                out,
                "method={} psnr_db={} edge_count={}",
                row.method, row.psnr, row.edge_count
            )
            .unwrap();
            if timing {
                write!(out, " wall_time_s={:.6}", row.wall_time_s).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// One `key=value` record per line: a header line, then one line per
    /// method with `psnr_db`, `edge_count` and `wall_time_s`.
    pub fn to_records(&self) -> String {
        self.render_records(true)
    }

    /// Same as [`to_records`](Self::to_records) without the timing column;
    /// identical inputs give identical text.
    pub fn to_records_untimed(&self) -> String {
        self.render_records(false)
    }

    /// Aligned table for terminal output.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "reference: {}  zoom: {}  sobel threshold: {}",
            self.reference, self.zoom, self.sobel_threshold
        )
        .unwrap();
        writeln!(out, "{:<10} {:>12} {:>10} {:>10}", "method", "psnr (dB)", "edges", "time (s)")
            .unwrap();
        for row in &self.rows {
            writeln!(
                out,
                "{:<10} {:>12} {:>10} {:>10.3}",
                row.method.name(),
                row.psnr.to_string(),
                row.edge_count,
                row.wall_time_s
            )
            .unwrap();
        }
        out
    }
}

/// Synthesizes the low-resolution input by block averaging `hr_ref`, runs
/// each method, and scores it against `hr_ref` by PSNR and Sobel edge count.
pub fn compare(
    reference: &str,
    hr_ref: &Image,
    methods: &[Method],
    sobel_threshold: f64,
    sr: &SrConfig,
    tv: &TvFilterConfig,
) -> Result<CompareReport> {
    if !(sobel_threshold >= 0.0) {
        return Err(Error::InvalidConfig("sobel threshold must be >= 0".into()));
    }
    let lr = downsample_block(hr_ref, sr.zoom)?;
    let rows = methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let out = method.run(&lr, sr, tv)?;
            let wall_time_s = start.elapsed().as_secs_f64();
            Ok(CompareRow {
                method,
                psnr: psnr(hr_ref, &out)?,
                edge_count: edge_count(&sobel_magnitude(&out), sobel_threshold),
                wall_time_s,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompareReport {
        reference: reference.to_string(),
        zoom: sr.zoom,
        sobel_threshold,
        rows,
    })
}
