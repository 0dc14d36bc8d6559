//! Netpbm PGM reading (P2 ASCII, P5 binary) and writing (P5).
//!
//! Samples map linearly between `[0, maxval]` and `[0, 1]`. 16-bit P5
//! samples are big-endian. Header comments are accepted on read and never
//! written.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

/// Maximum sample value accepted on write.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Depth {
    Eight,
    Sixteen,
}

impl Depth {
    pub fn maxval(self) -> u32 {
        match self {
            Depth::Eight => 255,
            Depth::Sixteen => 65535,
        }
    }

    pub fn from_maxval(maxval: u32) -> Result<Self> {
        match maxval {
            255 => Ok(Depth::Eight),
            65535 => Ok(Depth::Sixteen),
            m => Err(Error::InvalidConfig(format!(
                "maxval must be 255 or 65535, got {m}"
            ))),
        }
    }
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes)
}

pub fn save_pgm(img: &Image, path: impl AsRef<Path>, depth: Depth) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img, depth)).map_err(|e| Error::io(path, e))
}

/// Quantizes `[0, 1]` intensities to integer samples: clamp, scale, round
/// half away from zero.
pub fn quantize(v: f64, maxval: u32) -> u32 {
    (v.clamp(0.0, 1.0) * maxval as f64).round() as u32
}

pub fn encode_pgm(img: &Image, depth: Depth) -> Vec<u8> {
    let maxval = depth.maxval();
    let mut out = format!("P5\n{} {}\n{}\n", img.width(), img.height(), maxval).into_bytes();
    match depth {
        Depth::Eight => out.extend(img.data().iter().map(|&v| quantize(v, maxval) as u8)),
        Depth::Sixteen => {
            for &v in img.data() {
                out.extend_from_slice(&(quantize(v, maxval) as u16).to_be_bytes());
            }
        }
    }
    out
}

struct Header {
    ascii: bool,
    width: usize,
    height: usize,
    maxval: u32,
    /// Offset of the first byte after the single whitespace that ends the
    /// header.
    data_start: usize,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn read_uint(&mut self, what: &str) -> Result<u32> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedHeader(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader(format!("{what} out of range")))
    }
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 {
        return Err(Error::MalformedHeader("file too short for magic number".into()));
    }
    let ascii = match &bytes[..2] {
        b"P2" => true,
        b"P5" => false,
        other => return Err(Error::UnsupportedFormat(String::from_utf8_lossy(other).into_owned())),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur.bytes.get(cur.pos).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(Error::MalformedHeader("missing separator after magic number".into()));
    }
    let width = cur.read_uint("width")? as usize;
    let height = cur.read_uint("height")? as usize;
    let maxval = cur.read_uint("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!("zero dimension {width}x{height}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::MalformedHeader(format!("maxval {maxval} not in 1..=65535")));
    }
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        Some(_) => return Err(Error::MalformedHeader("missing whitespace after maxval".into())),
        None if ascii => {}
        None => return Err(Error::Truncated { expected: width * height, found: 0 }),
    }
    Ok(Header { ascii, width, height, maxval, data_start: cur.pos })
}

pub fn decode_pgm(bytes: &[u8]) -> Result<Image> {
    let h = parse_header(bytes)?;
    let n = h.width * h.height;
    let scale = h.maxval as f64;
    let body = &bytes[h.data_start..];
    let mut samples = Vec::with_capacity(n);

    if h.ascii {
        let mut cur = Cursor { bytes: body, pos: 0 };
        while samples.len() < n {
            cur.skip_whitespace_and_comments();
            if cur.pos >= body.len() {
                return Err(Error::Truncated { expected: n, found: samples.len() });
            }
            let v = cur.read_uint("sample")?;
            if v > h.maxval {
                return Err(Error::MalformedHeader(format!(
                    "sample {v} exceeds maxval {}",
                    h.maxval
                )));
            }
            samples.push(v);
        }
    } else {
        let bps = if h.maxval > 255 { 2 } else { 1 };
        let available = body.len() / bps;
        if available < n {
            return Err(Error::Truncated { expected: n, found: available });
        }
        for i in 0..n {
            let v = if bps == 2 {
                u16::from_be_bytes([body[2 * i], body[2 * i + 1]]) as u32
            } else {
                body[i] as u32
            };
            samples.push(v.min(h.maxval));
        }
    }

    let data = samples.into_iter().map(|v| v as f64 / scale).collect();
    Image::new(h.width, h.height, data)
}
