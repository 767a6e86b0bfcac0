//! File formats.
//!
//! Tensor file (`.tnsr`), all integers little-endian:
//!
//! ```text
//! "TNSR" | version: u32 = 1 | order: u32 | extents: order x u64 | payload: f64 x prod(extents)
//! ```
//!
//! Mask file (`.msk`) uses the same header with magic `"MSK1"` and one byte
//! per entry (0 = missing, 1 = observed). Payloads are in first-index-fastest
//! order. Images are binary PPM (`P6`, maxval 255) mapped to `H x W x 3`
//! tensors on the 0..255 scale.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::SolveResult;
use crate::tensor::{DenseTensor, ObservationMask};

const TENSOR_MAGIC: &[u8; 4] = b"TNSR";
const MASK_MAGIC: &[u8; 4] = b"MSK1";
const VERSION: u32 = 1;

fn encode_header(magic: &[u8; 4], shape: &[usize], out: &mut Vec<u8>) {
    out.extend_from_slice(magic);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(shape.len() as u32).to_le_bytes());
    for &e in shape {
        out.extend_from_slice(&(e as u64).to_le_bytes());
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    kind: &'static str,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() < n {
            return Err(Error::format(self.kind, "unexpected end of file"));
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Parses the shared header; returns the shape, element count and the
/// remaining payload bytes.
fn decode_header<'a>(
    bytes: &'a [u8],
    magic: &[u8; 4],
    kind: &'static str,
) -> Result<(Vec<usize>, usize, &'a [u8])> {
    let mut cur = Cursor { bytes, kind };
    if cur.take(4)? != magic {
        return Err(Error::format(kind, "bad magic"));
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(Error::format(kind, format!("unsupported version {version}")));
    }
    let order = cur.u32()? as usize;
    if order == 0 {
        return Err(Error::format(kind, "order must be >= 1"));
    }
    if order.saturating_mul(8) > cur.bytes.len() {
        return Err(Error::format(kind, "header truncated"));
    }
    let mut shape = Vec::with_capacity(order);
    let mut count: usize = 1;
    for _ in 0..order {
        let e = cur.u64()?;
        if e == 0 {
            return Err(Error::format(kind, "zero extent"));
        }
        let e = usize::try_from(e).map_err(|_| Error::format(kind, "extent too large"))?;
        count = count
            .checked_mul(e)
            .ok_or_else(|| Error::format(kind, "element count overflows"))?;
        shape.push(e);
    }
    Ok((shape, count, cur.bytes))
}

pub fn encode_tensor(tensor: &DenseTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 8 * tensor.order() + 8 * tensor.len());
    encode_header(TENSOR_MAGIC, tensor.shape(), &mut out);
    for v in tensor.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_tensor(bytes: &[u8]) -> Result<DenseTensor> {
    const KIND: &str = "tensor";
    let (shape, count, payload) = decode_header(bytes, TENSOR_MAGIC, KIND)?;
    let expected = count
        .checked_mul(8)
        .ok_or_else(|| Error::format(KIND, "element count overflows"))?;
    if payload.len() != expected {
        return Err(Error::format(
            KIND,
            format!("payload has {} bytes, expected {expected}", payload.len()),
        ));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DenseTensor::new(shape, data)
}

pub fn encode_mask(mask: &ObservationMask) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 8 * mask.shape().len() + mask.len());
    encode_header(MASK_MAGIC, mask.shape(), &mut out);
    out.extend(mask.flags().iter().map(|&f| f as u8));
    out
}

pub fn decode_mask(bytes: &[u8]) -> Result<ObservationMask> {
    const KIND: &str = "mask";
    let (shape, count, payload) = decode_header(bytes, MASK_MAGIC, KIND)?;
    if payload.len() != count {
        return Err(Error::format(
            KIND,
            format!("payload has {} bytes, expected {count}", payload.len()),
        ));
    }
    let flags = payload
        .iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(Error::format(KIND, format!("invalid flag byte {other}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    ObservationMask::new(shape, flags)
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<DenseTensor> {
    decode_tensor(&fs::read(path)?)
}

pub fn write_tensor(tensor: &DenseTensor, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, encode_tensor(tensor))?)
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<ObservationMask> {
    decode_mask(&fs::read(path)?)
}

pub fn write_mask(mask: &ObservationMask, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, encode_mask(mask))?)
}

/// Parses a binary `P6` image with maxval 255 into an `H x W x 3` tensor.
pub fn decode_ppm(bytes: &[u8]) -> Result<DenseTensor> {
    const KIND: &str = "ppm";
    let mut pos = 0usize;
    let token = |pos: &mut usize| -> Result<String> {
        loop {
            match bytes.get(*pos) {
                Some(b'#') => {
                    while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                        *pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => *pos += 1,
                Some(_) => break,
                None => return Err(Error::format(KIND, "header truncated")),
            }
        }
        let start = *pos;
        while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace()) {
            *pos += 1;
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };
    let magic = token(&mut pos)?;
    match magic.as_str() {
        "P6" => {}
        "P3" => return Err(Error::format(KIND, "ASCII (P3) images are not supported")),
        other => return Err(Error::format(KIND, format!("unsupported magic {other:?}"))),
    }
    let number = |pos: &mut usize, what: &str| -> Result<usize> {
        let t = token(pos)?;
        t.parse::<usize>()
            .map_err(|_| Error::format(KIND, format!("bad {what} {t:?}")))
    };
    let width = number(&mut pos, "width")?;
    let height = number(&mut pos, "height")?;
    let maxval = number(&mut pos, "maxval")?;
    if maxval != 255 {
        return Err(Error::format(KIND, format!("maxval {maxval} unsupported, need 255")));
    }
    if width == 0 || height == 0 {
        return Err(Error::format(KIND, "empty image"));
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(Error::format(KIND, "header truncated"));
    }
    pos += 1;
    let count = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(3))
        .ok_or_else(|| Error::format(KIND, "image too large"))?;
    let raster = &bytes[pos..];
    if raster.len() != count {
        return Err(Error::format(
            KIND,
            format!("raster has {} bytes, expected {count}", raster.len()),
        ));
    }
    let mut data = vec![0.0; count];
    for h in 0..height {
        for w in 0..width {
            for c in 0..3 {
                data[h + height * (w + width * c)] = raster[3 * (h * width + w) + c] as f64;
            }
        }
    }
    DenseTensor::new(vec![height, width, 3], data)
}

/// Encodes an `H x W x 3` tensor as `P6`, clamping to 0..255 and rounding
/// half up.
pub fn encode_ppm(image: &DenseTensor) -> Result<Vec<u8>> {
    let shape = image.shape();
    if shape.len() != 3 || shape[2] != 3 {
        return Err(Error::ShapeMismatch {
            expected: vec![shape.first().copied().unwrap_or(0), shape.get(1).copied().unwrap_or(0), 3],
            found: shape.to_vec(),
        });
    }
    let (height, width) = (shape[0], shape[1]);
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.reserve(height * width * 3);
    for h in 0..height {
        for w in 0..width {
            for c in 0..3 {
                out.push(to_pixel(image.get(&[h, w, c])));
            }
        }
    }
    Ok(out)
}

pub fn to_pixel(v: f64) -> u8 {
    (v.clamp(0.0, 255.0) + 0.5).floor() as u8
}

pub fn read_ppm(path: impl AsRef<Path>) -> Result<DenseTensor> {
    decode_ppm(&fs::read(path)?)
}

pub fn write_ppm(image: &DenseTensor, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, encode_ppm(image)?)?)
}

/// Full-precision decimal (17 significant digits) that parses back to the
/// same `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub const HISTORY_HEADER: &str = "k,lagrangian,objective,rel_change,mu";

pub fn history_csv(result: &SolveResult) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for r in &result.history {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.k,
            format_f64(r.lagrangian),
            format_f64(r.objective),
            format_f64(r.rel_change),
            format_f64(r.mu)
        ));
    }
    out
}

pub fn write_history_csv(result: &SolveResult, path: impl AsRef<Path>) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(history_csv(result).as_bytes())?;
    Ok(())
}
