//! On-disk formats for images, intrinsics and sequence manifests.
//!
//! All decoders take raw bytes or text and never panic on malformed input.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::geometry::Intrinsics;
use crate::image::Image;

pub const WF01_MAGIC: &[u8; 4] = b"WF01";
/// Decoders refuse headers describing more values than this.
const MAX_VALUES: usize = 1 << 28;

/// Float container: `WF01\n`, an ASCII line `H W C\n`, then `H*W*C`
/// little-endian `f32` values in row-major, channel-interleaved order.
pub fn encode_wf01(img: &Image) -> Vec<u8> {
    let header = format!("{} {} {}\n", img.height(), img.width(), img.channels());
    let mut out = Vec::with_capacity(5 + header.len() + img.data().len() * 4);
    out.extend_from_slice(WF01_MAGIC);
    out.push(b'\n');
    out.extend_from_slice(header.as_bytes());
    for &x in img.data() {
        out.extend_from_slice(&(x as f32).to_le_bytes());
    }
    out
}

pub fn decode_wf01(data: &[u8]) -> Result<Image> {
    if data.len() < 4 || &data[..4] != WF01_MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: "expected WF01 magic".into(),
        });
    }
    if data.get(4) != Some(&b'\n') {
        return Err(Error::Format {
            offset: 4,
            message: "expected newline after magic".into(),
        });
    }
    let header_start = 5;
    let header_len = data[header_start..]
        .iter()
        .take(64)
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format {
            offset: header_start,
            message: "unterminated dimension header".into(),
        })?;
    let header = std::str::from_utf8(&data[header_start..header_start + header_len]).map_err(|_| {
        Error::Format {
            offset: header_start,
            message: "dimension header is not ASCII".into(),
        }
    })?;
    let dims: Vec<usize> = header
        .split_ascii_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Format {
            offset: header_start,
            message: format!("malformed dimension header {header:?}"),
        })?;
    let [h, w, c] = dims[..] else {
        return Err(Error::Format {
            offset: header_start,
            message: format!("expected `H W C`, found {header:?}"),
        });
    };
    if h == 0 || w == 0 || c == 0 {
        return Err(Error::Format {
            offset: header_start,
            message: format!("zero dimension in {h}x{w}x{c}"),
        });
    }
    let count = h
        .checked_mul(w)
        .and_then(|n| n.checked_mul(c))
        .filter(|&n| n <= MAX_VALUES)
        .ok_or_else(|| Error::Format {
            offset: header_start,
            message: format!("{h}x{w}x{c} is too large"),
        })?;
    let body_start = header_start + header_len + 1;
    let body = &data[body_start..];
    let expected = count * 4;
    if body.len() < expected {
        return Err(Error::Truncated {
            expected: body_start + expected,
            found: data.len(),
        });
    }
    if body.len() > expected {
        return Err(Error::DimensionMismatch(format!(
            "header {h}x{w}x{c} describes {expected} data bytes, file holds {}",
            body.len()
        )));
    }
    let values: Vec<f64> = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    if let Some(i) = values.iter().position(|x| !x.is_finite()) {
        return Err(Error::Format {
            offset: body_start + 4 * i,
            message: "non-finite value".into(),
        });
    }
    Image::new(h, w, c, values)
}

const INTRINSIC_KEYS: [&str; 6] = ["fx", "fy", "cx", "cy", "width", "height"];

/// One `key value` pair per line; `#` starts a comment.
pub fn format_intrinsics(k: &Intrinsics) -> String {
    format!(
        "fx {:?}\nfy {:?}\ncx {:?}\ncy {:?}\nwidth {}\nheight {}\n",
        k.fx, k.fy, k.cx, k.cy, k.width, k.height
    )
}

pub fn parse_intrinsics(text: &str) -> Result<Intrinsics> {
    let mut values: [Option<f64>; 6] = [None; 6];
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or("");
        let value = parts
            .next()
            .ok_or_else(|| Error::parse(line_no, key, "missing value"))?;
        if parts.next().is_some() {
            return Err(Error::parse(line_no, key, "trailing tokens"));
        }
        let slot = INTRINSIC_KEYS
            .iter()
            .position(|&k| k == key)
            .ok_or_else(|| Error::parse(line_no, key, "unknown key"))?;
        if values[slot].is_some() {
            return Err(Error::parse(line_no, key, "duplicate key"));
        }
        let v: f64 = value
            .parse()
            .map_err(|_| Error::parse(line_no, key, format!("not a number: {value:?}")))?;
        if !v.is_finite() {
            return Err(Error::parse(line_no, key, "value must be finite"));
        }
        values[slot] = Some(v);
    }
    let get = |i: usize| values[i].ok_or_else(|| Error::parse(0, INTRINSIC_KEYS[i], "missing key"));
    let size = |i: usize| -> Result<usize> {
        let v = get(i)?;
        if v < 1.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
            return Err(Error::parse(0, INTRINSIC_KEYS[i], "must be a positive integer"));
        }
        Ok(v as usize)
    };
    let (fx, fy, cx, cy) = (get(0)?, get(1)?, get(2)?, get(3)?);
    Intrinsics::new(fx, fy, cx, cy, size(4)?, size(5)?)
}

/// Sequence manifest: frame paths in order, the target index and optional
/// ground truth. Paths are relative to the manifest's directory.
///
/// ```text
/// intrinsics intrinsics.txt
/// target 1
/// frame frame_000.wf
/// frame frame_001.wf
/// depth depth_000.wf      (optional, one per frame)
/// poses poses.txt         (optional)
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub intrinsics: PathBuf,
    pub target: usize,
    pub frames: Vec<PathBuf>,
    pub depths: Vec<PathBuf>,
    pub poses: Option<PathBuf>,
}

pub fn format_manifest(m: &Manifest) -> String {
    let mut out = String::new();
    out.push_str(&format!("intrinsics {}\n", m.intrinsics.display()));
    out.push_str(&format!("target {}\n", m.target));
    for f in &m.frames {
        out.push_str(&format!("frame {}\n", f.display()));
    }
    for d in &m.depths {
        out.push_str(&format!("depth {}\n", d.display()));
    }
    if let Some(p) = &m.poses {
        out.push_str(&format!("poses {}\n", p.display()));
    }
    out
}

pub fn parse_manifest(text: &str) -> Result<Manifest> {
    let mut intrinsics = None;
    let mut target = None;
    let mut m = Manifest::default();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let value = rest.trim();
        if value.is_empty() {
            return Err(Error::parse(line_no, key, "missing value"));
        }
        match key {
            "intrinsics" => {
                if intrinsics.replace(PathBuf::from(value)).is_some() {
                    return Err(Error::parse(line_no, key, "duplicate key"));
                }
            }
            "target" => {
                let t = value
                    .parse::<usize>()
                    .map_err(|_| Error::parse(line_no, key, format!("not an index: {value:?}")))?;
                if target.replace(t).is_some() {
                    return Err(Error::parse(line_no, key, "duplicate key"));
                }
            }
            "frame" => m.frames.push(PathBuf::from(value)),
            "depth" => m.depths.push(PathBuf::from(value)),
            "poses" => {
                if m.poses.replace(PathBuf::from(value)).is_some() {
                    return Err(Error::parse(line_no, key, "duplicate key"));
                }
            }
            _ => return Err(Error::parse(line_no, key, "unknown key")),
        }
    }
    m.intrinsics = intrinsics.ok_or_else(|| Error::parse(0, "intrinsics", "missing key"))?;
    m.target = target.ok_or_else(|| Error::parse(0, "target", "missing key"))?;
    if m.frames.is_empty() {
        return Err(Error::parse(0, "frame", "manifest lists no frames"));
    }
    if m.target >= m.frames.len() {
        return Err(Error::parse(
            0,
            "target",
            format!("index {} out of range for {} frames", m.target, m.frames.len()),
        ));
    }
    if !m.depths.is_empty() && m.depths.len() != m.frames.len() {
        return Err(Error::parse(
            0,
            "depth",
            format!("{} depth maps for {} frames", m.depths.len(), m.frames.len()),
        ));
    }
    Ok(m)
}

/// 8-bit binary PGM (1 channel) or PPM (3 channels) preview; values are
/// clamped to [0, 1] and rounded.
pub fn encode_pnm(img: &Image) -> Result<Vec<u8>> {
    let tag = match img.channels() {
        1 => "P5",
        3 => "P6",
        c => return Err(Error::invalid(format!("PNM supports 1 or 3 channels, not {c}"))),
    };
    let mut out = format!("{tag}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().map(|&x| (x.clamp(0.0, 1.0) * 255.0).round() as u8));
    Ok(out)
}

/// Reads binary P5/P6 files with `maxval <= 255`, scaling values to [0, 1].
pub fn decode_pnm(data: &[u8]) -> Result<Image> {
    let channels = match data.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => {
            return Err(Error::Format {
                offset: 0,
                message: "expected P5 or P6 magic".into(),
            })
        }
    };
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match data.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while data.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while data.get(pos).is_some_and(u8::is_ascii_digit) && pos - start < 10 {
            pos += 1;
        }
        if pos == start {
            return Err(Error::Format {
                offset: pos,
                message: "expected a decimal header field".into(),
            });
        }
        *field = std::str::from_utf8(&data[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format {
                offset: start,
                message: "header field out of range".into(),
            })?;
    }
    let [w, h, maxval] = fields;
    if !data.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Format {
            offset: pos,
            message: "expected whitespace after maxval".into(),
        });
    }
    pos += 1;
    if w == 0 || h == 0 || maxval == 0 || maxval > 255 {
        return Err(Error::Format {
            offset: 2,
            message: format!("unsupported {w}x{h} image with maxval {maxval}"),
        });
    }
    let count = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(channels))
        .filter(|&n| n <= MAX_VALUES)
        .ok_or_else(|| Error::Format {
            offset: 2,
            message: format!("{w}x{h} is too large"),
        })?;
    let body = &data[pos..];
    if body.len() < count {
        return Err(Error::Truncated {
            expected: pos + count,
            found: data.len(),
        });
    }
    let scale = 1.0 / maxval as f64;
    let values = body[..count].iter().map(|&b| (b as f64 * scale).min(1.0)).collect();
    Image::new(h, w, channels, values)
}
