//! Binary checkpoint of the optimized parameters.
//!
//! Layout (all integers `u32` little-endian, all reals `f64` little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "VSCK"
//! 4       4     version (1)
//! 8       4     height
//! 12      4     width
//! 16      4     number of sources S
//! 20      4     number of mask levels L
//! 24      32    fx, fy, cx, cy
//! 56      8*H*W depth logits, row-major
//! ...     8*6*S pose parameters (rx, ry, rz, tx, ty, tz) per source
//! ...           mask logits: for each level l (h_l = H >> l, w_l = W >> l),
//!               for each source, h_l * w_l * 2 interleaved logits
//! ```

use std::path::Path;

use super::depth::DepthField;
use super::state::SnippetState;
use crate::error::{Error, Result};
use crate::geometry::{Intrinsics, PoseParams};
use crate::losses::ExplainabilityField;

const MAGIC: &[u8; 4] = b"VSCK";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 56;
/// Refuse headers describing more parameters than this.
const MAX_VALUES: usize = 1 << 28;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub intrinsics: Intrinsics,
    pub depth: DepthField,
    pub poses: Vec<PoseParams>,
    /// `[level][source]`.
    pub masks: Vec<Vec<ExplainabilityField>>,
}

impl Checkpoint {
    pub fn from_state(state: &SnippetState) -> Self {
        Checkpoint {
            intrinsics: *state.intrinsics(),
            depth: state.depth.clone(),
            poses: state.poses.clone(),
            masks: state.masks.clone(),
        }
    }

    /// Copies the parameters into a state built from the same snippet.
    pub fn apply(&self, state: &mut SnippetState) -> Result<()> {
        if self.depth.height() != state.depth.height()
            || self.depth.width() != state.depth.width()
            || self.poses.len() != state.poses.len()
            || self.masks.len() != state.masks.len()
        {
            return Err(Error::DimensionMismatch(
                "checkpoint does not match the snippet".into(),
            ));
        }
        state.depth = self.depth.clone();
        state.poses = self.poses.clone();
        state.masks = self.masks.clone();
        Ok(())
    }
}

pub fn encode_checkpoint(ck: &Checkpoint) -> Vec<u8> {
    let (h, w) = (ck.depth.height(), ck.depth.width());
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    for v in [VERSION, h as u32, w as u32, ck.poses.len() as u32, ck.masks.len() as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let k = &ck.intrinsics;
    let reals = [k.fx, k.fy, k.cx, k.cy]
        .into_iter()
        .chain(ck.depth.logits().iter().copied())
        .chain(ck.poses.iter().flat_map(|p| p.to_array()))
        .chain(ck.masks.iter().flatten().flat_map(|f| f.logits().iter().copied()));
    for x in reals {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.data.len() - self.pos < n {
            return Err(Error::Truncated {
                expected: self.pos + n,
                found: self.data.len(),
            });
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n * 8)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

pub fn decode_checkpoint(data: &[u8]) -> Result<Checkpoint> {
    if data.len() < 4 || &data[..4] != MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: "missing VSCK magic".into(),
        });
    }
    let mut r = Reader { data, pos: 4 };
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Format {
            offset: 4,
            message: format!("unsupported checkpoint version {version}"),
        });
    }
    let h = r.u32()? as usize;
    let w = r.u32()? as usize;
    let sources = r.u32()? as usize;
    let levels = r.u32()? as usize;
    if h == 0 || w == 0 {
        return Err(Error::Format {
            offset: 8,
            message: format!("empty depth field {h}x{w}"),
        });
    }
    if levels > 32 || (levels > 0 && ((h >> (levels - 1)) == 0 || (w >> (levels - 1)) == 0)) {
        return Err(Error::Format {
            offset: 20,
            message: format!("{levels} mask levels do not fit a {h}x{w} field"),
        });
    }
    let mut total = (h as u128) * (w as u128) + 6 * sources as u128;
    for l in 0..levels {
        total += ((h >> l) as u128) * ((w >> l) as u128) * 2 * sources as u128;
    }
    if total > MAX_VALUES as u128 {
        return Err(Error::Format {
            offset: 8,
            message: format!("header describes {total} parameters"),
        });
    }
    let expected = HEADER_LEN + 8 * total as usize;
    if data.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: data.len(),
        });
    }
    if data.len() > expected {
        return Err(Error::Format {
            offset: expected,
            message: format!("{} trailing bytes", data.len() - expected),
        });
    }

    let kv = r.f64s(4)?;
    let intrinsics = Intrinsics::new(kv[0], kv[1], kv[2], kv[3], w, h).map_err(|e| Error::Format {
        offset: 24,
        message: e.to_string(),
    })?;
    let depth = DepthField::from_logits(h, w, r.f64s(h * w)?)?;
    let poses = r
        .f64s(6 * sources)?
        .chunks_exact(6)
        .map(|c| PoseParams::from_array(c.try_into().expect("6 values")))
        .collect();
    let mut masks = Vec::with_capacity(levels);
    for l in 0..levels {
        let (hl, wl) = (h >> l, w >> l);
        let mut level = Vec::with_capacity(sources);
        for _ in 0..sources {
            let at = r.pos;
            let f = ExplainabilityField::from_logits(hl, wl, r.f64s(hl * wl * 2)?).map_err(|e| {
                Error::Format {
                    offset: at,
                    message: e.to_string(),
                }
            })?;
            level.push(f);
        }
        masks.push(level);
    }
    Ok(Checkpoint {
        intrinsics,
        depth,
        poses,
        masks,
    })
}

pub fn save_checkpoint(ck: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_checkpoint(ck)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let (h, w) = (6, 10);
        Checkpoint {
            intrinsics: Intrinsics::new(8.0, 9.0, 5.0, 3.0, w, h).unwrap(),
            depth: DepthField::from_logits(h, w, (0..60).map(|i| i as f64 * 0.01 - 0.3).collect()).unwrap(),
            poses: vec![PoseParams::new(0.1, 0.2, 0.3, 0.4, 0.5, 0.6), PoseParams::default()],
            masks: (0..2)
                .map(|l| {
                    (0..2)
                        .map(|s| {
                            let n = (h >> l) * (w >> l) * 2;
                            ExplainabilityField::from_logits(h >> l, w >> l, (0..n).map(|i| (i + s) as f64 * 0.1).collect())
                                .unwrap()
                        })
                        .collect()
                })
                .collect(),
        }
    }

    #[test]
    fn round_trip() {
        let ck = sample();
        let bytes = encode_checkpoint(&ck);
        assert_eq!(&bytes[..4], b"VSCK");
        assert_eq!(decode_checkpoint(&bytes).unwrap(), ck);
    }

    #[test]
    fn corrupt_inputs() {
        let bytes = encode_checkpoint(&sample());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_checkpoint(&bad), Err(Error::Format { offset: 0, .. })));
        assert!(matches!(
            decode_checkpoint(&bytes[..bytes.len() - 3]),
            Err(Error::Truncated { .. })
        ));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(decode_checkpoint(&extra), Err(Error::Format { .. })));
        let mut huge = bytes.clone();
        huge[8..12].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(decode_checkpoint(&huge).is_err());
        let mut deep = bytes.clone();
        deep[20..24].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(decode_checkpoint(&deep).is_err());
        assert!(decode_checkpoint(&[]).is_err());
    }
}
