//! NVFP4 and MXFP4, the two E2M1-element formats HiF4 is compared with.

use crate::block::{nibble, pack_nibbles};
use crate::scalar::{floor_log2, pow2, E2M1, E4M3, E8M0};
use crate::tensor::TensorBuffer;
use crate::{Error, Result};

pub const NVFP4_GROUP_SIZE: usize = 16;
pub const NVFP4_PACKED_BYTES: usize = 9;
pub const MXFP4_GROUP_SIZE: usize = 32;
pub const MXFP4_PACKED_BYTES: usize = 17;

/// Peak magnitude that per-tensor scaling maps a tensor onto: 448 * 6.
pub const PTS_TARGET: f32 = 2688.0;

/// Largest E2M1 exponent; MXFP4 scales so the group peak lands in its binade.
const E2M1_EMAX: i32 = 2;

fn peak_abs(v: &[f32]) -> Result<f64> {
    v.iter().try_fold(0.0f64, |m, &x| {
        if x.is_nan() {
            Err(Error::Domain("NaN in quantization group".into()))
        } else {
            Ok(m.max((x as f64).abs()))
        }
    })
}

fn check_len(v: &[f32], n: usize, what: &str) -> Result<()> {
    if v.len() == n {
        Ok(())
    } else {
        Err(Error::Usage(format!(
            "{what} group takes {n} values, got {}",
            v.len()
        )))
    }
}

/// 16 E2M1 elements under one non-negative E4M3 scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Nvfp4Group {
    pub scale: E4M3,
    pub elems: [E2M1; NVFP4_GROUP_SIZE],
}

impl Nvfp4Group {
    /// Scale the group peak onto 6 with a round-to-nearest E4M3 scale. The
    /// scale is clamped to `[2^-9, 448]`, so direct-cast groups above 2688
    /// saturate and tiny groups flush towards zero.
    pub fn encode(v: &[f32]) -> Result<Self> {
        check_len(v, NVFP4_GROUP_SIZE, "NVFP4")?;
        let peak = peak_abs(v)?;
        let mut scale = E4M3::encode(peak / 6.0);
        if scale.decode() == 0.0 {
            scale = E4M3::MIN_POSITIVE;
        }
        let s = scale.decode();
        let mut elems = [E2M1::ZERO; NVFP4_GROUP_SIZE];
        for (e, &x) in elems.iter_mut().zip(v) {
            *e = E2M1::encode(x as f64 / s)?;
        }
        Ok(Nvfp4Group { scale, elems })
    }

    pub fn decode(&self) -> [f64; NVFP4_GROUP_SIZE] {
        let s = self.scale.decode();
        self.elems.map(|e| e.decode() * s)
    }

    /// Scale byte, then 8 element bytes with even indices in the low nibble.
    pub fn pack(&self) -> [u8; NVFP4_PACKED_BYTES] {
        let mut out = [0u8; NVFP4_PACKED_BYTES];
        out[0] = self.scale.to_bits();
        pack_nibbles(self.elems.iter().map(|e| e.to_bits()), &mut out[1..]);
        out
    }

    pub fn unpack(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != NVFP4_PACKED_BYTES {
            return Err(Error::format(
                0,
                format!(
                    "NVFP4 group is {NVFP4_PACKED_BYTES} bytes, got {}",
                    bytes.len()
                ),
            ));
        }
        let mut elems = [E2M1::ZERO; NVFP4_GROUP_SIZE];
        for (i, e) in elems.iter_mut().enumerate() {
            *e = E2M1::from_bits(nibble(&bytes[1..], i));
        }
        Ok(Nvfp4Group {
            scale: E4M3::from_bits(bytes[0]),
            elems,
        })
    }
}

/// 32 E2M1 elements under one power-of-two E8M0 scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mxfp4Group {
    pub scale: E8M0,
    pub elems: [E2M1; MXFP4_GROUP_SIZE],
}

impl Mxfp4Group {
    /// Shared exponent `floor(log2(peak)) - 2`, then E2M1 rounding with
    /// saturation at ±6. An all-zero group gets the smallest scale.
    pub fn encode(v: &[f32]) -> Result<Self> {
        check_len(v, MXFP4_GROUP_SIZE, "MXFP4")?;
        let peak = peak_abs(v)?;
        let scale = if peak == 0.0 {
            E8M0::MIN
        } else {
            E8M0::from_exponent(floor_log2(peak) - E2M1_EMAX)
        };
        let inv = pow2(-scale.exponent());
        let mut elems = [E2M1::ZERO; MXFP4_GROUP_SIZE];
        for (e, &x) in elems.iter_mut().zip(v) {
            *e = E2M1::encode(x as f64 * inv)?;
        }
        Ok(Mxfp4Group { scale, elems })
    }

    pub fn decode(&self) -> [f64; MXFP4_GROUP_SIZE] {
        let s = self.scale.decode();
        self.elems.map(|e| e.decode() * s)
    }

    pub fn pack(&self) -> [u8; MXFP4_PACKED_BYTES] {
        let mut out = [0u8; MXFP4_PACKED_BYTES];
        out[0] = self.scale.to_bits();
        pack_nibbles(self.elems.iter().map(|e| e.to_bits()), &mut out[1..]);
        out
    }

    pub fn unpack(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != MXFP4_PACKED_BYTES {
            return Err(Error::format(
                0,
                format!(
                    "MXFP4 group is {MXFP4_PACKED_BYTES} bytes, got {}",
                    bytes.len()
                ),
            ));
        }
        let mut elems = [E2M1::ZERO; MXFP4_GROUP_SIZE];
        for (i, e) in elems.iter_mut().enumerate() {
            *e = E2M1::from_bits(nibble(&bytes[1..], i));
        }
        Ok(Mxfp4Group {
            scale: E8M0::from_bits(bytes[0]),
            elems,
        })
    }
}

/// Per-tensor pre-scale applied before NVFP4 quantization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PtsFactor {
    pub factor: f32,
    /// The tensor had no finite nonzero element and was left unscaled.
    pub degenerate: bool,
}

/// Scale `t` so its peak magnitude becomes 2688. Arithmetic is binary32,
/// matching a framework-level scalar multiply.
pub fn pts_prescale(t: &TensorBuffer) -> (TensorBuffer, PtsFactor) {
    let peak = t
        .data()
        .iter()
        .filter(|x| x.is_finite())
        .fold(0.0f32, |m, &x| m.max(x.abs()));
    if peak == 0.0 {
        let pts = PtsFactor {
            factor: 1.0,
            degenerate: true,
        };
        return (t.clone(), pts);
    }
    let factor = PTS_TARGET / peak;
    let scaled = t.map(|x| x * factor);
    (
        scaled,
        PtsFactor {
            factor,
            degenerate: false,
        },
    )
}
