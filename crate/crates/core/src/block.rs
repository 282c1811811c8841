//! The HiF4 unit: 64 S1P2 elements under an E6M2 base scale, 8 level-2
//! micro-exponents (one per 8 elements) and 16 level-3 micro-exponents (one
//! per 4 elements).

use crate::scalar::{pow2, Bf16, E6M2, S1P2};
use crate::{Error, Result};

pub const GROUP_SIZE: usize = 64;
pub const PACKED_BYTES: usize = 36;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Hif4Block {
    pub e6m2: E6M2,
    /// Bit `j` is the level-2 micro-exponent of elements `8j..8j+8`.
    pub e1_8: u8,
    /// Bit `k` is the level-3 micro-exponent of elements `4k..4k+4`.
    pub e1_16: u16,
    pub elems: [S1P2; GROUP_SIZE],
}

/// Max-magnitude reduction tree over the 64 inputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakTree {
    pub v16: [f64; 16],
    pub v8: [f64; 8],
    pub vmax: f64,
}

/// Inputs after all three scale levels, just before S1P2 rounding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledVector(pub [f64; GROUP_SIZE]);

/// Intermediate values of one encode, for inspection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EncodeTrace {
    pub peaks: PeakTree,
    pub scale_factor: Bf16,
    pub recip: Bf16,
    pub scaled: ScaledVector,
}

/// BF16 rounding of 1/7, the reciprocal of the largest intra-group magnitude.
pub fn one_seventh() -> Bf16 {
    Bf16::round_from_f64(1.0 / 7.0)
}

pub fn peak_reduce(v: &[f32; GROUP_SIZE]) -> Result<PeakTree> {
    if v.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("peak reduction over NaN".into()));
    }
    let mut v16 = [0.0f64; 16];
    for (peak, quad) in v16.iter_mut().zip(v.chunks_exact(4)) {
        *peak = quad.iter().fold(0.0, |m, &x| m.max((x as f64).abs()));
    }
    let mut v8 = [0.0f64; 8];
    for (peak, pair) in v8.iter_mut().zip(v16.chunks_exact(2)) {
        *peak = pair[0].max(pair[1]);
    }
    let vmax = v8.iter().copied().fold(0.0, f64::max);
    Ok(PeakTree { v16, v8, vmax })
}

/// Multiply every input by `rec * 2^-e1_8 * 2^-e1_16`. Each factor is a BF16
/// value or a power of two, so the products are exact in `f64`.
pub fn apply_scales(v: &[f32; GROUP_SIZE], rec: Bf16, e1_8: u8, e1_16: u16) -> ScaledVector {
    let rec = rec.to_f64();
    let mut out = [0.0f64; GROUP_SIZE];
    for (i, (o, &x)) in out.iter_mut().zip(v).enumerate() {
        let shift = ((e1_8 >> (i / 8)) & 1) as i32 + ((e1_16 >> (i / 4)) & 1) as i32;
        *o = x as f64 * rec * pow2(-shift);
    }
    ScaledVector(out)
}

impl Hif4Block {
    pub const ZERO: Hif4Block = Hif4Block {
        e6m2: E6M2::MIN,
        e1_8: 0,
        e1_16: 0,
        elems: [S1P2::ZERO; GROUP_SIZE],
    };

    pub const NAN: Hif4Block = Hif4Block {
        e6m2: E6M2::NAN,
        e1_8: 0,
        e1_16: 0,
        elems: [S1P2::ZERO; GROUP_SIZE],
    };

    /// Level-2 micro-exponent `j` (0-based, 0..8).
    pub fn micro8(&self, j: usize) -> u32 {
        ((self.e1_8 >> j) & 1) as u32
    }

    /// Level-3 micro-exponent `k` (0-based, 0..16).
    pub fn micro16(&self, k: usize) -> u32 {
        ((self.e1_16 >> k) & 1) as u32
    }

    /// Combined micro-exponent shift of element `i` (0-based).
    pub fn shift_of(&self, i: usize) -> u32 {
        self.micro8(i / 8) + self.micro16(i / 4)
    }

    pub fn encode_bf16(v: &[Bf16]) -> Result<Self> {
        let wide: Vec<f32> = v.iter().map(|b| b.to_f32()).collect();
        Self::encode(&wide)
    }

    /// Encode 64 values. BF16 inputs are the native case; any binary32 value
    /// goes through the same steps, with products still exact in `f64`.
    pub fn encode(v: &[f32]) -> Result<Self> {
        Ok(Self::encode_traced(v)?.0)
    }

    /// Encode and also return the intermediate values. The trace is `None`
    /// for the NaN and all-zero special cases.
    pub fn encode_traced(v: &[f32]) -> Result<(Self, Option<EncodeTrace>)> {
        let v: &[f32; GROUP_SIZE] = v.try_into().map_err(|_| {
            Error::Usage(format!("HiF4 encodes {GROUP_SIZE} values, got {}", v.len()))
        })?;
        if v.iter().any(|x| !x.is_finite()) {
            return Ok((Self::NAN, None));
        }
        let peaks = peak_reduce(v)?;
        if peaks.vmax == 0.0 {
            return Ok((Self::ZERO, None));
        }

        // vmax (24 bits) * 1/7 (8 bits) is exact in f64 before the BF16 rounding
        let scale_factor = Bf16::round_from_f64(peaks.vmax * one_seventh().to_f64());
        let sf = scale_factor.to_f64();
        let e6m2 = if sf < pow2(-48) {
            E6M2::MIN
        } else {
            E6M2::encode(sf)?
        };
        let recip = e6m2.recip_bf16();
        let rec = recip.to_f64();

        let mut e1_8 = 0u8;
        for (j, &p) in peaks.v8.iter().enumerate() {
            if p * rec >= 4.0 {
                e1_8 |= 1 << j;
            }
        }
        let mut e1_16 = 0u16;
        for (k, &p) in peaks.v16.iter().enumerate() {
            let halve = pow2(-(((e1_8 >> (k / 2)) & 1) as i32));
            if p * rec * halve >= 2.0 {
                e1_16 |= 1 << k;
            }
        }

        let scaled = apply_scales(v, recip, e1_8, e1_16);
        let mut elems = [S1P2::ZERO; GROUP_SIZE];
        for (e, &s) in elems.iter_mut().zip(&scaled.0) {
            *e = S1P2::encode(s)?;
        }
        let block = Hif4Block {
            e6m2,
            e1_8,
            e1_16,
            elems,
        };
        let trace = EncodeTrace {
            peaks,
            scale_factor,
            recip,
            scaled,
        };
        Ok((block, Some(trace)))
    }

    /// `V_i = E6M2 * 2^(e1_8 + e1_16) * S1P2_i`, exact in `f64`; all NaN when
    /// the base scale is NaN.
    pub fn decode(&self) -> [f64; GROUP_SIZE] {
        if self.e6m2.is_nan() {
            return [f64::NAN; GROUP_SIZE];
        }
        let base = self.e6m2.decode();
        let mut out = [0.0; GROUP_SIZE];
        for (i, (o, e)) in out.iter_mut().zip(&self.elems).enumerate() {
            *o = base * pow2(self.shift_of(i) as i32) * e.decode();
        }
        out
    }

    /// Byte 0: E6M2. Byte 1: level-2 bits. Bytes 2-3: level-3 bits, little
    /// endian. Bytes 4-35: elements, even index in the low nibble.
    pub fn pack(&self) -> [u8; PACKED_BYTES] {
        let mut out = [0u8; PACKED_BYTES];
        out[0] = self.e6m2.to_bits();
        out[1] = self.e1_8;
        out[2..4].copy_from_slice(&self.e1_16.to_le_bytes());
        pack_nibbles(self.elems.iter().map(|e| e.to_bits()), &mut out[4..]);
        out
    }

    pub fn unpack(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != PACKED_BYTES {
            return Err(Error::format(
                bytes.len().min(PACKED_BYTES) as u64,
                format!("HiF4 unit is {PACKED_BYTES} bytes, got {}", bytes.len()),
            ));
        }
        let mut elems = [S1P2::ZERO; GROUP_SIZE];
        for (i, e) in elems.iter_mut().enumerate() {
            *e = S1P2::from_bits(nibble(&bytes[4..], i));
        }
        Ok(Hif4Block {
            e6m2: E6M2::from_bits(bytes[0]),
            e1_8: bytes[1],
            e1_16: u16::from_le_bytes([bytes[2], bytes[3]]),
            elems,
        })
    }
}

/// Two nibbles per byte, element `2n` low and `2n + 1` high.
pub(crate) fn pack_nibbles(nibbles: impl Iterator<Item = u8>, out: &mut [u8]) {
    for (i, n) in nibbles.enumerate() {
        out[i / 2] |= (n & 0xf) << (4 * (i % 2));
    }
}

pub(crate) fn nibble(bytes: &[u8], i: usize) -> u8 {
    (bytes[i / 2] >> (4 * (i % 2))) & 0xf
}
