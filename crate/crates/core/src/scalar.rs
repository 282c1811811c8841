//! Scalar mini-float codecs.
//!
//! Every format here decodes exactly into `f64`. Encoders round to nearest
//! with ties to even and saturate at the largest finite magnitude.

use std::fmt;

use crate::{Error, Result};

/// Exact `2^k` for any `k` that `f64` can hold, subnormals included.
pub(crate) fn pow2(k: i32) -> f64 {
    if k >= -1022 {
        assert!(k <= 1023, "2^{k} overflows f64");
        f64::from_bits(((k + 1023) as u64) << 52)
    } else {
        // subnormal: a single bit in the mantissa field
        assert!(k >= -1074, "2^{k} underflows f64");
        f64::from_bits(1u64 << (k + 1074))
    }
}

/// `floor(log2(a))` for finite `a > 0`.
pub(crate) fn floor_log2(a: f64) -> i32 {
    debug_assert!(a > 0.0 && a.is_finite());
    let biased = ((a.to_bits() >> 52) & 0x7ff) as i32;
    if biased == 0 {
        floor_log2(a * pow2(64)) - 64
    } else {
        biased - 1023
    }
}

/// Code for a normal-range magnitude `a` on a grid with `man_bits` stored
/// mantissa bits and exponent `bias`. Codes are `(biased_exp << man_bits) | man`;
/// a mantissa that rounds up to the next binade carries into the exponent field.
fn round_normal(a: f64, man_bits: u32, bias: i32) -> i64 {
    let e = floor_log2(a);
    let q = (a * pow2(man_bits as i32 - e)).round_ties_even() as i64;
    (((e + bias) as i64) << man_bits) + q - (1i64 << man_bits)
}

/// Code for a magnitude below the smallest normal, `a < 2^emin`.
/// Subnormal codes are the count of `2^(emin - man_bits)` steps, so they
/// continue seamlessly into the first normal binade.
fn round_subnormal(a: f64, man_bits: u32, emin: i32) -> i64 {
    (a * pow2(man_bits as i32 - emin)).round_ties_even() as i64
}

// ---------------------------------------------------------------------------
// BF16
// ---------------------------------------------------------------------------

/// bfloat16: binary32 with the low 16 mantissa bits dropped.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Bf16(u16);

impl Bf16 {
    pub const ONE: Bf16 = Bf16(0x3f80);

    pub const fn from_bits(bits: u16) -> Self {
        Bf16(bits)
    }

    pub const fn to_bits(self) -> u16 {
        self.0
    }

    /// Round-to-nearest-even from binary32. NaN stays NaN (quieted), infinities
    /// and signed zeros pass through.
    pub fn round_from_f32(x: f32) -> Self {
        let bits = x.to_bits();
        if x.is_nan() {
            return Bf16(((bits >> 16) as u16) | 0x0040);
        }
        let lsb = (bits >> 16) & 1;
        Bf16((bits.wrapping_add(0x7fff + lsb) >> 16) as u16)
    }

    /// Round-to-nearest-even from binary64 in a single step (no detour through
    /// binary32, so no double rounding).
    pub fn round_from_f64(x: f64) -> Self {
        if x.is_nan() {
            let sign = if x.is_sign_negative() { 0x8000 } else { 0 };
            return Bf16(sign | 0x7fc0);
        }
        if x == 0.0 || x.is_infinite() {
            return Bf16(((x as f32).to_bits() >> 16) as u16);
        }
        let a = x.abs();
        // 8 significant bits in the normal range, fixed 2^-133 steps below 2^-126
        let step = if a >= pow2(-126) {
            floor_log2(a) - 7
        } else {
            -133
        };
        let r = (a / pow2(step)).round_ties_even() * pow2(step);
        let r = r.copysign(x);
        // r is exact in f32 unless it reached 2^128, where `as f32` gives inf
        Bf16(((r as f32).to_bits() >> 16) as u16)
    }

    pub fn to_f32(self) -> f32 {
        f32::from_bits((self.0 as u32) << 16)
    }

    pub fn to_f64(self) -> f64 {
        self.to_f32() as f64
    }

    pub fn is_nan(self) -> bool {
        self.to_f32().is_nan()
    }
}

impl fmt::Debug for Bf16 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bf16({:#06x} = {:?})", self.0, self.to_f32())
    }
}

// ---------------------------------------------------------------------------
// E6M2: unsigned, bias 48, normals only, NaN at 0xff
// ---------------------------------------------------------------------------

/// Unsigned 8-bit float: 6-bit exponent (bias 48), 2-bit mantissa with a
/// hidden one. No zero, no infinity, no subnormals; `0xff` is NaN.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct E6M2(u8);

const E6M2_BIAS: i32 = 48;

/// `1 / 1.M` for M in 0..4, as (exponent adjustment, 7-bit BF16 mantissa),
/// each already rounded to nearest even.
const E6M2_RECIP_LUT: [(i32, u16); 4] = [
    (0, 0),   // 1/1.00 = 1.0
    (-1, 77), // 1/1.25 = 0.8       -> 1.1001101b x 2^-1
    (-1, 43), // 1/1.50 = 0.666..   -> 1.0101011b x 2^-1
    (-1, 18), // 1/1.75 = 0.571..   -> 1.0010010b x 2^-1
];

impl E6M2 {
    pub const MIN: E6M2 = E6M2(0x00);
    pub const ONE: E6M2 = E6M2(0xc0);
    pub const MAX: E6M2 = E6M2(0xfe);
    pub const NAN: E6M2 = E6M2(0xff);

    pub const fn from_bits(bits: u8) -> Self {
        E6M2(bits)
    }

    pub const fn to_bits(self) -> u8 {
        self.0
    }

    pub const fn is_nan(self) -> bool {
        self.0 == 0xff
    }

    pub const fn exponent(self) -> i32 {
        (self.0 >> 2) as i32 - E6M2_BIAS
    }

    pub const fn mantissa(self) -> u8 {
        self.0 & 0b11
    }

    pub fn decode(self) -> f64 {
        if self.is_nan() {
            return f64::NAN;
        }
        pow2(self.exponent()) * (1.0 + self.mantissa() as f64 / 4.0)
    }

    /// Nearest E6M2 to a finite positive `x`, saturating at both ends.
    pub fn encode(x: f64) -> Result<Self> {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::Domain(format!(
                "E6M2 encodes finite positive values, got {x}"
            )));
        }
        if x < pow2(-E6M2_BIAS) {
            return Ok(E6M2::MIN);
        }
        let code = round_normal(x, 2, E6M2_BIAS);
        Ok(E6M2(code.min(E6M2::MAX.0 as i64) as u8))
    }

    /// BF16 reciprocal via the 4-entry mantissa table and an exponent
    /// subtraction. NaN maps to NaN.
    pub fn recip_bf16(self) -> Bf16 {
        if self.is_nan() {
            return Bf16(0x7fc0);
        }
        let (adj, man) = E6M2_RECIP_LUT[self.mantissa() as usize];
        let biased = 127 - self.exponent() + adj;
        Bf16(((biased as u16) << 7) | man)
    }
}

impl fmt::Debug for E6M2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E6M2({:#04x} = {:?})", self.0, self.decode())
    }
}

// ---------------------------------------------------------------------------
// S1P2: sign-magnitude, 1 integer bit, 2 fraction bits
// ---------------------------------------------------------------------------

/// 4-bit sign-magnitude fixed point: `(-1)^s * mag / 4`, `mag` in 0..=7.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct S1P2(u8);

impl S1P2 {
    pub const ZERO: S1P2 = S1P2(0);
    pub const NEG_ZERO: S1P2 = S1P2(0b1000);

    pub fn from_bits(bits: u8) -> Self {
        S1P2(bits & 0xf)
    }

    pub const fn to_bits(self) -> u8 {
        self.0
    }

    pub const fn is_negative(self) -> bool {
        self.0 & 0b1000 != 0
    }

    /// Magnitude in quarters, 0..=7.
    pub const fn magnitude(self) -> u8 {
        self.0 & 0b111
    }

    /// Signed value in quarters.
    pub const fn quarters(self) -> i32 {
        let m = self.magnitude() as i32;
        if self.is_negative() {
            -m
        } else {
            m
        }
    }

    pub fn decode(self) -> f64 {
        let v = self.magnitude() as f64 / 4.0;
        if self.is_negative() {
            -v
        } else {
            v
        }
    }

    /// Round to the nearest quarter (ties to even), clamp the magnitude to
    /// 1.75 and keep the sign, so small negatives become `-0`.
    pub fn encode(x: f64) -> Result<Self> {
        if x.is_nan() {
            return Err(Error::Domain("S1P2 has no NaN".into()));
        }
        let mag = (x.abs() * 4.0).round_ties_even().min(7.0) as u8;
        let sign = if x.is_sign_negative() { 0b1000 } else { 0 };
        Ok(S1P2(sign | mag))
    }
}

impl fmt::Debug for S1P2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S1P2({:#x} = {:?})", self.0, self.decode())
    }
}

// ---------------------------------------------------------------------------
// E2M1: 4-bit float, bias 1, one subnormal, no NaN/inf
// ---------------------------------------------------------------------------

/// 4-bit float with magnitudes {0, 0.5, 1, 1.5, 2, 3, 4, 6}.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct E2M1(u8);

impl E2M1 {
    pub const ZERO: E2M1 = E2M1(0);
    pub const MAX: E2M1 = E2M1(0b0111);

    pub fn from_bits(bits: u8) -> Self {
        E2M1(bits & 0xf)
    }

    pub const fn to_bits(self) -> u8 {
        self.0
    }

    pub const fn is_negative(self) -> bool {
        self.0 & 0b1000 != 0
    }

    /// Magnitude in halves: one of {0, 1, 2, 3, 4, 6, 8, 12}.
    pub const fn halves(self) -> i32 {
        let exp = (self.0 >> 1) & 0b11;
        let man = (self.0 & 1) as i32;
        if exp == 0 {
            man
        } else {
            (2 + man) << (exp - 1)
        }
    }

    /// Signed value in halves.
    pub const fn signed_halves(self) -> i32 {
        if self.is_negative() {
            -self.halves()
        } else {
            self.halves()
        }
    }

    pub fn decode(self) -> f64 {
        let v = self.halves() as f64 / 2.0;
        if self.is_negative() {
            -v
        } else {
            v
        }
    }

    pub fn encode(x: f64) -> Result<Self> {
        if x.is_nan() {
            return Err(Error::Domain("E2M1 has no NaN".into()));
        }
        let a = x.abs();
        let code = if a >= 6.0 {
            E2M1::MAX.0 as i64
        } else if a < 1.0 {
            round_subnormal(a, 1, 0)
        } else {
            round_normal(a, 1, 1)
        };
        let sign = if x.is_sign_negative() { 0b1000 } else { 0 };
        Ok(E2M1(sign | code.min(7) as u8))
    }
}

impl fmt::Debug for E2M1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E2M1({:#x} = {:?})", self.0, self.decode())
    }
}

// ---------------------------------------------------------------------------
// E4M3: bias 7, subnormals, NaN at S.1111.111, no infinity, max 448
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct E4M3(u8);

const E4M3_BIAS: i32 = 7;

impl E4M3 {
    /// Smallest positive subnormal, 2^-9.
    pub const MIN_POSITIVE: E4M3 = E4M3(0x01);
    pub const ONE: E4M3 = E4M3(0x38);
    pub const MAX: E4M3 = E4M3(0x7e);
    pub const NAN: E4M3 = E4M3(0x7f);

    pub const fn from_bits(bits: u8) -> Self {
        E4M3(bits)
    }

    pub const fn to_bits(self) -> u8 {
        self.0
    }

    pub const fn is_nan(self) -> bool {
        self.0 & 0x7f == 0x7f
    }

    pub fn decode(self) -> f64 {
        if self.is_nan() {
            return f64::NAN;
        }
        let exp = ((self.0 >> 3) & 0xf) as i32;
        let man = (self.0 & 0b111) as f64;
        let mag = if exp == 0 {
            man * pow2(1 - E4M3_BIAS - 3)
        } else {
            (8.0 + man) * pow2(exp - E4M3_BIAS - 3)
        };
        if self.0 & 0x80 != 0 {
            -mag
        } else {
            mag
        }
    }

    /// Nearest E4M3, saturating at ±448. NaN encodes to the NaN pattern.
    pub fn encode(x: f64) -> Self {
        if x.is_nan() {
            return E4M3::NAN;
        }
        let a = x.abs();
        let emin = 1 - E4M3_BIAS;
        let code = if a >= 448.0 {
            E4M3::MAX.0 as i64
        } else if a < pow2(emin) {
            round_subnormal(a, 3, emin)
        } else {
            round_normal(a, 3, E4M3_BIAS)
        };
        let sign = if x.is_sign_negative() { 0x80 } else { 0 };
        E4M3(sign | code.min(E4M3::MAX.0 as i64) as u8)
    }
}

impl fmt::Debug for E4M3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E4M3({:#04x} = {:?})", self.0, self.decode())
    }
}

// ---------------------------------------------------------------------------
// E8M0: power-of-two scale, bias 127, NaN at 0xff
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct E8M0(u8);

impl E8M0 {
    pub const MIN: E8M0 = E8M0(0);
    pub const ONE: E8M0 = E8M0(127);
    pub const MAX: E8M0 = E8M0(254);
    pub const NAN: E8M0 = E8M0(255);

    pub const fn from_bits(bits: u8) -> Self {
        E8M0(bits)
    }

    /// Scale with the given unbiased exponent, clamped to the finite range.
    pub fn from_exponent(exp: i32) -> Self {
        E8M0((exp.clamp(-127, 127) + 127) as u8)
    }

    pub const fn to_bits(self) -> u8 {
        self.0
    }

    pub const fn is_nan(self) -> bool {
        self.0 == 255
    }

    pub const fn exponent(self) -> i32 {
        self.0 as i32 - 127
    }

    pub fn decode(self) -> f64 {
        if self.is_nan() {
            f64::NAN
        } else {
            pow2(self.exponent())
        }
    }

    /// Nearest power of two to a positive `x`; a tie (`1.5 * 2^k`) goes to the
    /// even code. Saturates at 2^-127 and 2^127.
    pub fn encode(x: f64) -> Result<Self> {
        if x.is_nan() {
            return Ok(E8M0::NAN);
        }
        if x <= 0.0 {
            return Err(Error::Domain(format!(
                "E8M0 encodes positive values, got {x}"
            )));
        }
        if x.is_infinite() {
            return Ok(E8M0::MAX);
        }
        let e = floor_log2(x);
        let mid = 1.5 * pow2(e);
        let up = x > mid || (x == mid && (e + 127) % 2 != 0);
        Ok(E8M0::from_exponent(if up { e + 1 } else { e }))
    }
}

impl fmt::Debug for E8M0 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E8M0({:#04x} = {:?})", self.0, self.decode())
    }
}

// ---------------------------------------------------------------------------
// Decode tables
// ---------------------------------------------------------------------------

/// Formats with a dumpable decode table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarFormat {
    E6M2,
    S1P2,
    E2M1,
    E4M3,
    E8M0,
    Bf16,
}

impl ScalarFormat {
    pub const ALL: [ScalarFormat; 6] = [
        ScalarFormat::E6M2,
        ScalarFormat::S1P2,
        ScalarFormat::E2M1,
        ScalarFormat::E4M3,
        ScalarFormat::E8M0,
        ScalarFormat::Bf16,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScalarFormat::E6M2 => "e6m2",
            ScalarFormat::S1P2 => "s1p2",
            ScalarFormat::E2M1 => "e2m1",
            ScalarFormat::E4M3 => "e4m3",
            ScalarFormat::E8M0 => "e8m0",
            ScalarFormat::Bf16 => "bf16",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(name))
    }

    pub fn code_bits(self) -> u32 {
        match self {
            ScalarFormat::S1P2 | ScalarFormat::E2M1 => 4,
            ScalarFormat::Bf16 => 16,
            _ => 8,
        }
    }

    pub fn decode(self, code: u32) -> f64 {
        match self {
            ScalarFormat::E6M2 => E6M2::from_bits(code as u8).decode(),
            ScalarFormat::S1P2 => S1P2::from_bits(code as u8).decode(),
            ScalarFormat::E2M1 => E2M1::from_bits(code as u8).decode(),
            ScalarFormat::E4M3 => E4M3::from_bits(code as u8).decode(),
            ScalarFormat::E8M0 => E8M0::from_bits(code as u8).decode(),
            ScalarFormat::Bf16 => Bf16::from_bits(code as u16).to_f64(),
        }
    }

    /// Every code with its decoded value, in code order.
    pub fn decode_table(self) -> Vec<(u32, f64)> {
        (0..1u32 << self.code_bits())
            .map(|c| (c, self.decode(c)))
            .collect()
    }
}
