//! 64-length dot products.
//!
//! The reference path decodes both operands and sums in `f64`. The
//! fixed-point paths follow the hardware flow: integer element products,
//! integer reduction, and scale multiplies only at the end (once for HiF4,
//! once per 16-element group for NVFP4).

use rayon::prelude::*;

use crate::baseline::{Nvfp4Group, NVFP4_GROUP_SIZE};
use crate::block::{Hif4Block, GROUP_SIZE};
use crate::rng::CounterRng;
use crate::scalar::{E2M1, E4M3};
use crate::{Error, Result};

/// Sign-magnitude fixed-point layouts on the datapath, `S<int>P<frac>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedFormat {
    S2P2,
    S3P1,
    S4P4,
    S6P4,
    S10P2,
    S12P4,
}

impl FixedFormat {
    pub const fn int_bits(self) -> u32 {
        match self {
            FixedFormat::S2P2 => 2,
            FixedFormat::S3P1 => 3,
            FixedFormat::S4P4 => 4,
            FixedFormat::S6P4 => 6,
            FixedFormat::S10P2 => 10,
            FixedFormat::S12P4 => 12,
        }
    }

    pub const fn frac_bits(self) -> u32 {
        match self {
            FixedFormat::S2P2 | FixedFormat::S10P2 => 2,
            FixedFormat::S3P1 => 1,
            FixedFormat::S4P4 | FixedFormat::S6P4 | FixedFormat::S12P4 => 4,
        }
    }

    /// Largest magnitude of the raw integer.
    pub const fn max_raw(self) -> i64 {
        (1 << (self.int_bits() + self.frac_bits())) - 1
    }
}

/// `q / 2^frac_bits` in a given layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixedPointValue {
    pub q: i64,
    pub format: FixedFormat,
}

impl FixedPointValue {
    pub fn new(q: i64, format: FixedFormat) -> Result<Self> {
        if q.abs() > format.max_raw() {
            return Err(Error::Invariant(format!(
                "{q} does not fit {format:?} (max {})",
                format.max_raw()
            )));
        }
        Ok(FixedPointValue { q, format })
    }

    pub fn to_f64(self) -> f64 {
        self.q as f64 / (1u64 << self.format.frac_bits()) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DotFormat {
    Hif4,
    Nvfp4,
}

/// Scale multipliers needed after the integer reduction: small ones for
/// scale x scale, wide ones for accumulator x scale product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MultiplierInventory {
    pub scale_multipliers: u32,
    pub wide_multipliers: u32,
}

/// Everything the fixed-point flow computed, stage by stage.
#[derive(Clone, Debug, PartialEq)]
pub struct DotTrace {
    pub format: DotFormat,
    /// Integer multiplier inputs (S2P2 quarters or S3P1 halves).
    pub operands_a: Vec<i64>,
    pub operands_b: Vec<i64>,
    /// Raw element products, in units of `2^-product_frac_bits`.
    pub products: Vec<i64>,
    pub product_frac_bits: u32,
    /// Per-product left shift (sum of both level-2 micro-exponents; 0 for NVFP4).
    pub shifts: Vec<u32>,
    /// Products per scale group: 64 for HiF4, 16 for NVFP4.
    pub scale_group_len: usize,
    /// Integer sums per 8 products (HiF4) or per group (NVFP4), after shifts.
    pub partial_sums: Vec<i64>,
    /// Integer totals per scale group: one for HiF4, four for NVFP4.
    pub accumulators: Vec<FixedPointValue>,
    /// Product of the two operand scales, per scale group.
    pub scale_products: Vec<f64>,
    /// `accumulator * scale_product`, per scale group.
    pub scaled_partials: Vec<f64>,
    pub result: f64,
    pub multipliers: MultiplierInventory,
}

impl DotTrace {
    /// Recompute the result from the recorded operands and scales.
    pub fn replay(&self) -> f64 {
        let mut total = 0.0;
        let unit = (1u64 << self.product_frac_bits) as f64;
        for (g, scale) in self.scale_products.iter().enumerate() {
            let lo = g * self.scale_group_len;
            let acc: i64 = (lo..lo + self.scale_group_len)
                .map(|i| (self.operands_a[i] * self.operands_b[i]) << self.shifts[i])
                .sum();
            total += acc as f64 / unit * scale;
        }
        total
    }

    /// Largest accumulator magnitude in integer units (raw value over 2^frac).
    pub fn width_witness(&self) -> i64 {
        self.accumulators
            .iter()
            .map(|a| {
                let unit = 1i64 << a.format.frac_bits();
                (a.q.abs() + unit - 1) / unit
            })
            .max()
            .unwrap_or(0)
    }
}

/// Decode both blocks and sum the products in index order.
pub fn dot_reference(a: &Hif4Block, b: &Hif4Block) -> f64 {
    let (da, db) = (a.decode(), b.decode());
    da.iter().zip(&db).fold(0.0, |s, (x, y)| s + x * y)
}

/// HiF4 fixed-point flow: absorb level-3 micro-exponents into the elements
/// (S2P2), multiply, shift by the level-2 pair, reduce to one S12P4 value,
/// then one scale x scale and one wide multiply.
pub fn dot_hif4_fixed(a: &Hif4Block, b: &Hif4Block) -> Result<(f64, DotTrace)> {
    if a.e6m2.is_nan() || b.e6m2.is_nan() {
        return Err(Error::Domain("fixed-point dot needs finite scales".into()));
    }
    let absorb = |blk: &Hif4Block| -> Result<Vec<i64>> {
        (0..GROUP_SIZE)
            .map(|i| {
                let q = (blk.elems[i].quarters() as i64) << blk.micro16(i / 4);
                FixedPointValue::new(q, FixedFormat::S2P2).map(|v| v.q)
            })
            .collect()
    };
    let operands_a = absorb(a)?;
    let operands_b = absorb(b)?;

    let products: Vec<i64> = operands_a
        .iter()
        .zip(&operands_b)
        .map(|(x, y)| FixedPointValue::new(x * y, FixedFormat::S4P4).map(|v| v.q))
        .collect::<Result<_>>()?;
    let shifts: Vec<u32> = (0..GROUP_SIZE)
        .map(|i| a.micro8(i / 8) + b.micro8(i / 8))
        .collect();
    let shifted: Vec<i64> = products
        .iter()
        .zip(&shifts)
        .map(|(&p, &s)| FixedPointValue::new(p << s, FixedFormat::S6P4).map(|v| v.q))
        .collect::<Result<_>>()?;
    let partial_sums: Vec<i64> = shifted.chunks_exact(8).map(|c| c.iter().sum()).collect();
    let acc = FixedPointValue::new(partial_sums.iter().sum(), FixedFormat::S12P4)?;
    if acc.q.abs() > 3136 * 16 {
        return Err(Error::Invariant(format!(
            "HiF4 accumulator {} exceeds 3136",
            acc.to_f64()
        )));
    }

    let scale = a.e6m2.decode() * b.e6m2.decode();
    let scaled = acc.to_f64() * scale;
    let trace = DotTrace {
        format: DotFormat::Hif4,
        operands_a,
        operands_b,
        products,
        product_frac_bits: 4,
        shifts,
        scale_group_len: GROUP_SIZE,
        partial_sums,
        accumulators: vec![acc],
        scale_products: vec![scale],
        scaled_partials: vec![scaled],
        result: scaled,
        multipliers: MultiplierInventory {
            scale_multipliers: 1,
            wide_multipliers: 1,
        },
    };
    Ok((scaled, trace))
}

/// Binary64 reference for four NVFP4 group pairs: each group's decoded
/// products summed in index order, then the four group sums in order.
pub fn dot_nvfp4_reference(a: &[Nvfp4Group], b: &[Nvfp4Group]) -> Result<f64> {
    check_nvfp4_groups(a, b)?;
    Ok(a.iter().zip(b).fold(0.0, |total, (ga, gb)| {
        let (da, db) = (ga.decode(), gb.decode());
        total + da.iter().zip(&db).fold(0.0, |s, (x, y)| s + x * y)
    }))
}

fn check_nvfp4_groups(a: &[Nvfp4Group], b: &[Nvfp4Group]) -> Result<()> {
    if a.len() != 4 || b.len() != 4 {
        return Err(Error::Usage(format!(
            "NVFP4 64-length dot takes 4 + 4 groups, got {} + {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// NVFP4 fixed-point flow: E2M1 elements as S3P1 integers, four integer
/// reductions to S10P2, four scale x scale and four wide multiplies, then a
/// binary64 sum over the groups in order.
pub fn dot_nvfp4_fixed(a: &[Nvfp4Group], b: &[Nvfp4Group]) -> Result<(f64, DotTrace)> {
    check_nvfp4_groups(a, b)?;
    if a.iter().chain(b).any(|g| g.scale.is_nan()) {
        return Err(Error::Domain("fixed-point dot needs finite scales".into()));
    }
    let operands = |gs: &[Nvfp4Group]| -> Result<Vec<i64>> {
        gs.iter()
            .flat_map(|g| g.elems.iter())
            .map(|e| FixedPointValue::new(e.signed_halves() as i64, FixedFormat::S3P1).map(|v| v.q))
            .collect()
    };
    let operands_a = operands(a)?;
    let operands_b = operands(b)?;
    let products: Vec<i64> = operands_a
        .iter()
        .zip(&operands_b)
        .map(|(x, y)| x * y)
        .collect();

    let mut partial_sums = Vec::with_capacity(4);
    let mut accumulators = Vec::with_capacity(4);
    let mut scale_products = Vec::with_capacity(4);
    let mut scaled_partials = Vec::with_capacity(4);
    let mut result = 0.0;
    for (g, chunk) in products.chunks_exact(NVFP4_GROUP_SIZE).enumerate() {
        let sum: i64 = chunk.iter().sum();
        let acc = FixedPointValue::new(sum, FixedFormat::S10P2)?;
        if acc.q.abs() > 576 * 4 {
            return Err(Error::Invariant(format!(
                "NVFP4 partial {} exceeds 576",
                acc.to_f64()
            )));
        }
        let scale = a[g].scale.decode() * b[g].scale.decode();
        let scaled = acc.to_f64() * scale;
        result += scaled;
        partial_sums.push(sum);
        accumulators.push(acc);
        scale_products.push(scale);
        scaled_partials.push(scaled);
    }
    let trace = DotTrace {
        format: DotFormat::Nvfp4,
        operands_a,
        operands_b,
        products,
        product_frac_bits: 2,
        shifts: vec![0; 4 * NVFP4_GROUP_SIZE],
        scale_group_len: NVFP4_GROUP_SIZE,
        partial_sums,
        accumulators,
        scale_products,
        scaled_partials,
        result,
        multipliers: MultiplierInventory {
            scale_multipliers: 4,
            wide_multipliers: 4,
        },
    };
    Ok((result, trace))
}

/// Outcome of a randomized fixed-point vs reference comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DotCheckSummary {
    pub format: DotFormat,
    /// Random operand pairs; the all-max pair is checked on top of these.
    pub trials: u64,
    pub max_abs_diff: f64,
    /// Largest accumulator magnitude seen, integer units.
    pub width_max: i64,
    pub violations: u64,
}

impl DotCheckSummary {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.max_abs_diff == 0.0
    }

    pub fn summary_line(&self) -> String {
        format!(
            "trials={} max_abs_diff={} width_max={}",
            self.trials, self.max_abs_diff, self.width_max
        )
    }
}

fn random_hif4(rng: &CounterRng) -> Hif4Block {
    let mut bytes = [0u8; crate::block::PACKED_BYTES];
    for (i, chunk) in bytes.chunks_mut(8).enumerate() {
        let w = rng.u64_at(i as u64).to_le_bytes();
        chunk.copy_from_slice(&w[..chunk.len()]);
    }
    // finite scales only; NaN is the reference path's business
    if bytes[0] == 0xff {
        bytes[0] = 0xfe;
    }
    Hif4Block::unpack(&bytes).expect("36 bytes")
}

fn random_nvfp4(rng: &CounterRng) -> [Nvfp4Group; 4] {
    std::array::from_fn(|g| {
        let w = rng.u64_at(g as u64);
        let scale = E4M3::from_bits((rng.u64_at(4 + g as u64) % 0x7f) as u8);
        Nvfp4Group {
            scale,
            elems: std::array::from_fn(|i| E2M1::from_bits((w >> (4 * i)) as u8)),
        }
    })
}

fn all_max_hif4() -> Hif4Block {
    Hif4Block {
        e6m2: crate::scalar::E6M2::MAX,
        e1_8: 0xff,
        e1_16: 0xffff,
        elems: [crate::scalar::S1P2::from_bits(0b0111); GROUP_SIZE],
    }
}

fn all_max_nvfp4() -> [Nvfp4Group; 4] {
    [Nvfp4Group {
        scale: E4M3::MAX,
        elems: [E2M1::MAX; NVFP4_GROUP_SIZE],
    }; 4]
}

/// Compare fixed-point and reference dot products on `trials` random operand
/// pairs drawn from `seed`, plus the adversarial all-max pair.
pub fn run_dot_check(format: DotFormat, trials: u64, seed: u64) -> DotCheckSummary {
    let root = CounterRng::new(seed);
    let one = |t: Option<u64>| -> (f64, i64, bool) {
        let outcome = match format {
            DotFormat::Hif4 => {
                let (a, b) = match t {
                    Some(t) => (
                        random_hif4(&root.split(2 * t)),
                        random_hif4(&root.split(2 * t + 1)),
                    ),
                    None => (all_max_hif4(), all_max_hif4()),
                };
                dot_hif4_fixed(&a, &b).map(|(r, tr)| (r, dot_reference(&a, &b), tr))
            }
            DotFormat::Nvfp4 => {
                let (a, b) = match t {
                    Some(t) => (
                        random_nvfp4(&root.split(2 * t)),
                        random_nvfp4(&root.split(2 * t + 1)),
                    ),
                    None => (all_max_nvfp4(), all_max_nvfp4()),
                };
                dot_nvfp4_fixed(&a, &b)
                    .and_then(|(r, tr)| Ok((r, dot_nvfp4_reference(&a, &b)?, tr)))
            }
        };
        match outcome {
            Ok((fixed, reference, trace)) => {
                let diff = (fixed - reference).abs();
                let ok = fixed.to_bits() == reference.to_bits()
                    && trace.replay().to_bits() == fixed.to_bits();
                (diff, trace.width_witness(), ok)
            }
            Err(_) => (f64::INFINITY, i64::MAX, false),
        }
    };
    let results: Vec<(f64, i64, bool)> = std::iter::once(None)
        .chain((0..trials).map(Some))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(one)
        .collect();
    let bound = match format {
        DotFormat::Hif4 => 3136,
        DotFormat::Nvfp4 => 576,
    };
    let width_max = results.iter().map(|r| r.1).max().unwrap_or(0);
    DotCheckSummary {
        format,
        trials,
        max_abs_diff: results.iter().map(|r| r.0).fold(0.0, f64::max),
        width_max,
        violations: results.iter().filter(|r| !r.2 || r.1 > bound).count() as u64,
    }
}
