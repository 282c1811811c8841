//! Quantization-error sweep over Gaussian matrices of growing sigma.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::rng::CounterRng;
use crate::tensor::{quantize_dequantize, Pipeline, TensorBuffer};
use crate::{Error, Result};

/// Base standard deviation; row `x` of a sweep uses `SIGMA_BASE * 2^x`.
pub const SIGMA_BASE: f64 = 0.01;

/// Range of `x` over which the stable-region mean ratios are taken.
pub const STABLE_X: (i32, i32) = (4, 12);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianSpec {
    pub rows: usize,
    pub cols: usize,
    pub sigma: f64,
    pub seed: u64,
}

impl GaussianSpec {
    pub fn sweep_sigma(x: i32) -> f64 {
        SIGMA_BASE * 2f64.powi(x)
    }
}

/// `rows x cols` samples of N(0, sigma^2), rounded to binary32. Element `i`
/// is normal number `i` of the seed's stream, so the result does not depend
/// on how the work is split.
pub fn gen_gaussian(spec: &GaussianSpec) -> Result<TensorBuffer> {
    gen_gaussian_stream(spec, CounterRng::new(spec.seed))
}

fn gen_gaussian_stream(spec: &GaussianSpec, rng: CounterRng) -> Result<TensorBuffer> {
    if spec.rows == 0 || spec.cols == 0 {
        return Err(Error::Usage("Gaussian matrix needs positive dims".into()));
    }
    if !(spec.sigma > 0.0 && spec.sigma.is_finite()) {
        return Err(Error::Usage(format!(
            "sigma must be positive, got {}",
            spec.sigma
        )));
    }
    let n = spec.rows * spec.cols;
    let data: Vec<f32> = (0..n.div_ceil(2))
        .into_par_iter()
        .flat_map_iter(|k| {
            let (z0, z1) = rng.normal_pair(k as u64);
            [(z0 * spec.sigma) as f32, (z1 * spec.sigma) as f32]
        })
        .collect();
    let mut data = data;
    data.truncate(n);
    TensorBuffer::from_f32(vec![spec.rows, spec.cols], data)
}

/// Mean squared error. Each row (last axis) is summed left to right in
/// `f64`, then the row sums are added in row order.
pub fn mse(original: &TensorBuffer, reconstructed: &TensorBuffer) -> Result<f64> {
    if original.dims() != reconstructed.dims() {
        return Err(Error::Usage(format!(
            "shape mismatch: {:?} vs {:?}",
            original.dims(),
            reconstructed.dims()
        )));
    }
    let cols = original.row_len();
    let row_sums: Vec<f64> = original
        .data()
        .par_chunks(cols)
        .zip(reconstructed.data().par_chunks(cols))
        .map(|(o, r)| {
            o.iter().zip(r).fold(0.0, |s, (&a, &b)| {
                let d = a as f64 - b as f64;
                s + d * d
            })
        })
        .collect();
    let total = row_sums.iter().fold(0.0, |s, &r| s + r);
    Ok(total / original.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub x: i32,
    pub sigma: f64,
    pub mse_hif4: f64,
    pub mse_nvfp4: f64,
    pub mse_nvfp4_pts: f64,
    pub mse_mxfp4: f64,
}

impl SweepRow {
    pub fn ratio_hif4(&self) -> f64 {
        1.0
    }

    pub fn ratio_nvfp4(&self) -> f64 {
        self.mse_nvfp4 / self.mse_hif4
    }

    pub fn ratio_nvfp4_pts(&self) -> f64 {
        self.mse_nvfp4_pts / self.mse_hif4
    }

    pub fn ratio_mxfp4(&self) -> f64 {
        self.mse_mxfp4 / self.mse_hif4
    }
}

/// Mean HiF4-normalized ratios over a range of rows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanRatios {
    pub nvfp4: f64,
    pub nvfp4_pts: f64,
    pub mxfp4: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub seed: u64,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<SweepRow>,
}

impl SweepReport {
    /// Means over the rows with `lo <= x <= hi`; `None` if there are none.
    pub fn mean_ratios(&self, lo: i32, hi: i32) -> Option<MeanRatios> {
        let sel: Vec<&SweepRow> = self
            .entries
            .iter()
            .filter(|r| (lo..=hi).contains(&r.x))
            .collect();
        if sel.is_empty() {
            return None;
        }
        let n = sel.len() as f64;
        let mean = |f: fn(&SweepRow) -> f64| sel.iter().map(|r| f(r)).sum::<f64>() / n;
        Some(MeanRatios {
            nvfp4: mean(SweepRow::ratio_nvfp4),
            nvfp4_pts: mean(SweepRow::ratio_nvfp4_pts),
            mxfp4: mean(SweepRow::ratio_mxfp4),
        })
    }

    /// CSV with a seed comment line, one row per `x` (17 significant digits)
    /// and `#` footer lines with the stable-region means.
    pub fn to_csv(&self) -> String {
        let g = |v: f64| format!("{v:.16e}");
        let mut out = String::new();
        writeln!(
            out,
            "# seed={} rows={} cols={}",
            self.seed, self.rows, self.cols
        )
        .unwrap();
        out.push_str(
            "x,sigma,mse_hif4,mse_nvfp4,mse_nvfp4_pts,mse_mxfp4,ratio_nvfp4,ratio_nvfp4_pts,ratio_mxfp4\n",
        );
        for r in &self.entries {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.x,
                g(r.sigma),
                g(r.mse_hif4),
                g(r.mse_nvfp4),
                g(r.mse_nvfp4_pts),
                g(r.mse_mxfp4),
                g(r.ratio_nvfp4()),
                g(r.ratio_nvfp4_pts()),
                g(r.ratio_mxfp4()),
            )
            .unwrap();
        }
        if let Some(m) = self.mean_ratios(STABLE_X.0, STABLE_X.1) {
            writeln!(out, "# stable_x={}..{}", STABLE_X.0, STABLE_X.1).unwrap();
            writeln!(out, "# mean_ratio_nvfp4={}", g(m.nvfp4)).unwrap();
            writeln!(out, "# mean_ratio_nvfp4_pts={}", g(m.nvfp4_pts)).unwrap();
            writeln!(out, "# mean_ratio_mxfp4={}", g(m.mxfp4)).unwrap();
        }
        out
    }
}

/// One sweep row: quantize-dequantize the same matrix through all four
/// pipelines.
pub fn evaluate(t: &TensorBuffer, x: i32, sigma: f64) -> Result<SweepRow> {
    let err = |p| mse(t, &quantize_dequantize(t, p)?);
    Ok(SweepRow {
        x,
        sigma,
        mse_hif4: err(Pipeline::Hif4)?,
        mse_nvfp4: err(Pipeline::Nvfp4Direct)?,
        mse_nvfp4_pts: err(Pipeline::Nvfp4Pts)?,
        mse_mxfp4: err(Pipeline::Mxfp4)?,
    })
}

/// For each `x` in `x_lo..=x_hi`, draw a `rows x cols` matrix with sigma
/// `0.01 * 2^x` from stream `x` of `seed` and evaluate every pipeline on it.
pub fn run_sweep(seed: u64, x_lo: i32, x_hi: i32, rows: usize, cols: usize) -> Result<SweepReport> {
    if x_lo > x_hi {
        return Err(Error::Usage(format!("empty x range {x_lo}..{x_hi}")));
    }
    let root = CounterRng::new(seed);
    let entries = (x_lo..=x_hi)
        .map(|x| {
            let sigma = GaussianSpec::sweep_sigma(x);
            let spec = GaussianSpec {
                rows,
                cols,
                sigma,
                seed,
            };
            let t = gen_gaussian_stream(&spec, root.split(x as u64))?;
            evaluate(&t, x, sigma)
        })
        .collect::<Result<_>>()?;
    Ok(SweepReport {
        seed,
        rows,
        cols,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_examples() {
        let a = TensorBuffer::from_f32(vec![2], vec![1.0, 1.0]).unwrap();
        let b = TensorBuffer::from_f32(vec![2], vec![0.0, 2.0]).unwrap();
        assert_eq!(mse(&a, &b).unwrap(), 1.0);
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        let a = TensorBuffer::from_f32(vec![2], vec![3.0, 4.0]).unwrap();
        let z = TensorBuffer::from_f32(vec![2], vec![0.0, 0.0]).unwrap();
        assert_eq!(mse(&a, &z).unwrap(), 12.5);
        let c = TensorBuffer::from_f32(vec![1, 2], vec![0.0, 0.0]).unwrap();
        assert!(matches!(mse(&a, &c), Err(Error::Usage(_))));
    }

    #[test]
    fn gaussian_is_deterministic() {
        let spec = GaussianSpec {
            rows: 3,
            cols: 7,
            sigma: 2.0,
            seed: 9,
        };
        let a = gen_gaussian(&spec).unwrap();
        assert_eq!(a, gen_gaussian(&spec).unwrap());
        assert_eq!(a.dims(), &[3, 7]);
        let other = gen_gaussian(&GaussianSpec { seed: 10, ..spec }).unwrap();
        assert_ne!(a, other);
        assert!(gen_gaussian(&GaussianSpec { rows: 0, ..spec }).is_err());
        assert!(gen_gaussian(&GaussianSpec { sigma: 0.0, ..spec }).is_err());
    }

    #[test]
    fn csv_layout() {
        let r = run_sweep(1, 4, 5, 8, 64).unwrap();
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# seed=1 rows=8 cols=64");
        assert!(lines[1].starts_with("x,sigma,mse_hif4"));
        assert!(lines[2].starts_with("4,1.6"), "{}", lines[2]);
        assert!(lines.iter().any(|l| l.starts_with("# mean_ratio_mxfp4=")));
        assert!(run_sweep(1, 5, 4, 8, 64).is_err());
    }
}
