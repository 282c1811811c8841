use hif4::baseline::{pts_prescale, Mxfp4Group, Nvfp4Group};
use hif4::bench::{gen_gaussian, mse, GaussianSpec};
use hif4::block::{peak_reduce, Hif4Block};
use hif4::dot::{dot_hif4_fixed, dot_nvfp4_fixed, dot_nvfp4_reference, dot_reference};
use hif4::scalar::{ScalarFormat, E6M2};
use hif4::tensor::{quantize_dequantize, Pipeline, QuantizedTensor};
use hif4::{Bf16, TensorBuffer, E2M1, E4M3, E8M0, S1P2};
use proptest::prelude::*;
use rayon::prelude::*;

fn finite_f32() -> impl Strategy<Value = f32> {
    prop_oneof![
        Just(0.0f32),
        (-1.0e6f32..1.0e6f32),
        (-1.0f32..1.0f32),
        (-30i32..30, -1.0f32..1.0f32).prop_map(|(e, m)| m * 2f32.powi(e)),
    ]
}

fn block64() -> impl Strategy<Value = Vec<f32>> {
    // a common magnitude for the whole vector keeps the micro-exponents busy
    (prop::collection::vec(-1.0f32..1.0, 64), -40i32..14).prop_map(|(v, e)| {
        let s = 2f32.powi(e);
        v.into_iter().map(|x| x * 7.0 * s).collect()
    })
}

fn raw_block() -> impl Strategy<Value = Hif4Block> {
    prop::collection::vec(any::<u8>(), 36).prop_map(|mut b| {
        if b[0] == 0xff {
            b[0] = 0xfe;
        }
        Hif4Block::unpack(&b).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn e6m2_encode_monotone(a in 1e-20f64..1e6, b in 1e-20f64..1e6) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(E6M2::encode(lo).unwrap().decode() <= E6M2::encode(hi).unwrap().decode());
    }

    #[test]
    fn small_codecs_monotone(a in -10.0f64..10.0, b in -10.0f64..10.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(S1P2::encode(lo).unwrap().decode() <= S1P2::encode(hi).unwrap().decode());
        prop_assert!(E2M1::encode(lo).unwrap().decode() <= E2M1::encode(hi).unwrap().decode());
        prop_assert!(E4M3::encode(lo * 60.0).decode() <= E4M3::encode(hi * 60.0).decode());
    }

    #[test]
    fn scalar_encoders_pick_nearest(x in 0.0f64..8.0, y in 1e-14f64..5e4) {
        let check = |fmt: ScalarFormat, x: f64, got: f64| {
            let best = fmt
                .decode_table()
                .into_iter()
                .filter(|(_, v)| v.is_finite())
                .map(|(_, v)| (v - x).abs())
                .fold(f64::INFINITY, f64::min);
            (got - x).abs() == best
        };
        prop_assert!(check(ScalarFormat::S1P2, x.min(1.75), S1P2::encode(x.min(1.75)).unwrap().decode()));
        prop_assert!(check(ScalarFormat::E2M1, x, E2M1::encode(x).unwrap().decode()));
        prop_assert!(check(ScalarFormat::E4M3, x * 50.0, E4M3::encode(x * 50.0).decode()));
        prop_assert!(check(ScalarFormat::E6M2, y, E6M2::encode(y).unwrap().decode()));
        prop_assert!(check(ScalarFormat::E8M0, y, E8M0::encode(y).unwrap().decode()));
    }

    #[test]
    fn bf16_nearest(x in any::<f32>().prop_filter("finite", |x| x.is_finite() && x.abs() < 3e38)) {
        let r = Bf16::round_from_f32(x).to_f64();
        let x = x as f64;
        // neighbours of r on the bf16 grid are no closer
        let bits = Bf16::round_from_f32(x as f32).to_bits();
        for n in [bits.wrapping_sub(1), bits.wrapping_add(1)] {
            let v = Bf16::from_bits(n).to_f64();
            if v.is_finite() && v.signum() == r.signum() {
                prop_assert!((r - x).abs() <= (v - x).abs());
            }
        }
    }

    #[test]
    fn hif4_range_and_sign(v in block64()) {
        let b = Hif4Block::encode(&v).unwrap();
        let bound = 7.0 * b.e6m2.decode();
        for (d, &x) in b.decode().iter().zip(&v) {
            prop_assert!(d.abs() <= bound);
            prop_assert!(*d == 0.0 || d.signum() == (x as f64).signum());
        }
    }

    #[test]
    fn hif4_micro_exponent_soundness(v in block64()) {
        let (b, trace) = Hif4Block::encode_traced(&v).unwrap();
        let Some(trace) = trace else { return Ok(()) };
        let rec = trace.recip.to_f64();
        for k in 0..16 {
            let local = trace.peaks.v16[k] * rec / 2f64.powi(b.micro8(k / 2) as i32);
            prop_assert_eq!(b.micro16(k) == 1, local >= 2.0);
        }
        prop_assert!(trace.scaled.0.iter().all(|s| s.abs() < 3.75));
    }

    #[test]
    fn hif4_peak_tree(v in block64()) {
        let arr: [f32; 64] = v.clone().try_into().unwrap();
        let t = peak_reduce(&arr).unwrap();
        for j in 0..8 {
            prop_assert_eq!(t.v8[j], t.v16[2 * j].max(t.v16[2 * j + 1]));
        }
        prop_assert_eq!(t.vmax, t.v8.iter().copied().fold(0.0, f64::max));
    }

    #[test]
    fn hif4_pack_round_trip(b in raw_block()) {
        prop_assert_eq!(Hif4Block::unpack(&b.pack()).unwrap(), b);
    }

    #[test]
    fn hif4_dot_fixed_equals_reference(a in raw_block(), b in raw_block()) {
        let (r, t) = dot_hif4_fixed(&a, &b).unwrap();
        prop_assert_eq!(r.to_bits(), dot_reference(&a, &b).to_bits());
        prop_assert_eq!(t.replay().to_bits(), r.to_bits());
        prop_assert!(t.width_witness() <= 3136);
    }

    #[test]
    fn nvfp4_dot_fixed_equals_reference(bytes in prop::collection::vec(any::<u8>(), 72)) {
        let group = |c: &[u8]| {
            let mut c = c.to_vec();
            c[0] &= 0x7e;
            Nvfp4Group::unpack(&c).unwrap()
        };
        let a: Vec<_> = bytes[..36].chunks(9).map(group).collect();
        let b: Vec<_> = bytes[36..].chunks(9).map(group).collect();
        let (r, t) = dot_nvfp4_fixed(&a, &b).unwrap();
        prop_assert_eq!(r.to_bits(), dot_nvfp4_reference(&a, &b).unwrap().to_bits());
        prop_assert_eq!(t.replay().to_bits(), r.to_bits());
        prop_assert!(t.width_witness() <= 576);
    }

    #[test]
    fn nvfp4_peak_normalization(v in prop::collection::vec(-100.0f32..100.0, 16)) {
        let g = Nvfp4Group::encode(&v).unwrap();
        let s = g.scale.decode();
        prop_assert!(s > 0.0 && s <= 448.0);
        prop_assert!(g.decode().iter().all(|d| (d / s).abs() <= 6.0));
    }

    #[test]
    fn mxfp4_scale_is_shared_power_of_two(v in prop::collection::vec(finite_f32(), 32)) {
        let g = Mxfp4Group::encode(&v).unwrap();
        let s = g.scale.decode();
        prop_assert_eq!(s, 2f64.powi(g.scale.exponent()));
        for (d, e) in g.decode().iter().zip(&g.elems) {
            prop_assert_eq!(*d, e.decode() * s);
        }
    }
}

#[test]
fn exact_peak_family() {
    for e in -45..=14 {
        for sign in [1.0f32, -1.0] {
            let mut v = [0.0f32; 64];
            v[0] = sign * 7.0 * 2f32.powi(e);
            let d = Hif4Block::encode(&v).unwrap().decode();
            assert_eq!(d[0], v[0] as f64, "e = {e}");
            assert!(d[1..].iter().all(|&x| x == 0.0));
        }
    }
}

#[test]
fn parallel_encoding_matches_sequential() {
    let t = gen_gaussian(&GaussianSpec {
        rows: 64,
        cols: 256,
        sigma: 3.0,
        seed: 11,
    })
    .unwrap();
    let seq: Vec<Hif4Block> = t
        .data()
        .chunks(64)
        .map(|c| Hif4Block::encode(c).unwrap())
        .collect();
    let par: Vec<Hif4Block> = t
        .data()
        .par_chunks(64)
        .map(|c| Hif4Block::encode(c).unwrap())
        .collect();
    assert_eq!(seq, par);
    let q = QuantizedTensor::quantize(&t, Pipeline::Hif4).unwrap();
    assert_eq!(q.payload(), &hif4::tensor::Payload::Hif4(seq));
}

#[test]
fn gaussian_moments() {
    let sigma = 0.37;
    let t = gen_gaussian(&GaussianSpec {
        rows: 1024,
        cols: 1024,
        sigma,
        seed: 42,
    })
    .unwrap();
    let n = t.len() as f64;
    let mean = t.data().iter().map(|&x| x as f64).sum::<f64>() / n;
    let var = t
        .data()
        .iter()
        .map(|&x| (x as f64 - mean).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    // 5 standard errors of the mean; chi-square spread of s is ~0.07% here
    assert!(mean.abs() < 5.0 * sigma / 1024.0, "mean {mean}");
    assert!(
        (var.sqrt() / sigma - 1.0).abs() < 0.01,
        "std {}",
        var.sqrt()
    );
}

#[test]
fn hif4_mse_scale_equivariance() {
    let t = gen_gaussian(&GaussianSpec {
        rows: 32,
        cols: 512,
        sigma: 1.0,
        seed: 3,
    })
    .unwrap();
    let base = mse(&t, &quantize_dequantize(&t, Pipeline::Hif4).unwrap()).unwrap();
    for k in -30..=10 {
        let f = 2f32.powi(k);
        let s = t.map(|x| x * f);
        let m = mse(&s, &quantize_dequantize(&s, Pipeline::Hif4).unwrap()).unwrap();
        assert_eq!(m, base * 4f64.powi(k), "k = {k}");
    }
}

#[test]
fn pts_round_trip_is_one_division() {
    let t = gen_gaussian(&GaussianSpec {
        rows: 16,
        cols: 128,
        sigma: 25.0,
        seed: 5,
    })
    .unwrap();
    let (scaled, pts) = pts_prescale(&t);
    let direct = quantize_dequantize(&scaled, Pipeline::Nvfp4Direct).unwrap();
    let via_pts = quantize_dequantize(&t, Pipeline::Nvfp4Pts).unwrap();
    for (a, b) in direct.data().iter().zip(via_pts.data()) {
        assert_eq!((a / pts.factor).to_bits(), b.to_bits());
    }
}

#[test]
fn hif4_beats_mxfp4_on_gaussians() {
    for (seed, sigma) in [(1u64, 0.05), (2, 1.0), (3, 200.0)] {
        let t = gen_gaussian(&GaussianSpec {
            rows: 64,
            cols: 1024,
            sigma,
            seed,
        })
        .unwrap();
        let h = mse(&t, &quantize_dequantize(&t, Pipeline::Hif4).unwrap()).unwrap();
        let m = mse(&t, &quantize_dequantize(&t, Pipeline::Mxfp4).unwrap()).unwrap();
        assert!(h < m, "sigma {sigma}: {h} vs {m}");
    }
}

#[test]
fn seven_vector_reconstructs_exactly() {
    let mut data = vec![0.0f32; 64];
    data[0] = 7.0;
    let t = TensorBuffer::from_f32(vec![64], data).unwrap();
    assert_eq!(quantize_dequantize(&t, Pipeline::Hif4).unwrap(), t);
}

#[test]
fn tensor_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let t = gen_gaussian(&GaussianSpec {
        rows: 5,
        cols: 33,
        sigma: 1.0,
        seed: 8,
    })
    .unwrap();
    let p = dir.path().join("t.bfpt");
    t.write(&p).unwrap();
    assert_eq!(TensorBuffer::read(&p).unwrap(), t);

    for pipeline in Pipeline::ALL {
        let q = QuantizedTensor::quantize(&t, pipeline).unwrap();
        let p = dir.path().join(format!("{}.q", pipeline.name()));
        q.write(&p).unwrap();
        let back = QuantizedTensor::read(&p).unwrap();
        assert_eq!(back, q);
        assert_eq!(
            back.dequantize(),
            quantize_dequantize(&t, pipeline).unwrap()
        );
    }
}
