use chunkfft::data_io::{decode_samples, encode_samples, load_fasta, FastaOptions};
use chunkfft::pipeline::relative_l2;
use chunkfft::{
    bit_reverse_permute, chunked_convolve, chunked_convolve_with_stats, direct_convolve,
    fft_forward, fft_inverse, flop_count, footprint, max_chunk_size, plan_chunks,
    run_instrumented, Complex, ConvolutionConfig, MemoryBudget, Precision, RunOptions,
    TwiddleTable,
};
use proptest::prelude::*;

fn naive_dft(x: &[Complex<f64>]) -> Vec<Complex<f64>> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, v)| {
                    let angle = -2.0 * std::f64::consts::PI * ((k * t) % n) as f64 / n as f64;
                    v * Complex::new(angle.cos(), angle.sin())
                })
                .sum()
        })
        .collect()
}

fn complex_vec(log_n: std::ops::RangeInclusive<u32>) -> impl Strategy<Value = Vec<Complex<f64>>> {
    log_n.prop_flat_map(|b| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1usize << b)
            .prop_map(|v| v.into_iter().map(|(re, im)| Complex::new(re, im)).collect())
    })
}

fn signal(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 1..=max)
}

fn chunk() -> impl Strategy<Value = usize> {
    (1u32..=8).prop_map(|b| 1usize << b)
}

fn inf_norm(v: &[Complex<f64>]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bit_reversal_is_an_involution(v in (0u32..=12).prop_flat_map(|b| prop::collection::vec(any::<u32>(), 1usize << b))) {
        let mut w = v.clone();
        bit_reverse_permute(&mut w).unwrap();
        bit_reverse_permute(&mut w).unwrap();
        prop_assert_eq!(w, v);
    }

    #[test]
    fn fft_matches_naive_dft(x in complex_vec(1..=6)) {
        let tw = TwiddleTable::<f64>::new(x.len()).unwrap();
        let mut got = x.clone();
        fft_forward(&mut got, &tw).unwrap();
        let want = naive_dft(&x);
        let scale = inf_norm(&want).max(f64::MIN_POSITIVE);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).norm() / scale < 1e-12);
        }
    }

    #[test]
    fn fft_is_linear(x in complex_vec(1..=10), a in -3.0f64..3.0, b in -3.0f64..3.0, seed in any::<u64>()) {
        let n = x.len();
        let y: Vec<Complex<f64>> = (0..n)
            .map(|k| {
                let t = (seed.wrapping_mul(k as u64 + 1) >> 11) as f64 / (1u64 << 53) as f64;
                Complex::new(t - 0.5, 0.25 - t)
            })
            .collect();
        let tw = TwiddleTable::<f64>::new(n).unwrap();
        let mut combo: Vec<Complex<f64>> = x.iter().zip(&y).map(|(p, q)| p * a + q * b).collect();
        let (mut fx, mut fy) = (x.clone(), y.clone());
        fft_forward(&mut combo, &tw).unwrap();
        fft_forward(&mut fx, &tw).unwrap();
        fft_forward(&mut fy, &tw).unwrap();
        let expect: Vec<Complex<f64>> = fx.iter().zip(&fy).map(|(p, q)| p * a + q * b).collect();
        let scale = inf_norm(&expect).max(1.0);
        for (g, w) in combo.iter().zip(&expect) {
            prop_assert!((g - w).norm() / scale < 1e-12);
        }
    }

    #[test]
    fn fft_round_trip_and_parseval_single(x in complex_vec(1..=12)) {
        let n = x.len();
        let xs: Vec<Complex<f32>> = x.iter().map(|c| Complex::new(c.re as f32, c.im as f32)).collect();
        let tw = TwiddleTable::<f32>::new(n).unwrap();
        let mut spec = xs.clone();
        fft_forward(&mut spec, &tw).unwrap();
        let e_time: f64 = xs.iter().map(|c| (c.norm_sqr()) as f64).sum();
        let e_freq: f64 = spec.iter().map(|c| (c.re as f64).powi(2) + (c.im as f64).powi(2)).sum::<f64>() / n as f64;
        prop_assert!((e_time - e_freq).abs() / e_time.max(f64::MIN_POSITIVE) < 1e-5);
        fft_inverse(&mut spec, &tw).unwrap();
        let peak = xs.iter().map(|c| c.norm() as f64).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let err = spec.iter().zip(&xs).map(|(a, b)| (a - b).norm() as f64).fold(0.0, f64::max);
        prop_assert!(err / peak < 1e-5);
    }

    #[test]
    fn chunked_matches_direct(x in signal(600), h in signal(600), c in chunk()) {
        let reference = direct_convolve(&x, &h).unwrap();
        for precision in [Precision::Single, Precision::Double] {
            let cfg = ConvolutionConfig::new(c).with_precision(precision);
            let y = chunked_convolve(&x, &h, &cfg).unwrap();
            prop_assert_eq!(y.len(), x.len() + h.len() - 1);
            prop_assert!(relative_l2(&y, &reference) < precision.oracle_tolerance());
        }
    }

    #[test]
    fn chunk_size_does_not_change_the_result(x in signal(400), h in signal(400), c1 in chunk(), c2 in chunk()) {
        for precision in [Precision::Single, Precision::Double] {
            let a = chunked_convolve(&x, &h, &ConvolutionConfig::new(c1).with_precision(precision)).unwrap();
            let b = chunked_convolve(&x, &h, &ConvolutionConfig::new(c2).with_precision(precision)).unwrap();
            prop_assert!(relative_l2(&a, &b) < 2.0 * precision.oracle_tolerance());
        }
    }

    #[test]
    fn convolution_commutes(x in signal(300), h in signal(300), c in chunk()) {
        let cfg = ConvolutionConfig::new(c);
        let a = chunked_convolve(&x, &h, &cfg).unwrap();
        let b = chunked_convolve(&h, &x, &cfg).unwrap();
        prop_assert!(relative_l2(&a, &b) < 2e-5);
    }

    #[test]
    fn output_lengths(n_x in 1usize..300, n_h in 1usize..300, c in chunk()) {
        let x = vec![1.0; n_x];
        let h = vec![0.5; n_h];
        let full = chunked_convolve(&x, &h, &ConvolutionConfig::new(c)).unwrap();
        prop_assert_eq!(full.len(), n_x + n_h - 1);
        let causal = chunked_convolve(&x, &h, &ConvolutionConfig::new(c).causal(true)).unwrap();
        prop_assert_eq!(causal.len(), n_x);
        prop_assert_eq!(&full[..n_x], &causal[..]);
    }

    #[test]
    fn filter_cache_is_transparent(x in signal(500), h in signal(500), c in chunk()) {
        let plain = ConvolutionConfig::new(c);
        let (a, sa) = chunked_convolve_with_stats(&x, &h, &plain).unwrap();
        let (b, sb) = chunked_convolve_with_stats(&x, &h, &plain.clone().cache_filter_ffts(true)).unwrap();
        prop_assert!(relative_l2(&a, &b) < 1e-6);
        let plan = plan_chunks(x.len(), h.len(), &plain).unwrap();
        prop_assert_eq!(sa.pairs_executed, plan.pair_count as u64);
        prop_assert_eq!(sb.pairs_executed, plan.pair_count as u64);
        prop_assert_eq!(sa.forward_ffts, 2 * plan.pair_count as u64);
        prop_assert_eq!(sb.forward_ffts, (plan.pair_count + plan.m_h) as u64);
    }

    #[test]
    fn plan_invariants(n_x in 1usize..100_000, n_h in 1usize..100_000, c in (1u32..=13).prop_map(|b| 1usize << b)) {
        let p = plan_chunks(n_x, n_h, &ConvolutionConfig::new(c)).unwrap();
        prop_assert_eq!(p.m_x, n_x.div_ceil(c));
        prop_assert_eq!(p.m_h, n_h.div_ceil(c));
        prop_assert_eq!(p.fft_len, 2 * c);
        prop_assert!(p.fft_len.is_power_of_two());
        prop_assert_eq!(p.n_y, n_x + n_h - 1);
        prop_assert_eq!(p.pair_count, p.m_x * p.m_h);
        prop_assert!(p.accumulator_len() >= p.n_y);
        prop_assert!(p.pair_offset(p.m_x - 1, p.m_h - 1) + p.pair_output_len() <= p.accumulator_len());
    }

    #[test]
    fn footprint_doubles_with_chunk(b in 1u32..=20) {
        for precision in [Precision::Single, Precision::Double] {
            let c = 1usize << b;
            let small = footprint(c, precision).unwrap();
            let big = footprint(2 * c, precision).unwrap();
            prop_assert_eq!(big.total_bytes, 2 * small.total_bytes);
        }
    }

    #[test]
    fn max_chunk_is_tight(capacity in 80u64..50_000_000) {
        let budget = MemoryBudget::new(capacity).unwrap();
        let lim = max_chunk_size(&budget, Precision::Single, None).unwrap();
        prop_assert!(footprint(lim.unclamped, Precision::Single).unwrap().total_bytes <= capacity);
        prop_assert!(footprint(2 * lim.unclamped, Precision::Single).unwrap().total_bytes > capacity);
    }

    #[test]
    fn cfft_round_trip_is_bit_exact(bits in prop::collection::vec(any::<u64>(), 0..200), single in prop::collection::vec(any::<u32>(), 0..200)) {
        let doubles: Vec<f64> = bits.iter().map(|&b| f64::from_bits(b)).collect();
        let back = decode_samples(&encode_samples(&doubles, Precision::Double)).unwrap();
        prop_assert_eq!(
            back.samples.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            bits
        );
        // Stay off NaN: widening a signalling NaN to f64 may quiet it.
        let singles: Vec<f64> = single.iter().map(|&b| f32::from_bits(b)).filter(|v| !v.is_nan()).map(f64::from).collect();
        let back = decode_samples(&encode_samples(&singles, Precision::Single)).unwrap();
        prop_assert_eq!(
            back.samples.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            singles.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn fasta_parsing_is_total_on_iupac(lines in prop::collection::vec("[ACGTURYSWKMBDHVNacgtn-]{1,70}", 1..20)) {
        let mut text = String::from(">seq description\n");
        for l in &lines {
            text.push_str(l);
            text.push('\n');
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.fa");
        std::fs::write(&path, text).unwrap();
        let s = load_fasta(&path, &FastaOptions::default()).unwrap();
        prop_assert_eq!(s.samples.len(), lines.iter().map(|l| l.len()).sum::<usize>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn instrumentation_is_transparent(x in signal(2000), h in signal(2000), c in chunk(), cached in any::<bool>()) {
        let cfg = ConvolutionConfig::new(c).cache_filter_ffts(cached);
        let plain = chunked_convolve(&x, &h, &cfg).unwrap();
        let (timed, report) = run_instrumented(&x, &h, &cfg, &RunOptions::default()).unwrap();
        prop_assert_eq!(&plain, &timed);

        let t = report.timings;
        prop_assert!(t.compute_s >= 0.0 && t.staging_s >= 0.0 && t.host_s >= 0.0);
        prop_assert!(t.attributed_s() <= t.total_s);
        prop_assert_eq!(report.flops, flop_count(&report.plan, cached));
        let implied = report.mflops * t.total_s * 1e6;
        prop_assert!((implied - report.flops as f64).abs() <= 1e-9 * report.flops as f64);
    }
}
