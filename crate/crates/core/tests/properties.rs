//! Randomized property checks over the simulation primitives.

use num_complex::Complex64;
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use specsense_core::*;

fn forward_dft(x: &[Complex64]) -> Vec<Complex64> {
    // Independent O(N^2) transform so the round-trip check does not reuse
    // the library's FFT.
    let n = x.len();
    (0..n)
        .map(|f| {
            let mut acc = Complex64::ZERO;
            for (t, v) in x.iter().enumerate() {
                let angle = -std::f64::consts::TAU * (f * t) as f64 / n as f64;
                acc += v * Complex64::from_polar(1.0, angle);
            }
            acc
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn generated_signals_are_exactly_k_sparse(
        n in 2usize..96,
        k_frac in 0.0f64..1.0,
        seed in 0u64..1_000_000,
    ) {
        let k = ((n as f64 * k_frac) as usize).min(n);
        let signal = generate_pu_signal(n, k, seed).unwrap();
        prop_assert_eq!(signal.support().len(), k);
        let spectrum = forward_dft(signal.time_samples());
        let scale = (k as f64).sqrt().max(1.0);
        for (bin, value) in spectrum.iter().enumerate() {
            if signal.support().contains(&bin) {
                prop_assert!((value.norm() - 1.0).abs() < 1e-9 * scale);
            } else {
                prop_assert!(value.norm() < 1e-9 * scale);
            }
        }
    }

    #[test]
    fn sensing_matrices_satisfy_their_structure(
        n in 2usize..=64,
        m_frac in 0.01f64..=1.0,
        seed in 0u64..1_000_000,
    ) {
        let m = ((n as f64 * m_frac).ceil() as usize).clamp(1, n);
        for kind in [MatrixKind::AicPm1, MatrixKind::ToeplitzPm1, MatrixKind::CirculantPm1] {
            let a = build_sensing_matrix(kind, m, n, seed).unwrap();
            let b = build_sensing_matrix(kind, m, n, seed).unwrap();
            for i in 0..m {
                prop_assert_eq!(a.row(i), b.row(i));
                for j in 0..n {
                    prop_assert!(a.entry(i, j) == 1.0 || a.entry(i, j) == -1.0);
                }
            }
            match kind {
                MatrixKind::ToeplitzPm1 => {
                    for i in 1..m {
                        for j in 1..n {
                            prop_assert_eq!(a.entry(i, j), a.entry(i - 1, j - 1));
                        }
                    }
                }
                MatrixKind::CirculantPm1 => {
                    for i in 1..m {
                        for j in 0..n {
                            prop_assert_eq!(a.entry(i, j), a.entry(i - 1, (j + n - 1) % n));
                        }
                    }
                }
                _ => {}
            }
        }
    }

    #[test]
    fn acquisition_is_linear_in_the_observation(
        n in 4usize..48,
        m_frac in 0.2f64..=1.0,
        seed in 0u64..100_000,
        alpha_re in -2.0f64..2.0,
        alpha_im in -2.0f64..2.0,
    ) {
        let m = ((n as f64 * m_frac).ceil() as usize).clamp(1, n);
        let matrix = build_sensing_matrix(MatrixKind::AicPm1, m, n, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
            use rand::Rng;
            (0..n)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect()
        };
        let y1 = draw(&mut rng);
        let y2 = draw(&mut rng);
        let alpha = Complex64::new(alpha_re, alpha_im);
        let combined: Vec<Complex64> =
            y1.iter().zip(&y2).map(|(a, b)| alpha * a + b).collect();
        let apply = |samples: &[Complex64]| matrix.apply(samples);
        let r1 = apply(&y1);
        let r2 = apply(&y2);
        let rc = apply(&combined);
        let scale: f64 = rc.iter().map(|v| v.norm()).fold(1.0, f64::max);
        for i in 0..m {
            let expected = alpha * r1[i] + r2[i];
            prop_assert!((rc[i] - expected).norm() <= 1e-9 * scale);
        }
    }

    #[test]
    fn psd_bins_are_nonnegative_and_conserve_energy(
        samples in prop::collection::vec(
            (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(re, im)| Complex64::new(re, im)),
            1..200,
        )
    ) {
        let psd = estimate_psd(&samples).unwrap();
        prop_assert_eq!(psd.bin_count(), samples.len());
        for bin in psd.bins() {
            prop_assert!(*bin >= 0.0);
        }
        let energy: f64 = samples.iter().map(|s| s.norm_sqr()).sum();
        let total: f64 = psd.bins().iter().sum();
        prop_assert!((total - energy).abs() <= 1e-9 * energy.max(1e-12));
        let max = psd.bins().iter().cloned().fold(0.0f64, f64::max);
        prop_assert_eq!(psd.statistic(), max);
    }

    #[test]
    fn detector_is_monotone_in_the_threshold(
        bins in prop::collection::vec(0.0f64..100.0, 1..32),
        gammas in prop::collection::vec(0.0f64..120.0, 2..8),
    ) {
        let psd = PsdEstimate::from_sparse_spectrum(
            &bins.iter().map(|b| Complex64::new(b.sqrt(), 0.0)).collect::<Vec<_>>(),
        )
        .unwrap();
        let mut sorted = gammas.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut previous = Decision::Occupied;
        for gamma in sorted {
            let decision = detect(SuId(0), &psd, &DetectionThreshold::manual(gamma).unwrap());
            if previous == Decision::Free {
                prop_assert_eq!(decision.value, Decision::Free);
            }
            previous = decision.value;
        }
    }

    #[test]
    fn coop_probabilities_are_monotone_in_both_arguments(
        p in 0.0f64..=1.0,
        q in 0.0f64..=1.0,
        l in 1u32..12,
    ) {
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        prop_assert!(coop_pd(lo, l).unwrap() <= coop_pd(hi, l).unwrap() + 1e-15);
        prop_assert!(coop_pd(p, l).unwrap() <= coop_pd(p, l + 1).unwrap() + 1e-15);
        prop_assert!(coop_pfa(lo, l).unwrap() <= coop_pfa(hi, l).unwrap() + 1e-15);
    }

    #[test]
    fn global_coop_prob_coincides_with_or_rule_on_equal_inputs(
        q in 0.0f64..=1.0,
        j in 1usize..10,
    ) {
        let per_cluster = vec![q; j];
        prop_assert_eq!(
            global_coop_prob(&per_cluster).unwrap(),
            coop_pd(q, j as u32).unwrap()
        );
    }

    #[test]
    fn recovery_residuals_never_increase(
        n in 8usize..48,
        seed in 0u64..100_000,
    ) {
        let m = n / 2 + 1;
        let matrix = build_sensing_matrix(MatrixKind::Gaussian, m, n, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x77);
        use rand::Rng;
        let values: Vec<Complex64> = (0..m)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let meas = Measurements::from_values(SuId(0), values, matrix.id(), 0.0).unwrap();
        let rec = recover_sparse(&meas, &matrix, &StopRule::with_max_sparsity(m / 2)).unwrap();
        let history = rec.residual_history();
        for w in history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9);
        }
        prop_assert!(rec.support().len() <= m / 2);
        for (bin, c) in rec.coefficients().iter().enumerate() {
            if !rec.support().contains(&bin) {
                prop_assert_eq!(c.norm(), 0.0);
            }
        }
    }

    #[test]
    fn rates_are_invariant_under_trial_reordering(
        outcomes in prop::collection::vec((any::<bool>(), any::<bool>()), 1..200)
    ) {
        let mut forward = TrialCounts::zero();
        for (h1, h0) in &outcomes {
            forward.record_h1(*h1);
            forward.record_h0(*h0);
        }
        let mut reversed = TrialCounts::zero();
        for (h1, h0) in outcomes.iter().rev() {
            reversed.record_h1(*h1);
            reversed.record_h0(*h0);
        }
        prop_assert_eq!(forward, reversed);
        prop_assert_eq!(
            empirical_rates(&forward).unwrap(),
            empirical_rates(&reversed).unwrap()
        );
    }
}
