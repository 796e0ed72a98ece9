//! Licensed-transmitter signal generation, channel realizations and per-SU
//! received observations under the occupied/free hypotheses.
//!
//! Signals are sparse in the discrete Fourier basis: exactly `k` frequency
//! bins carry unit-magnitude, random-phase coefficients and the time-domain
//! samples are the inverse DFT of that spectrum. Received power is then
//! controlled solely through the SNR of the channel realization.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::dft;
use crate::error::{Error, Result};

/// Identifier of a secondary user within a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SuId(pub u32);

/// Ground truth of one sensing trial: transmitter absent (H0) or present (H1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    Absent,
    Present,
}

/// Channel model between the licensed transmitter and one SU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingKind {
    /// Unit gain, additive noise only.
    AwgnOnly,
    /// Complex Gaussian gain normalized so that E[|h|^2] = 1; the squared
    /// magnitude is then unit-mean exponential and `snr_db` is the average
    /// received SNR.
    Rayleigh,
}

/// A transmitter signal that is sparse in the frequency domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpectrumSignal {
    n_samples: usize,
    support: Vec<usize>,
    coefficients: Vec<Complex64>,
    time_samples: Vec<Complex64>,
    nominal_power: f64,
}

impl SparseSpectrumSignal {
    /// Builds a signal from explicit (bin, coefficient) pairs.
    pub fn from_support(n_samples: usize, entries: &[(usize, Complex64)]) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::invalid("signal length must be at least 1"));
        }
        let mut entries: Vec<(usize, Complex64)> = entries.to_vec();
        entries.sort_by_key(|(bin, _)| *bin);
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::invalid(format!(
                    "duplicate frequency bin {} in support",
                    pair[0].0
                )));
            }
        }
        if let Some((bin, _)) = entries.iter().find(|(bin, _)| *bin >= n_samples) {
            return Err(Error::invalid(format!(
                "frequency bin {bin} out of range for N={n_samples}"
            )));
        }
        let support: Vec<usize> = entries.iter().map(|(bin, _)| *bin).collect();
        let coefficients: Vec<Complex64> = entries.iter().map(|(_, c)| *c).collect();
        let mut spectrum = vec![Complex64::ZERO; n_samples];
        for (&bin, &coeff) in support.iter().zip(coefficients.iter()) {
            spectrum[bin] = coeff;
        }
        let time_samples = dft::inverse(&spectrum);
        let nominal_power = mean_power(&time_samples);
        Ok(Self {
            n_samples,
            support,
            coefficients,
            time_samples,
            nominal_power,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Occupied frequency bins, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Complex amplitudes aligned with `support()`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn time_samples(&self) -> &[Complex64] {
        &self.time_samples
    }

    /// Mean squared magnitude of the time samples.
    pub fn nominal_power(&self) -> f64 {
        self.nominal_power
    }

    /// Full-length frequency vector, zero off the support.
    pub fn frequency_vector(&self) -> Vec<Complex64> {
        let mut spectrum = vec![Complex64::ZERO; self.n_samples];
        for (&bin, &coeff) in self.support.iter().zip(self.coefficients.iter()) {
            spectrum[bin] = coeff;
        }
        spectrum
    }
}

/// Mean squared magnitude of a sample vector; 0 for an empty slice.
pub fn mean_power(samples: &[Complex64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}

/// Generates a `sparsity_k`-sparse transmitter signal.
///
/// The support is drawn uniformly without replacement and each occupied bin
/// carries a unit-magnitude coefficient with uniform random phase. Output is
/// a pure function of the arguments.
pub fn generate_pu_signal(
    n_samples: usize,
    sparsity_k: usize,
    seed: u64,
) -> Result<SparseSpectrumSignal> {
    if n_samples == 0 {
        return Err(Error::invalid("signal length must be at least 1"));
    }
    if sparsity_k > n_samples {
        return Err(Error::invalid(format!(
            "sparsity {sparsity_k} exceeds signal length {n_samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut support: Vec<usize> =
        rand::seq::index::sample(&mut rng, n_samples, sparsity_k).into_vec();
    support.sort_unstable();
    let entries: Vec<(usize, Complex64)> = support
        .into_iter()
        .map(|bin| {
            let phase = rng.random::<f64>() * TAU;
            (bin, Complex64::from_polar(1.0, phase))
        })
        .collect();
    SparseSpectrumSignal::from_support(n_samples, &entries)
}

/// One realization of the sensing channel for a single SU.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    pub gain: Complex64,
    pub fading: FadingKind,
    pub snr_db: f64,
    /// Noise variance per complex sample, derived so that
    /// `E[|h s|^2] / noise_variance` equals the linear SNR.
    pub noise_variance: f64,
}

/// Draws a channel realization targeting `snr_db` for a signal of the given
/// mean power. Callers sensing a zero signal pass a reference power instead.
pub fn draw_channel(
    snr_db: f64,
    fading: FadingKind,
    signal_power: f64,
    rng: &mut impl Rng,
) -> Result<ChannelRealization> {
    if !snr_db.is_finite() {
        return Err(Error::invalid("snr_db must be finite"));
    }
    if signal_power <= 0.0 || !signal_power.is_finite() {
        return Err(Error::invalid(format!(
            "signal power must be positive and finite, got {signal_power}"
        )));
    }
    let noise_variance = signal_power / 10f64.powf(snr_db / 10.0);
    let gain = match fading {
        FadingKind::AwgnOnly => Complex64::new(1.0, 0.0),
        FadingKind::Rayleigh => {
            // Circularly symmetric CN(0, 1): |h|^2 ~ Exp with unit mean.
            let comp = Normal::new(0.0, (0.5f64).sqrt()).expect("valid normal");
            Complex64::new(comp.sample(rng), comp.sample(rng))
        }
    };
    Ok(ChannelRealization {
        gain,
        fading,
        snr_db,
        noise_variance,
    })
}

/// The received sample vector of one SU together with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SuObservation {
    pub su_id: SuId,
    pub samples: Vec<Complex64>,
    pub hypothesis: Hypothesis,
    pub channel: ChannelRealization,
    /// Mean squared magnitude of `samples`.
    pub measured_power: f64,
}

/// Forms the received vector of one SU: gain-scaled signal plus circularly
/// symmetric complex Gaussian noise when occupied, noise only when free.
pub fn observe(
    signal: &SparseSpectrumSignal,
    channel: &ChannelRealization,
    hypothesis: Hypothesis,
    su_id: SuId,
    rng: &mut impl Rng,
) -> SuObservation {
    let n = signal.n_samples();
    let comp_sigma = (channel.noise_variance / 2.0).sqrt();
    let noise = Normal::new(0.0, comp_sigma).expect("valid normal");
    let samples: Vec<Complex64> = match hypothesis {
        Hypothesis::Present => signal
            .time_samples()
            .iter()
            .map(|&s| channel.gain * s + Complex64::new(noise.sample(rng), noise.sample(rng)))
            .collect(),
        Hypothesis::Absent => (0..n)
            .map(|_| Complex64::new(noise.sample(rng), noise.sample(rng)))
            .collect(),
    };
    let measured_power = mean_power(&samples);
    SuObservation {
        su_id,
        samples,
        hypothesis,
        channel: *channel,
        measured_power,
    }
}

/// Mean squared magnitude of the observation's samples.
pub fn signal_power(obs: &SuObservation) -> Result<f64> {
    if obs.samples.is_empty() {
        return Err(Error::invalid("cannot compute power of an empty observation"));
    }
    Ok(mean_power(&obs.samples))
}

impl ChannelRealization {
    /// Noiseless unit channel; handy for tests.
    pub fn noiseless_unit(snr_db: f64) -> Self {
        ChannelRealization {
            gain: Complex64::new(1.0, 0.0),
            fading: FadingKind::AwgnOnly,
            snr_db,
            noise_variance: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft;

    #[test]
    fn zero_sparsity_gives_zero_signal() {
        let sig = generate_pu_signal(64, 0, 1).unwrap();
        assert_eq!(sig.support().len(), 0);
        assert_eq!(sig.nominal_power(), 0.0);
        assert!(sig.time_samples().iter().all(|s| s.norm() == 0.0));
    }

    #[test]
    fn sparsity_is_exact() {
        let sig = generate_pu_signal(64, 4, 7).unwrap();
        assert_eq!(sig.support().len(), 4);
        let spectrum = dft::forward(sig.time_samples());
        let on: Vec<usize> = (0..64).filter(|i| spectrum[*i].norm() > 1e-9).collect();
        assert_eq!(on, sig.support());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_pu_signal(64, 4, 7).unwrap();
        let b = generate_pu_signal(64, 4, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn oversparse_request_is_rejected() {
        assert!(matches!(
            generate_pu_signal(8, 9, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn round_trip_sparsity_off_support_is_tiny() {
        let sig = generate_pu_signal(128, 9, 3).unwrap();
        let spectrum = dft::forward(sig.time_samples());
        for (i, v) in spectrum.iter().enumerate() {
            if !sig.support().contains(&i) {
                assert!(v.norm() < 1e-9, "bin {i} leaked {}", v.norm());
            }
        }
    }

    #[test]
    fn channel_zero_db_awgn() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ch = draw_channel(0.0, FadingKind::AwgnOnly, 1.0, &mut rng).unwrap();
        assert_eq!(ch.gain, Complex64::new(1.0, 0.0));
        assert!((ch.noise_variance - 1.0).abs() < 1e-15);
    }

    #[test]
    fn channel_ten_db_awgn() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ch = draw_channel(10.0, FadingKind::AwgnOnly, 1.0, &mut rng).unwrap();
        assert!((ch.noise_variance - 0.1).abs() < 1e-15);
    }

    #[test]
    fn channel_rejects_non_finite_snr() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(draw_channel(f64::NAN, FadingKind::AwgnOnly, 1.0, &mut rng).is_err());
        assert!(draw_channel(f64::INFINITY, FadingKind::Rayleigh, 1.0, &mut rng).is_err());
    }

    #[test]
    fn rayleigh_gain_power_has_unit_mean() {
        // Monte Carlo mean oracle: E[|h|^2] = 1.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 100_000;
        let mean: f64 = (0..trials)
            .map(|_| {
                draw_channel(5.0, FadingKind::Rayleigh, 1.0, &mut rng)
                    .unwrap()
                    .gain
                    .norm_sqr()
            })
            .sum::<f64>()
            / trials as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean |h|^2 = {mean}");
    }

    #[test]
    fn noiseless_observation_equals_signal() {
        let sig = generate_pu_signal(32, 3, 5).unwrap();
        let ch = ChannelRealization::noiseless_unit(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let obs = observe(&sig, &ch, Hypothesis::Present, SuId(0), &mut rng);
        for (a, b) in obs.samples.iter().zip(sig.time_samples()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn h0_power_matches_noise_variance() {
        // Chi-square mean oracle: mean |noise|^2 over N = 10^4 samples is
        // sigma^2 with relative sd sqrt(1/N) = 1%.
        let sig = generate_pu_signal(10_000, 0, 5).unwrap();
        let ch = ChannelRealization {
            gain: Complex64::new(1.0, 0.0),
            fading: FadingKind::AwgnOnly,
            snr_db: 0.0,
            noise_variance: 1.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let obs = observe(&sig, &ch, Hypothesis::Absent, SuId(0), &mut rng);
        assert!((obs.measured_power - 1.0).abs() < 0.05, "{}", obs.measured_power);
    }

    #[test]
    fn h1_power_is_signal_plus_noise() {
        // Power-additivity oracle at 0 dB: measured ~ 2x the signal power.
        let n = 10_000;
        let entries = [(37usize, Complex64::new(n as f64, 0.0))]; // unit-power tone
        let sig = SparseSpectrumSignal::from_support(n, &entries).unwrap();
        assert!((sig.nominal_power() - 1.0).abs() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ch = draw_channel(0.0, FadingKind::AwgnOnly, sig.nominal_power(), &mut rng).unwrap();
        let obs = observe(&sig, &ch, Hypothesis::Present, SuId(0), &mut rng);
        assert!((obs.measured_power - 2.0).abs() < 0.1, "{}", obs.measured_power);
    }

    #[test]
    fn signal_power_examples() {
        let mk = |samples: Vec<Complex64>| SuObservation {
            su_id: SuId(0),
            hypothesis: Hypothesis::Absent,
            channel: ChannelRealization::noiseless_unit(0.0),
            measured_power: mean_power(&samples),
            samples,
        };
        let zero = mk(vec![Complex64::ZERO; 8]);
        assert_eq!(signal_power(&zero).unwrap(), 0.0);
        let ones = mk(vec![Complex64::new(1.0, 0.0); 4]);
        assert_eq!(signal_power(&ones).unwrap(), 1.0);
        let v = mk(vec![Complex64::new(3.0, 0.0), Complex64::new(4.0, 0.0)]);
        assert_eq!(signal_power(&v).unwrap(), 12.5);
        let empty = mk(vec![]);
        assert!(signal_power(&empty).is_err());
    }

    #[test]
    fn awgn_snr_calibration_within_three_percent() {
        // Empirical E[|h s|^2]/sigma^2 against the linear SNR over >= 10^4
        // trials (AWGN gain is deterministic, so the ratio is driven by the
        // sample noise power estimate).
        let n = 10_000;
        let sig = generate_pu_signal(n, 500, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for snr_db in [-10.0, 0.0, 10.0] {
            let ch = draw_channel(snr_db, FadingKind::AwgnOnly, sig.nominal_power(), &mut rng)
                .unwrap();
            let obs = observe(&sig, &ch, Hypothesis::Absent, SuId(0), &mut rng);
            let empirical = sig.nominal_power() / obs.measured_power;
            let target = 10f64.powf(snr_db / 10.0);
            assert!(
                (empirical / target - 1.0).abs() < 0.03,
                "snr {snr_db}: empirical {empirical} vs {target}"
            );
        }
    }

    #[test]
    fn h0_samples_uncorrelated_with_signal() {
        let n = 4096;
        let sig = generate_pu_signal(n, 200, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ch = draw_channel(0.0, FadingKind::AwgnOnly, sig.nominal_power(), &mut rng).unwrap();
        let obs = observe(&sig, &ch, Hypothesis::Absent, SuId(0), &mut rng);
        let sig_power = sig.nominal_power();
        let noise_power = mean_power(&obs.samples);
        let corr: Complex64 = obs
            .samples
            .iter()
            .zip(sig.time_samples())
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            / n as f64;
        let normalized = corr.norm() / (sig_power * noise_power).sqrt();
        assert!(normalized < 3.0 / (n as f64).sqrt(), "correlation {normalized}");
    }
}
