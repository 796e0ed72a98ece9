//! Sparse spectrum recovery from compressed measurements and the local
//! threshold test on the recovered power spectral density.
//!
//! Recovery is an orthogonal greedy pursuit over the Fourier-composed
//! dictionary `D = A F^{-1}`: each iteration selects the frequency bin whose
//! dictionary column has maximum normalized correlation with the residual,
//! then re-solves least squares on the accumulated support. Correlations are
//! computed as `DFT(A^T r) / N`, so one iteration costs O(MN + N log N).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::acquisition::{acquire, Measurements, SensingMatrix};
use crate::dft;
use crate::error::{Error, Result};
use crate::seeding;
use crate::signal::SuId;

/// Stopping rule for the greedy pursuit: support size cap plus a residual
/// floor relative to the measurement norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_sparsity: usize,
    /// Stop once `||residual|| <= relative_residual_tol * ||r||`.
    pub relative_residual_tol: f64,
}

impl StopRule {
    pub fn with_max_sparsity(max_sparsity: usize) -> Self {
        StopRule {
            max_sparsity,
            relative_residual_tol: 1e-6,
        }
    }
}

/// Estimate of the sparse frequency representation behind one measurement
/// vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredSpectrum {
    coefficients: Vec<Complex64>,
    support: Vec<usize>,
    residual_norm: f64,
    iterations: usize,
    residual_history: Vec<f64>,
}

impl RecoveredSpectrum {
    /// Full-length coefficient vector; zero off the recovered support.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Recovered bins in selection order.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// `||residual||` after each completed iteration.
    pub fn residual_history(&self) -> &[f64] {
        &self.residual_history
    }
}

/// Incremental Cholesky factor of the support Gram matrix, packed row-major.
struct SupportSolver {
    /// Lower-triangular rows: row k holds k+1 entries.
    factor: Vec<Complex64>,
    size: usize,
}

impl SupportSolver {
    fn new() -> Self {
        SupportSolver { factor: Vec::new(), size: 0 }
    }

    /// Extends the factor with one atom whose Gram column against the current
    /// support is `gram_col` and squared norm is `gram_diag`. Returns false
    /// when the new atom is (numerically) linearly dependent.
    fn push(&mut self, gram_col: &[Complex64], gram_diag: f64) -> bool {
        debug_assert_eq!(gram_col.len(), self.size);
        let mut w = vec![Complex64::ZERO; self.size];
        for i in 0..self.size {
            let mut acc = gram_col[i];
            let row = self.row(i);
            for j in 0..i {
                acc -= row[j] * w[j].conj();
            }
            w[i] = (acc / row[i].re).conj();
        }
        let diag_sq = gram_diag - w.iter().map(|v| v.norm_sqr()).sum::<f64>();
        if diag_sq <= gram_diag * 1e-12 {
            return false;
        }
        // w already holds the conjugated forward-substitution solution, which
        // is exactly the new row of the lower-triangular factor.
        self.factor.extend_from_slice(&w);
        self.factor.push(Complex64::new(diag_sq.sqrt(), 0.0));
        self.size += 1;
        true
    }

    fn row(&self, i: usize) -> &[Complex64] {
        let start = i * (i + 1) / 2;
        &self.factor[start..start + i + 1]
    }

    /// Solves `L L^H x = b`.
    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let k = self.size;
        let mut y = vec![Complex64::ZERO; k];
        for i in 0..k {
            let row = self.row(i);
            let mut acc = b[i];
            for j in 0..i {
                acc -= row[j] * y[j];
            }
            y[i] = acc / row[i].re;
        }
        let mut x = vec![Complex64::ZERO; k];
        for i in (0..k).rev() {
            let mut acc = y[i];
            for (j, xj) in x.iter().enumerate().skip(i + 1) {
                acc -= self.row(j)[i].conj() * xj;
            }
            x[i] = acc / self.row(i)[i].re;
        }
        x
    }
}

/// Recovers the sparse frequency coefficients behind `meas` by orthogonal
/// greedy pursuit. Non-convergence is not an error; the final residual is
/// reported in the result.
pub fn recover_sparse(
    meas: &Measurements,
    matrix: &SensingMatrix,
    stop: &StopRule,
) -> Result<RecoveredSpectrum> {
    let (m, n) = (matrix.rows(), matrix.cols());
    if meas.values.len() != m {
        return Err(Error::invalid(format!(
            "measurement length {} does not match matrix rows {m}",
            meas.values.len()
        )));
    }
    if meas.matrix_ref != matrix.id() {
        return Err(Error::invalid(
            "measurements were acquired with a different sensing matrix",
        ));
    }
    if stop.max_sparsity > m {
        return Err(Error::invalid(format!(
            "stopping sparsity {} exceeds measurement count {m}",
            stop.max_sparsity
        )));
    }
    if stop.relative_residual_tol < 0.0 || stop.relative_residual_tol.is_nan() {
        return Err(Error::invalid("residual tolerance must be >= 0"));
    }

    let norm0 = meas.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let mut out = RecoveredSpectrum {
        coefficients: vec![Complex64::ZERO; n],
        support: Vec::new(),
        residual_norm: norm0,
        iterations: 0,
        residual_history: Vec::new(),
    };
    if norm0 == 0.0 || stop.max_sparsity == 0 {
        out.residual_norm = norm0;
        return Ok(out);
    }
    let tol_abs = stop.relative_residual_tol * norm0;

    let dict = matrix.fourier_dictionary();
    let norms = matrix.fourier_column_norms();
    let column = |j: usize, i: usize| dict[i * n + j];

    let mut selected = vec![false; n];
    let mut solver = SupportSolver::new();
    // D_S^H r against the original measurements, per selected atom.
    let mut rhs: Vec<Complex64> = Vec::new();
    let mut solution: Vec<Complex64> = Vec::new();
    let mut residual = meas.values.clone();
    let mut residual_norm = norm0;

    while out.support.len() < stop.max_sparsity && residual_norm > tol_abs {
        // Normalized correlation of every dictionary column with the residual.
        let mut corr = matrix.apply_transpose(&residual);
        dft::forward_in_place(&mut corr);
        let scale = 1.0 / n as f64;
        let mut best = 0usize;
        let mut best_metric = 0.0f64;
        for (j, c) in corr.iter().enumerate() {
            if selected[j] || norms[j] <= f64::EPSILON {
                continue;
            }
            let metric = c.norm() * scale / norms[j];
            if metric > best_metric {
                best_metric = metric;
                best = j;
            }
        }
        if best_metric <= norm0 * 1e-14 {
            break; // nothing correlates with what is left
        }

        let k = out.support.len();
        let mut gram_col = vec![Complex64::ZERO; k];
        let mut rhs_new = Complex64::ZERO;
        for i in 0..m {
            let d_new = column(best, i);
            rhs_new += d_new.conj() * meas.values[i];
            for (g, &s) in gram_col.iter_mut().zip(out.support.iter()) {
                *g += column(s, i).conj() * d_new;
            }
        }
        if !solver.push(&gram_col, norms[best] * norms[best]) {
            break; // new atom is linearly dependent on the support
        }
        selected[best] = true;
        out.support.push(best);
        rhs.push(rhs_new);

        solution = solver.solve(&rhs);

        // Materialize the least-squares residual; the next correlation pass
        // needs it and its exact norm avoids the cancellation a
        // ||y||^2 - Re(b^H x) recurrence suffers near zero.
        residual.copy_from_slice(&meas.values);
        for (&s, x) in out.support.iter().zip(solution.iter()) {
            for (i, r) in residual.iter_mut().enumerate() {
                *r -= column(s, i) * x;
            }
        }
        residual_norm = residual.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        out.residual_history.push(residual_norm);
        out.iterations += 1;
    }

    for (&s, &x) in out.support.iter().zip(solution.iter()) {
        out.coefficients[s] = x;
    }
    out.residual_norm = residual_norm;
    Ok(out)
}

/// Power spectral density estimate with the scalar detection statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    bins: Vec<f64>,
    statistic: f64,
}

impl PsdEstimate {
    fn from_bins(bins: Vec<f64>) -> Self {
        let statistic = bins.iter().cloned().fold(0.0, f64::max);
        PsdEstimate { bins, statistic }
    }

    /// PSD of an already-recovered frequency-domain coefficient vector;
    /// same normalization as `estimate_psd` so statistics are comparable.
    pub fn from_sparse_spectrum(coefficients: &[Complex64]) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::invalid("cannot form a PSD from an empty spectrum"));
        }
        let n = coefficients.len() as f64;
        Ok(Self::from_bins(
            coefficients.iter().map(|c| c.norm_sqr() / n).collect(),
        ))
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    /// Maximum bin; the scalar compared against the detection threshold.
    pub fn statistic(&self) -> f64 {
        self.statistic
    }
}

/// Periodogram of a time-domain sample vector: `|DFT(x)|^2 / N`.
pub fn estimate_psd(samples: &[Complex64]) -> Result<PsdEstimate> {
    if samples.is_empty() {
        return Err(Error::invalid("cannot form a PSD from an empty input"));
    }
    let n = samples.len() as f64;
    let spectrum = dft::forward(samples);
    Ok(PsdEstimate::from_bins(
        spectrum.iter().map(|c| c.norm_sqr() / n).collect(),
    ))
}

/// How a detection threshold came to be.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThresholdProvenance {
    Manual,
    Calibrated {
        target_pfa: f64,
        n_trials: usize,
        seed: u64,
    },
}

/// Scalar decision threshold for the PSD statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionThreshold {
    pub value: f64,
    pub calibration: ThresholdProvenance,
}

impl DetectionThreshold {
    pub fn manual(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::invalid("threshold must be finite and >= 0"));
        }
        Ok(DetectionThreshold {
            value,
            calibration: ThresholdProvenance::Manual,
        })
    }
}

/// Channel occupancy verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Occupied,
    Free,
}

/// One SU's local verdict together with the statistic that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalDecision {
    pub su_id: SuId,
    pub value: Decision,
    pub statistic: f64,
}

/// Threshold test on the PSD statistic; the boundary is occupied.
pub fn detect(su_id: SuId, psd: &PsdEstimate, threshold: &DetectionThreshold) -> LocalDecision {
    let statistic = psd.statistic();
    let value = if statistic >= threshold.value {
        Decision::Occupied
    } else {
        Decision::Free
    };
    LocalDecision { su_id, value, statistic }
}

/// Everything the noise-only calibration pipeline needs besides the matrix.
#[derive(Debug, Clone, Copy)]
pub struct CalibrationConfig {
    pub target_pfa: f64,
    /// Noise variance per complex sample of the H0 observations.
    pub noise_variance: f64,
    pub compression_noise_variance: f64,
    pub stop: StopRule,
    /// When set, measurements are the raw noise samples (the no-compression
    /// baseline); the matrix is still consulted for recovery.
    pub skip_acquire: bool,
    pub n_trials: usize,
    pub seed: u64,
}

/// Runs one noise-only pipeline and returns its detection statistic.
pub fn h0_statistic(
    matrix: &SensingMatrix,
    noise_variance: f64,
    compression_noise_variance: f64,
    stop: &StopRule,
    skip_acquire: bool,
    rng: &mut impl Rng,
) -> Result<f64> {
    let n = matrix.cols();
    let comp = Normal::new(0.0, (noise_variance / 2.0).sqrt())
        .map_err(|_| Error::invalid("noise variance must be finite and >= 0"))?;
    let samples: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(comp.sample(rng), comp.sample(rng)))
        .collect();
    let meas = if skip_acquire {
        Measurements::from_values(SuId(0), samples, matrix.id(), 0.0)?
    } else {
        let obs = crate::signal::SuObservation {
            su_id: SuId(0),
            measured_power: crate::signal::mean_power(&samples),
            samples,
            hypothesis: crate::signal::Hypothesis::Absent,
            channel: crate::signal::ChannelRealization::noiseless_unit(0.0),
        };
        acquire(matrix, &obs, compression_noise_variance, rng)?
    };
    let recovered = recover_sparse(&meas, matrix, stop)?;
    let psd = PsdEstimate::from_sparse_spectrum(recovered.coefficients())?;
    Ok(psd.statistic())
}

/// Quantile rule over a finished set of calibration statistics: the smallest
/// statistic `t` such that the fraction of statistics `>= t` is at most the
/// target false-alarm rate.
pub fn threshold_from_statistics(
    statistics: &[f64],
    target_pfa: f64,
    n_trials: usize,
    seed: u64,
) -> Result<DetectionThreshold> {
    if statistics.is_empty() {
        return Err(Error::invalid("no calibration statistics"));
    }
    if !(target_pfa > 0.0 && target_pfa < 1.0) {
        return Err(Error::invalid("target_pfa must lie strictly between 0 and 1"));
    }
    let mut sorted = statistics.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite statistics"));
    let n = sorted.len() as f64;
    if sorted.first() == sorted.last() {
        return Err(Error::DegenerateCalibration(format!(
            "all {} calibration statistics equal {}",
            sorted.len(),
            sorted[0]
        )));
    }
    // Walk distinct values ascending; count(>= v) shrinks as v grows.
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let at_or_above = sorted.len() - i;
        if at_or_above as f64 / n <= target_pfa {
            return Ok(DetectionThreshold {
                value: v,
                calibration: ThresholdProvenance::Calibrated {
                    target_pfa,
                    n_trials,
                    seed,
                },
            });
        }
        // skip duplicates of v
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        i = j;
    }
    Err(Error::DegenerateCalibration(format!(
        "too much mass at the maximum statistic {} to meet target {}",
        sorted.last().unwrap(),
        target_pfa
    )))
}

/// Calibrates the detection threshold by running `n_trials` noise-only
/// pipelines and applying the quantile rule. Deterministic per seed.
pub fn calibrate_threshold(
    cfg: &CalibrationConfig,
    matrix: &SensingMatrix,
) -> Result<DetectionThreshold> {
    if !(cfg.target_pfa > 0.0 && cfg.target_pfa < 1.0) {
        return Err(Error::invalid("target_pfa must lie strictly between 0 and 1"));
    }
    if cfg.n_trials < 100 {
        return Err(Error::invalid("calibration needs at least 100 trials"));
    }
    use rayon::prelude::*;
    let statistics: Vec<f64> = (0..cfg.n_trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seeding::trial_rng(cfg.seed, trial, 0);
            h0_statistic(
                matrix,
                cfg.noise_variance,
                cfg.compression_noise_variance,
                &cfg.stop,
                cfg.skip_acquire,
                &mut rng,
            )
        })
        .collect::<Result<Vec<f64>>>()?;
    threshold_from_statistics(&statistics, cfg.target_pfa, cfg.n_trials, cfg.seed)
}
