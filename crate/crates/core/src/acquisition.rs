//! Sensing matrices and compressed acquisition of SU observations.
//!
//! The converter front end is modeled as a linear projection: each of the M
//! outputs correlates the N input samples against one period of a ±1
//! pseudo-random chipping sequence, which makes the acquisition matrix a
//! dense Rademacher matrix. Gaussian, Toeplitz and circulant families are
//! provided for comparison, plus an identity kind so the uncompressed
//! baseline can run through the exact same pipeline.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::dft;
use crate::error::{Error, Result};
use crate::signal::{SuId, SuObservation};

/// Structural family of a sensing matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    /// Dense ±1 pseudo-random chipping matrix (the converter model).
    AicPm1,
    /// I.i.d. N(0, 1/M) entries.
    Gaussian,
    /// ±1 entries, constant along diagonals.
    ToeplitzPm1,
    /// ±1 entries, each row a one-step cyclic shift of the previous.
    CirculantPm1,
    /// Square identity; used for the no-compression baseline and in tests.
    Identity,
}

/// Identity of a sensing matrix; (kind, rows, cols, seed) pins the entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatrixId {
    pub kind: MatrixKind,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
}

/// A materialized M x N real sensing matrix.
///
/// The matrix also lazily caches its frequency-domain dictionary (the matrix
/// composed with the inverse-DFT synthesis operator) and the dictionary's
/// column norms; recovery shares both across concurrent trials.
#[derive(Debug)]
pub struct SensingMatrix {
    id: MatrixId,
    entries: Vec<f64>, // row-major
    dictionary: OnceLock<Vec<Complex64>>, // row-major rows x cols
    column_norms: OnceLock<Vec<f64>>,
}

impl SensingMatrix {
    pub fn id(&self) -> MatrixId {
        self.id
    }

    pub fn rows(&self) -> usize {
        self.id.rows
    }

    pub fn cols(&self) -> usize {
        self.id.cols
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.id.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let n = self.id.cols;
        &self.entries[row * n..(row + 1) * n]
    }

    /// `A x` for a complex input of length `cols`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let (m, n) = (self.id.rows, self.id.cols);
        debug_assert_eq!(x.len(), n);
        let mut out = vec![Complex64::ZERO; m];
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.row(i);
            let mut acc = Complex64::ZERO;
            for (a, v) in row.iter().zip(x.iter()) {
                acc += v * *a;
            }
            *o = acc;
        }
        out
    }

    /// `A^T y` for a complex input of length `rows`.
    pub fn apply_transpose(&self, y: &[Complex64]) -> Vec<Complex64> {
        let (m, n) = (self.id.rows, self.id.cols);
        debug_assert_eq!(y.len(), m);
        let mut out = vec![Complex64::ZERO; n];
        for (i, &yi) in y.iter().enumerate().take(m) {
            let row = self.row(i);
            for (o, a) in out.iter_mut().zip(row.iter()) {
                *o += yi * *a;
            }
        }
        out
    }

    /// The dictionary `D = A F^{-1}` whose column `j` is the response of the
    /// acquisition chain to a unit coefficient at frequency bin `j`.
    /// Row-major `rows x cols`; computed once per matrix.
    pub fn fourier_dictionary(&self) -> &[Complex64] {
        self.dictionary.get_or_init(|| {
            let (m, n) = (self.id.rows, self.id.cols);
            let mut dict = vec![Complex64::ZERO; m * n];
            let mut buf = vec![Complex64::ZERO; n];
            let scale = 1.0 / n as f64;
            for i in 0..m {
                for (b, &a) in buf.iter_mut().zip(self.row(i)) {
                    *b = Complex64::new(a, 0.0);
                }
                dft::forward_in_place(&mut buf);
                // d_j[i] = conj(DFT(row_i))[j] / N for real rows.
                for (d, &v) in dict[i * n..(i + 1) * n].iter_mut().zip(buf.iter()) {
                    *d = v.conj() * scale;
                }
            }
            dict
        })
    }

    /// Euclidean norms of the Fourier dictionary columns.
    pub fn fourier_column_norms(&self) -> &[f64] {
        self.column_norms.get_or_init(|| {
            let (m, n) = (self.id.rows, self.id.cols);
            let dict = self.fourier_dictionary();
            let mut norms = vec![0.0f64; n];
            for i in 0..m {
                for (norm, d) in norms.iter_mut().zip(&dict[i * n..(i + 1) * n]) {
                    *norm += d.norm_sqr();
                }
            }
            for v in norms.iter_mut() {
                *v = v.sqrt();
            }
            norms
        })
    }
}

fn pm1(rng: &mut impl Rng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Builds the sensing matrix for `kind`; entries are a pure function of
/// (kind, m, n, seed).
pub fn build_sensing_matrix(
    kind: MatrixKind,
    m: usize,
    n: usize,
    seed: u64,
) -> Result<SensingMatrix> {
    if m == 0 {
        return Err(Error::invalid("sensing matrix needs at least one row"));
    }
    if m > n {
        return Err(Error::invalid(format!(
            "compression never expands: m={m} exceeds n={n}"
        )));
    }
    if kind == MatrixKind::Identity && m != n {
        return Err(Error::invalid(format!(
            "identity sensing requires m == n, got {m}x{n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = match kind {
        MatrixKind::AicPm1 => (0..m * n).map(|_| pm1(&mut rng)).collect(),
        MatrixKind::Gaussian => {
            let dist = Normal::new(0.0, (1.0 / m as f64).sqrt()).expect("valid normal");
            (0..m * n).map(|_| dist.sample(&mut rng)).collect()
        }
        MatrixKind::ToeplitzPm1 => {
            let first_row: Vec<f64> = (0..n).map(|_| pm1(&mut rng)).collect();
            let mut first_col = vec![first_row[0]];
            first_col.extend((1..m).map(|_| pm1(&mut rng)));
            let mut entries = Vec::with_capacity(m * n);
            for i in 0..m {
                for j in 0..n {
                    entries.push(if j >= i {
                        first_row[j - i]
                    } else {
                        first_col[i - j]
                    });
                }
            }
            entries
        }
        MatrixKind::CirculantPm1 => {
            let first_row: Vec<f64> = (0..n).map(|_| pm1(&mut rng)).collect();
            let mut entries = Vec::with_capacity(m * n);
            for i in 0..m {
                for j in 0..n {
                    entries.push(first_row[(j + n - i % n) % n]);
                }
            }
            entries
        }
        MatrixKind::Identity => {
            let mut entries = vec![0.0; m * n];
            for i in 0..m {
                entries[i * n + i] = 1.0;
            }
            entries
        }
    };
    Ok(SensingMatrix {
        id: MatrixId { kind, rows: m, cols: n, seed },
        entries,
        dictionary: OnceLock::new(),
        column_norms: OnceLock::new(),
    })
}

/// Compressed measurements of one SU.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurements {
    pub su_id: SuId,
    pub values: Vec<Complex64>,
    pub matrix_ref: MatrixId,
    /// M/N of the sensing matrix that produced the values.
    pub compression_ratio: f64,
    pub compression_noise_variance: f64,
}

impl Measurements {
    /// Wraps an already-acquired vector; the caller vouches that `values`
    /// came from the referenced matrix. Used by the no-compression baseline,
    /// where the measurement vector is the raw sample stream itself.
    pub fn from_values(
        su_id: SuId,
        values: Vec<Complex64>,
        matrix_ref: MatrixId,
        compression_noise_variance: f64,
    ) -> Result<Self> {
        if values.len() != matrix_ref.rows {
            return Err(Error::invalid(format!(
                "measurement length {} does not match matrix rows {}",
                values.len(),
                matrix_ref.rows
            )));
        }
        let compression_ratio = compression_ratio_of(matrix_ref.rows, matrix_ref.cols)?;
        Ok(Measurements {
            su_id,
            values,
            matrix_ref,
            compression_ratio,
            compression_noise_variance,
        })
    }
}

/// `r = A y + e`; `e` is circularly symmetric complex Gaussian with the given
/// variance and is skipped entirely when the variance is zero.
pub fn acquire(
    matrix: &SensingMatrix,
    obs: &SuObservation,
    compression_noise_variance: f64,
    rng: &mut impl Rng,
) -> Result<Measurements> {
    if obs.samples.len() != matrix.cols() {
        return Err(Error::invalid(format!(
            "observation length {} does not match matrix cols {}",
            obs.samples.len(),
            matrix.cols()
        )));
    }
    if compression_noise_variance < 0.0 || !compression_noise_variance.is_finite() {
        return Err(Error::invalid("compression noise variance must be finite and >= 0"));
    }
    let mut values = matrix.apply(&obs.samples);
    if compression_noise_variance > 0.0 {
        let comp = Normal::new(0.0, (compression_noise_variance / 2.0).sqrt())
            .expect("valid normal");
        for v in values.iter_mut() {
            *v += Complex64::new(comp.sample(rng), comp.sample(rng));
        }
    }
    Measurements::from_values(obs.su_id, values, matrix.id(), compression_noise_variance)
}

/// M/N as a double-precision fraction.
pub fn compression_ratio_of(m: usize, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be nonzero"));
    }
    if m == 0 || m > n {
        return Err(Error::invalid(format!("need 1 <= m <= n, got m={m}, n={n}")));
    }
    Ok(m as f64 / n as f64)
}
