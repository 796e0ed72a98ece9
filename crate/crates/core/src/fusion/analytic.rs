//! Closed-form cooperative detection probabilities and the max-SNR fading
//! density, plus the quadrature that couples them.

use crate::error::{Error, Result};

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::invalid(format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn one_minus_product_of_complements(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut product = 1.0;
    for v in values {
        product *= 1.0 - v;
    }
    1.0 - product
}

/// Cooperative detection probability of `l` SUs combined under the OR rule:
/// `1 - (1 - pd)^l`. A single SU passes its probability through unchanged.
pub fn coop_pd(pd: f64, l: u32) -> Result<f64> {
    check_probability("pd", pd)?;
    if l == 0 {
        return Err(Error::invalid("need at least one cooperating SU"));
    }
    if l == 1 {
        return Ok(pd);
    }
    Ok(one_minus_product_of_complements(std::iter::repeat_n(pd, l as usize)))
}

/// Cooperative false-alarm probability of `l` SUs under the OR rule.
pub fn coop_pfa(pfa: f64, l: u32) -> Result<f64> {
    check_probability("pfa", pfa)?;
    if l == 0 {
        return Err(Error::invalid("need at least one cooperating SU"));
    }
    if l == 1 {
        return Ok(pfa);
    }
    Ok(one_minus_product_of_complements(std::iter::repeat_n(pfa, l as usize)))
}

/// Density of the best SNR among `n_k` cluster members under Rayleigh fading
/// with average SNR `gamma_bar`:
/// `(n_k/γ̄) e^{-γ/γ̄} (1 - e^{-γ/γ̄})^{n_k - 1}`.
pub fn max_snr_pdf(gamma: f64, gamma_bar: f64, n_k: u32) -> Result<f64> {
    if gamma < 0.0 || !gamma.is_finite() {
        return Err(Error::invalid(format!("gamma must be >= 0, got {gamma}")));
    }
    if gamma_bar <= 0.0 || !gamma_bar.is_finite() {
        return Err(Error::invalid(format!("gamma_bar must be > 0, got {gamma_bar}")));
    }
    if n_k == 0 {
        return Err(Error::invalid("cluster must have at least one member"));
    }
    let u = gamma / gamma_bar;
    let tail = (-u).exp();
    Ok(n_k as f64 / gamma_bar * tail * (1.0 - tail).powi(n_k as i32 - 1))
}

/// Adaptive quadrature controls for the cluster-level integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    pub max_depth: u32,
    /// Truncation point of the semi-infinite integral; when unset it defaults
    /// to `gamma_bar * (20 + 5 ln n_k)`, far past where the density decays.
    pub upper_limit: Option<f64>,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            rel_tol: 1e-8,
            max_depth: 40,
            upper_limit: None,
        }
    }
}

/// Adaptive Simpson on [a, b]; `tol` is an absolute budget for the interval.
/// The recursion carries its endpoint evaluations to avoid re-sampling.
#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &impl Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let h = b - a;
    let left = h / 12.0 * (fa + 4.0 * flm + fm);
    let right = h / 12.0 * (fm + 4.0 * frm + fb);
    let refined = left + right;
    if (refined - whole).abs() <= 15.0 * tol {
        return Ok(refined + (refined - whole) / 15.0);
    }
    if depth == 0 {
        return Err(Error::NumericalFailure(format!(
            "quadrature did not converge on [{a}, {b}]"
        )));
    }
    let l = adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?;
    let r = adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?;
    Ok(l + r)
}

fn integrate(f: impl Fn(f64) -> Result<f64>, a: f64, b: f64, settings: &QuadratureSettings) -> Result<f64> {
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // Absolute budget derived from the first estimate; floored so that
    // integrals legitimately near zero still terminate.
    let tol = settings.rel_tol * whole.abs().max(1e-12);
    adaptive_simpson(&f, a, b, fa, fm, fb, whole, tol, settings.max_depth)
}

/// Cluster-level cooperative probability: the per-SU probability curve
/// integrated against the max-SNR density of the cluster.
///
/// The same form serves detection and false alarm; only the curve changes.
pub fn cluster_coop_prob(
    prob_curve: impl Fn(f64) -> f64,
    gamma_bar: f64,
    n_k: u32,
    quadrature: &QuadratureSettings,
) -> Result<f64> {
    if gamma_bar <= 0.0 || !gamma_bar.is_finite() {
        return Err(Error::invalid(format!("gamma_bar must be > 0, got {gamma_bar}")));
    }
    if n_k == 0 {
        return Err(Error::invalid("cluster must have at least one member"));
    }
    let upper = quadrature
        .upper_limit
        .unwrap_or_else(|| gamma_bar * (20.0 + 5.0 * (n_k as f64).ln()));
    if upper <= 0.0 || !upper.is_finite() {
        return Err(Error::invalid("quadrature upper limit must be positive"));
    }
    let integrand = |gamma: f64| -> Result<f64> {
        let p = prob_curve(gamma);
        if !(-1e-9..=1.0 + 1e-9).contains(&p) || !p.is_finite() {
            return Err(Error::invalid(format!(
                "probability curve left [0, 1]: p({gamma}) = {p}"
            )));
        }
        Ok(p * max_snr_pdf(gamma, gamma_bar, n_k)?)
    };
    let value = integrate(integrand, 0.0, upper, quadrature)?;
    if !(-1e-9..=1.0 + 1e-9).contains(&value) {
        return Err(Error::NumericalFailure(format!(
            "cluster probability {value} escaped [0, 1]"
        )));
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Global cooperative probability across clusters: `1 - prod(1 - q_k)`.
/// A single cluster passes its probability through unchanged.
pub fn global_coop_prob(per_cluster: &[f64]) -> Result<f64> {
    if per_cluster.is_empty() {
        return Err(Error::invalid("need at least one cluster probability"));
    }
    for (k, q) in per_cluster.iter().enumerate() {
        check_probability(&format!("cluster probability {k}"), *q)?;
    }
    if let [q] = per_cluster {
        return Ok(*q);
    }
    Ok(one_minus_product_of_complements(per_cluster.iter().copied()))
}
