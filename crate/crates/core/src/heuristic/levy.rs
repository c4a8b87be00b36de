//! Lévy-flight samplers.
//!
//! The continuous sampler drives the real-valued pollination moves. The
//! discrete form reshapes a descending probability ordering through the
//! one-sided Lévy CDF and is used for global node selection in tour
//! construction.

use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::rng::RngStream;
use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LevyParams {
    /// Stability exponent, in `(0, 2]`.
    pub lambda: f64,
    /// Scaling constant applied to cumulative probabilities in the discrete form.
    pub phi: f64,
    /// Scale of the one-sided Lévy CDF.
    pub scale_c: f64,
}

impl Default for LevyParams {
    fn default() -> Self {
        Self {
            lambda: 1.5,
            phi: 1.0,
            scale_c: 1.0,
        }
    }
}

impl LevyParams {
    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        if !(self.phi > 0.0 && self.phi.is_finite()) {
            return Err(Error::param(format!("levy phi must be > 0, got {}", self.phi)));
        }
        if !(self.scale_c > 0.0 && self.scale_c.is_finite()) {
            return Err(Error::param(format!(
                "levy scale_c must be > 0, got {}",
                self.scale_c
            )));
        }
        Ok(())
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 2.0 {
        Ok(())
    } else {
        Err(Error::param(format!("levy lambda must be in (0, 2], got {lambda}")))
    }
}

/// Mantegna's scale for the numerator Gaussian.
fn mantegna_sigma(lambda: f64) -> f64 {
    let num = libm::tgamma(1.0 + lambda) * (PI * lambda / 2.0).sin();
    let den = libm::tgamma((1.0 + lambda) / 2.0) * lambda * 2f64.powf((lambda - 1.0) / 2.0);
    (num / den).powf(1.0 / lambda)
}

/// Draws `dim` independent heavy-tailed steps with Mantegna's algorithm.
///
/// At `lambda = 2` the stable law is Gaussian with variance 2 and Mantegna's
/// scale vanishes, so that endpoint samples the Gaussian directly.
pub fn levy_step(rng: &mut RngStream, lambda: f64, dim: usize) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    if lambda == 2.0 {
        let sd = 2f64.sqrt();
        return Ok((0..dim)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                sd * z
            })
            .collect());
    }
    let sigma = mantegna_sigma(lambda);
    Ok((0..dim)
        .map(|_| {
            let u: f64 = StandardNormal.sample(rng);
            let v: f64 = StandardNormal.sample(rng);
            sigma * u / v.abs().powf(1.0 / lambda)
        })
        .collect())
}

/// One-sided Lévy CDF `erfc(sqrt(c / 2x))`, zero for `x <= 0`.
pub fn levy_cdf(x: f64, scale_c: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        libm::erfc((scale_c / (2.0 * x)).sqrt())
    }
}

/// Reshapes a descending probability sequence into discrete Lévy masses.
///
/// Mass `i` is `F_L(phi * cum_i) - F_L(phi * cum_{i-1})`, renormalized to sum
/// to one because `F_L(phi) < 1`. Re-applying the map to its own output
/// changes the masses; it is not a fixed point.
pub fn discrete_levy_probs(ordered: &[f64], params: &LevyParams) -> Result<Vec<f64>> {
    params.validate()?;
    if ordered.is_empty() {
        return Err(Error::param("discrete Lévy input is empty"));
    }
    if ordered.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::param("discrete Lévy input has negative or non-finite mass"));
    }
    let sum: f64 = ordered.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::param(format!(
            "discrete Lévy input must sum to 1, got {sum}"
        )));
    }
    if ordered.windows(2).any(|w| w[1] > w[0] + 1e-12) {
        return Err(Error::param(
            "discrete Lévy input must be sorted by descending probability",
        ));
    }

    let mut out = Vec::with_capacity(ordered.len());
    let mut cum = 0.0;
    let mut prev_cdf = 0.0;
    for &p in ordered {
        cum += p;
        let cdf = levy_cdf(params.phi * cum, params.scale_c);
        out.push((cdf - prev_cdf).max(0.0));
        prev_cdf = cdf;
    }
    let total: f64 = out.iter().sum();
    if total > 0.0 && total.is_finite() {
        out.iter_mut().for_each(|m| *m /= total);
        Ok(out)
    } else {
        // CDF underflowed across the whole support; keep the input ordering masses.
        Ok(ordered.to_vec())
    }
}

/// Smallest index whose cumulative mass reaches `r`.
///
/// Rounding can leave the total just below `r`; the last index is returned then.
pub fn select_with_draw(probs: &[f64], r: f64) -> Result<usize> {
    if probs.is_empty() {
        return Err(Error::param("cannot select from an empty distribution"));
    }
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if cum - r >= 0.0 {
            return Ok(i);
        }
    }
    Ok(probs.len() - 1)
}

/// Draws `r ~ U(0,1)` and returns the smallest index whose cumulative mass reaches it.
pub fn discrete_levy_select(probs: &[f64], rng: &mut RngStream) -> Result<usize> {
    if probs.is_empty() {
        return Err(Error::param("cannot select from an empty distribution"));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::param(format!("probabilities must sum to 1, got {sum}")));
    }
    let r = rng.open_uniform();
    select_with_draw(probs, r)
}
