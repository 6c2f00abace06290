//! A priori error bounds for magic point interpolation and integration.
//!
//! For a family analytic on a generalized Bernstein ellipse with parameter
//! `ρ > 4`, both the interpolation and the integration error decay like
//! `C M (ρ/4)^{-M}`. This module evaluates the ellipse map, the ellipse
//! parameter reachable from a strip of analyticity of half-width `η`, the
//! explicit constants, and the resulting bound curves.
//!
//! The Fourier corollaries are usually stated with the threshold
//! `η > sqrt(15/8) |Ω|`, but `ρ(η) > 4` already holds for `η > (15/16) |Ω|`.
//! Only `ρ(η) > 4` is enforced here.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::family::Interval;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("ellipse parameter ρ = {rho} does not exceed 4; the exponential bound does not apply")]
    RhoTooSmall { rho: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// `B([lo, hi], ρ)`: the image of the Bernstein ellipse with foci `±1` and
/// semiaxis sum `ρ` under the affine map onto `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernsteinEllipse {
    pub interval: Interval,
    pub rho: f64,
}

impl BernsteinEllipse {
    pub fn new(interval: Interval, rho: f64) -> Result<Self, AnalysisError> {
        if !(rho > 1.0) {
            return Err(AnalysisError::InvalidArgument(format!(
                "ρ must exceed 1, got {rho}"
            )));
        }
        if !(interval.lo < interval.hi) {
            return Err(AnalysisError::InvalidArgument(format!(
                "empty interval {interval}"
            )));
        }
        Ok(Self { interval, rho })
    }

    /// Semimajor axis of the reference ellipse, `(ρ + 1/ρ) / 2`.
    pub fn unit_semimajor(&self) -> f64 {
        0.5 * (self.rho + 1.0 / self.rho)
    }

    /// Semiminor axis of the reference ellipse, `(ρ - 1/ρ) / 2`.
    pub fn unit_semiminor(&self) -> f64 {
        0.5 * (self.rho - 1.0 / self.rho)
    }

    /// Real-axis extent `[lo', hi']` of the mapped ellipse.
    pub fn real_extent(&self) -> Interval {
        let c = self.interval.midpoint();
        let h = 0.5 * self.interval.length() * self.unit_semimajor();
        Interval { lo: c - h, hi: c + h }
    }

    /// Imaginary half-width of the mapped ellipse.
    pub fn semiminor(&self) -> f64 {
        0.5 * self.interval.length() * self.unit_semiminor()
    }

    /// Point on the mapped boundary at angle `theta`.
    pub fn boundary_point(&self, theta: f64) -> Complex64 {
        let x = Complex64::new(
            self.unit_semimajor() * theta.cos(),
            self.unit_semiminor() * theta.sin(),
        );
        ellipse_map(self, x)
    }

    /// Largest `|f|` over `samples` boundary points. For analytic `f` this
    /// approximates the supremum over the closed ellipse from below.
    pub fn sup_on_boundary<F: Fn(Complex64) -> f64>(&self, f: F, samples: usize) -> f64 {
        (0..samples)
            .map(|k| f(self.boundary_point(2.0 * PI * k as f64 / samples as f64)))
            .fold(0.0, f64::max)
    }
}

/// The affine map `τ(x) = b̄ + ((b̲ - b̄)/2)(1 - Re x) + i ((b̄ - b̲)/2) Im x`
/// carrying `[-1, 1]` onto `[b̲, b̄]`.
pub fn ellipse_map(e: &BernsteinEllipse, x: Complex64) -> Complex64 {
    let lo = e.interval.lo;
    let hi = e.interval.hi;
    Complex64::new(hi + 0.5 * (lo - hi) * (1.0 - x.re), 0.5 * (hi - lo) * x.im)
}

/// Ellipse parameter whose mapped semiminor equals `eta`:
/// `ρ(η) = 2η/L + sqrt((2η/L)² + 1)`.
pub fn rho_from_eta(eta: f64, interval_length: f64) -> Result<f64, AnalysisError> {
    if !(eta > 0.0) || !(interval_length > 0.0) {
        return Err(AnalysisError::InvalidArgument(format!(
            "η and interval length must be positive, got {eta} and {interval_length}"
        )));
    }
    let t = 2.0 * eta / interval_length;
    Ok(t + (t * t + 1.0).sqrt())
}

/// Constants of the exponential bound `C M (ρ/4)^{-M}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSpec {
    pub rho: f64,
    pub c: f64,
    /// Mass of the integration measure, `|Ω|` for Lebesgue measure.
    pub measure_mass: f64,
}

impl BoundSpec {
    pub fn new(rho: f64, c: f64, measure_mass: f64) -> Result<Self, AnalysisError> {
        if !(rho > 4.0) {
            return Err(AnalysisError::RhoTooSmall { rho });
        }
        if !(c >= 0.0) || !(measure_mass > 0.0) {
            return Err(AnalysisError::InvalidArgument(format!(
                "C must be non-negative and the measure mass positive, got {c} and {measure_mass}"
            )));
        }
        Ok(Self { rho, c, measure_mass })
    }

    pub fn interpolation_bound(&self, m: usize) -> f64 {
        self.c * m as f64 * (self.rho / 4.0).powi(-(m as i32))
    }

    pub fn integration_bound(&self, m: usize) -> f64 {
        self.measure_mass * self.interpolation_bound(m)
    }
}

/// Explicit constant for a family `h_p(z) = f1(p, z) f2(z)` analytic in `z`:
/// `C = ρ / (2(ρ - 1)) · sup_{ellipse} |f1| · max_Ω |f2|`.
pub fn explicit_constant(rho: f64, f1_sup_on_ellipse: f64, f2_sup: f64) -> f64 {
    rho / (2.0 * (rho - 1.0)) * f1_sup_on_ellipse * f2_sup
}

fn fourier_prefactor(rho: f64) -> f64 {
    rho / (4.0 * PI * (rho - 1.0))
}

/// Bound constants for parametric Fourier inversion `h_{(q,x)}(z) =
/// e^{-izx} f̂_q(z) / 2π` on `interval`, given the exponential-moment
/// supremum `sup_q ∫ e^{η|x|} |f_q(x)| dx`.
pub fn fourier_bound_constant(
    eta: f64,
    family_moment: f64,
    x_range: Interval,
    interval: Interval,
) -> Result<BoundSpec, AnalysisError> {
    let rho = rho_from_eta(eta, interval.length())?;
    if !(rho > 4.0) {
        return Err(AnalysisError::RhoTooSmall { rho });
    }
    let reach = (-x_range.lo).max(x_range.hi);
    let c = fourier_prefactor(rho) * (eta * reach).exp() * family_moment;
    BoundSpec::new(rho, c, interval.length())
}

/// Variant for a single transform `f̂` on a short domain `omega`, with the
/// ellipse built in the `x` variable: `ρ` depends on `|x_range|`.
pub fn small_domain_bound_constant(
    eta: f64,
    x_range: Interval,
    omega: Interval,
    fhat_sup: f64,
) -> Result<BoundSpec, AnalysisError> {
    let rho = rho_from_eta(eta, x_range.length())?;
    if !(rho > 4.0) {
        return Err(AnalysisError::RhoTooSmall { rho });
    }
    let reach = (-omega.lo).max(omega.hi);
    let c = fourier_prefactor(rho) * (eta * reach).exp() * fhat_sup;
    BoundSpec::new(rho, c, omega.length())
}

/// One row of a bound curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPoint {
    pub m: usize,
    pub interpolation: f64,
    pub integration: f64,
}

/// Interpolation and integration bounds for `M = 1..=m_max`.
pub fn bound_curve(spec: &BoundSpec, m_max: usize) -> Vec<BoundPoint> {
    (1..=m_max)
        .map(|m| BoundPoint {
            m,
            interpolation: spec.interpolation_bound(m),
            integration: spec.integration_bound(m),
        })
        .collect()
}
