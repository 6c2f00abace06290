//! Short-time Fourier transform integrands with a Gauss window.
//!
//! The family is parametrised by `(b, σ, z)`: window shift, window width and
//! frequency. The integration variable is time `t`, on a compact window that
//! covers `b ± 8σ` for every admissible `(b, σ)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::family::{Interval, ParametricFamily, ValueKind};

/// Half-width of the truncation window in units of σ.
pub const WINDOW_SIGMAS: f64 = 8.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StftError {
    #[error("window width range must be positive, got {0}")]
    NonPositiveSigma(Interval),
}

pub type Signal = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct StftFamilySpec {
    pub signal: Signal,
    pub sigma_range: Interval,
    pub shift_range: Interval,
    pub frequency_range: Interval,
}

impl fmt::Debug for StftFamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StftFamilySpec")
            .field("sigma_range", &self.sigma_range)
            .field("shift_range", &self.shift_range)
            .field("frequency_range", &self.frequency_range)
            .finish_non_exhaustive()
    }
}

impl StftFamilySpec {
    pub fn new(
        signal: Signal,
        sigma_range: Interval,
        shift_range: Interval,
        frequency_range: Interval,
    ) -> Result<Self, StftError> {
        if !(sigma_range.lo > 0.0) {
            return Err(StftError::NonPositiveSigma(sigma_range));
        }
        Ok(Self {
            signal,
            sigma_range,
            shift_range,
            frequency_range,
        })
    }

    /// Time window `[b_lo - 8σ_hi, b_hi + 8σ_hi]`.
    pub fn time_window(&self) -> Interval {
        let r = WINDOW_SIGMAS * self.sigma_range.hi;
        Interval {
            lo: self.shift_range.lo - r,
            hi: self.shift_range.hi + r,
        }
    }

    /// Parameter box in `(b, σ, z)` order.
    pub fn bounds(&self) -> [Interval; 3] {
        [self.shift_range, self.sigma_range, self.frequency_range]
    }
}

/// `w_σ(t) = exp(-t² / 2σ²) / sqrt(2πσ²)`.
pub fn gauss_window(sigma: f64, t: f64) -> f64 {
    (-t * t / (2.0 * sigma * sigma)).exp() / (2.0 * PI * sigma * sigma).sqrt()
}

/// `f(t) w_σ(t - b) e^{-izt}`.
pub fn stft_integrand(spec: &StftFamilySpec, b: f64, sigma: f64, z: f64, t: f64) -> Complex64 {
    let amp = (spec.signal)(t) * gauss_window(sigma, t - b);
    Complex64::from_polar(amp, -z * t)
}

#[derive(Debug, Clone)]
pub struct StftFamily {
    spec: StftFamilySpec,
    window: Interval,
}

impl StftFamily {
    pub fn new(spec: StftFamilySpec) -> Self {
        let window = spec.time_window();
        Self { spec, window }
    }

    pub fn spec(&self) -> &StftFamilySpec {
        &self.spec
    }
}

impl ParametricFamily for StftFamily {
    fn tag(&self) -> &str {
        "stft-gauss"
    }

    fn param_dim(&self) -> usize {
        3
    }

    fn domain(&self) -> Interval {
        self.window
    }

    fn value_kind(&self) -> ValueKind {
        ValueKind::Complex
    }

    fn eval(&self, p: &[f64], t: f64) -> Complex64 {
        stft_integrand(&self.spec, p[0], p[1], p[2], t)
    }
}
