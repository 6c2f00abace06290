//! CGMY (tempered stable) characteristic function and the Fourier inversion
//! integrand for its density.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::family::{Interval, ParametricFamily, ValueKind};
use crate::models::gamma::gamma_real;
use crate::quadrature::{integrate_adaptive, QuadError, DEFAULT_MAX_EVALS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CgmyError {
    #[error("CGMY requires {name} > 0, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("CGMY requires Y in (1, 2), got {0}")]
    YOutOfRange(f64),
    #[error("parameter box needs 5 intervals (C, G, M, Y, x), got {0}")]
    BoxDimension(usize),
    #[error("truncation bound must be positive, got {0}")]
    BadTruncation(f64),
}

/// `(C, G, M, Y)` with `C, G, M > 0` and `Y ∈ (1, 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgmyParams {
    c: f64,
    g: f64,
    m: f64,
    y: f64,
}

impl CgmyParams {
    pub fn new(c: f64, g: f64, m: f64, y: f64) -> Result<Self, CgmyError> {
        for (name, value) in [("C", c), ("G", g), ("M", m)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(CgmyError::NonPositive { name, value });
            }
        }
        if !(y > 1.0 && y < 2.0) {
            return Err(CgmyError::YOutOfRange(y));
        }
        Ok(Self { c, g, m, y })
    }

    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn y(&self) -> f64 {
        self.y
    }
}

/// Pieces of the exponent that do not depend on `z`.
#[derive(Clone, Copy)]
struct CfKernel {
    scale: f64,
    g: f64,
    m: f64,
    y: f64,
    g_pow: Complex64,
    m_pow: Complex64,
}

impl CfKernel {
    fn new(c: f64, g: f64, m: f64, y: f64) -> Self {
        // Γ(-Y) is finite for Y in (1, 2); NaN propagates for invalid input.
        let gamma = gamma_real(-y).unwrap_or(f64::NAN);
        // Real powers go through the complex path too, so the bracket
        // vanishes exactly at z = 0.
        Self {
            scale: c * gamma,
            g,
            m,
            y,
            g_pow: Complex64::new(g, 0.0).powf(y),
            m_pow: Complex64::new(m, 0.0).powf(y),
        }
    }

    fn cf(&self, z: f64) -> Complex64 {
        // Both bases have positive real part, so the principal branch of the
        // power is continuous in z.
        let left = Complex64::new(self.m, -z).powf(self.y) - self.m_pow;
        let right = Complex64::new(self.g, z).powf(self.y) - self.g_pow;
        (self.scale * (left + right)).exp()
    }

    fn integrand(&self, x: f64, z: f64) -> f64 {
        let phase = Complex64::new(0.0, -z * x).exp();
        (phase * self.cf(z)).re / PI
    }
}

/// `φ_q(z) = exp(C Γ(-Y) ((M - iz)^Y - M^Y + (G + iz)^Y - G^Y))`.
pub fn cgmy_cf(q: &CgmyParams, z: f64) -> Complex64 {
    CfKernel::new(q.c, q.g, q.m, q.y).cf(z)
}

/// `(1/π) Re(e^{-izx} φ_q(z))`, the half-line Fourier inversion integrand.
pub fn cgmy_integrand(q: &CgmyParams, x: f64, z: f64) -> f64 {
    CfKernel::new(q.c, q.g, q.m, q.y).integrand(x, z)
}

/// Density `f_q(x)` by direct adaptive quadrature of the inversion
/// integrand over `[0, omega_hi]`.
pub fn cgmy_density_oracle(q: &CgmyParams, x: f64, omega_hi: f64, abs_tol: f64) -> Result<f64, QuadError> {
    let k = CfKernel::new(q.c, q.g, q.m, q.y);
    integrate_adaptive(
        |z| k.integrand(x, z),
        0.0,
        omega_hi,
        abs_tol,
        0.0,
        DEFAULT_MAX_EVALS,
    )
    .map(|r| r.value.re)
}

/// Parameter box and truncation for the CGMY density family.
#[derive(Debug, Clone, PartialEq)]
pub struct CgmyFamilySpec {
    /// Intervals for `(C, G, M, Y, x)`.
    pub bounds: [Interval; 5],
    /// Truncated Fourier domain `[0, omega_hi]`.
    pub omega_hi: f64,
}

impl CgmyFamilySpec {
    pub fn new(bounds: &[Interval], omega_hi: f64) -> Result<Self, CgmyError> {
        let bounds: [Interval; 5] = bounds
            .try_into()
            .map_err(|_| CgmyError::BoxDimension(bounds.len()))?;
        for (name, b) in ["C", "G", "M"].iter().zip(&bounds[..3]) {
            if !(b.lo > 0.0) {
                return Err(CgmyError::NonPositive { name, value: b.lo });
            }
        }
        if !(bounds[3].lo > 1.0 && bounds[3].hi < 2.0) {
            return Err(CgmyError::YOutOfRange(if bounds[3].lo <= 1.0 {
                bounds[3].lo
            } else {
                bounds[3].hi
            }));
        }
        if !(omega_hi > 0.0 && omega_hi.is_finite()) {
            return Err(CgmyError::BadTruncation(omega_hi));
        }
        Ok(Self { bounds, omega_hi })
    }

    /// `C ∈ [1,5], G ∈ [1,8], M ∈ [1,8], Y = 1.1, x ∈ [-1,1]` on `[0, 75]`.
    pub fn reference() -> Self {
        Self {
            bounds: [
                Interval { lo: 1.0, hi: 5.0 },
                Interval { lo: 1.0, hi: 8.0 },
                Interval { lo: 1.0, hi: 8.0 },
                Interval::point(1.1),
                Interval { lo: -1.0, hi: 1.0 },
            ],
            omega_hi: 75.0,
        }
    }
}

/// The real-valued family `h_{(C,G,M,Y,x)}(z) = (1/π) Re(e^{-izx} φ_q(z))`
/// on `[0, omega_hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CgmyFamily {
    omega_hi: f64,
}

impl CgmyFamily {
    pub fn new(omega_hi: f64) -> Self {
        Self { omega_hi }
    }

    pub fn from_spec(spec: &CgmyFamilySpec) -> Self {
        Self::new(spec.omega_hi)
    }

    fn kernel(p: &[f64]) -> CfKernel {
        CfKernel::new(p[0], p[1], p[2], p[3])
    }
}

impl ParametricFamily for CgmyFamily {
    fn tag(&self) -> &str {
        "cgmy"
    }

    fn param_dim(&self) -> usize {
        5
    }

    fn domain(&self) -> Interval {
        Interval {
            lo: 0.0,
            hi: self.omega_hi,
        }
    }

    fn value_kind(&self) -> ValueKind {
        ValueKind::Real
    }

    fn eval(&self, p: &[f64], z: f64) -> Complex64 {
        Complex64::new(Self::kernel(p).integrand(p[4], z), 0.0)
    }

    fn eval_many(&self, p: &[f64], zs: &[f64], out: &mut [Complex64]) {
        let k = Self::kernel(p);
        for (o, &z) in out.iter_mut().zip(zs) {
            *o = Complex64::new(k.integrand(p[4], z), 0.0);
        }
    }
}
