//! Analytic test families with known structure.

use num_complex::Complex64;

use crate::family::{Interval, ParametricFamily, ValueKind};

/// `h_p(z) = exp(p z)`, entire in `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpFamily {
    pub p_range: Interval,
    pub omega: Interval,
}

/// The exp-test family on the given parameter range and domain.
pub fn test_family_exp(p_range: Interval, omega: Interval) -> ExpFamily {
    ExpFamily { p_range, omega }
}

impl ParametricFamily for ExpFamily {
    fn tag(&self) -> &str {
        "exp-test"
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn domain(&self) -> Interval {
        self.omega
    }
    fn value_kind(&self) -> ValueKind {
        ValueKind::Real
    }
    fn eval(&self, p: &[f64], z: f64) -> Complex64 {
        Complex64::new((p[0] * z).exp(), 0.0)
    }
}

/// `h_p(z) = sum_k p_k z^k`: spans a space of dimension `p.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialFamily {
    pub terms: usize,
    pub omega: Interval,
}

impl ParametricFamily for PolynomialFamily {
    fn tag(&self) -> &str {
        "poly-test"
    }
    fn param_dim(&self) -> usize {
        self.terms
    }
    fn domain(&self) -> Interval {
        self.omega
    }
    fn value_kind(&self) -> ValueKind {
        ValueKind::Real
    }
    fn eval(&self, p: &[f64], z: f64) -> Complex64 {
        // Horner
        Complex64::new(p.iter().rev().fold(0.0, |acc, c| acc * z + c), 0.0)
    }
}

/// `h_p(z) = p sin(z)`: a rank-1 family.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledSineFamily {
    pub omega: Interval,
}

impl ParametricFamily for ScaledSineFamily {
    fn tag(&self) -> &str {
        "sine-test"
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn domain(&self) -> Interval {
        self.omega
    }
    fn value_kind(&self) -> ValueKind {
        ValueKind::Real
    }
    fn eval(&self, p: &[f64], z: f64) -> Complex64 {
        Complex64::new(p[0] * z.sin(), 0.0)
    }
}
