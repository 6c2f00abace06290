//! Globally adaptive Gauss–Kronrod (G7/K15) integration over real intervals.
//!
//! Panels are kept in a max-heap keyed by their local error estimate; the
//! worst panel is bisected until the summed estimate meets the requested
//! tolerance or the evaluation budget runs out. The integrand may be real or
//! complex. Complex integrands share a single panel refinement and the error
//! estimate is the modulus of the complex `K15 - G7` difference.
//!
//! Node and weight constants are the standard published G7/K15 values
//! (Piessens et al., QUADPACK, 1983), kept to 33 digits.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use thiserror::Error;

/// Default evaluation budget per integral.
pub const DEFAULT_MAX_EVALS: usize = 100_000;

/// Kronrod abscissae on [0, 1]; odd indices are the Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("integrand returned a non-finite value at {at}")]
    NonFiniteSample { at: f64 },
    #[error(
        "quadrature did not converge: estimate {:e} after {} evaluations",
        .0.abs_error_estimate,
        .0.evaluations
    )]
    NonConvergence(QuadResult),
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Tolerances and budget for one adaptive integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl QuadConfig {
    pub fn new(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol: 0.0,
            max_evals: DEFAULT_MAX_EVALS,
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_max_evals(mut self, max_evals: usize) -> Self {
        self.max_evals = max_evals;
        self
    }
}

/// A subinterval with its local Kronrod value and error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub value: Complex64,
    pub error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // Largest error first; ties broken towards the leftmost panel.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Applies the G7/K15 pair on `[a, b]` and returns `(kronrod, gauss)`.
pub fn gauss_kronrod_15<F>(f: &F, a: f64, b: f64) -> Result<(Complex64, Complex64), QuadError>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let sample = |x: f64| -> Result<Complex64, QuadError> {
        let v = f(x);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(QuadError::NonFiniteSample { at: x })
        }
    };

    let fc = sample(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = sample(center - dx)? + sample(center + dx)?;
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    Ok((kronrod * half, gauss * half))
}

fn make_panel<F>(f: &F, a: f64, b: f64) -> Result<Panel, QuadError>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let (k, g) = gauss_kronrod_15(f, a, b)?;
    Ok(Panel {
        a,
        b,
        value: k,
        error: (k - g).norm(),
    })
}

/// Integrates a complex-valued `f` over `[a, b]`.
pub fn integrate_complex<F>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_evals: usize,
) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> Complex64,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(QuadError::InvalidInterval { a, b });
    }

    let mut heap = BinaryHeap::new();
    let first = make_panel(&f, a, b)?;
    let mut evaluations = 15;
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);

    loop {
        let target = abs_tol.max(rel_tol * value.norm());
        if error <= target {
            // Re-sum from scratch so incremental drift cannot fake convergence.
            let (v, e) = totals(&heap);
            value = v;
            error = e;
            if error <= abs_tol.max(rel_tol * value.norm()) {
                return Ok(QuadResult {
                    value,
                    abs_error_estimate: error,
                    evaluations,
                    converged: true,
                });
            }
        }

        let worst = *heap.peek().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let splittable = mid > worst.a && mid < worst.b;
        if evaluations + 30 > max_evals || !splittable {
            let (v, e) = totals(&heap);
            return Err(QuadError::NonConvergence(QuadResult {
                value: v,
                abs_error_estimate: e,
                evaluations,
                converged: false,
            }));
        }

        heap.pop();
        let left = make_panel(&f, worst.a, mid)?;
        let right = make_panel(&f, mid, worst.b)?;
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}

/// Integrates a real-valued `f` over `[a, b]`; the imaginary part of the
/// result is exactly zero.
pub fn integrate_adaptive<F>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_evals: usize,
) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> f64,
{
    integrate_complex(|x| Complex64::new(f(x), 0.0), a, b, abs_tol, rel_tol, max_evals)
}

/// Convenience wrapper taking a [`QuadConfig`].
pub fn integrate_with<F>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> Complex64,
{
    integrate_complex(f, a, b, cfg.abs_tol, cfg.rel_tol, cfg.max_evals)
}

// Sums panels left to right so the result does not depend on heap layout.
fn totals(heap: &BinaryHeap<Panel>) -> (Complex64, f64) {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    panels.iter().fold((Complex64::new(0.0, 0.0), 0.0), |(v, e), p| {
        (v + p.value, e + p.error)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sine_over_half_period() {
        let r = integrate_adaptive(f64::sin, 0.0, PI, 1e-14, 0.0, DEFAULT_MAX_EVALS).unwrap();
        assert!(r.converged);
        assert!((r.value.re - 2.0).abs() < 1e-13);
        assert_eq!(r.value.im, 0.0);
    }

    #[test]
    fn square_single_panel() {
        let (k, _) = gauss_kronrod_15(&|x: f64| Complex64::new(x * x, 0.0), 0.0, 1.0).unwrap();
        assert!((k.re - 1.0 / 3.0).abs() <= f64::EPSILON);
    }

    #[test]
    fn complex_exponential() {
        let r = integrate_complex(
            |x| Complex64::new(0.0, x).exp(),
            0.0,
            1.0,
            1e-14,
            0.0,
            DEFAULT_MAX_EVALS,
        )
        .unwrap();
        let exact = Complex64::new(1f64.sin(), 1.0 - 1f64.cos());
        assert!((r.value - exact).norm() < 1e-13);
    }

    #[test]
    fn rejects_bad_interval() {
        let e = integrate_adaptive(|x| x, 1.0, 1.0, 1e-10, 0.0, 1000).unwrap_err();
        assert!(matches!(e, QuadError::InvalidInterval { .. }));
        let e = integrate_adaptive(|x| x, 2.0, 1.0, 1e-10, 0.0, 1000).unwrap_err();
        assert!(matches!(e, QuadError::InvalidInterval { .. }));
    }

    #[test]
    fn non_finite_sample_is_reported() {
        let e = integrate_adaptive(|x| 1.0 / (x - 0.5), 0.0, 1.0, 1e-10, 0.0, 1000).unwrap_err();
        assert!(matches!(e, QuadError::NonFiniteSample { .. }));
    }

    #[test]
    fn budget_exhaustion_returns_best_value() {
        let e = integrate_adaptive(|x| x.abs().sqrt(), -1.0, 1.0, 1e-15, 0.0, 100).unwrap_err();
        match e {
            QuadError::NonConvergence(r) => {
                assert!(!r.converged);
                assert!(r.evaluations <= 100);
                assert!((r.value.re - 4.0 / 3.0).abs() < 1e-2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn relative_tolerance_is_honoured() {
        let r = integrate_adaptive(|x| 1e6 * x.exp(), 0.0, 1.0, 0.0, 1e-12, DEFAULT_MAX_EVALS).unwrap();
        assert!(r.abs_error_estimate <= 1e-12 * r.value.re);
    }
}
