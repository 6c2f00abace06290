//! Problem description shared by training and the online operators: the
//! integrand family, its discretised domain and the training parameter cloud.

use std::collections::HashSet;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("interval [{lo}, {hi}] is empty or not finite")]
    BadInterval { lo: f64, hi: f64 },
    #[error("a discrete domain needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("domain points must be strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("point {point} lies outside [{lo}, {hi}]")]
    OutsideDomain { point: f64, lo: f64, hi: f64 },
    #[error("parameter cloud is empty")]
    EmptyCloud,
    #[error("sample {index} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("sample {0} lies outside the parameter box")]
    SampleOutsideBox(usize),
    #[error("samples {0} and {1} coincide")]
    DuplicateSample(usize, usize),
}

/// Closed real interval `[lo, hi]`. Degenerate intervals (`lo == hi`) are
/// allowed for parameter coordinates that are held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, DomainError> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Self { lo, hi })
        } else {
            Err(DomainError::BadInterval { lo, hi })
        }
    }

    /// A point interval.
    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Whether a family's values are real (imaginary part identically zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Real,
    Complex,
}

/// A parametric integrand `(p, z) -> h_p(z)` on a compact real domain.
///
/// Implementations must be deterministic and free of shared mutable state;
/// snapshots are evaluated from several threads at once.
pub trait ParametricFamily: Send + Sync {
    /// Identifier recorded in trained models.
    fn tag(&self) -> &str;

    fn param_dim(&self) -> usize;

    fn domain(&self) -> Interval;

    fn value_kind(&self) -> ValueKind;

    fn eval(&self, p: &[f64], z: f64) -> Complex64;

    /// Evaluates one parameter on many points. Families with expensive
    /// per-parameter setup should override this.
    fn eval_many(&self, p: &[f64], zs: &[f64], out: &mut [Complex64]) {
        for (o, &z) in out.iter_mut().zip(zs) {
            *o = self.eval(p, z);
        }
    }
}

impl<F: ParametricFamily + ?Sized> ParametricFamily for &F {
    fn tag(&self) -> &str {
        (**self).tag()
    }
    fn param_dim(&self) -> usize {
        (**self).param_dim()
    }
    fn domain(&self) -> Interval {
        (**self).domain()
    }
    fn value_kind(&self) -> ValueKind {
        (**self).value_kind()
    }
    fn eval(&self, p: &[f64], z: f64) -> Complex64 {
        (**self).eval(p, z)
    }
    fn eval_many(&self, p: &[f64], zs: &[f64], out: &mut [Complex64]) {
        (**self).eval_many(p, zs, out)
    }
}

/// Family defined by a closure. Handy for tests and ad-hoc integrands.
pub struct FnFamily<F> {
    tag: String,
    param_dim: usize,
    domain: Interval,
    kind: ValueKind,
    f: F,
}

impl<F> FnFamily<F>
where
    F: Fn(&[f64], f64) -> Complex64 + Send + Sync,
{
    pub fn new(tag: &str, param_dim: usize, domain: Interval, kind: ValueKind, f: F) -> Self {
        Self {
            tag: tag.to_string(),
            param_dim,
            domain,
            kind,
            f,
        }
    }
}

impl<F> ParametricFamily for FnFamily<F>
where
    F: Fn(&[f64], f64) -> Complex64 + Send + Sync,
{
    fn tag(&self) -> &str {
        &self.tag
    }
    fn param_dim(&self) -> usize {
        self.param_dim
    }
    fn domain(&self) -> Interval {
        self.domain
    }
    fn value_kind(&self) -> ValueKind {
        self.kind
    }
    fn eval(&self, p: &[f64], z: f64) -> Complex64 {
        (self.f)(p, z)
    }
}

/// Strictly increasing set of candidate magic points.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDomain {
    points: Vec<f64>,
}

impl DiscreteDomain {
    pub fn from_points(points: Vec<f64>) -> Result<Self, DomainError> {
        if points.len() < 2 {
            return Err(DomainError::TooFewPoints(points.len()));
        }
        for (i, w) in points.windows(2).enumerate() {
            if !(w[0] < w[1]) {
                return Err(DomainError::NotIncreasing(i + 1));
            }
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(DomainError::BadInterval {
                lo: points[0],
                hi: points[points.len() - 1],
            });
        }
        Ok(Self { points })
    }

    /// `n` equispaced points including both endpoints.
    pub fn uniform(interval: Interval, n: usize) -> Result<Self, DomainError> {
        if n < 2 {
            return Err(DomainError::TooFewPoints(n));
        }
        let h = interval.length() / (n - 1) as f64;
        let mut pts: Vec<f64> = (0..n).map(|k| interval.lo + h * k as f64).collect();
        pts[n - 1] = interval.hi;
        Self::from_points(pts)
    }

    /// `n` Chebyshev–Lobatto points (extrema of `T_{n-1}`), endpoints included.
    pub fn chebyshev(interval: Interval, n: usize) -> Result<Self, DomainError> {
        if n < 2 {
            return Err(DomainError::TooFewPoints(n));
        }
        let c = interval.midpoint();
        let r = 0.5 * interval.length();
        let mut pts: Vec<f64> = (0..n)
            .map(|k| {
                let t = std::f64::consts::PI * k as f64 / (n - 1) as f64;
                c - r * t.cos()
            })
            .collect();
        pts[0] = interval.lo;
        pts[n - 1] = interval.hi;
        Self::from_points(pts)
    }

    /// Checks that every point lies in `domain`.
    pub fn check_within(&self, domain: Interval) -> Result<(), DomainError> {
        for &x in &self.points {
            if !domain.contains(x) {
                return Err(DomainError::OutsideDomain {
                    point: x,
                    lo: domain.lo,
                    hi: domain.hi,
                });
            }
        }
        Ok(())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn count(&self) -> usize {
        self.points.len()
    }
}

/// The discrete training set of parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterCloud {
    samples: Vec<Vec<f64>>,
    bounds: Vec<Interval>,
    seed: u64,
}

impl ParameterCloud {
    /// Draws `n` points uniformly from the box with a ChaCha8 stream seeded by
    /// `seed`. Duplicates (only possible on degenerate boxes) are redrawn.
    pub fn sample_uniform(bounds: &[Interval], n: usize, seed: u64) -> Result<Self, DomainError> {
        if n == 0 {
            return Err(DomainError::EmptyCloud);
        }
        let samples = sample_box(bounds, n, seed)?;
        Ok(Self {
            samples,
            bounds: bounds.to_vec(),
            seed,
        })
    }

    /// Wraps an explicit list of parameter vectors.
    pub fn from_samples(bounds: &[Interval], samples: Vec<Vec<f64>>) -> Result<Self, DomainError> {
        if samples.is_empty() {
            return Err(DomainError::EmptyCloud);
        }
        let mut seen = std::collections::HashMap::new();
        for (i, s) in samples.iter().enumerate() {
            if s.len() != bounds.len() {
                return Err(DomainError::DimensionMismatch {
                    index: i,
                    got: s.len(),
                    expected: bounds.len(),
                });
            }
            if !s.iter().zip(bounds).all(|(x, b)| b.contains(*x)) {
                return Err(DomainError::SampleOutsideBox(i));
            }
            let key: Vec<u64> = s.iter().map(|x| x.to_bits()).collect();
            if let Some(j) = seen.insert(key, i) {
                return Err(DomainError::DuplicateSample(j, i));
            }
        }
        Ok(Self {
            samples,
            bounds: bounds.to_vec(),
            seed: 0,
        })
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Uniform samples from a box; shared by training clouds and test draws.
pub fn sample_box(bounds: &[Interval], n: usize, seed: u64) -> Result<Vec<Vec<f64>>, DomainError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    let free = bounds.iter().any(|b| b.length() > 0.0);
    while out.len() < n {
        let s: Vec<f64> = bounds
            .iter()
            .map(|b| {
                let u: f64 = rng.gen();
                if b.length() > 0.0 {
                    (b.lo + u * b.length()).min(b.hi)
                } else {
                    b.lo
                }
            })
            .collect();
        let key: Vec<u64> = s.iter().map(|x| x.to_bits()).collect();
        if seen.insert(key) {
            out.push(s);
        } else if !free {
            return Err(DomainError::DuplicateSample(0, out.len()));
        }
    }
    Ok(out)
}
