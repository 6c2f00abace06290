//! Families addressable from the command line.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use magicint::models::{
    cgmy_density_oracle, test_family_exp, CgmyFamily, CgmyFamilySpec, CgmyParams, FamilyId, StftFamily,
    StftFamilySpec,
};
use magicint::quadrature::integrate_complex;
use magicint::{Interval, ParametricFamily, QuadConfig, ValueKind};
use num_complex::Complex64;

use crate::config::{RunConfig, SignalKind};
use crate::error::CliError;

pub type DynFamily = Box<dyn ParametricFamily>;

pub fn build_family(cfg: &RunConfig) -> Result<DynFamily, CliError> {
    cfg.validate()?;
    let usage = |e: String| CliError::Usage(e);
    Ok(match cfg.family {
        FamilyId::Cgmy => {
            let omega = cfg.omega.expect("validated");
            if omega.lo != 0.0 {
                return Err(usage(format!("cgmy integrates over [0, Ω̄], got omega {omega}")));
            }
            let spec = CgmyFamilySpec::new(&cfg.bounds, omega.hi).map_err(|e| usage(e.to_string()))?;
            Box::new(CgmyFamily::from_spec(&spec))
        }
        FamilyId::ExpTest => Box::new(test_family_exp(cfg.bounds[0], cfg.omega.expect("validated"))),
        FamilyId::StftGauss => {
            let signal: magicint::models::stft::Signal = match cfg.signal {
                SignalKind::Unit => Arc::new(|_| 1.0),
                SignalKind::Lorentz => Arc::new(|t: f64| 1.0 / (1.0 + t * t)),
            };
            let spec = StftFamilySpec::new(signal, cfg.bounds[1], cfg.bounds[0], cfg.bounds[2])
                .map_err(|e| usage(e.to_string()))?;
            Box::new(StftFamily::new(spec))
        }
    })
}

/// Reference value of `∫_Ω h_p` by direct adaptive quadrature.
pub fn oracle(cfg: &RunConfig, family: &dyn ParametricFamily, p: &[f64]) -> Result<Complex64, CliError> {
    if cfg.family == FamilyId::Cgmy {
        let q = CgmyParams::new(p[0], p[1], p[2], p[3]).map_err(|e| CliError::Usage(e.to_string()))?;
        let v = cgmy_density_oracle(&q, p[4], family.domain().hi, cfg.oracle_tol)?;
        return Ok(Complex64::new(v, 0.0));
    }
    let d = family.domain();
    let q = QuadConfig::new(cfg.oracle_tol);
    let r = integrate_complex(
        |z| family.eval(p, z),
        d.lo,
        d.hi,
        q.abs_tol,
        q.rel_tol,
        q.max_evals,
    )?;
    Ok(r.value)
}

/// True if any coordinate of `p` lies outside the box.
pub fn outside_box(bounds: &[Interval], p: &[f64]) -> bool {
    bounds.iter().zip(p).any(|(b, x)| !b.contains(*x))
}

/// Wraps a family and counts point evaluations.
pub struct Counting<'a> {
    inner: &'a dyn ParametricFamily,
    calls: AtomicUsize,
}

impl<'a> Counting<'a> {
    pub fn new(inner: &'a dyn ParametricFamily) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

impl ParametricFamily for Counting<'_> {
    fn tag(&self) -> &str {
        self.inner.tag()
    }
    fn param_dim(&self) -> usize {
        self.inner.param_dim()
    }
    fn domain(&self) -> Interval {
        self.inner.domain()
    }
    fn value_kind(&self) -> ValueKind {
        self.inner.value_kind()
    }
    fn eval(&self, p: &[f64], z: f64) -> Complex64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.eval(p, z)
    }
    fn eval_many(&self, p: &[f64], zs: &[f64], out: &mut [Complex64]) {
        self.calls.fetch_add(zs.len(), Ordering::Relaxed);
        self.inner.eval_many(p, zs, out)
    }
}
