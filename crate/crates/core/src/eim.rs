//! Magic point empirical interpolation: offline greedy training and the
//! online interpolation / integration operators.
//!
//! Offline, every training parameter is evaluated once on the discrete domain
//! and the resulting snapshot matrix is turned into a residual matrix in
//! place. Each iteration picks the largest residual entry `(p*, z*)`, takes
//! the residual row of `p*` normalised to 1 at `z*` as the next basis function
//! `q_M`, and removes its contribution from every row with a rank-1 update.
//! The coefficient of `q_M` in the interpolant of `h_p` is exactly the
//! residual value `R_p(z*_M)` before the update, so after `M` steps the matrix
//! holds `h_p - I_M(h)(p, .)` for every training parameter.
//!
//! Online, the interpolant of `h_p` is `sum_j c_j q_j` with `B c = h_p(z*)`,
//! and the integral is `sum_m h_p(z*_m) w_m` with `Bᵀ w = s`,
//! `s_j = ∫ q_j`. Off the grid, `q_j` is evaluated through its expansion in
//! the magic snapshots `h_{p*_k}`, whose coefficients are accumulated during
//! training.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::family::{DiscreteDomain, DomainError, Interval, ParameterCloud, ParametricFamily, ValueKind};
use crate::linalg::{forward_substitution, leading_block, transpose_backward_substitution};
use crate::quadrature::{integrate_complex, QuadConfig, QuadError};
use crate::scalar::Scalar;

/// Relative width within which two candidate maxima count as tied. Ties go
/// to the lowest index in cloud or grid order.
pub const TIE_TOLERANCE: f64 = 1e3 * f64::EPSILON;

/// Default cap on `|cloud| * |grid|` snapshot entries.
pub const DEFAULT_ELEMENT_BUDGET: usize = 200_000_000;

/// Imaginary parts up to this (relative) size are accepted from real families.
const REAL_IMAG_SLACK: f64 = 1e-15;

#[derive(Debug, Error)]
pub enum EimError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("every snapshot vanishes on the grid")]
    AllSnapshotsZero,
    #[error("family returned a non-finite value for sample {sample} at z = {z}")]
    NonFiniteSnapshot { sample: usize, z: f64 },
    #[error("real-valued family returned imaginary part {im:e} for sample {sample} at z = {z}")]
    NonRealValue { sample: usize, z: f64, im: f64 },
    #[error("snapshot matrix of {requested} entries exceeds the budget of {budget}")]
    BudgetExceeded { requested: usize, budget: usize },
    #[error("parameter has dimension {got}, family expects {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("weight integral of basis function {basis} failed: {source}")]
    QuadratureNonConvergence {
        basis: usize,
        #[source]
        source: QuadError,
    },
    #[error("model has no quadrature weights")]
    MissingWeights,
    #[error("malformed model: {0}")]
    MalformedModel(String),
}

/// Why training stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ToleranceReached,
    MaxIterations,
    /// The next pivot fell below the arithmetic floor: the family is
    /// numerically spanned by the basis built so far.
    FamilyExhausted,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::ToleranceReached => "tolerance reached",
            StopReason::MaxIterations => "max_M reached",
            StopReason::FamilyExhausted => "family exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Stop once the discrete sup-residual is at or below this value.
    /// `None` disables the tolerance test.
    pub tol: Option<f64>,
    pub max_m: usize,
    pub element_budget: usize,
}

impl TrainConfig {
    pub fn new(tol: Option<f64>, max_m: usize) -> Self {
        Self {
            tol,
            max_m,
            element_budget: DEFAULT_ELEMENT_BUDGET,
        }
    }

    fn validate(&self) -> Result<(), EimError> {
        if self.max_m == 0 {
            return Err(EimError::InvalidConfig("max_M must be positive".into()));
        }
        if let Some(t) = self.tol {
            if !(t >= 0.0) || t.is_infinite() {
                return Err(EimError::InvalidConfig(format!(
                    "tolerance {t} is not a finite non-negative number"
                )));
            }
        }
        Ok(())
    }
}

/// A selected magic point: its coordinate and its index in the training grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagicPoint {
    pub z: f64,
    pub index: usize,
}

/// Integrals of the basis functions and the derived quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// `s_j = ∫ q_j(z) dz`.
    pub basis_integrals: Vec<Complex64>,
    /// `w_m = ∫ θ_m^M(z) dz`, i.e. the solution of `Bᵀ w = s`.
    pub weights: Vec<Complex64>,
    pub abs_tol: f64,
}

/// Raw contents of a trained model. All matrices are row-major `M * M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParts {
    pub family_tag: String,
    pub value_kind: ValueKind,
    pub domain: Interval,
    pub grid: Vec<f64>,
    pub magic_params: Vec<Vec<f64>>,
    pub magic_points: Vec<MagicPoint>,
    /// `B_{jm} = q_m(z*_j)`.
    pub b_matrix: Vec<Complex64>,
    /// Row `j` holds the coefficients of `q_j` in the magic snapshots.
    pub snapshot_coeffs: Vec<Complex64>,
    /// `r_m(z*_m)`, the unnormalised residual at each new magic point.
    pub pivots: Vec<Complex64>,
    /// Basis functions on the training grid; absent for models loaded from disk.
    pub basis_grid: Option<Vec<Vec<Complex64>>>,
    /// Sup-residual on cloud x grid after each iteration.
    pub history: Vec<f64>,
    pub tolerance: Option<f64>,
    pub max_m: usize,
    pub quadrature: Option<QuadratureRule>,
}

/// A trained magic point interpolation / integration model. Immutable; the
/// online operators only read it and are safe to call from many threads.
#[derive(Debug, Clone, PartialEq)]
pub struct MagicModel {
    parts: ModelParts,
}

#[derive(Debug, Clone)]
pub struct TrainingReport {
    pub model: MagicModel,
    pub residual_curve: Vec<(usize, f64)>,
    pub stop_reason: StopReason,
}

/// Deviations of `B` from the unit lower-triangular pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureCheck {
    pub max_upper: f64,
    pub max_diag_deviation: f64,
    pub max_entry: f64,
}

impl StructureCheck {
    pub fn is_unit_lower_triangular(&self, tol: f64) -> bool {
        self.max_upper <= tol && self.max_diag_deviation <= tol
    }
}

/// Greedy offline phase on a discrete cloud and grid.
pub fn train<F: ParametricFamily + ?Sized>(
    family: &F,
    cloud: &ParameterCloud,
    domain: &DiscreteDomain,
    config: &TrainConfig,
) -> Result<TrainingReport, EimError> {
    config.validate()?;
    if cloud.is_empty() {
        return Err(DomainError::EmptyCloud.into());
    }
    domain.check_within(family.domain())?;
    for s in cloud.samples() {
        if s.len() != family.param_dim() {
            return Err(EimError::DimensionMismatch {
                got: s.len(),
                expected: family.param_dim(),
            });
        }
    }
    let requested = cloud.len().saturating_mul(domain.count());
    if requested > config.element_budget {
        return Err(EimError::BudgetExceeded {
            requested,
            budget: config.element_budget,
        });
    }
    match family.value_kind() {
        ValueKind::Real => train_impl::<f64, F>(family, cloud, domain, config),
        ValueKind::Complex => train_impl::<Complex64, F>(family, cloud, domain, config),
    }
}

/// Largest modulus in `row` and its index, lowest index winning near-ties.
fn row_argmax<S: Scalar>(row: &[S]) -> (f64, usize) {
    let mut best = (row[0].modulus(), 0);
    for (j, v) in row.iter().enumerate().skip(1) {
        let m = v.modulus();
        if m > best.0 * (1.0 + TIE_TOLERANCE) && m > best.0 {
            best = (m, j);
        }
    }
    best
}

/// Sequential reduction over per-row maxima: `(row, column, value)`.
fn select(row_max: &[(f64, usize)]) -> (usize, usize, f64) {
    let mut best = (0, row_max[0].1, row_max[0].0);
    for (i, &(v, j)) in row_max.iter().enumerate().skip(1) {
        if v > best.2 * (1.0 + TIE_TOLERANCE) && v > best.2 {
            best = (i, j, v);
        }
    }
    best
}

fn train_impl<S: Scalar, F: ParametricFamily + ?Sized>(
    family: &F,
    cloud: &ParameterCloud,
    domain: &DiscreteDomain,
    config: &TrainConfig,
) -> Result<TrainingReport, EimError> {
    let grid = domain.points();
    let nz = grid.len();
    let np = cloud.len();
    let real = family.value_kind() == ValueKind::Real;

    // Snapshot matrix, overwritten by residuals as training proceeds.
    let mut residual: Vec<S> = vec![S::zero(); np * nz];
    residual
        .par_chunks_mut(nz)
        .enumerate()
        .try_for_each(|(i, row)| -> Result<(), EimError> {
            let mut buf = vec![Complex64::new(0.0, 0.0); nz];
            family.eval_many(&cloud.samples()[i], grid, &mut buf);
            for (k, (dst, v)) in row.iter_mut().zip(&buf).enumerate() {
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(EimError::NonFiniteSnapshot {
                        sample: i,
                        z: grid[k],
                    });
                }
                if real && v.im.abs() > REAL_IMAG_SLACK * v.re.abs().max(1.0) {
                    return Err(EimError::NonRealValue {
                        sample: i,
                        z: grid[k],
                        im: v.im,
                    });
                }
                *dst = S::from_complex(*v);
            }
            Ok(())
        })?;

    let mut row_max: Vec<(f64, usize)> = residual.par_chunks(nz).map(row_argmax).collect();
    let (_, _, snapshot_sup) = select(&row_max);
    if snapshot_sup == 0.0 {
        return Err(EimError::AllSnapshotsZero);
    }
    let pivot_floor = TIE_TOLERANCE * snapshot_sup;

    let mut selected_rows: Vec<usize> = Vec::new();
    let mut points: Vec<MagicPoint> = Vec::new();
    let mut basis: Vec<Vec<S>> = Vec::new();
    let mut gammas: Vec<Vec<S>> = Vec::new();
    let mut pivots: Vec<S> = Vec::new();
    // coeffs[j][p]: coefficient of q_j in the interpolant of h_p.
    let mut coeffs: Vec<Vec<S>> = Vec::new();
    let mut history: Vec<f64> = Vec::new();

    let stop_reason = loop {
        let (p_star, z_idx, value) = select(&row_max);
        if !points.is_empty()
            && (value < pivot_floor
                || selected_rows.contains(&p_star)
                || points.iter().any(|mp| mp.index == z_idx))
        {
            break StopReason::FamilyExhausted;
        }
        let m = points.len();
        let row = &residual[p_star * nz..(p_star + 1) * nz];
        let pivot = row[z_idx];
        let mut q: Vec<S> = row.iter().map(|&v| v / pivot).collect();
        q[z_idx] = S::one();

        // q_m = (h_{p*} - sum_{j<m} c_j(p*) q_j) / pivot, expanded in snapshots.
        let mut gamma = vec![S::zero(); m + 1];
        for (j, gj) in gammas.iter().enumerate() {
            let c = coeffs[j][p_star];
            for (k, g) in gj.iter().enumerate() {
                gamma[k] -= c * *g;
            }
        }
        gamma[m] = S::one();
        for g in gamma.iter_mut() {
            *g = *g / pivot;
        }

        let mut col = vec![S::zero(); np];
        residual
            .par_chunks_mut(nz)
            .zip(col.par_iter_mut())
            .zip(row_max.par_iter_mut())
            .for_each(|((r, c), rm)| {
                let a = r[z_idx];
                *c = a;
                if a != S::zero() {
                    for (x, qv) in r.iter_mut().zip(&q) {
                        *x -= a * *qv;
                    }
                }
                *rm = row_argmax(r);
            });

        selected_rows.push(p_star);
        points.push(MagicPoint {
            z: grid[z_idx],
            index: z_idx,
        });
        basis.push(q);
        gammas.push(gamma);
        pivots.push(pivot);
        coeffs.push(col);

        let (_, _, err) = select(&row_max);
        history.push(err);

        if config.tol.is_some_and(|t| err <= t) {
            break StopReason::ToleranceReached;
        }
        if points.len() >= config.max_m {
            break StopReason::MaxIterations;
        }
    };

    let big_m = points.len();
    let mut b_matrix = vec![Complex64::new(0.0, 0.0); big_m * big_m];
    for (j, mp) in points.iter().enumerate() {
        for (m, q) in basis.iter().enumerate() {
            b_matrix[j * big_m + m] = q[mp.index].to_complex();
        }
    }
    let mut snapshot_coeffs = vec![Complex64::new(0.0, 0.0); big_m * big_m];
    for (j, g) in gammas.iter().enumerate() {
        for (k, v) in g.iter().enumerate() {
            snapshot_coeffs[j * big_m + k] = v.to_complex();
        }
    }

    let parts = ModelParts {
        family_tag: family.tag().to_string(),
        value_kind: family.value_kind(),
        domain: family.domain(),
        grid: grid.to_vec(),
        magic_params: selected_rows
            .iter()
            .map(|&i| cloud.samples()[i].clone())
            .collect(),
        magic_points: points,
        b_matrix,
        snapshot_coeffs,
        pivots: pivots.iter().map(|p| p.to_complex()).collect(),
        basis_grid: Some(
            basis
                .iter()
                .map(|q| q.iter().map(|v| v.to_complex()).collect())
                .collect(),
        ),
        history: history.clone(),
        tolerance: config.tol,
        max_m: config.max_m,
        quadrature: None,
    };

    Ok(TrainingReport {
        model: MagicModel { parts },
        residual_curve: history.iter().enumerate().map(|(i, &r)| (i + 1, r)).collect(),
        stop_reason,
    })
}

impl MagicModel {
    /// Rebuilds a model from stored parts, checking dimensions.
    pub fn from_parts(parts: ModelParts) -> Result<Self, EimError> {
        let m = parts.magic_points.len();
        let bad = |what: &str| Err(EimError::MalformedModel(what.to_string()));
        if m == 0 {
            return bad("model has no basis functions");
        }
        if parts.magic_params.len() != m {
            return bad("magic parameter count differs from M");
        }
        if parts.b_matrix.len() != m * m {
            return bad("B is not M x M");
        }
        if parts.snapshot_coeffs.len() != m * m {
            return bad("snapshot coefficients are not M x M");
        }
        if parts.pivots.len() != m || parts.history.len() != m {
            return bad("pivot or history length differs from M");
        }
        if parts.grid.len() < 2 {
            return bad("grid has fewer than two points");
        }
        if parts.magic_points.iter().any(|p| p.index >= parts.grid.len()) {
            return bad("magic point index outside grid");
        }
        let dim = parts.magic_params[0].len();
        if parts.magic_params.iter().any(|p| p.len() != dim) {
            return bad("magic parameters have inconsistent dimension");
        }
        if let Some(basis) = &parts.basis_grid {
            if basis.len() != m || basis.iter().any(|q| q.len() != parts.grid.len()) {
                return bad("basis grid values have wrong shape");
            }
        }
        if let Some(rule) = &parts.quadrature {
            if rule.weights.len() != m || rule.basis_integrals.len() != m {
                return bad("weights length differs from M");
            }
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &ModelParts {
        &self.parts
    }

    pub fn into_parts(self) -> ModelParts {
        self.parts
    }

    /// Number of basis functions `M`.
    pub fn size(&self) -> usize {
        self.parts.magic_points.len()
    }

    pub fn magic_points(&self) -> &[MagicPoint] {
        &self.parts.magic_points
    }

    pub fn magic_params(&self) -> &[Vec<f64>] {
        &self.parts.magic_params
    }

    pub fn b_matrix(&self) -> &[Complex64] {
        &self.parts.b_matrix
    }

    pub fn grid(&self) -> &[f64] {
        &self.parts.grid
    }

    pub fn history(&self) -> &[f64] {
        &self.parts.history
    }

    pub fn family_tag(&self) -> &str {
        &self.parts.family_tag
    }

    pub fn quadrature(&self) -> Option<&QuadratureRule> {
        self.parts.quadrature.as_ref()
    }

    pub fn weights(&self) -> Option<&[Complex64]> {
        self.parts.quadrature.as_ref().map(|r| r.weights.as_slice())
    }

    /// Returns a copy of the model carrying `rule`.
    pub fn with_quadrature(mut self, rule: QuadratureRule) -> Result<Self, EimError> {
        if rule.weights.len() != self.size() || rule.basis_integrals.len() != self.size() {
            return Err(EimError::MalformedModel("weights length differs from M".into()));
        }
        self.parts.quadrature = Some(rule);
        Ok(self)
    }

    fn check_param<F: ParametricFamily + ?Sized>(&self, family: &F, p: &[f64]) -> Result<(), EimError> {
        if p.len() != family.param_dim() {
            return Err(EimError::DimensionMismatch {
                got: p.len(),
                expected: family.param_dim(),
            });
        }
        Ok(())
    }

    /// `h_p` at the magic points: exactly `M` family evaluations.
    pub fn values_at_magic_points<F: ParametricFamily + ?Sized>(
        &self,
        family: &F,
        p: &[f64],
    ) -> Vec<Complex64> {
        self.parts
            .magic_points
            .iter()
            .map(|mp| family.eval(p, mp.z))
            .collect()
    }

    /// Coefficients `c` of `h_p` in the basis `q_1..q_M`, from `B c = h_p(z*)`.
    pub fn interpolation_coefficients<F: ParametricFamily + ?Sized>(
        &self,
        family: &F,
        p: &[f64],
    ) -> Result<Vec<Complex64>, EimError> {
        self.check_param(family, p)?;
        let h = self.values_at_magic_points(family, p);
        Ok(forward_substitution(&self.parts.b_matrix, self.size(), &h))
    }

    /// `q_1(z) .. q_M(z)` through the snapshot expansion of each `q_j`.
    pub fn basis_values<F: ParametricFamily + ?Sized>(&self, family: &F, z: f64) -> Vec<Complex64> {
        let m = self.size();
        let snaps: Vec<Complex64> = self
            .parts
            .magic_params
            .iter()
            .map(|p| family.eval(p, z))
            .collect();
        (0..m).map(|j| self.combine_row(j, &snaps)).collect()
    }

    fn combine_row(&self, j: usize, snaps: &[Complex64]) -> Complex64 {
        let m = self.size();
        let row = &self.parts.snapshot_coeffs[j * m..j * m + j + 1];
        row.iter().zip(snaps).map(|(g, h)| g * h).sum()
    }

    /// Evaluates `q_j` (zero-based) at `z` using only the first `j + 1` snapshots.
    pub fn basis_value<F: ParametricFamily + ?Sized>(&self, family: &F, j: usize, z: f64) -> Complex64 {
        let snaps: Vec<Complex64> = self.parts.magic_params[..=j]
            .iter()
            .map(|p| family.eval(p, z))
            .collect();
        self.combine_row(j, &snaps)
    }

    /// `I_M(h)(p, z)` for every `z` in `z_query`.
    pub fn interpolate<F: ParametricFamily + ?Sized>(
        &self,
        family: &F,
        p: &[f64],
        z_query: &[f64],
    ) -> Result<Vec<Complex64>, EimError> {
        let c = self.interpolation_coefficients(family, p)?;
        Ok(z_query
            .iter()
            .map(|&z| {
                let q = self.basis_values(family, z);
                c.iter().zip(&q).map(|(a, b)| a * b).sum()
            })
            .collect())
    }

    /// Integrates every basis function over the family domain and solves
    /// `Bᵀ w = s` for the weights.
    ///
    /// The coefficient of `q_j` in any interpolant is bounded by the pivot
    /// `|r_j(z*_j)|`, so `s_j` only has to be accurate to
    /// `abs_tol / |r_j(z*_j)|` for the integration rule to be accurate to
    /// `abs_tol`. Late basis functions are normalised residuals of order
    /// rounding noise, and requiring `abs_tol` on their integrals directly
    /// would never converge.
    pub fn compute_quadrature<F: ParametricFamily + ?Sized>(
        &self,
        family: &F,
        quad: &QuadConfig,
    ) -> Result<QuadratureRule, EimError> {
        if let Some(t) = self.parts.tolerance {
            if quad.abs_tol > t / 10.0 && t > 0.0 {
                return Err(EimError::InvalidConfig(format!(
                    "weight quadrature tolerance {:e} exceeds training tolerance / 10 = {:e}",
                    quad.abs_tol,
                    t / 10.0
                )));
            }
        }
        let dom = self.parts.domain;
        let s: Vec<Complex64> = (0..self.size())
            .into_par_iter()
            .map(|j| {
                let scale = self.parts.pivots[j].norm().max(f64::MIN_POSITIVE);
                integrate_complex(
                    |z| self.basis_value(family, j, z),
                    dom.lo,
                    dom.hi,
                    quad.abs_tol / scale,
                    quad.rel_tol,
                    quad.max_evals,
                )
                .map(|r| r.value)
                .map_err(|e| EimError::QuadratureNonConvergence { basis: j, source: e })
            })
            .collect::<Result<_, _>>()?;
        let weights = transpose_backward_substitution(&self.parts.b_matrix, self.size(), &s);
        Ok(QuadratureRule {
            basis_integrals: s,
            weights,
            abs_tol: quad.abs_tol,
        })
    }

    /// Quadrature weights `w_m = ∫ θ_m^M`.
    pub fn quad_weights<F: ParametricFamily + ?Sized>(
        &self,
        family: &F,
        quad: &QuadConfig,
    ) -> Result<Vec<Complex64>, EimError> {
        Ok(self.compute_quadrature(family, quad)?.weights)
    }

    /// Weights of the rule truncated to the first `m` basis functions.
    pub fn truncated_weights(&self, m: usize) -> Result<Vec<Complex64>, EimError> {
        let rule = self.quadrature().ok_or(EimError::MissingWeights)?;
        assert!(m >= 1 && m <= self.size(), "truncation order out of range");
        let block = leading_block(&self.parts.b_matrix, self.size(), m);
        Ok(transpose_backward_substitution(
            &block,
            m,
            &rule.basis_integrals[..m],
        ))
    }

    /// `sum_m h_p(z*_m) w_m`.
    pub fn integrate<F: ParametricFamily + ?Sized>(
        &self,
        weights: &[Complex64],
        family: &F,
        p: &[f64],
    ) -> Result<Complex64, EimError> {
        self.check_param(family, p)?;
        if weights.len() > self.size() || weights.is_empty() {
            return Err(EimError::MalformedModel("weights length differs from M".into()));
        }
        Ok(self.parts.magic_points[..weights.len()]
            .iter()
            .zip(weights)
            .map(|(mp, w)| family.eval(p, mp.z) * w)
            .sum())
    }

    /// Integral with the model's stored weights.
    pub fn integrate_stored<F: ParametricFamily + ?Sized>(
        &self,
        family: &F,
        p: &[f64],
    ) -> Result<Complex64, EimError> {
        let w = self.weights().ok_or(EimError::MissingWeights)?;
        self.integrate(w, family, p)
    }

    /// Matrix `β` (row `m`) with `θ_m = sum_j β_{mj} h_{p*_j}`, from `Bᵀ β = Γ`.
    pub fn snapshot_coefficients(&self) -> Vec<Vec<Complex64>> {
        let m = self.size();
        let mut beta = vec![vec![Complex64::new(0.0, 0.0); m]; m];
        for k in 0..m {
            let col: Vec<Complex64> = (0..m).map(|j| self.parts.snapshot_coeffs[j * m + k]).collect();
            let x = transpose_backward_substitution(&self.parts.b_matrix, m, &col);
            for (row, v) in beta.iter_mut().zip(x) {
                row[k] = v;
            }
        }
        beta
    }

    /// Discrete analogue of the double integral over parameter and domain:
    /// `sum_m [sum_i a_i h_{p_i}(z*_m)] w_m`.
    pub fn integrate_double<F: ParametricFamily + ?Sized>(
        &self,
        weights: &[Complex64],
        family: &F,
        param_nodes: &[Vec<f64>],
        param_weights: &[f64],
    ) -> Result<Complex64, EimError> {
        if param_nodes.len() != param_weights.len() {
            return Err(EimError::InvalidConfig(
                "parameter nodes and weights differ in length".into(),
            ));
        }
        if weights.len() != self.size() {
            return Err(EimError::MalformedModel("weights length differs from M".into()));
        }
        for p in param_nodes {
            self.check_param(family, p)?;
        }
        Ok(self
            .parts
            .magic_points
            .iter()
            .zip(weights)
            .map(|(mp, w)| {
                let inner: Complex64 = param_nodes
                    .iter()
                    .zip(param_weights)
                    .map(|(p, a)| family.eval(p, mp.z) * *a)
                    .sum();
                inner * w
            })
            .sum())
    }

    /// Measures how far `B` is from unit lower triangular.
    pub fn structure_check(&self) -> StructureCheck {
        let m = self.size();
        let mut out = StructureCheck {
            max_upper: 0.0,
            max_diag_deviation: 0.0,
            max_entry: 0.0,
        };
        for j in 0..m {
            for k in 0..m {
                let v = self.parts.b_matrix[j * m + k];
                out.max_entry = out.max_entry.max(v.norm());
                if k > j {
                    out.max_upper = out.max_upper.max(v.norm());
                } else if k == j {
                    out.max_diag_deviation = out.max_diag_deviation.max((v - 1.0).norm());
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::FnFamily;
    use std::f64::consts::PI;

    fn sine_family() -> FnFamily<impl Fn(&[f64], f64) -> Complex64 + Send + Sync> {
        FnFamily::new(
            "sine",
            1,
            Interval::new(0.0, PI).unwrap(),
            ValueKind::Real,
            |p, z| Complex64::new(p[0] * z.sin(), 0.0),
        )
    }

    fn cloud_1d(vals: &[f64], lo: f64, hi: f64) -> ParameterCloud {
        ParameterCloud::from_samples(
            &[Interval::new(lo, hi).unwrap()],
            vals.iter().map(|v| vec![*v]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn rank_one_family_stops_after_one_term() {
        let fam = sine_family();
        let grid = DiscreteDomain::uniform(fam.domain(), 100).unwrap();
        let cloud = cloud_1d(&[1.0, 2.0, 3.0], 0.0, 3.0);
        let rep = train(&fam, &cloud, &grid, &TrainConfig::new(Some(1e-12), 10)).unwrap();
        assert_eq!(rep.model.size(), 1);
        assert!(rep.residual_curve.last().unwrap().1 <= 1e-15);
        assert_eq!(rep.model.magic_params()[0], vec![3.0]);
    }

    #[test]
    fn all_zero_snapshots_are_rejected() {
        let fam = FnFamily::new(
            "zero",
            1,
            Interval::new(0.0, 1.0).unwrap(),
            ValueKind::Real,
            |_, _| Complex64::new(0.0, 0.0),
        );
        let grid = DiscreteDomain::uniform(fam.domain(), 10).unwrap();
        let cloud = cloud_1d(&[0.0, 1.0], 0.0, 1.0);
        let err = train(&fam, &cloud, &grid, &TrainConfig::new(Some(1e-12), 10)).unwrap_err();
        assert!(matches!(err, EimError::AllSnapshotsZero));
    }

    #[test]
    fn non_finite_and_non_real_values_are_rejected() {
        let grid = DiscreteDomain::uniform(Interval::new(0.0, 1.0).unwrap(), 10).unwrap();
        let cloud = cloud_1d(&[0.0, 1.0], 0.0, 1.0);
        let nan = FnFamily::new(
            "nan",
            1,
            Interval::new(0.0, 1.0).unwrap(),
            ValueKind::Real,
            |p, _| Complex64::new(if p[0] > 0.5 { f64::NAN } else { 1.0 }, 0.0),
        );
        assert!(matches!(
            train(&nan, &cloud, &grid, &TrainConfig::new(None, 3)),
            Err(EimError::NonFiniteSnapshot { sample: 1, .. })
        ));
        let cplx = FnFamily::new(
            "c",
            1,
            Interval::new(0.0, 1.0).unwrap(),
            ValueKind::Real,
            |_, z| Complex64::new(1.0, z),
        );
        assert!(matches!(
            train(&cplx, &cloud, &grid, &TrainConfig::new(None, 3)),
            Err(EimError::NonRealValue { .. })
        ));
    }

    #[test]
    fn budget_guard() {
        let fam = sine_family();
        let grid = DiscreteDomain::uniform(fam.domain(), 100).unwrap();
        let cloud = cloud_1d(&[1.0, 2.0, 3.0], 0.0, 3.0);
        let mut cfg = TrainConfig::new(Some(1e-12), 10);
        cfg.element_budget = 299;
        assert!(matches!(
            train(&fam, &cloud, &grid, &cfg),
            Err(EimError::BudgetExceeded { requested: 300, .. })
        ));
    }

    #[test]
    fn grid_must_lie_in_family_domain() {
        let fam = sine_family();
        let grid = DiscreteDomain::uniform(Interval::new(0.0, 4.0).unwrap(), 10).unwrap();
        let cloud = cloud_1d(&[1.0], 0.0, 3.0);
        assert!(matches!(
            train(&fam, &cloud, &grid, &TrainConfig::new(None, 2)),
            Err(EimError::Domain(_))
        ));
    }

    #[test]
    fn max_m_stop_without_tolerance() {
        let fam = FnFamily::new(
            "exp",
            1,
            Interval::new(-1.0, 1.0).unwrap(),
            ValueKind::Real,
            |p, z| Complex64::new((p[0] * z).exp(), 0.0),
        );
        let grid = DiscreteDomain::chebyshev(fam.domain(), 200).unwrap();
        let vals: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
        let cloud = cloud_1d(&vals, 0.0, 1.0);
        let rep = train(&fam, &cloud, &grid, &TrainConfig::new(None, 5)).unwrap();
        assert_eq!(rep.model.size(), 5);
        assert_eq!(rep.stop_reason, StopReason::MaxIterations);
    }

    #[test]
    fn constant_family_weight_is_interval_length() {
        let fam = FnFamily::new(
            "const",
            1,
            Interval::new(0.0, 2.0).unwrap(),
            ValueKind::Real,
            |p, _| Complex64::new(p[0], 0.0),
        );
        let grid = DiscreteDomain::uniform(fam.domain(), 20).unwrap();
        let cloud = cloud_1d(&[1.0, 3.0, 5.0], 1.0, 5.0);
        let rep = train(&fam, &cloud, &grid, &TrainConfig::new(Some(1e-12), 4)).unwrap();
        assert_eq!(rep.model.size(), 1);
        let w = rep.model.quad_weights(&fam, &QuadConfig::new(1e-14)).unwrap();
        assert!((w[0].re - 2.0).abs() < 1e-14);
        let v = rep.model.integrate(&w, &fam, &[5.0]).unwrap();
        assert!((v.re - 10.0).abs() < 1e-13);
        let beta = rep.model.snapshot_coefficients();
        assert!((beta[0][0].re - 1.0 / 5.0).abs() < 1e-16);
    }

    #[test]
    fn integrate_requires_matching_dimension() {
        let fam = sine_family();
        let grid = DiscreteDomain::uniform(fam.domain(), 50).unwrap();
        let cloud = cloud_1d(&[1.0, 2.0], 0.0, 3.0);
        let rep = train(&fam, &cloud, &grid, &TrainConfig::new(Some(1e-12), 4)).unwrap();
        let w = vec![Complex64::new(1.0, 0.0)];
        assert!(matches!(
            rep.model.integrate(&w, &fam, &[1.0, 2.0]),
            Err(EimError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            rep.model.truncated_weights(1),
            Err(EimError::MissingWeights)
        ));
    }

    #[test]
    fn tie_break_prefers_lowest_index() {
        assert_eq!(row_argmax(&[1.0, -1.0, 0.5]), (1.0, 0));
        assert_eq!(row_argmax(&[0.0, 2.0, 2.0 * (1.0 + 1e-15)]), (2.0, 1));
        assert_eq!(select(&[(1.0, 3), (1.0, 1), (2.0, 0)]), (2, 0, 2.0));
    }
}
