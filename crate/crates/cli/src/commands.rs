//! The `train`, `eval`, `study`, `bounds` and `info` subcommands.

use std::cmp::Ordering;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use magicint::analysis::{
    bound_curve, explicit_constant, rho_from_eta, BernsteinEllipse, BoundPoint, BoundSpec,
};
use magicint::family::sample_box;
use magicint::models::FamilyId;
use magicint::{train, DiscreteDomain, ParameterCloud, ParametricFamily, QuadConfig, TrainConfig};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{GridKind, RunConfig, SignalKind, FAMILY_KEYS};
use crate::error::CliError;
use crate::family::{build_family, oracle, outside_box, Counting, DynFamily};
use crate::model_file::{write_atomic, ModelFile};

/// Oracle values below this modulus get no relative error.
pub const REL_ERROR_FLOOR: f64 = 1e-3;

/// Shortest round-trip decimal form.
fn num(v: f64) -> String {
    format!("{v:e}")
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    write_atomic(path, &csv_bytes(&header, rows)?)?;
    Ok(())
}

fn param_names(family: FamilyId, dim: usize) -> Vec<String> {
    match family {
        FamilyId::Cgmy => ["C", "G", "M", "Y", "x"].iter().map(|s| s.to_string()).collect(),
        FamilyId::StftGauss => ["b", "sigma", "z"].iter().map(|s| s.to_string()).collect(),
        FamilyId::ExpTest => (0..dim).map(|i| format!("p{i}")).collect(),
    }
}

pub fn model_path(cfg: &RunConfig) -> PathBuf {
    cfg.model.clone().unwrap_or_else(|| cfg.out.join("model.mpi"))
}

/// Samples the cloud, trains, and integrates the basis.
pub fn train_model(cfg: &RunConfig) -> Result<(DynFamily, ModelFile), CliError> {
    let family = build_family(cfg)?;
    let cloud = ParameterCloud::sample_uniform(&cfg.bounds, cfg.cloud_size, cfg.seed)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let grid = match cfg.grid {
        GridKind::Uniform => DiscreteDomain::uniform(family.domain(), cfg.grid_size),
        GridKind::Chebyshev => DiscreteDomain::chebyshev(family.domain(), cfg.grid_size),
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let report = train(
        family.as_ref(),
        &cloud,
        &grid,
        &TrainConfig::new(cfg.tol, cfg.max_m),
    )?;
    let rule = report
        .model
        .compute_quadrature(family.as_ref(), &QuadConfig::new(cfg.weight_tol()))?;
    let model = report.model.with_quadrature(rule)?;
    let file = ModelFile {
        model,
        stop_reason: report.stop_reason.as_str().to_string(),
        config: cfg.training_pairs(),
    };
    Ok((family, file))
}

pub fn cmd_train(cfg: &RunConfig, log: &mut dyn Write) -> Result<ModelFile, CliError> {
    let start = Instant::now();
    let (_, file) = train_model(cfg)?;
    let path = model_path(cfg);
    file.save(&path)?;
    let rows: Vec<Vec<String>> = file
        .model
        .history()
        .iter()
        .enumerate()
        .map(|(i, r)| vec![(i + 1).to_string(), num(*r)])
        .collect();
    let csv_path = cfg.out.join("residuals.csv");
    write_csv(&csv_path, &["M", "sup_residual"], &rows)?;
    writeln!(log, "family       {}", cfg.family)?;
    writeln!(log, "M            {}", file.model.size())?;
    writeln!(log, "stop reason  {}", file.stop_reason)?;
    writeln!(
        log,
        "residual     {:e}",
        file.model.history().last().copied().unwrap_or(f64::NAN)
    )?;
    writeln!(log, "weight tol   {:e}", cfg.weight_tol())?;
    writeln!(log, "elapsed      {:.2?}", start.elapsed())?;
    writeln!(log, "model        {}", path.display())?;
    writeln!(log, "residuals    {}", csv_path.display())?;
    Ok(file)
}

/// Loads a model file and rebuilds its configuration and family. Settings in
/// `overrides` are applied on top; they may not change the family keys.
pub fn load_model(
    path: &Path,
    overrides: &[(String, String)],
) -> Result<(RunConfig, DynFamily, ModelFile), CliError> {
    let file = ModelFile::load(path)?;
    let family_id: FamilyId = file
        .config
        .iter()
        .find(|(k, _)| k == "family")
        .map(|(_, v)| v.as_str())
        .unwrap_or(file.model.family_tag())
        .parse()
        .map_err(|e: String| CliError::Usage(e))?;
    let mut cfg = RunConfig::defaults(family_id);
    cfg.apply(&file.config)?;
    let trained = cfg.clone();
    cfg.apply(overrides)?;
    if cfg.family != trained.family
        || cfg.bounds != trained.bounds
        || cfg.omega != trained.omega
        || cfg.signal != trained.signal
    {
        return Err(CliError::Usage(format!(
            "settings {} are fixed by the model in {}",
            FAMILY_KEYS.join(", "),
            path.display()
        )));
    }
    cfg.model = Some(path.to_path_buf());
    let family = build_family(&cfg)?;
    if family.tag() != file.model.family_tag() {
        return Err(CliError::Usage(format!(
            "model was trained on '{}', configuration describes '{}'",
            file.model.family_tag(),
            family.tag()
        )));
    }
    Ok((cfg, family, file))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutcome {
    pub value: Complex64,
    /// Family evaluations spent on the integral.
    pub evaluations: usize,
    pub extrapolated: bool,
    pub oracle: Option<Complex64>,
}

/// `sum_m w_m h_p(z*_m)`, counting family evaluations.
pub fn evaluate(
    file: &ModelFile,
    family: &dyn ParametricFamily,
    bounds: &[magicint::Interval],
    p: &[f64],
) -> Result<EvalOutcome, CliError> {
    if p.len() != family.param_dim() {
        return Err(CliError::Usage(format!(
            "parameter has {} coordinates, {} expects {}",
            p.len(),
            family.tag(),
            family.param_dim()
        )));
    }
    let counted = Counting::new(family);
    let value = file.model.integrate_stored(&counted, p)?;
    Ok(EvalOutcome {
        value,
        evaluations: counted.calls(),
        extrapolated: outside_box(bounds, p),
        oracle: None,
    })
}

pub fn cmd_eval(
    cfg: &RunConfig,
    family: &dyn ParametricFamily,
    file: &ModelFile,
    p: &[f64],
    with_oracle: bool,
    log: &mut dyn Write,
) -> Result<EvalOutcome, CliError> {
    let mut out = evaluate(file, family, &cfg.bounds, p)?;
    let fmt = |v: Complex64| {
        if v.im == 0.0 {
            format!("{:e}", v.re)
        } else {
            format!("{:e} {:+e}i", v.re, v.im)
        }
    };
    let shown: Vec<String> = p.iter().map(|x| x.to_string()).collect();
    writeln!(log, "family       {}", cfg.family)?;
    writeln!(log, "param        {}", shown.join(","))?;
    writeln!(log, "value        {}", fmt(out.value))?;
    writeln!(log, "evaluations  {}", out.evaluations)?;
    if out.extrapolated {
        writeln!(log, "extrapolation: parameter lies outside the trained box")?;
    }
    if with_oracle {
        let o = oracle(cfg, family, p)?;
        let abs = (out.value - o).norm();
        writeln!(log, "oracle       {}", fmt(o))?;
        writeln!(log, "oracle tol   {:e}", cfg.oracle_tol)?;
        writeln!(log, "abs error    {abs:e}")?;
        if o.norm() > 0.0 {
            writeln!(log, "rel error    {:e}", abs / o.norm())?;
        }
        out.oracle = Some(o);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerM {
    pub m: usize,
    pub in_sample: f64,
    /// `None` when there are no test samples.
    pub out_of_sample: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub param: Vec<f64>,
    pub value: Complex64,
    pub oracle: Complex64,
    pub abs_error: f64,
    pub rel_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub per_m: Vec<PerM>,
    pub samples: Vec<SampleRow>,
    pub magic_params: Vec<Vec<f64>>,
    /// Sample indices sorted from smallest to largest absolute error.
    pub ranking: Vec<usize>,
}

impl StudyReport {
    pub fn final_out_of_sample(&self) -> Option<f64> {
        self.per_m.last().and_then(|r| r.out_of_sample)
    }
}

/// Out-of-sample study of a trained model against direct quadrature.
pub fn run_study(
    cfg: &RunConfig,
    family: &dyn ParametricFamily,
    file: &ModelFile,
) -> Result<StudyReport, CliError> {
    if cfg.test_seed == cfg.seed {
        return Err(CliError::Usage(format!(
            "test_seed must differ from the training seed {}",
            cfg.seed
        )));
    }
    let model = &file.model;
    let big_m = model.size();
    let tests = if cfg.n_test == 0 {
        Vec::new()
    } else {
        sample_box(&cfg.bounds, cfg.n_test, cfg.test_seed).map_err(|e| CliError::Usage(e.to_string()))?
    };
    let oracles: Vec<Complex64> = tests
        .par_iter()
        .map(|p| oracle(cfg, family, p))
        .collect::<Result<_, _>>()?;
    let h: Vec<Vec<Complex64>> = tests
        .par_iter()
        .map(|p| model.values_at_magic_points(family, p))
        .collect();

    let mut per_m = Vec::with_capacity(big_m);
    let mut final_values = vec![Complex64::new(0.0, 0.0); tests.len()];
    for m in 1..=big_m {
        let w = model.truncated_weights(m)?;
        let mut worst: Option<f64> = None;
        for (s, hs) in h.iter().enumerate() {
            let v: Complex64 = hs[..m].iter().zip(&w).map(|(a, b)| a * b).sum();
            let e = (v - oracles[s]).norm();
            worst = Some(worst.map_or(e, |x: f64| x.max(e)));
            if m == big_m {
                final_values[s] = v;
            }
        }
        per_m.push(PerM {
            m,
            in_sample: model.history()[m - 1],
            out_of_sample: worst,
        });
    }

    let samples: Vec<SampleRow> = tests
        .into_iter()
        .zip(final_values)
        .zip(&oracles)
        .map(|((param, value), &o)| {
            let abs_error = (value - o).norm();
            SampleRow {
                param,
                value,
                oracle: o,
                abs_error,
                rel_error: (o.norm() > REL_ERROR_FLOOR).then(|| abs_error / o.norm()),
            }
        })
        .collect();
    let mut ranking: Vec<usize> = (0..samples.len()).collect();
    ranking.sort_by(|&a, &b| {
        samples[a]
            .abs_error
            .partial_cmp(&samples[b].abs_error)
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    Ok(StudyReport {
        per_m,
        samples,
        magic_params: model.magic_params().to_vec(),
        ranking,
    })
}

/// Writes `error_decay.csv`, `samples.csv` and `scatter.csv` into `dir`.
pub fn write_study(report: &StudyReport, family: FamilyId, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let decay: Vec<Vec<String>> = report
        .per_m
        .iter()
        .map(|r| vec![r.m.to_string(), num(r.in_sample), opt(r.out_of_sample)])
        .collect();
    let dim = report.magic_params.first().map_or(0, |p| p.len());
    let names = param_names(family, dim);

    let mut header: Vec<&str> = vec!["index"];
    header.extend(names.iter().map(|s| s.as_str()));
    header.extend([
        "value_re",
        "value_im",
        "oracle_re",
        "oracle_im",
        "abs_error",
        "rel_error",
    ]);
    let samples: Vec<Vec<String>> = report
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut row = vec![i.to_string()];
            row.extend(s.param.iter().map(|x| num(*x)));
            row.extend([
                num(s.value.re),
                num(s.value.im),
                num(s.oracle.re),
                num(s.oracle.im),
                num(s.abs_error),
                opt(s.rel_error),
            ]);
            row
        })
        .collect();

    let mut scatter_header: Vec<&str> = vec!["kind", "rank"];
    scatter_header.extend(names.iter().map(|s| s.as_str()));
    scatter_header.push("abs_error");
    let mut scatter: Vec<Vec<String>> = Vec::new();
    for (j, p) in report.magic_params.iter().enumerate() {
        let mut row = vec!["magic".to_string(), (j + 1).to_string()];
        row.extend(p.iter().map(|x| num(*x)));
        row.push(String::new());
        scatter.push(row);
    }
    let n = report.ranking.len().min(10);
    let best = report.ranking.iter().take(n);
    let worst = report.ranking.iter().rev().take(n);
    for (kind, idx) in [
        ("best", best.collect::<Vec<_>>()),
        ("worst", worst.collect::<Vec<_>>()),
    ] {
        for (rank, &i) in idx.into_iter().enumerate() {
            let s = &report.samples[i];
            let mut row = vec![kind.to_string(), (rank + 1).to_string()];
            row.extend(s.param.iter().map(|x| num(*x)));
            row.push(num(s.abs_error));
            scatter.push(row);
        }
    }

    let paths = vec![
        dir.join("error_decay.csv"),
        dir.join("samples.csv"),
        dir.join("scatter.csv"),
    ];
    write_csv(
        &paths[0],
        &["M", "in_sample_residual", "out_of_sample_linf"],
        &decay,
    )?;
    write_csv(&paths[1], &header, &samples)?;
    write_csv(&paths[2], &scatter_header, &scatter)?;
    Ok(paths)
}

pub fn cmd_study(
    cfg: &RunConfig,
    family: &dyn ParametricFamily,
    file: &ModelFile,
    log: &mut dyn Write,
) -> Result<StudyReport, CliError> {
    let start = Instant::now();
    let report = run_study(cfg, family, file)?;
    let paths = write_study(&report, cfg.family, &cfg.out)?;
    writeln!(log, "family        {}", cfg.family)?;
    writeln!(log, "M             {}", file.model.size())?;
    writeln!(
        log,
        "test samples  {} (seed {})",
        report.samples.len(),
        cfg.test_seed
    )?;
    writeln!(log, "oracle tol    {:e}", cfg.oracle_tol)?;
    if let (Some(first), Some(last)) = (
        report.per_m.first().and_then(|r| r.out_of_sample),
        report.final_out_of_sample(),
    ) {
        writeln!(log, "{:<14}{first:e}", "L∞ at M = 1")?;
        writeln!(log, "{:<14}{last:e}", format!("L∞ at M = {}", file.model.size()))?;
    }
    writeln!(log, "elapsed       {:.2?}", start.elapsed())?;
    for p in paths {
        writeln!(log, "wrote         {}", p.display())?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundsOutcome {
    Curve {
        spec: BoundSpec,
        points: Vec<BoundPoint>,
        /// Measured sup-residuals of a loaded model, aligned by `M`.
        measured: Vec<f64>,
    },
    Inapplicable {
        rho: f64,
        reason: String,
    },
}

/// Largest ellipse parameter at which the family is analytic in `z`, when
/// that is limited by a strip of analyticity.
fn analytic_rho_limit(cfg: &RunConfig, length: f64) -> Option<(f64, String)> {
    match cfg.family {
        FamilyId::Cgmy => {
            // Branch points of (M - iz)^Y and (G + iz)^Y sit at -iM and iG.
            let eta = cfg.bounds[1].lo.min(cfg.bounds[2].lo);
            let rho = rho_from_eta(eta, length).ok()?;
            Some((rho, format!("the integrands share only the strip |Im z| < {eta}")))
        }
        FamilyId::StftGauss if cfg.signal == SignalKind::Lorentz => {
            let rho = rho_from_eta(1.0, length).ok()?;
            Some((rho, "the signal has poles at ±i".to_string()))
        }
        _ => None,
    }
}

pub fn compute_bounds(cfg: &RunConfig, measured: &[f64]) -> Result<BoundsOutcome, CliError> {
    let family = build_family(cfg)?;
    let omega = family.domain();
    let limit = analytic_rho_limit(cfg, omega.length());
    let rho = match (cfg.rho, cfg.eta) {
        (Some(r), _) => r,
        (None, Some(eta)) => rho_from_eta(eta, omega.length()).map_err(|e| CliError::Usage(e.to_string()))?,
        (None, None) => match &limit {
            Some((r, _)) => *r,
            None => return Err(CliError::Usage("bounds needs --rho or --eta".into())),
        },
    };
    if let Some((r_max, why)) = &limit {
        if rho > *r_max {
            return Ok(BoundsOutcome::Inapplicable {
                rho,
                reason: format!("{why}, so no Bernstein ellipse beyond ρ = {r_max:.6} is available"),
            });
        }
    }
    if !(rho > 4.0) {
        return Ok(BoundsOutcome::Inapplicable {
            rho,
            reason: limit.map_or_else(
                || "the exponential bound needs ρ > 4".to_string(),
                |(_, why)| format!("{why}; the exponential bound needs ρ > 4"),
            ),
        });
    }
    let c = match (cfg.bound_c, cfg.family) {
        (Some(c), _) => c,
        (None, FamilyId::ExpTest) => {
            let p = cfg.bounds[0];
            let e = BernsteinEllipse::new(omega, rho).map_err(|e| CliError::Usage(e.to_string()))?;
            // |e^{pz}| = e^{p Re z}; the larger endpoint of p dominates.
            let sup = e.sup_on_boundary(|z| (p.lo * z.re).max(p.hi * z.re).exp(), 20_000);
            explicit_constant(rho, sup, 1.0)
        }
        (None, _) => return Err(CliError::Usage("bounds needs --bound-c for this family".into())),
    };
    let spec = BoundSpec::new(rho, c, omega.length()).map_err(|e| CliError::Usage(e.to_string()))?;
    let m_max = measured.len().max(cfg.max_m);
    Ok(BoundsOutcome::Curve {
        spec,
        points: bound_curve(&spec, m_max),
        measured: measured.to_vec(),
    })
}

pub fn cmd_bounds(cfg: &RunConfig, measured: &[f64], log: &mut dyn Write) -> Result<BoundsOutcome, CliError> {
    let outcome = compute_bounds(cfg, measured)?;
    match &outcome {
        BoundsOutcome::Inapplicable { rho, reason } => {
            writeln!(
                log,
                "notice: bound not applicable for {} (ρ = {rho:.6}): {reason}",
                cfg.family
            )?;
        }
        BoundsOutcome::Curve {
            spec,
            points,
            measured,
        } => {
            let rows: Vec<Vec<String>> = points
                .iter()
                .map(|b| {
                    vec![
                        b.m.to_string(),
                        num(b.interpolation),
                        num(b.integration),
                        measured.get(b.m - 1).map(|v| num(*v)).unwrap_or_default(),
                    ]
                })
                .collect();
            let path = cfg.out.join("bounds.csv");
            write_csv(
                &path,
                &[
                    "M",
                    "interpolation_bound",
                    "integration_bound",
                    "measured_residual",
                ],
                &rows,
            )?;
            writeln!(log, "rho          {}", spec.rho)?;
            writeln!(log, "C            {:e}", spec.c)?;
            writeln!(log, "measure      {}", spec.measure_mass)?;
            let dominated = measured.iter().zip(points).all(|(r, b)| *r <= b.interpolation);
            if !measured.is_empty() {
                writeln!(log, "dominates    {dominated}")?;
            }
            writeln!(log, "wrote        {}", path.display())?;
        }
    }
    Ok(outcome)
}

pub fn cmd_info(cfg: &RunConfig, file: Option<&ModelFile>, log: &mut dyn Write) -> Result<(), CliError> {
    for (k, v) in cfg.training_pairs() {
        writeln!(log, "{k:<12} {v}")?;
    }
    writeln!(log, "{:<12} {}", "test_seed", cfg.test_seed)?;
    writeln!(log, "{:<12} {}", "n_test", cfg.n_test)?;
    writeln!(log, "{:<12} {:e}", "oracle_tol", cfg.oracle_tol)?;
    if let Some(f) = file {
        let m = &f.model;
        writeln!(log, "--- model")?;
        writeln!(log, "{:<12} {}", "family", m.family_tag())?;
        writeln!(log, "{:<12} {}", "M", m.size())?;
        writeln!(log, "{:<12} {}", "stop reason", f.stop_reason)?;
        writeln!(
            log,
            "{:<12} {:e}",
            "residual",
            m.history().last().copied().unwrap_or(f64::NAN)
        )?;
        writeln!(log, "{:<12} {}", "grid points", m.grid().len())?;
        writeln!(log, "{:<12} {}", "weights", m.weights().is_some())?;
    }
    Ok(())
}
