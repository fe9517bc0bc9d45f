//! The `run` command: every requested task, its files and one summary.

use jump_spectra::enclosure::{
    bound_lambda1, check_thm1, check_thm2, check_thm3, emit_matryoshka_curves, xi_flag, PlotGrid, Verdict,
};
use jump_spectra::measure::{check_hypothesis_v, compute_moments, describe, HypothesisCertificate, MeasureMoments, MeasureSpec, Perturbation};
use jump_spectra::numrange::{blowup_fit, directions, direction_label, log_grid, sweep, sweep_csv};
use jump_spectra::secular::SecularSeries;
use jump_spectra::spectrum::{assemble_spectrum, SpectrumReport};
use jump_spectra::stochastic::{compare_stationary, simulate_occupation, stationary_density, Bins, WalkConfig};
use jump_spectra::{build_basis, BasisSet, DomainSpec, Error as CoreError};
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::Path;

use crate::config::{Resolved, Task};
use crate::error::{core_exit_code, CliError, Result};
use crate::plots;
use crate::verify::{self, Check};

pub const SUMMARY_VERSION: u32 = 1;
/// Pinned tolerances of the blow-up fit.
pub const SLOPE_TOL: f64 = 0.05;
pub const INTERCEPT_TOL: f64 = 0.1;
pub const DOMAIN_DEFECT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Inapplicable,
    Undecidable,
    Fail,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Inapplicable => "inapplicable",
            Status::Undecidable => "undecidable",
            Status::Fail => "fail",
        }
    }

    /// Exit code of a run whose worst task ended here.
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Pass | Status::Inapplicable => 0,
            Status::Fail => 1,
            Status::Undecidable => 3,
        }
    }
}

impl From<Verdict> for Status {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Pass => Status::Pass,
            Verdict::Fail => Status::Fail,
            Verdict::Inapplicable => Status::Inapplicable,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskOutcome {
    pub task: Task,
    pub status: Status,
    pub note: String,
    pub files: Vec<String>,
    pub details: Value,
}

impl TaskOutcome {
    fn new(task: Task, status: Status, note: impl Into<String>, details: Value) -> Self {
        Self {
            task,
            status,
            note: note.into(),
            files: Vec::new(),
            details,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub summary_version: u32,
    pub config: Resolved,
    pub measure: String,
    pub basis: Value,
    /// The model checked against moments recomputed from the measure.
    pub integrity: Check,
    pub tasks: Vec<TaskOutcome>,
    pub status: Status,
    pub exit_code: i32,
}

/// Turns a numerical failure into a task outcome, passing real errors through.
fn absorb(task: Task, e: CoreError) -> Result<TaskOutcome> {
    let status = match e {
        CoreError::Degenerate(_) | CoreError::UnsupportedMeasure(_) | CoreError::DensityBound { .. } | CoreError::Geometry(_) => {
            Status::Inapplicable
        }
        _ if core_exit_code(&e) == 3 => Status::Undecidable,
        _ => return Err(e.into()),
    };
    Ok(TaskOutcome::new(task, status, e.to_string(), Value::Null))
}

pub struct Context<'a> {
    pub cfg: &'a Resolved,
    pub basis: BasisSet,
    pub spec: MeasureSpec,
    pub moments: MeasureMoments,
    spectrum: Option<std::result::Result<SpectrumReport, CoreError>>,
}

impl<'a> Context<'a> {
    pub fn new(cfg: &'a Resolved) -> Result<Self> {
        let basis = build_basis(cfg.domain, cfg.cutoff)?;
        let spec = cfg.measure_spec(&basis)?;
        let mut moments = compute_moments(&spec, &basis)?;
        if let Some(f) = &cfg.fault_injection {
            moments = moments.corrupted(f.corrupt_moments);
        }
        Ok(Self {
            cfg,
            basis,
            spec,
            moments,
            spectrum: None,
        })
    }

    pub fn series(&self) -> SecularSeries {
        SecularSeries::new(&self.basis, &self.moments)
    }

    pub fn spectrum(&mut self) -> std::result::Result<&SpectrumReport, CoreError> {
        if self.spectrum.is_none() {
            let series = self.series();
            self.spectrum = Some(assemble_spectrum(&series, &self.basis, &self.moments, self.cfg.window));
        }
        self.spectrum.as_ref().unwrap().as_ref().map_err(Clone::clone)
    }

    /// Hypothesis certificate, with the plain bases read as `v = 0`.
    pub fn certificate(&self) -> Result<Option<HypothesisCertificate>> {
        let Some(base) = self.cfg.perturbation_base() else {
            return Ok(None);
        };
        let spec = match &self.spec.kind {
            jump_spectra::measure::MeasureKind::Perturbed { .. } => self.spec.clone(),
            _ => MeasureSpec::perturbed(base, Perturbation::zero()),
        };
        Ok(Some(check_hypothesis_v(&spec, &self.basis, self.cfg.level)?))
    }

    fn basis_info(&self) -> Value {
        json!({
            "cutoff": self.basis.cutoff,
            "modes": self.basis.len(),
            "lambda_1": self.basis.modes[0].eigenvalue,
            "usable_limit": self.series().usable_limit(),
            "mass": self.moments.mass,
            "torsion_mean": self.moments.torsion_mean,
            "heuristic_tail": self.moments.heuristic_tail(),
        })
    }
}

struct Writer<'p> {
    dir: &'p Path,
}

impl Writer<'_> {
    fn put(&self, name: &str, contents: &str, out: &mut TaskOutcome) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        out.files.push(name.to_string());
        Ok(())
    }
}

fn inapplicable_measure(task: Task, ctx: &Context) -> TaskOutcome {
    TaskOutcome::new(
        task,
        Status::Inapplicable,
        format!("{} is not a perturbation of the uniform or ground-state density", ctx.spec.name()),
        Value::Null,
    )
}

fn spectrum_task(ctx: &mut Context, w: &Writer) -> Result<TaskOutcome> {
    let lambda_1 = ctx.basis.modes[0].eigenvalue;
    let dirichlet: Vec<f64> = ctx.basis.distinct_eigenvalues().into_iter().map(|(l, _)| l).collect();
    let report = match ctx.spectrum() {
        Ok(r) => r.clone(),
        Err(e) => return absorb(Task::Spectrum, e),
    };
    let violations = report.invariant_violations(lambda_1);
    let (status, note) = if !violations.is_empty() {
        (Status::Fail, violations.join("; "))
    } else if !report.undecidable_gaps.is_empty() {
        (Status::Undecidable, format!("{} real gaps undecidable at this cutoff", report.undecidable_gaps.len()))
    } else {
        (Status::Pass, format!("{} spectral points in the window", report.entries.len()))
    };
    let mut out = TaskOutcome::new(
        Task::Spectrum,
        status,
        note,
        json!({
            "report": report,
            "invariant_violations": violations,
            "xi": xi_flag(&ctx.basis, &ctx.moments),
        }),
    );
    w.put("spectrum.csv", &report.to_csv(), &mut out)?;
    w.put("spectrum.svg", &report.to_svg(&dirichlet), &mut out)?;
    Ok(out)
}

fn thm1_task(ctx: &mut Context, w: &Writer) -> Result<TaskOutcome> {
    let Some(cert) = ctx.certificate()? else {
        return Ok(inapplicable_measure(Task::EnclosureThm1, ctx));
    };
    let report = match ctx.spectrum() {
        Ok(r) => r.clone(),
        Err(e) => return absorb(Task::EnclosureThm1, e),
    };
    let r = check_thm1(&report, &cert, &ctx.basis)?;
    let mut csv = String::from("value_re,value_im,residual\n");
    for v in &r.violations {
        let _ = writeln!(csv, "{:.12e},{:.12e},{:.3e}", v.value.re, v.value.im, v.residual);
    }
    let mut out = TaskOutcome::new(Task::EnclosureThm1, r.verdict.into(), r.note.clone(), json!(r));
    w.put("enclosure_thm1.csv", &csv, &mut out)?;
    Ok(out)
}

fn thm2_task(ctx: &mut Context, w: &Writer) -> Result<TaskOutcome> {
    let Some(cert) = ctx.certificate()? else {
        return Ok(inapplicable_measure(Task::EnclosureThm2, ctx));
    };
    let r = match check_thm2(&ctx.series(), &ctx.basis, &cert) {
        Ok(r) => r,
        Err(e) => return absorb(Task::EnclosureThm2, e),
    };
    let mut csv = String::from("lo,hi,root_count,roots\n");
    for iv in &r.intervals {
        let roots: Vec<String> = iv.roots.iter().map(|x| format!("{x:.12e}")).collect();
        let _ = writeln!(csv, "{:.12e},{:.12e},{},{}", iv.lo, iv.hi, iv.root_count, roots.join(";"));
    }
    let mut out = TaskOutcome::new(Task::EnclosureThm2, r.verdict.into(), r.note.clone(), json!(r));
    w.put("enclosure_thm2.csv", &csv, &mut out)?;
    Ok(out)
}

fn thm3_task(ctx: &mut Context, w: &Writer) -> Result<TaskOutcome> {
    let Some(cert) = ctx.certificate()? else {
        return Ok(inapplicable_measure(Task::EnclosureThm3, ctx));
    };
    let report = match ctx.spectrum() {
        Ok(r) => r.clone(),
        Err(e) => return absorb(Task::EnclosureThm3, e),
    };
    let r = check_thm3(&report, &cert, &ctx.basis)?;
    let mut csv = String::from("value_re,value_im,ratio,margin,in_h1\n");
    for e in &r.entries {
        let _ = writeln!(csv, "{:.12e},{:.12e},{:.10e},{:.10e},{}", e.value.re, e.value.im, e.ratio, e.margin, e.in_h1);
    }
    let mut out = TaskOutcome::new(Task::EnclosureThm3, r.verdict.into(), r.note.clone(), json!(r));
    w.put("enclosure_thm3.csv", &csv, &mut out)?;
    Ok(out)
}

fn prop_real_task(ctx: &mut Context, w: &Writer) -> Result<TaskOutcome> {
    let Some(cert) = ctx.certificate()? else {
        return Ok(inapplicable_measure(Task::PropReal, ctx));
    };
    let report = match ctx.spectrum() {
        Ok(r) => r.clone(),
        Err(e) => return absorb(Task::PropReal, e),
    };
    let r = match bound_lambda1(&report, &ctx.series(), &ctx.basis, &ctx.moments, &cert) {
        Ok(r) => r,
        Err(e) => return absorb(Task::PropReal, e),
    };
    let mut csv = String::from("lambda1_mu,lhs,rhs,slack\n");
    let root = r.lambda1_mu.map(|x| format!("{x:.12e}")).unwrap_or_default();
    let _ = writeln!(csv, "{root},{:.10e},{:.10e},{:.10e}", r.lhs, r.rhs, r.slack);
    let mut out = TaskOutcome::new(Task::PropReal, r.verdict.into(), r.note.clone(), json!(r));
    w.put("prop_real.csv", &csv, &mut out)?;
    Ok(out)
}

fn numrange_task(ctx: &mut Context, w: &Writer) -> Result<TaskOutcome> {
    let n = &ctx.cfg.numrange;
    let eps = log_grid(n.epsilon_min, n.epsilon_max, n.points);
    let dirs = directions();
    let domain = ctx.basis.domain;
    let results = match sweep(&domain, &ctx.spec, &eps, &dirs) {
        Ok(r) => r,
        Err(e) => return absorb(Task::Numrange, e),
    };
    let expected = (domain.boundary_weight / domain.area).ln();
    let mut fits = Vec::new();
    let mut failures = Vec::new();
    for d in dirs {
        let fit = match blowup_fit(&results, d) {
            Ok(f) => f,
            Err(e) => return absorb(Task::Numrange, e),
        };
        let label = direction_label(d);
        if (fit.slope + 0.5).abs() > SLOPE_TOL {
            failures.push(format!("d = {label}: slope {:.4}", fit.slope));
        }
        if (fit.intercept - expected).abs() > INTERCEPT_TOL {
            failures.push(format!("d = {label}: intercept {:.4}", fit.intercept));
        }
        fits.push(json!({ "direction": label, "fit": fit }));
    }
    let defect = results.iter().map(|r| r.domain_defect).fold(0.0, f64::max);
    if defect > DOMAIN_DEFECT_TOL {
        failures.push(format!("domain defect {defect:.3e}"));
    }
    let (status, note) = if failures.is_empty() {
        (Status::Pass, format!("{} probes, max domain defect {defect:.2e}", results.len()))
    } else {
        (Status::Fail, failures.join("; "))
    };
    let mut out = TaskOutcome::new(
        Task::Numrange,
        status,
        note,
        json!({
            "fits": fits,
            "expected_intercept": expected,
            "max_domain_defect": defect,
        }),
    );
    w.put("numrange.csv", &sweep_csv(&results), &mut out)?;
    w.put("numrange.svg", &plots::numrange_svg(&results), &mut out)?;
    Ok(out)
}

fn simulate_task(ctx: &mut Context, w: &Writer) -> Result<TaskOutcome> {
    let s = &ctx.cfg.simulate;
    let mut walk = WalkConfig::new(s.step_dt, s.n_steps, s.n_paths, ctx.cfg.seed);
    if let Some(t) = s.boundary_tolerance {
        walk.boundary_tolerance = t;
    }
    if let Err(e) = walk.validate() {
        return Err(CliError::Config(e.to_string()));
    }
    let domain = ctx.basis.domain;
    let bins = Bins::default_for(&domain);
    let mut hist = match simulate_occupation(&walk, &domain, &ctx.spec, bins) {
        Ok(h) => h,
        Err(e) => return absorb(Task::Simulate, e),
    };
    let density = stationary_density(&ctx.basis, &ctx.moments);
    let predicted = hist.bins.average(|p| density(p));
    let l1 = compare_stationary(&hist, &predicted)?;
    hist.l1_distance = Some(l1);
    let status = if l1 < s.l1_tolerance { Status::Pass } else { Status::Fail };
    let mut out = TaskOutcome::new(
        Task::Simulate,
        status,
        format!("L1 distance {l1:.4} (tolerance {})", s.l1_tolerance),
        json!({
            "l1_distance": l1,
            "restarts": hist.restarts,
            "walk": walk,
            "bins": hist.bins.len(),
        }),
    );
    w.put("simulate.csv", &hist.to_csv(&predicted), &mut out)?;
    w.put("simulate.svg", &plots::histogram_svg(&hist, &predicted), &mut out)?;
    Ok(out)
}

/// Matryoshka curves on the default grid; also used by the `figure1` command.
pub fn figure1(basis: &BasisSet, thresholds: &[f64], dir: &Path) -> Result<TaskOutcome> {
    let plot = emit_matryoshka_curves(basis, thresholds, PlotGrid::default())?;
    let mut missing = Vec::new();
    for (l, row) in plot.eigenvalues.iter().zip(&plot.enclosed) {
        let is_first = (l - plot.lambda_1).abs() <= 1e-9 * l;
        for (t, inside) in thresholds.iter().zip(row) {
            if *inside == is_first {
                missing.push(format!("lambda = {l:.4} at t = {t}"));
            }
        }
    }
    let mut problems = Vec::new();
    if !plot.nesting_holds() {
        problems.push(format!("{} nesting violations", plot.nesting_violations));
    }
    if !missing.is_empty() {
        problems.push(format!("enclosure wrong for {}", missing.join(", ")));
    }
    let (status, note) = if problems.is_empty() {
        (
            Status::Pass,
            format!(
                "nested at {} grid points; {} eigenvalues enclosed",
                plot.nesting_points,
                plot.eigenvalues.len().saturating_sub(1)
            ),
        )
    } else {
        (Status::Fail, problems.join("; "))
    };
    let mut out = TaskOutcome::new(
        Task::Figure1,
        status,
        note,
        json!({
            "thresholds": thresholds,
            "grid": plot.grid,
            "lambda_1": plot.lambda_1,
            "eigenvalues": plot.eigenvalues,
            "nesting_points": plot.nesting_points,
            "nesting_violations": plot.nesting_violations,
            "polylines": plot.curves.iter().map(|c| c.polylines.len()).collect::<Vec<_>>(),
        }),
    );
    let w = Writer { dir };
    w.put("figure1.csv", &plot.to_csv(), &mut out)?;
    w.put("figure1.svg", &plot.to_svg(), &mut out)?;
    Ok(out)
}

fn run_task(task: Task, ctx: &mut Context, w: &Writer) -> Result<TaskOutcome> {
    match task {
        Task::Spectrum => spectrum_task(ctx, w),
        Task::EnclosureThm1 => thm1_task(ctx, w),
        Task::EnclosureThm2 => thm2_task(ctx, w),
        Task::EnclosureThm3 => thm3_task(ctx, w),
        Task::PropReal => prop_real_task(ctx, w),
        Task::Numrange => numrange_task(ctx, w),
        Task::Simulate => simulate_task(ctx, w),
        Task::Figure1 => figure1(&ctx.basis, &ctx.cfg.thresholds, w.dir),
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })
}

/// Runs every task, then writes `summary.json`. Worst status wins, a failure outranks undecidability.
pub fn run(cfg: &Resolved) -> Result<RunSummary> {
    let dir = cfg.output_dir.as_path();
    ensure_dir(dir)?;
    let mut ctx = Context::new(cfg)?;
    let integrity = verify::integrity(&ctx)?;
    let w = Writer { dir };
    let mut outcomes = Vec::new();
    for &task in &cfg.tasks {
        outcomes.push(run_task(task, &mut ctx, &w)?);
    }
    let status = outcomes.iter().map(|o| o.status).chain([integrity.status]).max().unwrap_or(Status::Pass);
    let summary = RunSummary {
        summary_version: SUMMARY_VERSION,
        config: cfg.clone(),
        measure: describe(&ctx.spec, &ctx.basis.domain),
        basis: ctx.basis_info(),
        integrity,
        tasks: outcomes,
        status,
        exit_code: status.exit_code(),
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Basis used by the standalone `figure1` command.
pub fn figure1_basis(cutoff: f64) -> Result<BasisSet> {
    Ok(build_basis(DomainSpec::unit_disk(), cutoff)?)
}
