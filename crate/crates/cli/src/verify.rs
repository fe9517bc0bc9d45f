//! The `verify` command: structural checks of the resolvent model.

use jump_spectra::measure::compute_moments;
use jump_spectra::resolvent::{random_probe, KreinModel};
use jump_spectra::{Complex64, Error as CoreError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt::Write as _;

use crate::config::Resolved;
use crate::error::{core_exit_code, Result};
use crate::tasks::{Context, Status};

pub const PROBES: usize = 20;
pub const PROBE_POINTS: [f64; 2] = [-1.0, -5.0];
pub const IDENTITY_TOL: f64 = 1e-8;
pub const PAIRING_TOL: f64 = 1e-8;
pub const KERNEL_TOL: f64 = 1e-8;
pub const WITNESS_MIN: f64 = 1e-6;
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: Option<f64>,
    /// `<= bound` unless `at_least`.
    pub bound: f64,
    pub at_least: bool,
    pub status: Status,
    pub note: String,
}

impl Check {
    fn measured(name: &'static str, value: f64, bound: f64, at_least: bool) -> Self {
        let ok = if at_least { value > bound } else { value < bound };
        Self {
            name,
            value: Some(value),
            bound,
            at_least,
            status: if ok { Status::Pass } else { Status::Fail },
            note: String::new(),
        }
    }

    fn from_result(name: &'static str, r: jump_spectra::Result<f64>, bound: f64, at_least: bool) -> Self {
        match r {
            Ok(v) => Self::measured(name, v, bound, at_least),
            Err(e) => {
                let status = match &e {
                    CoreError::UnsupportedMeasure(_) => Status::Inapplicable,
                    e if core_exit_code(e) == 3 => Status::Undecidable,
                    _ => Status::Fail,
                };
                Self {
                    name,
                    value: None,
                    bound,
                    at_least,
                    status,
                    note: e.to_string(),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub status: Status,
}

impl VerifyReport {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn matrix(&self) -> String {
        let mut out = format!("{:<24} {:>12} {:>12}  {}\n", "check", "value", "bound", "status");
        for c in &self.checks {
            let value = c.value.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
            let bound = format!("{}{:.0e}", if c.at_least { ">" } else { "<" }, c.bound);
            let _ = write!(out, "{:<24} {value:>12} {bound:>12}  {}", c.name, c.status.as_str().to_uppercase());
            if !c.note.is_empty() {
                let _ = write!(out, "  ({})", c.note);
            }
            out.push('\n');
        }
        let _ = writeln!(out, "overall: {}", self.status.as_str().to_uppercase());
        out
    }
}

fn max_over<F>(f: F) -> jump_spectra::Result<f64>
where
    F: FnMut() -> jump_spectra::Result<f64>,
{
    std::iter::repeat_with(f).take(PROBES).try_fold(0.0f64, |m, r| r.map(|x| m.max(x)))
}

/// Identity residual against freshly computed moments, run before every `run`.
pub fn integrity(ctx: &Context) -> Result<Check> {
    let reference = compute_moments(&ctx.spec, &ctx.basis)?;
    let series = ctx.series();
    let model = KreinModel::new(&ctx.basis, &ctx.moments, &series);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    let n = model.len();
    let z = Complex64::new(PROBE_POINTS[0], 0.0);
    let r = std::iter::repeat_with(|| model.checked_identity_residual(z, &random_probe(&mut rng, n), &reference))
        .take(5)
        .try_fold(0.0f64, |m, r| r.map(|x| m.max(x)));
    Ok(Check::from_result("resolvent_identity(-1)", r, IDENTITY_TOL, false))
}

/// Runs the structural checks on the configured measure (with any injected fault).
pub fn verify(cfg: &Resolved) -> Result<VerifyReport> {
    let mut ctx = Context::new(cfg)?;
    // moments recomputed from the measure itself, never from the (possibly faulted) model
    let reference = compute_moments(&ctx.spec, &ctx.basis)?;
    let series = ctx.series();
    let model = KreinModel::new(&ctx.basis, &ctx.moments, &series);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = model.len();
    let mut checks = Vec::new();

    for (name, x) in [("resolvent_identity(-1)", PROBE_POINTS[0]), ("resolvent_identity(-5)", PROBE_POINTS[1])] {
        let z = Complex64::new(x, 0.0);
        let r = max_over(|| model.checked_identity_residual(z, &random_probe(&mut rng, n), &reference));
        checks.push(Check::from_result(name, r, IDENTITY_TOL, false));
    }
    for (name, x) in [("adjoint_pairing(-1)", PROBE_POINTS[0]), ("adjoint_pairing(-5)", PROBE_POINTS[1])] {
        let z = Complex64::new(x, 0.0);
        let r = max_over(|| {
            let u = random_probe(&mut rng, n);
            let v = random_probe(&mut rng, n);
            model.adjoint_pairing_defect(z, &u, &v)
        });
        checks.push(Check::from_result(name, r, PAIRING_TOL, false));
    }
    let kernel = model
        .adjoint_kernel()
        .and_then(|g| model.adjoint_residual(Complex64::new(0.0, 0.0), &g));
    checks.push(Check::from_result("adjoint_kernel", kernel, KERNEL_TOL, false));
    checks.push(Check::from_result(
        "nonselfadjoint_witness",
        model.nonselfadjointness_witness(&mut rng, PROBES),
        WITNESS_MIN,
        true,
    ));

    let moment_drift = ctx
        .moments
        .moments
        .iter()
        .zip(&reference.moments)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    checks.push(Check::measured("moment_consistency", moment_drift, IDENTITY_TOL, false));

    let symmetry = [Complex64::new(3.0, 2.0), Complex64::new(20.0, 7.5), Complex64::new(-2.0, 0.5)]
        .into_iter()
        .try_fold(0.0f64, |m, z| {
            let a = series.eval(z)?.value;
            let b = series.eval(z.conj())?.value;
            Ok::<f64, CoreError>(m.max((a.conj() - b).norm() / a.norm().max(1e-300)))
        });
    checks.push(Check::from_result("conjugate_symmetry", symmetry, SYMMETRY_TOL, false));

    let lambda_1 = ctx.basis.modes[0].eigenvalue;
    let invariants = ctx.spectrum().map(|r| r.invariant_violations(lambda_1));
    checks.push(match invariants {
        Ok(v) => {
            let mut c = Check::measured("spectrum_invariants", v.len() as f64, 0.5, false);
            c.note = v.join("; ");
            c
        }
        Err(e) => Check::from_result("spectrum_invariants", Err(e), 0.5, false),
    });

    let status = checks.iter().map(|c| c.status).max().unwrap_or(Status::Pass);
    Ok(VerifyReport { checks, status })
}
