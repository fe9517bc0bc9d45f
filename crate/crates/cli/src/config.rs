//! Versioned experiment configuration.

use jump_spectra::measure::{
    random_perturbation, smallness_threshold, BaseMeasure, Density, DensityGrid, MeasureSpec, Perturbation,
};
use jump_spectra::secular::ComplexBox;
use jump_spectra::{BasisSet, DomainSpec, ModeLabel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_CUTOFF: f64 = 2000.0;
pub const DEFAULT_WINDOW: ComplexBox = ComplexBox {
    re: (-1.0, 60.0),
    im: (-15.0, 15.0),
};
pub const DEFAULT_THRESHOLDS: [f64; 4] = [0.1, 0.2, 0.3, 0.4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Spectrum,
    EnclosureThm1,
    EnclosureThm2,
    EnclosureThm3,
    PropReal,
    Numrange,
    Simulate,
    Figure1,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::EnclosureThm1 => "enclosure_thm1",
            Task::EnclosureThm2 => "enclosure_thm2",
            Task::EnclosureThm3 => "enclosure_thm3",
            Task::PropReal => "prop_real",
            Task::Numrange => "numrange",
            Task::Simulate => "simulate",
            Task::Figure1 => "figure1",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeTerm {
    pub mode: ModeLabel,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPerturbation {
    /// Level `k` whose smallness threshold sets the size.
    pub level: usize,
    /// `||v||` as a fraction of that threshold.
    #[serde(default = "half")]
    pub fraction: f64,
    /// Number of low modes to draw from.
    #[serde(default = "eight")]
    pub pool: usize,
    #[serde(default)]
    pub radial_only: bool,
}

fn half() -> f64 {
    0.5
}

fn eight() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureConfig {
    Uniform,
    GroundState,
    Dirac {
        point: [f64; 2],
    },
    Circle {
        radius: f64,
    },
    Density {
        grid: DensityGrid,
        #[serde(default)]
        boundary_mass: f64,
    },
    Perturbed {
        base: BaseMeasure,
        #[serde(default)]
        modes: Vec<ModeTerm>,
        #[serde(default)]
        random: Option<RandomPerturbation>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumrangeConfig {
    pub epsilon_min: f64,
    pub epsilon_max: f64,
    pub points: usize,
}

impl Default for NumrangeConfig {
    fn default() -> Self {
        Self {
            epsilon_min: 1e-4,
            epsilon_max: 1e-2,
            points: 9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub step_dt: f64,
    pub n_steps: u64,
    pub n_paths: u64,
    /// Defaults to the overshoot correction for `step_dt`.
    #[serde(default)]
    pub boundary_tolerance: Option<f64>,
    pub l1_tolerance: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            step_dt: 1e-5,
            n_steps: 100_000,
            n_paths: 1000,
            boundary_tolerance: None,
            l1_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultInjection {
    /// Multiplies every odd-indexed moment.
    pub corrupt_moments: f64,
}

/// The file format. Optional fields fall back to the defaults recorded in the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub domain: DomainSpec,
    pub measure: MeasureConfig,
    #[serde(default)]
    pub cutoff: Option<f64>,
    #[serde(default)]
    pub window: Option<ComplexBox>,
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Hypothesis level for the enclosure tasks.
    #[serde(default)]
    pub level: Option<usize>,
    #[serde(default)]
    pub thresholds: Option<Vec<f64>>,
    #[serde(default)]
    pub numrange: Option<NumrangeConfig>,
    #[serde(default)]
    pub simulate: Option<SimulateConfig>,
    #[serde(default)]
    pub fault_injection: Option<FaultInjection>,
}

/// A config with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub version: u32,
    pub domain: DomainSpec,
    pub measure: MeasureConfig,
    pub cutoff: f64,
    pub window: ComplexBox,
    pub tasks: Vec<Task>,
    /// Left out of the summary so that outputs do not depend on where they land.
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub seed: u64,
    pub level: usize,
    pub thresholds: Vec<f64>,
    pub numrange: NumrangeConfig,
    pub simulate: SimulateConfig,
    pub fault_injection: Option<FaultInjection>,
    /// Names of the fields that took their default.
    pub defaults_applied: Vec<&'static str>,
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub cutoff: Option<f64>,
}

pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

impl ExperimentConfig {
    pub fn resolve(self, over: &Overrides) -> Result<Resolved> {
        if self.version != CONFIG_VERSION {
            return Err(CliError::Config(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        let mut defaults = Vec::new();
        let mut pick = |name: &'static str, present: bool| {
            if !present {
                defaults.push(name);
            }
        };
        pick("cutoff", self.cutoff.is_some() || over.cutoff.is_some());
        pick("window", self.window.is_some());
        pick("output_dir", self.output_dir.is_some() || over.output_dir.is_some());
        pick("seed", self.seed.is_some() || over.seed.is_some());
        pick("level", self.level.is_some());
        pick("thresholds", self.thresholds.is_some());
        pick("numrange", self.numrange.is_some());
        pick("simulate", self.simulate.is_some());

        let mut tasks = self.tasks;
        tasks.sort();
        tasks.dedup();
        let r = Resolved {
            version: self.version,
            domain: self.domain,
            measure: self.measure,
            cutoff: over.cutoff.or(self.cutoff).unwrap_or(DEFAULT_CUTOFF),
            window: self.window.unwrap_or(DEFAULT_WINDOW),
            tasks,
            output_dir: over.output_dir.clone().or(self.output_dir).unwrap_or_else(|| PathBuf::from("out")),
            seed: over.seed.or(self.seed).unwrap_or(0),
            level: self.level.unwrap_or(1),
            thresholds: self.thresholds.unwrap_or_else(|| DEFAULT_THRESHOLDS.to_vec()),
            numrange: self.numrange.unwrap_or_default(),
            simulate: self.simulate.unwrap_or_default(),
            fault_injection: self.fault_injection,
            defaults_applied: defaults,
        };
        r.validate()?;
        Ok(r)
    }
}

impl Resolved {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.tasks.is_empty() {
            return bad("no tasks requested".into());
        }
        if !(self.cutoff.is_finite() && self.cutoff > 0.0) {
            return bad(format!("cutoff {} must be positive", self.cutoff));
        }
        let w = self.window;
        if !(w.re.0 < w.re.1 && w.im.0 < w.im.1) {
            return bad(format!("window {w:?} is empty"));
        }
        if w.re.1 >= 0.9 * self.cutoff {
            return bad(format!("window reaches Re = {}, beyond 90% of the cutoff {}", w.re.1, self.cutoff));
        }
        if self.level == 0 {
            return bad("level must be at least 1".into());
        }
        if self.thresholds.iter().any(|t| !(*t >= 0.0)) {
            return bad("thresholds must be nonnegative".into());
        }
        let n = &self.numrange;
        if !(n.epsilon_min > 0.0 && n.epsilon_min < n.epsilon_max) || n.points < 2 {
            return bad("numrange needs 0 < epsilon_min < epsilon_max and at least 2 points".into());
        }
        if let Some(f) = &self.fault_injection {
            if !f.corrupt_moments.is_finite() {
                return bad("corrupt_moments must be finite".into());
            }
        }
        if let MeasureConfig::Perturbed { modes, random, .. } = &self.measure {
            if modes.is_empty() == random.is_none() {
                return bad("a perturbed measure needs exactly one of `modes` or `random`".into());
            }
        }
        self.measure_spec_unchecked()?
            .validate(&self.domain)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// The measure without any random draw, for validation.
    fn measure_spec_unchecked(&self) -> Result<MeasureSpec> {
        Ok(match &self.measure {
            MeasureConfig::Uniform => MeasureSpec::uniform(),
            MeasureConfig::GroundState => MeasureSpec::ground_state(),
            MeasureConfig::Dirac { point } => MeasureSpec::dirac(*point),
            MeasureConfig::Circle { radius } => MeasureSpec::circle(*radius),
            MeasureConfig::Density { grid, boundary_mass } => MeasureSpec::density(Density::Grid(grid.clone()))
                .with_boundary_mass(*boundary_mass)
                .map_err(|e| CliError::Config(e.to_string()))?,
            MeasureConfig::Perturbed { base, .. } => MeasureSpec::perturbed(*base, Perturbation::zero()),
        })
    }

    /// Builds the measure, drawing a random perturbation from the seed if asked.
    pub fn measure_spec(&self, basis: &BasisSet) -> Result<MeasureSpec> {
        let MeasureConfig::Perturbed { base, modes, random } = &self.measure else {
            return self.measure_spec_unchecked();
        };
        let v = match random {
            Some(r) => {
                let target = smallness_threshold(basis, *base, r.level);
                if target <= 0.0 {
                    return Err(CliError::Config(format!(
                        "no perturbation is admissible at level {}: the smallness threshold is 0",
                        r.level
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                random_perturbation(basis, *base, target, r.fraction, r.pool, r.radial_only, &mut rng)?
            }
            None => {
                let terms: Vec<(ModeLabel, f64)> = modes.iter().map(|t| (t.mode, t.amplitude)).collect();
                Perturbation::zero_mean_modes(&self.domain, &terms).map_err(|e| CliError::Config(e.to_string()))?
            }
        };
        Ok(MeasureSpec::perturbed(*base, v))
    }

    /// `(base, v)` when the measure is a perturbation of a base density (`v = 0` for the bases).
    pub fn perturbation_base(&self) -> Option<BaseMeasure> {
        match &self.measure {
            MeasureConfig::Uniform => Some(BaseMeasure::Uniform),
            MeasureConfig::GroundState => Some(BaseMeasure::GroundState),
            MeasureConfig::Perturbed { base, .. } => Some(*base),
            _ => None,
        }
    }
}
