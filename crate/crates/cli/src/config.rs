//! Experiment configuration: a TOML file whose sections all have defaults.

use std::path::{Path, PathBuf};

use diracgap::counterexample::WellSpec;
use diracgap::dirac::{Coupling, FourierProfile, PotentialSpec};
use diracgap::evolution::{DynamicsSubspace, DEFAULT_DT};
use diracgap::grid::Grid1D;
use diracgap::homogenization::{Probe, Subspace, SweepSetup};
use diracgap::spectral::DEFAULT_EDGE_DELTA;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub potential: PotentialSpec,
    pub sweep: SweepConfig,
    pub spectrum: SpectrumConfig,
    pub evolution: EvolutionSection,
    pub validate: ValidateConfig,
    pub counterexample: CounterexampleConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            grid: GridConfig::default(),
            potential: PotentialSpec {
                z: 0.4,
                g: 0.1,
                v2: FourierProfile::new(1.0, vec![0.5], vec![]),
                h: 1,
                epsilon_reg: Some(0.5),
                coupling: Coupling::Scalar,
            },
            sweep: SweepConfig::default(),
            spectrum: SpectrumConfig::default(),
            evolution: EvolutionSection::default(),
            validate: ValidateConfig::default(),
            counterexample: CounterexampleConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Grid on `[-L, L]` with `n` upper-component nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            half_width: 20.0,
            n: 8000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub h_list: Vec<u32>,
    /// Resolvent shifts λ.
    pub shifts: Vec<f64>,
    /// Edge buffer: the gap window is `(delta_edge, 2 - delta_edge)`.
    pub delta_edge: f64,
    pub k_max: usize,
    /// Eigenpair residual tolerance.
    pub tol: f64,
    pub subspace: Subspace,
    /// Resolvent right-hand sides; empty means the default library.
    pub probes: Vec<Probe>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            h_list: vec![2, 4, 8, 16, 32],
            shifts: vec![0.5, 1.0, 2.0],
            delta_edge: DEFAULT_EDGE_DELTA,
            k_max: 4,
            tol: 1e-9,
            subspace: Subspace::Point,
            probes: Probe::default_library(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    /// Relative-bound constants `a < 1`, `b >= 0` of the admissibility check.
    pub a: f64,
    pub b: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig { a: 0.9, b: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionSection {
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub subspace: DynamicsSubspace,
    /// Initial state (a Gaussian probe).
    pub u0: Probe,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        EvolutionSection {
            dt: DEFAULT_DT,
            t_final: 1.0,
            subspace: DynamicsSubspace::Full,
            u0: Probe::gaussian(0.5, 0.7, [1.0, 0.0], [0.0, 0.4]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateConfig {
    /// Nodes of the coarse grid used for the dense checks (dimension `2n`).
    pub n: usize,
    /// Random probes per shift for the resolvent inequalities.
    pub probes: usize,
    /// Crank–Nicolson steps of the unitarity check.
    pub steps: usize,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig {
            n: 400,
            probes: 100,
            steps: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CounterexampleConfig {
    pub h_list: Vec<u32>,
    pub shift: f64,
    pub l_big: u32,
    pub points_per_unit: u32,
    pub left_pad: u32,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        let ws = WellSpec::new(1, 1);
        CounterexampleConfig {
            h_list: vec![10, 20, 40],
            shift: 1.0,
            l_big: ws.l_big,
            points_per_unit: ws.points_per_unit,
            left_pad: ws.left_pad,
        }
    }
}

impl CounterexampleConfig {
    pub fn well(&self, variant: u8, h: u32) -> WellSpec {
        WellSpec {
            variant,
            h,
            l_big: self.l_big,
            points_per_unit: self.points_per_unit,
            left_pad: self.left_pad,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("results"),
        }
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Config(format!("{field}: {}", reason.into()))
}

fn finite(field: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite, got {x}")))
    }
}

fn strictly_increasing(field: &str, hs: &[u32]) -> Result<(), CliError> {
    if hs.is_empty() {
        return Err(invalid(field, "must not be empty"));
    }
    if hs[0] == 0 || hs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid(
            field,
            format!("must be positive and strictly increasing, got {hs:?}"),
        ));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parses and validates; errors name the offending field path.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::parse(text).map_err(|e| CliError::Config(e.to_string()))?;
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("{path}: {}", e.into_inner().to_string().trim()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        finite("grid.L", self.grid.half_width)?;
        Grid1D::new(self.grid.half_width, self.grid.n).map_err(|e| invalid("grid", e.to_string()))?;

        let p = &self.potential;
        for (field, x) in [
            ("potential.Z", p.z),
            ("potential.g", p.g),
            ("potential.v2.mean", p.v2.mean),
        ] {
            finite(field, x)?;
        }
        if !p.v2.is_finite() {
            return Err(invalid("potential.v2", "coefficients must be finite"));
        }
        if let Some(eps) = p.epsilon_reg {
            finite("potential.epsilon_reg", eps)?;
        }
        p.validate().map_err(core_config)?;

        let s = &self.sweep;
        strictly_increasing("sweep.h_list", &s.h_list)?;
        if s.shifts.is_empty() {
            return Err(invalid("sweep.shifts", "must not be empty"));
        }
        for (i, x) in s.shifts.iter().enumerate() {
            finite(&format!("sweep.shifts[{i}]"), *x)?;
            if *x <= 0.0 {
                return Err(invalid(&format!("sweep.shifts[{i}]"), "must be positive"));
            }
        }
        finite("sweep.delta_edge", s.delta_edge)?;
        if !(s.delta_edge > 0.0 && s.delta_edge < 1.0) {
            return Err(invalid("sweep.delta_edge", "must lie in (0, 1)"));
        }
        finite("sweep.tol", s.tol)?;
        if s.tol <= 0.0 {
            return Err(invalid("sweep.tol", "must be positive"));
        }
        if s.k_max == 0 {
            return Err(invalid("sweep.k_max", "must be at least 1"));
        }

        finite("spectrum.a", self.spectrum.a)?;
        finite("spectrum.b", self.spectrum.b)?;

        let e = &self.evolution;
        finite("evolution.dt", e.dt)?;
        finite("evolution.T", e.t_final)?;
        if e.dt <= 0.0 {
            return Err(invalid("evolution.dt", "must be positive"));
        }
        if e.t_final < 0.0 {
            return Err(invalid("evolution.T", "must be nonnegative"));
        }
        if !matches!(e.u0, Probe::Gaussian { .. }) {
            return Err(invalid("evolution.u0", "must be a gaussian probe"));
        }

        if self.validate.n < 8 || 2 * self.validate.n > 1024 {
            return Err(invalid("validate.n", "must lie in [8, 512] (dense checks)"));
        }
        if self.validate.probes == 0 {
            return Err(invalid("validate.probes", "must be positive"));
        }

        let c = &self.counterexample;
        strictly_increasing("counterexample.h_list", &c.h_list)?;
        finite("counterexample.shift", c.shift)?;
        if c.shift <= 0.0 {
            return Err(invalid("counterexample.shift", "must be positive"));
        }
        for &h in &c.h_list {
            c.well(1, h).validate().map_err(core_config)?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid1D {
        Grid1D::new(self.grid.half_width, self.grid.n).expect("validated")
    }

    pub fn sweep_setup(&self) -> SweepSetup {
        let mut setup = SweepSetup::new(self.grid(), self.potential.clone(), self.sweep.h_list.clone())
            .with_edge_buffer(self.sweep.delta_edge);
        setup.shifts = self.sweep.shifts.clone();
        setup.k_max = self.sweep.k_max;
        setup.tol = self.sweep.tol;
        setup.subspace = self.sweep.subspace;
        if !self.sweep.probes.is_empty() {
            setup.probes = self.sweep.probes.clone();
        }
        setup
    }
}

fn core_config(e: diracgap::Error) -> CliError {
    match e {
        diracgap::Error::Config { field, reason } => invalid(&field, reason),
        other => CliError::Config(other.to_string()),
    }
}
