//! Run configuration: one TOML file, every numeric knob defaulted.

use std::path::{Path, PathBuf};

use lmg_rat::analysis::{check_grid, log_grid, QuantumSweepConfig};
use lmg_rat::classical::period::{classical_period, find_resonant_energy, DEFAULT_QUAD_TOL};
use lmg_rat::classical::{PhasePoint, SectionConvention, StroboscopicMap};
use lmg_rat::extraction::{ExtractionConfig, ScanConfig, DEFAULT_FD_STEP};
use lmg_rat::floquet::{TrackingMode, DEFAULT_OVERLAP_FLOOR};
use lmg_rat::{Kick, Lmg, Resonance, Spin};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_J_LIST: [f64; 4] = [60.0, 90.0, 150.0, 300.0];
pub const DEFAULT_T_TARGET: f64 = 8.0;
pub const DEFAULT_POINTS_PER_DECADE: usize = 20;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub resonance: ResonanceConfig,
    pub drive: DriveConfig,
    pub numerics: NumericsConfig,
    pub output: OutputConfig,
    pub poincare: PoincareConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(rename = "J", skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(rename = "J_list", skip_serializing_if = "Option::is_none")]
    pub j_list: Option<Vec<f64>>,
    pub omega0: f64,
    pub gamma_x: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let lmg = Lmg::default();
        Self { j: None, j_list: None, omega0: lmg.omega0, gamma_x: lmg.gamma_x }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResonanceConfig {
    pub r: u32,
    pub s: u32,
    /// Classical resonant energy; alternative to `T_target`.
    #[serde(rename = "E_R", skip_serializing_if = "Option::is_none")]
    pub e_r: Option<f64>,
    /// Period of the resonant torus, `r tau / s`.
    #[serde(rename = "T_target", skip_serializing_if = "Option::is_none")]
    pub t_target: Option<f64>,
}

impl Default for ResonanceConfig {
    fn default() -> Self {
        Self { r: 1, s: 1, e_r: None, t_target: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsConfig {
    /// Largest energy drift tolerated between kicks.
    pub drift_tol: f64,
    pub quad_tol: f64,
    pub z_tol: f64,
    /// Ratio of neighbouring energy spreads that counts as a separatrix jump.
    pub jump_threshold: f64,
    pub n_grid: usize,
    pub n_iter: usize,
    pub fd_step: f64,
    pub overlap_floor: f64,
    pub tracking_mode: TrackingMode,
    pub section: SectionConvention,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        let scan = ScanConfig::default();
        Self {
            drift_tol: lmg_rat::classical::flow::DEFAULT_DRIFT_TOL,
            quad_tol: DEFAULT_QUAD_TOL,
            z_tol: scan.z_tol,
            jump_threshold: scan.jump_factor,
            n_grid: scan.n_grid,
            n_iter: scan.n_iter,
            fd_step: DEFAULT_FD_STEP,
            overlap_floor: DEFAULT_OVERLAP_FLOOR,
            tracking_mode: TrackingMode::Continuation,
            section: SectionConvention::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), formats: vec![Format::Csv, Format::Json] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoincareConfig {
    /// Explicit `[phi, z]` seeds; when absent, `n_seeds` points on the line `phi = pi`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<[f64; 2]>>,
    pub n_seeds: usize,
    pub n_iter: usize,
}

impl Default for PoincareConfig {
    fn default() -> Self {
        Self { seeds: None, n_seeds: 40, n_iter: 500 }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.model.j.is_some() && self.model.j_list.is_some() {
            return Err(config_err("model: give either J or J_list, not both"));
        }
        for j in self.j_list() {
            let spin = Spin::new(j).map_err(|e| config_err(format!("model: {e}")))?;
            if spin.twice() < 2 {
                return Err(config_err("model: J >= 1 required"));
            }
        }
        if self.j_list().is_empty() {
            return Err(config_err("model: J_list is empty"));
        }
        Lmg::new(self.model.omega0, self.model.gamma_x).map_err(|e| config_err(format!("model: {e}")))?;
        Resonance::new(self.resonance.r, self.resonance.s).map_err(|e| config_err(format!("resonance: {e}")))?;
        match (self.resonance.e_r, self.resonance.t_target) {
            (Some(_), Some(_)) => return Err(config_err("resonance: give either E_R or T_target, not both")),
            (None, Some(t)) if !(t > 0.0) => return Err(config_err("resonance: T_target must be > 0")),
            _ => {}
        }
        if self.drive.epsilon.is_some() && self.drive.eps_grid.is_some() {
            return Err(config_err("drive: give either epsilon or eps_grid, not both"));
        }
        check_grid(&self.eps_grid()).map_err(|e| config_err(format!("drive: {e}")))?;
        let n = &self.numerics;
        for (name, v) in [
            ("drift_tol", n.drift_tol),
            ("quad_tol", n.quad_tol),
            ("z_tol", n.z_tol),
            ("fd_step", n.fd_step),
        ] {
            if !(v > 0.0) {
                return Err(config_err(format!("numerics: {name} must be > 0")));
            }
        }
        if !(n.jump_threshold > 1.0) {
            return Err(config_err("numerics: jump_threshold must exceed 1"));
        }
        if n.n_grid < 3 || n.n_iter == 0 {
            return Err(config_err("numerics: n_grid >= 3 and n_iter >= 1 required"));
        }
        if !(0.0..1.0).contains(&n.overlap_floor) {
            return Err(config_err("numerics: overlap_floor must lie in [0, 1)"));
        }
        if let Some(seeds) = &self.poincare.seeds {
            for (i, s) in seeds.iter().enumerate() {
                PhasePoint::new(s[0], s[1]).map_err(|e| config_err(format!("poincare seed {i}: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn j_list(&self) -> Vec<f64> {
        match (&self.model.j, &self.model.j_list) {
            (Some(j), _) => vec![*j],
            (None, Some(list)) => list.clone(),
            (None, None) => DEFAULT_J_LIST.to_vec(),
        }
    }

    pub fn lmg(&self) -> Lmg {
        Lmg { omega0: self.model.omega0, gamma_x: self.model.gamma_x }
    }

    pub fn resonance(&self) -> Resonance {
        Resonance { r: self.resonance.r, s: self.resonance.s }
    }

    /// Default grid: 20 points per decade over the range where the island is resolved.
    pub fn eps_grid(&self) -> Vec<f64> {
        match (&self.drive.epsilon, &self.drive.eps_grid) {
            (Some(e), _) => vec![*e],
            (None, Some(g)) => g.clone(),
            (None, None) => {
                let (lo, hi) = if self.resonance.r == 1 { (3e-5, 1e-2) } else { (1e-2, 0.15) };
                log_grid(lo, hi, DEFAULT_POINTS_PER_DECADE).expect("default grid bounds are valid")
            }
        }
    }

    /// Resonant energy and classical kick period `s T / r`.
    pub fn resonant_torus(&self) -> Result<(f64, f64), CliError> {
        let lmg = self.lmg();
        let (e_r, period) = match (self.resonance.e_r, self.resonance.t_target) {
            (Some(e), _) => (e, classical_period(e, &lmg, self.numerics.quad_tol)?),
            (None, t) => {
                let t = t.unwrap_or(DEFAULT_T_TARGET);
                (find_resonant_energy(t, &lmg, self.numerics.quad_tol)?, t)
            }
        };
        Ok((e_r, self.resonance.s as f64 * period / self.resonance.r as f64))
    }

    pub fn extraction(&self) -> ExtractionConfig {
        let n = &self.numerics;
        let base = ExtractionConfig::default();
        ExtractionConfig {
            scan: ScanConfig {
                n_grid: n.n_grid,
                n_iter: n.n_iter,
                z_tol: n.z_tol,
                jump_factor: n.jump_threshold,
                ..base.scan
            },
            fd_step: n.fd_step,
            ..base
        }
    }

    pub fn base_map(&self, tau: f64) -> Result<StroboscopicMap, CliError> {
        let mut map = StroboscopicMap::new(self.lmg(), Kick::new(tau, 0.0)?).with_convention(self.numerics.section);
        map.drift_tol = self.numerics.drift_tol;
        Ok(map)
    }

    pub fn quantum(&self) -> QuantumSweepConfig {
        QuantumSweepConfig { tracking: self.numerics.tracking_mode, overlap_floor: self.numerics.overlap_floor }
    }

    pub fn seeds(&self) -> Vec<PhasePoint> {
        match &self.poincare.seeds {
            Some(s) => s.iter().map(|p| PhasePoint { phi: p[0], z: p[1] }).collect(),
            None => {
                let n = self.poincare.n_seeds;
                (0..n)
                    .map(|i| PhasePoint { phi: std::f64::consts::PI, z: -0.95 + 1.9 * (i as f64 + 0.5) / n as f64 })
                    .collect()
            }
        }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }

    /// The configuration with every default made explicit.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        out.model.j = None;
        out.model.j_list = Some(self.j_list());
        if out.resonance.e_r.is_none() && out.resonance.t_target.is_none() {
            out.resonance.t_target = Some(DEFAULT_T_TARGET);
        }
        out.drive.epsilon = None;
        out.drive.eps_grid = Some(self.eps_grid());
        if out.poincare.seeds.is_none() {
            out.poincare.seeds = Some(self.seeds().iter().map(|p| [p.phi, p.z]).collect());
        }
        out
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }
}
