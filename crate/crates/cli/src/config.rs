//! JSON run configuration.
//!
//! Every section and key is optional; absent keys take the defaults below.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use hotspot_core::grid::GridSpec;
use hotspot_core::model::{ModelKind, ModelParams, ShortParams};
use hotspot_core::solver::{FluxScheme, InitialCondition, SimConfig};

use crate::CliError;

/// Adimensional coefficients of the reference parameter set.
pub const DEFAULT_ETA: f64 = 0.1;
pub const DEFAULT_PSI: f64 = 14.0 / 3.0 * 1e-3;
pub const DEFAULT_OMEGA: f64 = 84.0;
pub const DEFAULT_ATILDE: f64 = 0.7;
pub const DEFAULT_CHI: f64 = 2.0;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfigFile {
    pub model: ModelSection,
    pub grid: GridSection,
    pub time: TimeSection,
    pub ic: IcSection,
    pub numerics: NumericsSection,
    pub outputs: OutputsSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    #[default]
    Pitcher,
    Short,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub kind: KindName,
    pub eta: f64,
    pub psi: Option<f64>,
    pub omega: Option<f64>,
    pub atilde: Option<f64>,
    pub chi: f64,
    /// Short variant only.
    pub a0: Option<f64>,
    /// Short variant only.
    pub abar: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: KindName::Pitcher,
            eta: DEFAULT_ETA,
            psi: None,
            omega: None,
            atilde: None,
            chi: DEFAULT_CHI,
            a0: None,
            abar: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    #[serde(rename = "L")]
    pub length: f64,
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { length: 1.0, n: 64 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub t_end: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub output_every: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self { t_end: 1.0, dt_init: 1e-3, dt_min: 1e-9, output_every: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(transparent)]
pub struct IcSection(pub InitialCondition);

impl Default for IcSection {
    fn default() -> Self {
        Self(InitialCondition::PerturbedSteady { amplitude: 0.01, mode_j: 1, mode_k: 1 })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    pub flux_scheme: FluxScheme,
    pub cfl: f64,
    pub guard_tol: f64,
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self { flux_scheme: FluxScheme::Centered, cfl: 0.5, guard_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputsSection {
    pub dir: PathBuf,
    pub snapshots: bool,
    pub diagnostics: bool,
}

impl Default for OutputsSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("hotspot_out"), snapshots: true, diagnostics: true }
    }
}

impl RunConfigFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        // relative field-file paths are taken relative to the config file
        if let InitialCondition::File { path_a, path_n } = &mut cfg.ic.0 {
            let base = path.parent().unwrap_or(Path::new("."));
            for p in [path_a, path_n] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn model_kind(&self) -> Result<ModelKind, CliError> {
        let m = &self.model;
        let kind = match m.kind {
            KindName::Pitcher => {
                if m.a0.is_some() || m.abar.is_some() {
                    return Err(CliError::Config("a0/abar only apply to the short model".into()));
                }
                ModelKind::Pitcher(ModelParams::new(
                    m.eta,
                    m.psi.unwrap_or(DEFAULT_PSI),
                    m.omega.unwrap_or(DEFAULT_OMEGA),
                    m.atilde.unwrap_or(DEFAULT_ATILDE),
                    m.chi,
                )?)
            }
            KindName::Short => {
                if m.psi.is_some() || m.omega.is_some() || m.atilde.is_some() {
                    return Err(CliError::Config("psi/omega/atilde do not apply to the short model".into()));
                }
                let (Some(a0), Some(abar)) = (m.a0, m.abar) else {
                    return Err(CliError::Config("the short model needs a0 and abar".into()));
                };
                ModelKind::Short(ShortParams::new(m.eta, a0, abar, m.chi)?)
            }
        };
        Ok(kind)
    }

    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let grid = GridSpec::new(self.grid.length, self.grid.n)?;
        let cfg = SimConfig {
            grid,
            model: self.model_kind()?,
            t_end: self.time.t_end,
            dt_init: self.time.dt_init,
            dt_min: self.time.dt_min,
            cfl_advection: self.numerics.cfl,
            flux_scheme: self.numerics.flux_scheme,
            output_every: self.time.output_every,
            ic: self.ic.0.clone(),
            guard_tol: self.numerics.guard_tol,
            sensitivity_floor: None,
            keep_snapshots: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_takes_defaults() {
        let c = RunConfigFile::from_json("{}").unwrap();
        let s = c.sim_config().unwrap();
        assert_eq!(s.grid.n(), 64);
        assert_eq!(s.model.pitcher().unwrap().omega, 84.0);
        assert_eq!(s.output_every, 0.01);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfigFile::from_json(r#"{"grid": {"n": 32, "m": 1}}"#).is_err());
        assert!(RunConfigFile::from_json(r#"{"extra": 1}"#).is_err());
        assert!(RunConfigFile::from_json(r#"{"ic": {"recipe": "constants", "a0": 1, "n0": 1, "x": 2}}"#).is_err());
    }

    #[test]
    fn negative_atilde_names_positivity() {
        let c = RunConfigFile::from_json(r#"{"model": {"atilde": -1}}"#).unwrap();
        let msg = c.sim_config().unwrap_err().to_string();
        assert!(msg.contains("atilde") && msg.contains("positivity"), "{msg}");
    }

    #[test]
    fn short_model_fields() {
        let c = RunConfigFile::from_json(r#"{"model": {"kind": "short", "a0": 0.5, "abar": 1.0}}"#).unwrap();
        assert_eq!(c.model_kind().unwrap().name(), "short");
        let c = RunConfigFile::from_json(r#"{"model": {"kind": "short", "a0": 0.5}}"#).unwrap();
        assert!(c.model_kind().is_err());
        let c = RunConfigFile::from_json(r#"{"model": {"kind": "short", "a0": 0.5, "abar": 1, "psi": 1}}"#).unwrap();
        assert!(c.model_kind().is_err());
    }

    #[test]
    fn ic_recipes_parse() {
        let c = RunConfigFile::from_json(r#"{"ic": {"recipe": "file", "path_a": "a", "path_n": "n"}}"#).unwrap();
        assert!(matches!(c.ic.0, InitialCondition::File { .. }));
        let c = RunConfigFile::from_json(r#"{"numerics": {"flux_scheme": "upwind"}}"#).unwrap();
        assert_eq!(c.numerics.flux_scheme, FluxScheme::Upwind);
    }
}
