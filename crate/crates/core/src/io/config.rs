//! TOML run configuration.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::density::InequalityConstants;
use crate::error::{Error, Result};
use crate::fields::Cell;
use crate::pauli::{BoundaryMode, Nucleus, SystemSpec};
use crate::scf::ScfConfig;
use crate::tf::TfConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfig {
    /// Side length (bohr).
    pub length: f64,
    pub points: usize,
}

impl CellConfig {
    pub fn build(&self) -> Result<Cell> {
        Cell::new(self.length, self.points)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub nuclei: Vec<Nucleus>,
    pub cell: CellConfig,
    #[serde(default)]
    pub mode: BoundaryMode,
    pub electrons: f64,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nucleus_width: Option<f64>,
}

impl SystemConfig {
    pub fn build(&self) -> Result<SystemSpec> {
        let spec = SystemSpec::new(self.cell.build()?, self.nuclei.clone(), self.mode, self.electrons, self.alpha)?;
        match self.nucleus_width {
            Some(w) => spec.with_nucleus_width(w),
            None => Ok(spec),
        }
    }
}

/// Parameter lists of the scan subcommands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    /// Fine-structure constants for `alpha-scan`.
    pub alphas: Vec<f64>,
    /// Dilation parameters for `instability-scan`.
    pub lambdas: Vec<f64>,
    /// Nuclear charges for `beta-bound`, `alpha-c` and `tf-bound`.
    pub charges: Vec<f64>,
    /// Electron number of the single-atom problems.
    pub electrons: f64,
    /// Fine-structure constant of `instability-scan`; when absent,
    /// `alpha_factor · α_c` is used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub alpha_factor: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            alphas: vec![0.01, 0.02, 0.03, 0.04, 0.05, 0.06],
            lambdas: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            charges: vec![1.0],
            electrons: 1.0,
            alpha: None,
            alpha_factor: 1.5,
        }
    }
}

/// Grid checks of the zero mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZeroModeConfig {
    pub w: [f64; 3],
    /// Cell side (bohr).
    pub length: f64,
    pub points: Vec<usize>,
    pub tolerance: f64,
}

impl Default for ZeroModeConfig {
    fn default() -> Self {
        Self {
            w: [0.0, 0.0, 1.0],
            length: 40.0,
            points: vec![48, 64, 96],
            tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Output directory; `--out` takes precedence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Run identifier; derived from the subcommand and config hash when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run_id: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemConfig>,
    #[serde(default)]
    pub scf: ScfConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub zero_mode: ZeroModeConfig,
    #[serde(default)]
    pub tf: TfConfig,
    #[serde(default)]
    pub constants: InequalityConstants,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: None,
            scf: ScfConfig::default(),
            scan: ScanConfig::default(),
            zero_mode: ZeroModeConfig::default(),
            tf: TfConfig::default(),
            constants: InequalityConstants::default(),
            output: OutputConfig::default(),
            seed: 0,
        }
    }
}

fn config_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

impl RunConfig {
    /// Physical and numerical validation of every block.
    pub fn validate(&self) -> Result<()> {
        let wrap = |path: &str, r: Result<()>| r.map_err(|e| config_error(path, e.to_string()));
        if let Some(sys) = &self.system {
            wrap("system", sys.build().map(|_| ()))?;
        }
        wrap("scf", self.scf.validate())?;
        wrap("tf", self.tf.validate())?;
        wrap("constants", self.constants.validate())?;
        let s = &self.scan;
        if s.alphas.iter().any(|a| !(*a > 0.0)) {
            return Err(config_error("scan.alphas", "values must be positive"));
        }
        if s.lambdas.iter().any(|a| !(*a > 0.0)) || s.lambdas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(config_error("scan.lambdas", "values must be positive and strictly ascending"));
        }
        if s.charges.iter().any(|a| !(*a > 0.0)) {
            return Err(config_error("scan.charges", "values must be positive"));
        }
        if !(s.electrons > 0.0) {
            return Err(config_error("scan.electrons", "must be positive"));
        }
        if let Some(a) = s.alpha {
            if !(a > 0.0) {
                return Err(config_error("scan.alpha", "must be positive"));
            }
        }
        if !(s.alpha_factor > 0.0) {
            return Err(config_error("scan.alpha_factor", "must be positive"));
        }
        let z = &self.zero_mode;
        if z.w.iter().map(|v| v * v).sum::<f64>() == 0.0 || z.w.iter().any(|v| !v.is_finite()) {
            return Err(config_error("zero_mode.w", "must be a finite non-zero vector"));
        }
        for &n in &z.points {
            if Cell::new(z.length, n).is_err() {
                return Err(config_error("zero_mode.points", format!("invalid grid {n} for length {}", z.length)));
            }
        }
        if !(z.tolerance > 0.0) {
            return Err(config_error("zero_mode.tolerance", "must be positive"));
        }
        Ok(())
    }

    pub fn system_spec(&self) -> Result<SystemSpec> {
        self.system
            .as_ref()
            .ok_or_else(|| config_error("system", "this subcommand needs a [system] block"))?
            .build()
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_error("", e.to_string()))
    }

    /// SHA-256 of the canonical serialisation.
    pub fn hash(&self) -> String {
        let text = self.to_toml().unwrap_or_default();
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Parses and validates a TOML configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| config_error("", e.to_string()))?;
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        config_error(&path, e.into_inner().message().to_string())
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[system]
nuclei = [{ charge = 1.0, position = [5.0, 5.0, 5.0] }]
cell = { length = 10.0, points = 16 }
electrons = 1.0
alpha = 0.02
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.scf, ScfConfig::default());
        assert_eq!(c.system.as_ref().unwrap().mode, BoundaryMode::Molecular);
        assert_eq!(c.seed, 0);
        assert!(parse_config("").is_ok());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config("[systm]\nx = 1\n").unwrap_err().to_string();
        assert!(err.contains("systm"), "{err}");
        let err = parse_config(&MINIMAL.replace("alpha = 0.02", "alpha = 0.02\nalpah = 1")).unwrap_err().to_string();
        assert!(err.contains("alpah"), "{err}");
        let err = parse_config("[scf]\nmax_iter = 3\nmixing = 0.5\n").unwrap_err().to_string();
        assert!(err.contains("mixing"), "{err}");
    }

    #[test]
    fn physical_validation() {
        let err = parse_config(&MINIMAL.replace("alpha = 0.02", "alpha = 0.0")).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
        assert!(parse_config(&MINIMAL.replace("charge = 1.0", "charge = -1.0")).is_err());
        assert!(parse_config(&MINIMAL.replace("electrons = 1.0", "electrons = 0.0")).is_err());
        assert!(parse_config("[scan]\nlambdas = [2.0, 1.0]\n").is_err());
    }

    #[test]
    fn type_mismatch_is_reported() {
        let err = parse_config("seed = \"x\"\n").unwrap_err().to_string();
        assert!(err.contains("seed"), "{err}");
    }

    #[test]
    fn roundtrip_and_hash() {
        let c = parse_config(MINIMAL).unwrap();
        let back = parse_config(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, back);
        assert_eq!(c.hash(), back.hash());
        assert_eq!(c.hash().len(), 64);
        let mut d = c.clone();
        d.seed = 1;
        assert_ne!(c.hash(), d.hash());
    }
}
