//! Solver configuration shared by every module and echoed into reports.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable consulted when no explicit config path is given.
pub const CONFIG_ENV: &str = "CONESPEC_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Number of uniform intervals across the band (even).
    pub grid_n: usize,
    /// Root tolerance for the aperture bisection, in radians.
    pub root_tol: f64,
    pub lam_tol: f64,
    pub bc_tol: f64,
    pub ode_tol: f64,
    pub res_tol: f64,
    pub cluster_tol: f64,
    pub quad_tol: f64,
    pub fn_tol: f64,
    pub r0: f64,
    pub r_max: f64,
    /// Interior Robin modes per sphere degree solved through the radial
    /// integral representation.
    pub modes_per_ell: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid_n: 4096,
            root_tol: 1e-12,
            lam_tol: 1e-10,
            bc_tol: 1e-7,
            ode_tol: 1e-6,
            res_tol: 1e-7,
            cluster_tol: 1e-6,
            quad_tol: 1e-9,
            fn_tol: 1e-5,
            r0: 1.0,
            r_max: 1048576.0,
            modes_per_ell: 6,
            seed: 7,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 64 {
            return Err(Error::Validation(format!("grid_n = {} < 64", self.grid_n)));
        }
        if !self.grid_n.is_multiple_of(4) {
            return Err(Error::Validation(format!(
                "grid_n = {} must be a multiple of 4",
                self.grid_n
            )));
        }
        let tols = [
            ("root_tol", self.root_tol),
            ("lam_tol", self.lam_tol),
            ("bc_tol", self.bc_tol),
            ("ode_tol", self.ode_tol),
            ("res_tol", self.res_tol),
            ("cluster_tol", self.cluster_tol),
            ("quad_tol", self.quad_tol),
            ("fn_tol", self.fn_tol),
        ];
        for (name, v) in tols {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.r0 > 0.0 && self.r_max.is_finite()) {
            return Err(Error::Validation("r0 must be positive".into()));
        }
        if self.r_max / self.r0 < 4.0 {
            return Err(Error::Validation(format!(
                "r_max / r0 = {} < 4",
                self.r_max / self.r0
            )));
        }
        if self.modes_per_ell == 0 {
            return Err(Error::Validation("modes_per_ell must be at least 1".into()));
        }
        Ok(())
    }

    /// Parses a JSON config. Empty input yields the defaults.
    pub fn from_json_str(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        let cfg: SolverConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SolverConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    SolverConfig::from_json_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_default() {
        assert_eq!(SolverConfig::from_json_str("").unwrap(), SolverConfig::default());
        assert_eq!(SolverConfig::from_json_str("  \n").unwrap(), SolverConfig::default());
    }

    #[test]
    fn partial_override() {
        let cfg = SolverConfig::from_json_str(r#"{"grid_n": 8192}"#).unwrap();
        assert_eq!(cfg.grid_n, 8192);
        assert_eq!(cfg.lam_tol, SolverConfig::default().lam_tol);
    }

    #[test]
    fn negative_grid_rejected() {
        let err = SolverConfig::from_json_str(r#"{"grid_n": -1}"#).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err:?}");
        let err = SolverConfig::from_json_str(r#"{"grid_n": 32}"#).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        let err = SolverConfig::from_json_str(r#"{"lam_tol": 0.0}"#).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn parse_error_reports_position() {
        let err = SolverConfig::from_json_str("{\n  \"grid_n\": 64,\n  oops\n}").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
