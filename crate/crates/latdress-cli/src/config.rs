//! Flat key-value experiment configuration with typed schema validation.
//!
//! The format is one `key = value` pair per line, `#` comments, no sections.
//! Unknown keys are rejected so a typo can never silently fall back to a
//! default.

use std::collections::BTreeMap;
use std::path::Path;

use latdress::{GaugeFixSpec, GroupKind, Representation};
use nalgebra::Vector4;

use crate::CliError;

/// Which gauge-fixing family an experiment drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfKind {
    Lorenz,
    RxiAbelian,
    RxiNonAbelian,
    Unitary,
}

/// Fully-validated experiment parameters.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dims: Vec<usize>,
    pub group: GroupKind,
    pub rep: Representation,
    pub seed: u64,
    pub spread: f64,
    pub gf: GfKind,
    pub xi: f64,
    pub v: f64,
    pub coupling: f64,
    pub phi0: Vector4<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub xis: Vec<f64>,
    pub site: usize,
    pub eps: f64,
    pub beta: f64,
    pub mu2: f64,
    pub lambda: f64,
    pub n_configs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dims: vec![4, 4],
            group: GroupKind::U1,
            rep: Representation::U1Complex,
            seed: 7,
            spread: 0.4,
            gf: GfKind::RxiAbelian,
            xi: 2.0,
            v: 1.0,
            coupling: 1.0,
            phi0: Vector4::new(0.0, 0.0, 1.0, 0.0),
            tol: 1e-10,
            max_iter: 50,
            xis: vec![2.0, 20.0, 200.0, 2000.0],
            site: 0,
            eps: 0.1,
            beta: 1.0,
            mu2: -1.0,
            lambda: 1.0,
            n_configs: 100,
        }
    }
}

fn parse_list<T: std::str::FromStr>(v: &str, key: &str) -> Result<Vec<T>, CliError> {
    v.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| bad(key, v)))
        .collect()
}

fn bad(key: &str, v: &str) -> CliError {
    CliError::Config(format!("invalid value for `{key}`: `{v}`"))
}

impl ExperimentConfig {
    /// Parse and validate a config file; unknown keys are an error.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut pairs = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let k = k.trim().to_string();
            if pairs.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("duplicate key `{k}`")));
            }
        }
        let mut cfg = ExperimentConfig::default();
        let mut rep_given = false;
        for (k, v) in &pairs {
            match k.as_str() {
                "dims" => cfg.dims = parse_list(v, k)?,
                "group" => {
                    cfg.group = match v.as_str() {
                        "u1" => GroupKind::U1,
                        "su2" => GroupKind::Su2,
                        _ => return Err(bad(k, v)),
                    }
                }
                "rep" => {
                    rep_given = true;
                    cfg.rep = match v.as_str() {
                        "u1-complex" => Representation::U1Complex,
                        "doublet" => Representation::Su2Doublet,
                        "real4" => Representation::Su2Real4,
                        _ => return Err(bad(k, v)),
                    }
                }
                "seed" => cfg.seed = v.parse().map_err(|_| bad(k, v))?,
                "spread" => cfg.spread = v.parse().map_err(|_| bad(k, v))?,
                "gf" => {
                    cfg.gf = match v.as_str() {
                        "lorenz" => GfKind::Lorenz,
                        "rxi-abelian" => GfKind::RxiAbelian,
                        "rxi-nonabelian" => GfKind::RxiNonAbelian,
                        "unitary" => GfKind::Unitary,
                        _ => return Err(bad(k, v)),
                    }
                }
                "xi" => cfg.xi = v.parse().map_err(|_| bad(k, v))?,
                "v" => cfg.v = v.parse().map_err(|_| bad(k, v))?,
                "coupling" => cfg.coupling = v.parse().map_err(|_| bad(k, v))?,
                "phi0" => {
                    let parts: Vec<f64> = parse_list(v, k)?;
                    if parts.len() != 4 {
                        return Err(bad(k, v));
                    }
                    cfg.phi0 = Vector4::new(parts[0], parts[1], parts[2], parts[3]);
                }
                "tol" => cfg.tol = v.parse().map_err(|_| bad(k, v))?,
                "max_iter" => cfg.max_iter = v.parse().map_err(|_| bad(k, v))?,
                "xis" => cfg.xis = parse_list(v, k)?,
                "site" => cfg.site = v.parse().map_err(|_| bad(k, v))?,
                "eps" => cfg.eps = v.parse().map_err(|_| bad(k, v))?,
                "beta" => cfg.beta = v.parse().map_err(|_| bad(k, v))?,
                "mu2" => cfg.mu2 = v.parse().map_err(|_| bad(k, v))?,
                "lambda" => cfg.lambda = v.parse().map_err(|_| bad(k, v))?,
                "n_configs" => cfg.n_configs = v.parse().map_err(|_| bad(k, v))?,
                other => {
                    return Err(CliError::Config(format!("unknown key `{other}`")));
                }
            }
        }
        if !rep_given {
            cfg.rep = match cfg.group {
                GroupKind::U1 => Representation::U1Complex,
                GroupKind::Su2 => Representation::Su2Doublet,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.dims.is_empty() || self.dims.iter().any(|&d| d < 2) {
            return Err(CliError::Config(format!(
                "dims must all be >= 2, got {:?}",
                self.dims
            )));
        }
        if self.rep.kind() != self.group {
            return Err(CliError::Config("rep does not match group".into()));
        }
        if !self.spread.is_finite() || self.spread < 0.0 {
            return Err(CliError::Config("spread must be nonnegative".into()));
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(CliError::Config("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(CliError::Config("max_iter must be positive".into()));
        }
        if self.n_configs == 0 {
            return Err(CliError::Config("n_configs must be positive".into()));
        }
        Ok(())
    }

    /// Realize the gauge-fixing spec described by this config.
    pub fn gauge_fix_spec(&self) -> Result<GaugeFixSpec, CliError> {
        let spec = match (self.gf, self.group) {
            (GfKind::Lorenz, kind) => Ok(GaugeFixSpec::lorenz(kind)),
            (GfKind::RxiAbelian, GroupKind::U1) => {
                GaugeFixSpec::rxi_abelian(self.xi, self.v, self.coupling)
            }
            (GfKind::RxiNonAbelian, GroupKind::Su2) => {
                GaugeFixSpec::rxi_nonabelian(self.xi, self.coupling, self.phi0)
            }
            (GfKind::Unitary, GroupKind::U1) => Ok(GaugeFixSpec::unitary_u1()),
            (GfKind::Unitary, GroupKind::Su2) => GaugeFixSpec::unitary_su2(self.phi0),
            (gf, group) => {
                return Err(CliError::Config(format!(
                    "{gf:?} is not defined for {group:?}"
                )))
            }
        };
        spec.map_err(|e| CliError::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::from_text("").unwrap();
        assert_eq!(cfg.dims, vec![4, 4]);
        assert_eq!(cfg.group, GroupKind::U1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_text("dimz = 4,4\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"));
    }

    #[test]
    fn comments_and_blank_lines_ok() {
        let cfg =
            ExperimentConfig::from_text("# hi\n\ndims = 2,2 # inline\ngroup = su2\n").unwrap();
        assert_eq!(cfg.dims, vec![2, 2]);
        assert_eq!(cfg.rep, Representation::Su2Doublet);
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(ExperimentConfig::from_text("dims = 1,4\n").is_err());
        assert!(ExperimentConfig::from_text("group = su3\n").is_err());
        assert!(ExperimentConfig::from_text("tol = -1\n").is_err());
        assert!(ExperimentConfig::from_text("seed = banana\n").is_err());
        assert!(ExperimentConfig::from_text("dims = 4\ndims = 4\n").is_err());
    }

    #[test]
    fn rep_group_mismatch_is_rejected() {
        assert!(ExperimentConfig::from_text("group = u1\nrep = doublet\n").is_err());
    }

    #[test]
    fn spec_dispatch_respects_group() {
        // rxi-nonabelian with u1 parses but fails at spec construction
        let cfg = ExperimentConfig::from_text("group = u1\ngf = rxi-nonabelian\n").unwrap();
        assert!(cfg.gauge_fix_spec().is_err());
        let cfg = ExperimentConfig::from_text("group = u1\n").unwrap();
        assert!(cfg.gauge_fix_spec().is_ok());
    }
}
