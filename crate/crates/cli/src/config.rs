// SPDX-License-Identifier: Apache-2.0

//! Run configuration: defaults, flat JSON config files, and command-line
//! overrides, merged in that order of increasing precedence.

use std::f64::consts::{FRAC_PI_4, PI};
use std::path::PathBuf;

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    Position,
    Kspace,
    Mc,
}

impl EngineKind {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "position" => Ok(Self::Position),
            "kspace" => Ok(Self::Kspace),
            "mc" => Ok(Self::Mc),
            other => Err(CliError::Config(format!(
                "unknown engine '{other}' (expected position, kspace, or mc)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Position => "position",
            Self::Kspace => "kspace",
            Self::Mc => "mc",
        }
    }
}

/// Optional fields exactly as they appear on the command line or in a
/// config file; `None` means "not given here".
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub theta: Option<f64>,
    pub gamma: Option<f64>,
    pub phi: Option<f64>,
    pub gamma2: Option<f64>,
    pub phi2: Option<f64>,
    pub p: Option<f64>,
    pub steps: Option<usize>,
    pub engine: Option<String>,
    pub nk: Option<usize>,
    pub ntraj: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl PartialConfig {
    pub fn from_file(path: &PathBuf) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }

    /// Fill unset fields of `self` from `fallback`.
    pub fn or(self, fallback: PartialConfig) -> PartialConfig {
        PartialConfig {
            theta: self.theta.or(fallback.theta),
            gamma: self.gamma.or(fallback.gamma),
            phi: self.phi.or(fallback.phi),
            gamma2: self.gamma2.or(fallback.gamma2),
            phi2: self.phi2.or(fallback.phi2),
            p: self.p.or(fallback.p),
            steps: self.steps.or(fallback.steps),
            engine: self.engine.or(fallback.engine),
            nk: self.nk.or(fallback.nk),
            ntraj: self.ntraj.or(fallback.ntraj),
            seed: self.seed.or(fallback.seed),
            out: self.out.or(fallback.out),
        }
    }
}

/// A fully resolved run configuration. Domain validation happens when the
/// values are turned into library types, so invalid angles or
/// probabilities surface as config errors before any computation starts.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub theta: f64,
    pub gamma: f64,
    pub phi: f64,
    pub gamma2: Option<f64>,
    pub phi2: Option<f64>,
    pub p: f64,
    pub steps: Option<usize>,
    pub engine: EngineKind,
    pub nk: Option<usize>,
    pub ntraj: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(merged: PartialConfig) -> Result<Self, CliError> {
        let engine = match merged.engine.as_deref() {
            Some(s) => EngineKind::parse(s)?,
            None => EngineKind::Kspace,
        };
        Ok(RunConfig {
            theta: merged.theta.unwrap_or(FRAC_PI_4),
            gamma: merged.gamma.unwrap_or(0.0),
            phi: merged.phi.unwrap_or(0.0),
            gamma2: merged.gamma2,
            phi2: merged.phi2,
            p: merged.p.unwrap_or(0.0),
            steps: merged.steps,
            engine,
            nk: merged.nk,
            ntraj: merged.ntraj.unwrap_or(1000),
            seed: merged.seed.unwrap_or(1),
            out: merged.out,
        })
    }

    pub fn coin(&self) -> Result<qwalk::CoinParams, CliError> {
        qwalk::CoinParams::new(self.theta).map_err(CliError::from_domain)
    }

    pub fn noise(&self) -> Result<qwalk::kspace::NoiseParams, CliError> {
        qwalk::kspace::NoiseParams::new(self.p).map_err(CliError::from_domain)
    }

    pub fn angles(&self) -> Result<qwalk::CoinAngles, CliError> {
        qwalk::CoinAngles::new(self.gamma, self.phi).map_err(CliError::from_domain)
    }

    /// Second initial state; defaults to the orthogonal partner of the
    /// first when not configured.
    pub fn angles2(&self) -> Result<qwalk::CoinAngles, CliError> {
        match (self.gamma2, self.phi2) {
            (None, None) => Ok(self.angles()?.orthogonal_partner()),
            (g2, p2) => qwalk::CoinAngles::new(g2.unwrap_or(PI - self.gamma), p2.unwrap_or(0.0))
                .map_err(CliError::from_domain),
        }
    }

    /// Parameter list for the self-describing output header, in a fixed
    /// order so reruns are byte-identical.
    pub fn describe(&self, command: &str) -> Vec<(String, String)> {
        let mut out = vec![
            ("command".into(), command.to_string()),
            ("engine".into(), self.engine.name().to_string()),
            ("theta".into(), self.theta.to_string()),
            ("gamma".into(), self.gamma.to_string()),
            ("phi".into(), self.phi.to_string()),
        ];
        if let Some(g2) = self.gamma2 {
            out.push(("gamma2".into(), g2.to_string()));
        }
        if let Some(p2) = self.phi2 {
            out.push(("phi2".into(), p2.to_string()));
        }
        out.push(("p".into(), self.p.to_string()));
        if let Some(steps) = self.steps {
            out.push(("steps".into(), steps.to_string()));
        }
        if let Some(nk) = self.nk {
            out.push(("nk".into(), nk.to_string()));
        }
        out.push(("ntraj".into(), self.ntraj.to_string()));
        out.push(("seed".into(), self.seed.to_string()));
        out
    }
}
