//! Registry of Monte Carlo experiments, one per identity in law.

mod registry;
mod sim;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::stattests::{TestReport, MIN_PERMUTATIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentId {
    AlgSuite,
    ThmMain,
    ThmMainPrime,
    Qrev,
    CorMain,
    Bougerol,
    Dufresne,
    PropOppdg,
    PropPinv1,
    PropPinv2,
    PropPinvLimit,
    PropPdii,
    LemmaCsym,
    BridgeTbb,
    PropPsdiI,
    PropPsdiII,
    PropPinvr1,
    PropPinvr2,
    DriftedTalpha,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 19] = [
        ExperimentId::AlgSuite,
        ExperimentId::ThmMain,
        ExperimentId::ThmMainPrime,
        ExperimentId::Qrev,
        ExperimentId::CorMain,
        ExperimentId::Bougerol,
        ExperimentId::Dufresne,
        ExperimentId::PropOppdg,
        ExperimentId::PropPinv1,
        ExperimentId::PropPinv2,
        ExperimentId::PropPinvLimit,
        ExperimentId::PropPdii,
        ExperimentId::LemmaCsym,
        ExperimentId::BridgeTbb,
        ExperimentId::PropPsdiI,
        ExperimentId::PropPsdiII,
        ExperimentId::PropPinvr1,
        ExperimentId::PropPinvr2,
        ExperimentId::DriftedTalpha,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::AlgSuite => "ALG_SUITE",
            ExperimentId::ThmMain => "THM_MAIN",
            ExperimentId::ThmMainPrime => "THM_MAIN_PRIME",
            ExperimentId::Qrev => "QREV",
            ExperimentId::CorMain => "COR_MAIN",
            ExperimentId::Bougerol => "BOUGEROL",
            ExperimentId::Dufresne => "DUFRESNE",
            ExperimentId::PropOppdg => "PROP_OPPDG",
            ExperimentId::PropPinv1 => "PROP_PINV_1",
            ExperimentId::PropPinv2 => "PROP_PINV_2",
            ExperimentId::PropPinvLimit => "PROP_PINV_LIMIT",
            ExperimentId::PropPdii => "PROP_PDII",
            ExperimentId::LemmaCsym => "LEMMA_CSYM",
            ExperimentId::BridgeTbb => "BRIDGE_TBB",
            ExperimentId::PropPsdiI => "PROP_PSDI_I",
            ExperimentId::PropPsdiII => "PROP_PSDI_II",
            ExperimentId::PropPinvr1 => "PROP_PINVR_1",
            ExperimentId::PropPinvr2 => "PROP_PINVR_2",
            ExperimentId::DriftedTalpha => "DRIFTED_TALPHA",
        }
    }

    /// Position in [`ExperimentId::ALL`]; also the top byte of every stream id.
    pub fn ordinal(self) -> u64 {
        ExperimentId::ALL.iter().position(|&i| i == self).unwrap() as u64
    }

    pub fn requires_positive_mu(self) -> bool {
        matches!(
            self,
            ExperimentId::Dufresne
                | ExperimentId::PropOppdg
                | ExperimentId::PropPinv1
                | ExperimentId::PropPinv2
                | ExperimentId::PropPinvLimit
        )
    }

    fn description(self) -> &'static str {
        match self {
            ExperimentId::AlgSuite => "exact algebra of T_z, T~, T_alpha and R on sampled paths",
            ExperimentId::ThmMain => "T~ preserves the law of Brownian motion",
            ExperimentId::ThmMainPrime => "1/A_s + (e^{2B_t}-1)/A_t has the law of 1/A_s",
            ExperimentId::Qrev => "time reversal: e^{2B_t}/A_t has the law of 1/A_t",
            ExperimentId::CorMain => "(T~(B^(-mu)), B^(-mu)) has the law of (B^(mu), T~(B^(mu)))",
            ExperimentId::Bougerol => "Bougerol identity: beta(A_t) has the law of sinh B_t",
            ExperimentId::Dufresne => "Dufresne identity: A^(-mu)_inf has the law of 1/(2 gamma_mu)",
            ExperimentId::PropOppdg => "opposite drifts joined through A^(-mu)_inf and 2 gamma_mu",
            ExperimentId::PropPinv1 => "joint invariance of (X^1, B^(mu)) under swapping",
            ExperimentId::PropPinv2 => "joint invariance of (X^2, B^(-mu)) under swapping",
            ExperimentId::PropPinvLimit => "large-time limit of the joint invariance",
            ExperimentId::PropPdii => "invariance of B^(mu) given an independent drifted path on [0,u]",
            ExperimentId::LemmaCsym => "sign symmetry of B_t jointly with Z_{t/2}, Z_t",
            ExperimentId::BridgeTbb => "T_{-2x} maps the bridge to -x onto the bridge to x",
            ExperimentId::PropPsdiI => "transformed path and A_t against B and a hitting time",
            ExperimentId::PropPsdiII => "transformed path with hitting time against B and argsh term",
            ExperimentId::PropPinvr1 => "change of measure for T_{log(e^{2B_t}/(1+2xA_t))}",
            ExperimentId::PropPinvr2 => "change of measure for T_{log(e^{2B_t}+2xA_t)}",
            ExperimentId::DriftedTalpha => "Girsanov-type formula for T_{2x} of drifted motion",
        }
    }

    fn required_params(self) -> &'static [&'static str] {
        match self {
            ExperimentId::AlgSuite => &["t", "n_steps", "n_paths", "seed"],
            ExperimentId::ThmMain
            | ExperimentId::ThmMainPrime
            | ExperimentId::LemmaCsym => &["t", "n_steps", "n_paths", "marginals", "seed"],
            ExperimentId::Qrev | ExperimentId::Bougerol => &["t", "n_steps", "n_paths", "seed"],
            ExperimentId::CorMain => &["t", "n_steps", "n_paths", "mu", "marginals", "seed"],
            ExperimentId::Dufresne => &["t", "n_steps", "n_paths", "mu", "truncation_T", "seed"],
            ExperimentId::PropOppdg
            | ExperimentId::PropPinv1
            | ExperimentId::PropPinv2
            | ExperimentId::PropPinvLimit => &["t", "n_steps", "n_paths", "mu", "marginals", "seed"],
            ExperimentId::PropPdii => &["t", "n_steps", "n_paths", "mu", "u", "marginals", "seed"],
            ExperimentId::BridgeTbb
            | ExperimentId::PropPsdiI
            | ExperimentId::PropPsdiII => &["t", "n_steps", "n_paths", "x", "marginals", "seed"],
            ExperimentId::PropPinvr1 | ExperimentId::PropPinvr2 => {
                &["t", "n_steps", "n_paths", "alpha", "seed"]
            }
            ExperimentId::DriftedTalpha => &["t", "n_steps", "n_paths", "mu", "alpha", "seed"],
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.name() == up)
            .ok_or_else(|| Error::config(format!("unknown experiment id {s:?}")))
    }
}

impl Serialize for ExperimentId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ExperimentId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Declarative configuration of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub t_horizon: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub mu: f64,
    pub x: f64,
    pub alpha_or_x_weight: f64,
    pub u_extension: f64,
    #[serde(rename = "truncation_T")]
    pub truncation_t: f64,
    pub marginal_times: Vec<f64>,
    pub seed: u64,
    pub family_alpha: f64,
    pub n_permutations: usize,
    /// Rows per side fed to the energy test (the head of each pool).
    pub energy_sample: usize,
    /// Replace the identity by a deliberately wrong one.
    pub negative_control: bool,
}

/// Fewest paths per side accepted by a distributional experiment.
pub const MIN_PATHS: usize = 100;

impl ExperimentSpec {
    pub fn for_id(id: ExperimentId) -> Self {
        let mut spec = ExperimentSpec {
            id,
            t_horizon: 1.0,
            n_steps: 512,
            n_paths: 100_000,
            mu: 1.0,
            x: 0.5,
            alpha_or_x_weight: 0.3,
            u_extension: 0.5,
            truncation_t: 30.0,
            marginal_times: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            seed: 42,
            family_alpha: 0.05,
            n_permutations: 500,
            energy_sample: 1000,
            negative_control: false,
        };
        match id {
            ExperimentId::AlgSuite => {
                spec.n_paths = 100;
                spec.n_steps = 1024;
                spec.seed = 7;
            }
            ExperimentId::PropPinvr1 | ExperimentId::PropPinvr2 | ExperimentId::DriftedTalpha => {
                spec.n_paths = 200_000;
            }
            _ => {}
        }
        spec
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("{}: {msg}", self.id)));
        if !(self.t_horizon > 0.0 && self.t_horizon.is_finite()) {
            return bad(format!("t must be positive, got {}", self.t_horizon));
        }
        if self.n_steps < 4 {
            return bad(format!("n_steps must be at least 4, got {}", self.n_steps));
        }
        let min_paths = if self.id == ExperimentId::AlgSuite { 1 } else { MIN_PATHS };
        if self.n_paths < min_paths {
            return bad(format!("n_paths must be at least {min_paths}, got {}", self.n_paths));
        }
        if self.marginal_times.is_empty()
            || self.marginal_times.iter().any(|&f| !(f > 0.0 && f <= 1.0))
        {
            return bad(format!("marginals must be nonempty fractions in (0,1], got {:?}", self.marginal_times));
        }
        if !(self.family_alpha > 0.0 && self.family_alpha < 1.0) {
            return bad(format!("family alpha must lie in (0,1), got {}", self.family_alpha));
        }
        if self.id.requires_positive_mu() && !(self.mu > 0.0) {
            return bad(format!("requires mu > 0, got {}", self.mu));
        }
        if !self.mu.is_finite() || !self.x.is_finite() {
            return bad("mu and x must be finite".into());
        }
        if !(self.alpha_or_x_weight >= 0.0 && self.alpha_or_x_weight.is_finite()) {
            return bad(format!("alpha must be nonnegative, got {}", self.alpha_or_x_weight));
        }
        if !(self.u_extension >= 0.0 && self.u_extension.is_finite()) {
            return bad(format!("u must be nonnegative, got {}", self.u_extension));
        }
        if !(self.truncation_t >= self.t_horizon && self.truncation_t.is_finite()) {
            return bad(format!("truncation_T must be at least t, got {}", self.truncation_t));
        }
        if self.n_permutations < MIN_PERMUTATIONS {
            return bad(format!("n_permutations must be at least {MIN_PERMUTATIONS}"));
        }
        if self.energy_sample < 50 {
            return bad(format!("energy_sample must be at least 50, got {}", self.energy_sample));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub tests: Vec<TestReport>,
    pub overall_pass: bool,
    pub wall_time_s: f64,
}

impl ExperimentReport {
    pub fn test(&self, name: &str) -> Option<&TestReport> {
        self.tests.iter().find(|t| t.test_name == name)
    }

    /// Smallest p-value among member tests, if any.
    pub fn min_p_value(&self) -> Option<f64> {
        self.tests.iter().filter_map(|t| t.p_value).reduce(f64::min)
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let start = Instant::now();
    let tests = registry::run(spec)?;
    let overall_pass = !tests.is_empty() && tests.iter().all(|t| t.pass);
    Ok(ExperimentReport {
        spec: spec.clone(),
        tests,
        overall_pass,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentInfo {
    pub id: ExperimentId,
    pub description: &'static str,
    pub required_params: &'static [&'static str],
    pub requires_positive_mu: bool,
}

pub fn list_experiments() -> Vec<ExperimentInfo> {
    ExperimentId::ALL
        .into_iter()
        .map(|id| ExperimentInfo {
            id,
            description: id.description(),
            required_params: id.required_params(),
            requires_positive_mu: id.requires_positive_mu(),
        })
        .collect()
}
