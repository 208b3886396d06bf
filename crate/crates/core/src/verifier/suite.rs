use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::estimates::{
    check_commutator_sum_tau, check_commutator_sum_u, check_generalized_bernstein,
    check_kernel_commutator, check_riesz_bmo_commutator, check_riesz_commutator,
    check_smooth_commutator, Ensemble, HolderTriple, TauMode, Theta, YoungTriple,
};
use super::report::EstimateReport;
use crate::error::{Error, Result};

/// The estimates the verifier knows how to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimateId {
    Eq21,
    Eq22,
    Eq23,
    Eq312,
    Sce,
    WuJmfm,
    Weies,
    GenBernstein,
}

impl EstimateId {
    pub const ALL: [EstimateId; 8] = [
        EstimateId::Eq21,
        EstimateId::Eq22,
        EstimateId::Eq23,
        EstimateId::Eq312,
        EstimateId::Sce,
        EstimateId::WuJmfm,
        EstimateId::Weies,
        EstimateId::GenBernstein,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimateId::Eq21 => "eq2_1",
            EstimateId::Eq22 => "eq2_2",
            EstimateId::Eq23 => "eq2_3",
            EstimateId::Eq312 => "eq3_12",
            EstimateId::Sce => "sce",
            EstimateId::WuJmfm => "wu_jmfm",
            EstimateId::Weies => "weies",
            EstimateId::GenBernstein => "gen_bernstein",
        }
    }

    pub fn known_ids() -> String {
        Self::ALL.map(Self::as_str).join(", ")
    }
}

impl fmt::Display for EstimateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimateId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| {
                Error::Parameter(format!(
                    "unknown estimate id `{s}`; known ids: {}",
                    Self::known_ids()
                ))
            })
    }
}

/// Parameters of every check, with the defaults used by the full suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteParams {
    pub eq2_1_s: f64,
    pub eq2_1_alpha: f64,
    pub eq2_2: TauModeParams22,
    pub eq2_3: TauModeParams23,
    pub eq3_12_alpha: f64,
    pub eq3_12_nu: f64,
    pub sce_theta: Theta,
    pub sce_lambdas: Vec<f64>,
    pub sce_exponents: HolderTriple,
    pub wu_jmfm_j: i32,
    pub wu_jmfm_exponents: YoungTriple,
    pub weies_p: f64,
    pub bernstein_beta: f64,
    pub bernstein_q: u32,
    pub bernstein_j: Vec<i32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TauModeParams22 {
    pub s: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for TauModeParams22 {
    fn default() -> Self {
        Self {
            s: 1.0,
            alpha: 1.25,
            beta: 0.25,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TauModeParams23 {
    pub s1: f64,
    pub s2: f64,
    pub alpha: f64,
}

impl Default for TauModeParams23 {
    fn default() -> Self {
        Self {
            s1: 1.0,
            s2: 1.0,
            alpha: 1.25,
        }
    }
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            eq2_1_s: 1.0,
            eq2_1_alpha: 1.25,
            eq2_2: TauModeParams22::default(),
            eq2_3: TauModeParams23::default(),
            eq3_12_alpha: 1.25,
            eq3_12_nu: 1.0,
            sce_theta: Theta::Phi,
            sce_lambdas: (0..5).map(|i| f64::from(1 << i)).collect(),
            sce_exponents: HolderTriple {
                p: f64::INFINITY,
                q: 2.0,
                r: 2.0,
            },
            wu_jmfm_j: 2,
            wu_jmfm_exponents: YoungTriple {
                p: 2.0,
                p1: 1.0,
                p2: 2.0,
            },
            weies_p: 2.0,
            bernstein_beta: 0.25,
            bernstein_q: 4,
            bernstein_j: vec![2, 3, 4],
        }
    }
}

/// Runs one check with the suite parameters.
pub fn run_estimate(id: EstimateId, ens: &Ensemble, p: &SuiteParams) -> Result<EstimateReport> {
    match id {
        EstimateId::Eq21 => check_commutator_sum_u(ens, p.eq2_1_s, p.eq2_1_alpha),
        EstimateId::Eq22 => check_commutator_sum_tau(
            ens,
            TauMode::Eq22 {
                s: p.eq2_2.s,
                alpha: p.eq2_2.alpha,
                beta: p.eq2_2.beta,
            },
        ),
        EstimateId::Eq23 => check_commutator_sum_tau(
            ens,
            TauMode::Eq23 {
                s1: p.eq2_3.s1,
                s2: p.eq2_3.s2,
                alpha: p.eq2_3.alpha,
            },
        ),
        EstimateId::Eq312 => check_riesz_commutator(ens, p.eq3_12_alpha, p.eq3_12_nu),
        EstimateId::Sce => {
            check_smooth_commutator(ens, p.sce_theta, &p.sce_lambdas, p.sce_exponents)
        }
        EstimateId::WuJmfm => check_kernel_commutator(ens, p.wu_jmfm_j, p.wu_jmfm_exponents),
        EstimateId::Weies => check_riesz_bmo_commutator(ens, p.weies_p),
        EstimateId::GenBernstein => {
            check_generalized_bernstein(ens, p.bernstein_beta, p.bernstein_q, &p.bernstein_j)
        }
    }
}

/// Parses a list of ids, rejecting unknown ones and dropping duplicates.
/// An empty list selects every estimate.
pub fn parse_ids<S: AsRef<str>>(names: &[S]) -> Result<Vec<EstimateId>> {
    if names.is_empty() {
        return Ok(EstimateId::ALL.to_vec());
    }
    let mut ids = Vec::new();
    for name in names {
        let id: EstimateId = name.as_ref().parse()?;
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    Ok(ids)
}
