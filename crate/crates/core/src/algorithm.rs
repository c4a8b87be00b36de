//! Solvers by name.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classic::{ba_run, fpa_run, ga_run, tlbo_run, AlgoParams};
use crate::dsm::{DsmInstance, Schedule};
use crate::error::{Error, Result};
use crate::heuristic::RunResult;
use crate::hybrid::{fbat_run, fga_run, ftlbo_run, gtlbo_run, hfba_run};
use crate::idfpa::{dfpa_run, idfpa_run, idfpa_schedule_run, IdfpaParams};
use crate::tsp::{Tour, TspInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ga,
    Ba,
    Fpa,
    Tlbo,
    Fbat,
    Hfba,
    Fga,
    Ftlbo,
    Gtlbo,
    Dfpa,
    Idfpa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 11] = [
        Algorithm::Ga,
        Algorithm::Ba,
        Algorithm::Fpa,
        Algorithm::Tlbo,
        Algorithm::Fbat,
        Algorithm::Hfba,
        Algorithm::Fga,
        Algorithm::Ftlbo,
        Algorithm::Gtlbo,
        Algorithm::Dfpa,
        Algorithm::Idfpa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ga => "ga",
            Algorithm::Ba => "ba",
            Algorithm::Fpa => "fpa",
            Algorithm::Tlbo => "tlbo",
            Algorithm::Fbat => "fbat",
            Algorithm::Hfba => "hfba",
            Algorithm::Fga => "fga",
            Algorithm::Ftlbo => "ftlbo",
            Algorithm::Gtlbo => "gtlbo",
            Algorithm::Dfpa => "dfpa",
            Algorithm::Idfpa => "idfpa",
        }
    }

    /// Agent-based solvers that keep a cost matrix.
    pub fn is_matrix_based(self) -> bool {
        matches!(self, Algorithm::Dfpa | Algorithm::Idfpa)
    }

    /// Parameters from a JSON document; an empty document gives the defaults.
    pub fn params_from_json(self, text: &str) -> Result<Params> {
        if self.is_matrix_based() {
            Ok(Params::Idfpa(serde_json::from_str(text)?))
        } else {
            Ok(Params::Classic(serde_json::from_str(text)?))
        }
    }

    pub fn default_params(self) -> Params {
        if self.is_matrix_based() {
            Params::Idfpa(IdfpaParams::default())
        } else {
            Params::Classic(AlgoParams::default())
        }
    }

    /// Runs on an appliance schedule. dfpa and idfpa use the slot-node adaptation.
    pub fn run_schedule(
        self,
        instance: &DsmInstance,
        params: &Params,
        seed: u64,
    ) -> Result<RunResult<Schedule>> {
        match (self, params) {
            (Algorithm::Idfpa, Params::Idfpa(p)) => idfpa_schedule_run(instance, p, seed),
            (Algorithm::Dfpa, Params::Idfpa(p)) => idfpa_schedule_run(instance, &p.memoryless(), seed),
            (_, Params::Classic(p)) if !self.is_matrix_based() => {
                let run = match self {
                    Algorithm::Ga => ga_run,
                    Algorithm::Ba => ba_run,
                    Algorithm::Fpa => fpa_run,
                    Algorithm::Tlbo => tlbo_run,
                    Algorithm::Fbat => fbat_run,
                    Algorithm::Hfba => hfba_run,
                    Algorithm::Fga => fga_run,
                    Algorithm::Ftlbo => ftlbo_run,
                    Algorithm::Gtlbo => gtlbo_run,
                    Algorithm::Dfpa | Algorithm::Idfpa => unreachable!(),
                };
                run(instance, p, seed)
            }
            _ => Err(self.params_mismatch()),
        }
    }

    /// Runs on a tour instance; only the matrix-based solvers apply.
    pub fn run_tsp(self, instance: &TspInstance, params: &IdfpaParams, seed: u64) -> Result<RunResult<Tour>> {
        match self {
            Algorithm::Idfpa => idfpa_run(instance, params, seed),
            Algorithm::Dfpa => dfpa_run(instance, params, seed),
            _ => Err(Error::param(format!("{self} does not solve tour instances"))),
        }
    }

    fn params_mismatch(self) -> Error {
        Error::param(format!("parameter document does not match algorithm {self}"))
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == lower)
            .ok_or_else(|| Error::param(format!("unknown algorithm '{s}'")))
    }
}

/// Parameter document for either solver family.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Classic(AlgoParams),
    Idfpa(IdfpaParams),
}
