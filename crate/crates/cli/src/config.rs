//! Experiment configuration: one JSON document per run.

use serde::{Deserialize, Serialize};
use sgq_core::models::{
    chain_j1j2, chain_staggered, ladder, ring_network, tfim_chain, CornerSpec, CouplingAssignment, CouplingClass,
    LatticeLayout, RingSpec,
};
use sgq_core::protocols::{GtgOptions, ShuffleOptions};

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn default_seed() -> u64 {
    0x5eed
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub ground: GroundSpec,
    #[serde(default)]
    pub protocol: Option<ProtocolSpec>,
    #[serde(default)]
    pub scan: Option<ScanSpec>,
    #[serde(default)]
    pub duality: Option<DualitySpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    ChainJ1j2 {
        l: usize,
        #[serde(default = "one")]
        j1: f64,
        #[serde(default)]
        j2: f64,
        #[serde(default = "yes")]
        pbc: bool,
    },
    ChainStaggered {
        l: usize,
        #[serde(default = "one")]
        j: f64,
        delta: f64,
        #[serde(default = "yes")]
        pbc: bool,
    },
    Ladder {
        l: usize,
        #[serde(default = "one")]
        j_leg: f64,
        #[serde(default)]
        j_2nn: f64,
        j_rung: f64,
        #[serde(default)]
        j_diag: f64,
        #[serde(default = "yes")]
        pbc: bool,
    },
    TfimChain {
        l: usize,
        lambda: f64,
        #[serde(default)]
        pbc: bool,
    },
    RingNetwork {
        rings: Vec<RingSpec>,
        #[serde(default)]
        corners: Vec<CornerSpec>,
    },
}

impl SystemSpec {
    pub fn layout(&self) -> sgq_core::Result<LatticeLayout> {
        match *self {
            SystemSpec::ChainJ1j2 { l, j1, j2, pbc } => chain_j1j2(l, j1, j2, pbc),
            SystemSpec::ChainStaggered { l, j, delta, pbc } => chain_staggered(l, j, delta, pbc),
            SystemSpec::Ladder {
                l,
                j_leg,
                j_2nn,
                j_rung,
                j_diag,
                pbc,
            } => ladder(l, j_leg, j_2nn, j_rung, j_diag, pbc),
            SystemSpec::TfimChain { l, lambda, pbc } => tfim_chain(l, lambda, pbc),
            SystemSpec::RingNetwork {
                ref rings,
                ref corners,
            } => ring_network(rings, corners),
        }
    }

    pub fn conserves_sz(&self) -> bool {
        !matches!(self, SystemSpec::TfimChain { .. })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundSpec {
    /// Eigenpairs computed.
    pub levels: usize,
    pub tol: f64,
    /// Degeneracy window; defaults to `1e-8 max(1, |E0|)`.
    #[serde(default)]
    pub split_tol: Option<f64>,
    /// Total `S^z`; defaults to the smallest `|S^z|`.
    #[serde(default)]
    pub sz: Option<f64>,
}

impl Default for GroundSpec {
    fn default() -> Self {
        GroundSpec {
            levels: 4,
            tol: 1e-10,
            split_tol: None,
            sz: None,
        }
    }
}

fn default_repetitions() -> usize {
    1
}

fn default_samples() -> usize {
    100
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "name", deny_unknown_fields)]
pub enum ProtocolSpec {
    #[serde(rename = "pump")]
    Pump {
        #[serde(default = "default_repetitions")]
        repetitions: usize,
    },
    #[serde(rename = "twist")]
    Twist {
        #[serde(default = "default_repetitions")]
        repetitions: usize,
    },
    #[serde(rename = "shuffle")]
    Shuffle {
        /// Couplings replaced at the R endpoint; the C endpoint is the system.
        point_r: CouplingAssignment,
        taus: Vec<f64>,
        #[serde(default)]
        options: ShuffleOptions,
    },
    #[serde(rename = "teleport-h")]
    TeleportH {
        #[serde(default)]
        outcome: u8,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    #[serde(rename = "gtg2")]
    Gtg2 {
        /// Ring length when no `ring_network` system is given.
        #[serde(default)]
        l: Option<usize>,
        taus: Vec<f64>,
        #[serde(default)]
        options: GtgOptions,
    },
    #[serde(rename = "gtg3")]
    Gtg3 {
        #[serde(default)]
        l: Option<usize>,
        taus: Vec<f64>,
        #[serde(default)]
        options: GtgOptions,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub class: CouplingClass,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
}

impl Axis {
    pub fn points(&self) -> Result<Vec<f64>, String> {
        match (&self.values, self.start, self.stop, self.steps) {
            (Some(v), None, None, None) if !v.is_empty() => Ok(v.clone()),
            (None, Some(a), Some(b), Some(n)) if n >= 1 => Ok(if n == 1 {
                vec![a]
            } else {
                (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
            }),
            _ => Err(format!(
                "axis {} needs either a nonempty `values` list or `start`, `stop` and `steps`",
                self.class
            )),
        }
    }
}

fn default_threshold() -> f64 {
    0.05
}

fn default_levels() -> usize {
    6
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub axes: Vec<Axis>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_levels")]
    pub levels: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualitySpec {
    pub sizes: Vec<usize>,
    pub lambdas: Vec<f64>,
    /// Chain length of the exhaustive operator-algebra check.
    #[serde(default)]
    pub algebra_l: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for report files (created if missing); default `.`.
    #[serde(default)]
    pub dir: Option<String>,
    /// File stem; defaults to the subcommand name.
    #[serde(default)]
    pub name: Option<String>,
    /// Also write the CSV summary.
    #[serde(default = "yes")]
    pub csv: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: None,
            name: None,
            csv: true,
        }
    }
}
