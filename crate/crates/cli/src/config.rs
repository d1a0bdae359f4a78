//! Run configuration: defaults, JSON file and command-line overrides.
//!
//! Every field has a default, so a config file may be partial. Unknown keys are
//! rejected. The resolved configuration is echoed in every JSON report and can
//! be fed back with `--config` to reproduce the run.

use serde::{Deserialize, Serialize};

use qpc_repeater::optimizer::{linear_grid, Objective, SearchSpace};
use qpc_repeater::resources::MuxParams;
use qpc_repeater::{CodeParams, DetectorKind, DetectorParams, ErrorModelSpec, Scenario, TiePolicy};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Loss,
    Depol,
    Adv,
    Onoff,
    Dark,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Tie {
    Discard,
    Accept,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    Pnrd,
    Onoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Rate,
    Cost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    L0,
    Epsilon,
    PAdv,
    LTot,
}

/// Code and spacing ranges of the grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub m_min: usize,
    pub m_max: usize,
    pub l0_min_km: f64,
    pub l0_max_km: f64,
    pub l0_step_km: f64,
    pub size_cap: usize,
    /// Emit every evaluated point, not just the optimum.
    pub include_grid: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_min: 1,
            n_max: 80,
            m_min: 1,
            m_max: 12,
            l0_min_km: 0.5,
            l0_max_km: 10.0,
            l0_step_km: 0.1,
            size_cap: 2048,
            include_grid: false,
        }
    }
}

/// One varied parameter; `values` takes precedence over the `start/stop/step` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub values: Option<Vec<f64>>,
    /// Codes to sweep; empty means the single code `(n, m)` of the run.
    pub codes: Vec<CodeParams>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            axis: Axis::L0,
            start: 0.5,
            stop: 10.0,
            step: 0.1,
            values: None,
            codes: Vec::new(),
        }
    }
}

impl SweepConfig {
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        let grid = match &self.values {
            Some(v) => v.clone(),
            None => linear_grid(self.start, self.stop, self.step),
        };
        if grid.is_empty() || grid.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Config("sweep grid is empty or not finite".into()));
        }
        Ok(grid)
    }
}

/// Chain lengths of the bound table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub l_tot_start_km: f64,
    pub l_tot_stop_km: f64,
    pub l_tot_step_km: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            l_tot_start_km: 10.0,
            l_tot_stop_km: 3000.0,
            l_tot_step_km: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResourceConfig {
    pub p_bm: f64,
    pub eta_sg: f64,
    pub p_sg: f64,
    pub n_bm_boost: u32,
}

impl Default for ResourceConfig {
    fn default() -> Self {
        let p = MuxParams::boosted_bm(1.0, 0.999);
        Self {
            p_bm: p.p_bm,
            eta_sg: p.eta_sg,
            p_sg: p.p_sg,
            n_bm_boost: p.n_bm_boost,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    pub n: usize,
    pub m: usize,
    pub l0_km: f64,
    pub l_tot_km: f64,
    pub l_att_km: f64,
    pub eta_d: f64,
    pub epsilon: f64,
    pub p_adv: f64,
    pub nbar: f64,
    pub kappa: Option<usize>,
    pub tie: Tie,
    /// Unset means on-off detectors for the on-off model and PNRDs otherwise.
    pub detector: Option<Detector>,
    pub objective: ObjectiveKind,
    pub format: Format,
    pub seed: u64,
    pub threads: Option<usize>,
    /// Include the physical, block and logical matrices in `rates` output.
    pub include_matrices: bool,
    pub search: SearchConfig,
    pub sweep: SweepConfig,
    pub bounds: BoundsConfig,
    pub resources: ResourceConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Loss,
            n: 23,
            m: 5,
            l0_km: 2.4,
            l_tot_km: 1000.0,
            l_att_km: 22.0,
            eta_d: 1.0,
            epsilon: 0.0,
            p_adv: 0.0,
            nbar: 0.0,
            kappa: None,
            tie: Tie::Discard,
            detector: None,
            objective: ObjectiveKind::Cost,
            format: Format::Json,
            seed: 1,
            threads: None,
            include_matrices: false,
            search: SearchConfig::default(),
            sweep: SweepConfig::default(),
            bounds: BoundsConfig::default(),
            resources: ResourceConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    /// Fills in the detector implied by the model.
    pub fn resolve(&mut self) {
        if self.detector.is_none() {
            self.detector = Some(match self.model {
                ModelKind::Onoff => Detector::Onoff,
                _ => Detector::Pnrd,
            });
        }
    }

    pub fn code(&self) -> Result<CodeParams, CliError> {
        Ok(CodeParams::with_cap(self.n, self.m, self.search.size_cap)?)
    }

    pub fn model_spec(&self) -> ErrorModelSpec {
        match self.model {
            ModelKind::Loss => ErrorModelSpec::LossOnly,
            ModelKind::Depol => ErrorModelSpec::LossDepol { epsilon: self.epsilon },
            ModelKind::Adv => ErrorModelSpec::AdvancedBm { p_adv: self.p_adv },
            ModelKind::Onoff => ErrorModelSpec::OnOff {
                epsilon: self.epsilon,
                kappa: self.kappa,
                tie: match self.tie {
                    Tie::Discard => TiePolicy::Discard,
                    Tie::Accept => TiePolicy::AcceptAsOne,
                },
            },
            ModelKind::Dark => ErrorModelSpec::DarkCount { epsilon: self.epsilon },
        }
    }

    pub fn scenario(&self) -> Scenario {
        let kind = match self.detector {
            Some(Detector::Onoff) => DetectorKind::OnOff,
            Some(Detector::Pnrd) => DetectorKind::Pnrd,
            None if self.model == ModelKind::Onoff => DetectorKind::OnOff,
            None => DetectorKind::Pnrd,
        };
        Scenario::new(
            self.model_spec(),
            DetectorParams {
                eta_d: self.eta_d,
                nbar: self.nbar,
                kind,
            },
        )
    }

    pub fn objective(&self) -> Objective {
        match self.objective {
            ObjectiveKind::Rate => Objective::MaxRate,
            ObjectiveKind::Cost => Objective::MinCost,
        }
    }

    pub fn search_space(&self) -> SearchSpace {
        let s = &self.search;
        let mut space = SearchSpace::new(self.scenario(), self.l_tot_km, s.n_max, s.m_max);
        space.n_min = s.n_min;
        space.m_min = s.m_min;
        space.l0_grid = linear_grid(s.l0_min_km, s.l0_max_km, s.l0_step_km);
        space.l_att_km = self.l_att_km;
        space.size_cap = s.size_cap;
        space
    }

    pub fn mux_params(&self) -> MuxParams {
        let r = &self.resources;
        MuxParams {
            p_bm: r.p_bm,
            eta_sg: r.eta_sg,
            p_sg: r.p_sg,
            n_bm_boost: r.n_bm_boost,
        }
    }
}
