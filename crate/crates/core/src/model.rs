//! End-to-end evaluation: error model and geometry to physical matrix, block and
//! logical matrices, and chain rates.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::outcome::OutcomeMatrix;
use crate::params::{ChannelParams, CodeParams, DetectorKind, DetectorParams, ErrorModelSpec};
use crate::physical::{
    p_matrix_advanced, p_matrix_dark, p_matrix_depol, p_matrix_loss, p_matrix_onoff, with_depolarizing,
};
use crate::propagation::{propagate_block, propagate_logical, propagate_logical_upto, RuleFamily};
use crate::rates::{bm_stats, chain_rates, BmStats, RateReport};

/// Error model plus detector; everything that fixes the physical matrix up to the spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub model: ErrorModelSpec,
    pub detector: DetectorParams,
}

impl Scenario {
    pub fn new(model: ErrorModelSpec, detector: DetectorParams) -> Self {
        Self { model, detector }
    }

    /// Loss only with detector efficiency `eta_d`.
    pub fn loss(eta_d: f64) -> Self {
        Self::new(ErrorModelSpec::LossOnly, DetectorParams::lossy(eta_d))
    }

    /// Checks parameter ranges and model/detector compatibility.
    pub fn validate(&self, m: Option<usize>) -> Result<()> {
        self.detector.validate()?;
        self.model.validate(m)?;
        let onoff_model = matches!(self.model, ErrorModelSpec::OnOff { .. });
        match (onoff_model, self.detector.kind) {
            (true, DetectorKind::Pnrd) => Err(invalid("detector", "the on-off model needs on-off detectors")),
            (false, DetectorKind::OnOff) => Err(invalid(
                "detector",
                "on-off detectors are only supported by the on-off model",
            )),
            _ => Ok(()),
        }
    }

    /// Physical matrix for a spacing `l0_km` and attenuation length `l_att_km`.
    ///
    /// Loss, depolarizing and on-off models fold the detectors into
    /// `eta = eta_d^2 * eta_t`; the advanced model uses the fiber only; the
    /// dark-count model keeps both separate.
    pub fn physical_matrix(&self, l0_km: f64, l_att_km: f64) -> Result<OutcomeMatrix> {
        let eta_t = (-l0_km / l_att_km).exp();
        let eta = self.detector.eta_d * self.detector.eta_d * eta_t;
        match self.model {
            ErrorModelSpec::LossOnly => p_matrix_loss(eta),
            ErrorModelSpec::LossDepol { epsilon } => p_matrix_depol(eta, epsilon),
            ErrorModelSpec::AdvancedBm { p_adv } => p_matrix_advanced(eta_t, p_adv),
            ErrorModelSpec::OnOff { epsilon, .. } => p_matrix_onoff(eta, epsilon),
            ErrorModelSpec::DarkCount { epsilon } => {
                let p = p_matrix_dark(eta_t, self.detector.eta_d, self.detector.nbar)?;
                if epsilon > 0.0 {
                    with_depolarizing(&p, epsilon)
                } else {
                    Ok(p)
                }
            }
        }
    }

    /// Rule used to combine photon pairs into a block result.
    pub fn block_rules(&self) -> RuleFamily {
        match self.model {
            ErrorModelSpec::OnOff { kappa: None, .. } => RuleFamily::OnOffTildeF,
            ErrorModelSpec::OnOff {
                kappa: Some(kappa),
                tie,
                ..
            } => RuleFamily::OnOffKappaF { kappa, tie },
            _ => RuleFamily::StandardF,
        }
    }

    /// Rule used to combine blocks into a logical result.
    pub fn logical_rules(&self) -> RuleFamily {
        RuleFamily::StandardG
    }

    /// Full pipeline at one point.
    pub fn evaluate(&self, code: CodeParams, channel: &ChannelParams) -> Result<Evaluation> {
        self.validate(Some(code.m))?;
        channel.validate()?;
        let p = self.physical_matrix(channel.l0_km, channel.l_att_km)?;
        let b = propagate_block(&p, code.m, self.block_rules())?;
        let l = propagate_logical(&b, code.n, self.logical_rules())?;
        let stats = bm_stats(&l);
        let report = chain_rates(&stats, channel.stations())?;
        Ok(Evaluation {
            code,
            channel: *channel,
            physical: p,
            block: b,
            logical: l,
            stats,
            report,
        })
    }

    /// Per-station statistics for every `n` in `1..=n_max` at fixed `m` and spacing.
    pub fn stats_upto(&self, m: usize, n_max: usize, l0_km: f64, l_att_km: f64) -> Result<Vec<BmStats>> {
        self.validate(Some(m))?;
        let p = self.physical_matrix(l0_km, l_att_km)?;
        let b = propagate_block(&p, m, self.block_rules())?;
        Ok(propagate_logical_upto(&b, n_max, self.logical_rules())?
            .iter()
            .map(bm_stats)
            .collect())
    }

    /// Secure rate only.
    pub fn rate(&self, code: CodeParams, channel: &ChannelParams) -> Result<RateReport> {
        Ok(self.evaluate(code, channel)?.report)
    }
}

/// Every intermediate of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub code: CodeParams,
    pub channel: ChannelParams,
    pub physical: OutcomeMatrix,
    pub block: OutcomeMatrix,
    pub logical: OutcomeMatrix,
    pub stats: BmStats,
    pub report: RateReport,
}

impl Evaluation {
    /// Secure rate per optical mode, `R t0 / (2 n m)`.
    pub fn per_mode_rate(&self) -> f64 {
        self.report.r_t0 / (2.0 * self.code.photons() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::TiePolicy;

    #[test]
    fn fig3_point() {
        let e = Scenario::loss(1.0)
            .evaluate(CodeParams::new(23, 5).unwrap(), &ChannelParams::new(1000.0, 2.4).unwrap())
            .unwrap();
        assert!((e.report.r_t0 - 0.7618).abs() < 0.002);
        assert_eq!(e.stats.l_x, 0.0);
    }

    #[test]
    fn rule_selection() {
        let s = Scenario::new(
            ErrorModelSpec::OnOff {
                epsilon: 1e-3,
                kappa: Some(2),
                tie: TiePolicy::AcceptAsOne,
            },
            DetectorParams {
                kind: DetectorKind::OnOff,
                ..DetectorParams::ideal()
            },
        );
        assert_eq!(
            s.block_rules(),
            RuleFamily::OnOffKappaF {
                kappa: 2,
                tie: TiePolicy::AcceptAsOne
            }
        );
        assert!(s.validate(Some(8)).is_ok());
        let wrong = Scenario::new(s.model, DetectorParams::ideal());
        assert!(wrong.validate(Some(8)).is_err());
        let wrong = Scenario::new(
            ErrorModelSpec::LossOnly,
            DetectorParams {
                kind: DetectorKind::OnOff,
                ..DetectorParams::ideal()
            },
        );
        assert!(wrong.validate(Some(8)).is_err());
    }

    #[test]
    fn dark_with_zero_epsilon_is_plain_dark() {
        let det = DetectorParams {
            eta_d: 0.97,
            nbar: 0.1,
            kind: DetectorKind::Pnrd,
        };
        let s = Scenario::new(ErrorModelSpec::DarkCount { epsilon: 0.0 }, det);
        let p = s.physical_matrix(1.5, 22.0).unwrap();
        let q = p_matrix_dark((-1.5f64 / 22.0).exp(), 0.97, 0.1).unwrap();
        assert_eq!(p.max_abs_diff(&q), 0.0);
    }
}
