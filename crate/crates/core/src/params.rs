//! Code, channel, detector and error-model parameters with their validation.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, invalid, Result};

/// Default upper bound on `n * m`.
pub const DEFAULT_SIZE_CAP: usize = 2048;

/// Default fiber attenuation length in km.
pub const DEFAULT_ATTENUATION_KM: f64 = 22.0;

/// A parity code with `n` blocks of `m` photons each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub m: usize,
}

impl CodeParams {
    /// Validates against [`DEFAULT_SIZE_CAP`].
    pub fn new(n: usize, m: usize) -> Result<Self> {
        Self::with_cap(n, m, DEFAULT_SIZE_CAP)
    }

    pub fn with_cap(n: usize, m: usize, cap: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        if m == 0 {
            return Err(invalid("m", "must be at least 1"));
        }
        if n.saturating_mul(m) > cap {
            return Err(invalid("n*m", format!("{} exceeds the cap {cap}", n * m)));
        }
        Ok(Self { n, m })
    }

    /// Physical qubits per logical qubit.
    pub fn photons(&self) -> usize {
        self.n * self.m
    }
}

impl std::fmt::Display for CodeParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.n, self.m)
    }
}

/// Geometry of a repeater chain. All lengths in km.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub l_tot_km: f64,
    pub l0_km: f64,
    pub l_att_km: f64,
}

impl ChannelParams {
    /// Chain with the default attenuation length.
    pub fn new(l_tot_km: f64, l0_km: f64) -> Result<Self> {
        Self::with_attenuation(l_tot_km, l0_km, DEFAULT_ATTENUATION_KM)
    }

    pub fn with_attenuation(l_tot_km: f64, l0_km: f64, l_att_km: f64) -> Result<Self> {
        let c = Self {
            l_tot_km,
            l0_km,
            l_att_km,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l0_km > 0.0 && self.l0_km.is_finite()) {
            return Err(invalid("l0_km", format!("{} must be positive", self.l0_km)));
        }
        if !(self.l0_km <= self.l_tot_km && self.l_tot_km.is_finite()) {
            return Err(invalid(
                "l_tot_km",
                format!("{} must be at least l0_km = {}", self.l_tot_km, self.l0_km),
            ));
        }
        if !(self.l_att_km > 0.0 && self.l_att_km.is_finite()) {
            return Err(invalid("l_att_km", format!("{} must be positive", self.l_att_km)));
        }
        Ok(())
    }

    /// Number of repeater segments, real-valued.
    pub fn stations(&self) -> f64 {
        self.l_tot_km / self.l0_km
    }

    /// Fiber transmission of one segment.
    pub fn segment_transmission(&self) -> f64 {
        (-self.l0_km / self.l_att_km).exp()
    }

    /// Fiber transmission of the whole distance, used by repeaterless bounds.
    pub fn total_transmission(&self) -> f64 {
        (-self.l_tot_km / self.l_att_km).exp()
    }
}

/// Photon counting capability of the detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    /// Resolves 0, 1 and at least 2 photons.
    #[default]
    Pnrd,
    /// Distinguishes only vacuum from at least one photon.
    OnOff,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    /// Detection efficiency.
    pub eta_d: f64,
    /// Mean thermal photon number behind the detector loss.
    pub nbar: f64,
    pub kind: DetectorKind,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self::ideal()
    }
}

impl DetectorParams {
    pub fn ideal() -> Self {
        Self {
            eta_d: 1.0,
            nbar: 0.0,
            kind: DetectorKind::Pnrd,
        }
    }

    pub fn lossy(eta_d: f64) -> Self {
        Self {
            eta_d,
            ..Self::ideal()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("eta_d", self.eta_d)?;
        if !(self.nbar >= 0.0 && self.nbar.is_finite()) {
            return Err(invalid("nbar", format!("{} must be nonnegative", self.nbar)));
        }
        Ok(())
    }
}

/// Handling of blocks with exactly `kappa` photons showing `k = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// The block is reported as a failure.
    #[default]
    Discard,
    /// The block is reported as `(1,?)`.
    AcceptAsOne,
}

/// Which error channels and detector model produce the physical outcome matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErrorModelSpec {
    LossOnly,
    LossDepol {
        epsilon: f64,
    },
    AdvancedBm {
        p_adv: f64,
    },
    /// On-off detectors. Without `kappa` the block rule marks any `k = 1`
    /// click as `(1,?)`; with `kappa` a threshold vote decides.
    OnOff {
        epsilon: f64,
        kappa: Option<usize>,
        tie: TiePolicy,
    },
    /// Thermal dark counts. `epsilon` adds an independent depolarizing
    /// channel on each photon pair; use 0 for the pure dark-count model.
    DarkCount {
        epsilon: f64,
    },
}

impl ErrorModelSpec {
    /// Checks parameter ranges; `m` is needed for the `kappa` bound.
    pub fn validate(&self, m: Option<usize>) -> Result<()> {
        match *self {
            ErrorModelSpec::LossOnly => Ok(()),
            ErrorModelSpec::LossDepol { epsilon } | ErrorModelSpec::DarkCount { epsilon } => {
                check_epsilon(epsilon)
            }
            ErrorModelSpec::AdvancedBm { p_adv } => check_probability("p_adv", p_adv),
            ErrorModelSpec::OnOff { epsilon, kappa, .. } => {
                check_epsilon(epsilon)?;
                match kappa {
                    None if epsilon > 0.0 => Err(invalid(
                        "kappa",
                        "a threshold is required when on-off detectors see depolarizing errors",
                    )),
                    None => Ok(()),
                    Some(0) => Err(invalid("kappa", "must be at least 1")),
                    Some(k) => match m {
                        Some(m) if k >= m => {
                            Err(invalid("kappa", format!("{k} must be at most m-1 = {}", m - 1)))
                        }
                        _ => Ok(()),
                    },
                }
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ErrorModelSpec::LossOnly => "loss",
            ErrorModelSpec::LossDepol { .. } => "depol",
            ErrorModelSpec::AdvancedBm { .. } => "adv",
            ErrorModelSpec::OnOff { .. } => "onoff",
            ErrorModelSpec::DarkCount { .. } => "dark",
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..=0.5).contains(&epsilon) {
        Ok(())
    } else {
        Err(invalid("epsilon", format!("{epsilon} is not in [0, 1/2]")))
    }
}
