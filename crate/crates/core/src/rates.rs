//! Chain-level transmission probability, bit error rates and asymptotic BB84 key
//! rates, plus closed-form rates for the loss-type models.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::outcome::OutcomeMatrix;

/// Smallest base fed to the logarithm when raising to a real power.
pub const POW_FLOOR: f64 = 1e-300;

/// Per-station probabilities of a correct result and of each unheralded Pauli error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BmStats {
    pub l_id: f64,
    pub l_x: f64,
    pub l_y: f64,
    pub l_z: f64,
}

impl BmStats {
    /// Probability that a logical measurement is accepted at all.
    pub fn accepted(&self) -> f64 {
        (self.l_id + self.l_y) + (self.l_x + self.l_z)
    }
}

/// Rates of a full chain. All rates are in units of the inverse source clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub p_trans: f64,
    pub q_x: f64,
    pub q_z: f64,
    pub q: f64,
    /// `p_trans * (1 - 2 h(q))` before clamping at zero.
    pub r_t0_unclamped: f64,
    pub r_t0: f64,
}

/// Collects the correct-identification and Pauli-error probabilities of a logical matrix.
pub fn bm_stats(l: &OutcomeMatrix) -> BmStats {
    let e = |pairs: [(usize, usize); 4]| pairs.iter().map(|&(u, v)| l.at(u, v)).sum::<f64>() / 4.0;
    BmStats {
        l_id: e([(0, 0), (1, 1), (2, 2), (3, 3)]),
        l_x: e([(2, 0), (3, 1), (0, 2), (1, 3)]),
        l_y: e([(3, 0), (2, 1), (1, 2), (0, 3)]),
        l_z: e([(1, 0), (0, 1), (3, 2), (2, 3)]),
    }
}

/// Binary entropy in bits with `0 log 0 = 0`.
pub fn binary_entropy(q: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        return 0.0;
    }
    -q * q.log2() - (1.0 - q) * (1.0 - q).log2()
}

/// `x^exponent` for `x` in `[0, 1]`, computed as `exp(exponent * ln x)` with the
/// base clamped to `[POW_FLOOR, 1]`. Zero stays zero.
pub fn chain_power(x: f64, exponent: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (exponent * x.clamp(POW_FLOOR, 1.0).ln()).exp()
}

/// Real power of a ratio in `[-1, 1]`. A negative base with a non-integer
/// exponent takes the real part of the principal value.
fn signed_chain_power(r: f64, exponent: f64) -> f64 {
    if r >= 0.0 {
        return chain_power(r, exponent);
    }
    let magnitude = chain_power(-r, exponent);
    if exponent.fract() == 0.0 {
        if exponent % 2.0 == 0.0 {
            magnitude
        } else {
            -magnitude
        }
    } else {
        magnitude * (std::f64::consts::PI * exponent).cos()
    }
}

/// Rates of a chain of `stations` identical links.
///
/// The bit error rates stay in `[0, 1/2]` as long as the correct result is at least
/// as likely as the Pauli errors combined.
pub fn chain_rates(stats: &BmStats, stations: f64) -> Result<RateReport> {
    if !(stations >= 1.0 && stations.is_finite()) {
        return Err(invalid("stations", format!("{stations} must be at least 1")));
    }
    let s = stats.accepted();
    if s <= 0.0 {
        return Ok(RateReport {
            p_trans: 0.0,
            q_x: 0.0,
            q_z: 0.0,
            q: 0.0,
            r_t0_unclamped: 0.0,
            r_t0: 0.0,
        });
    }
    let p_trans = chain_power(s, stations);
    // Shared grouping keeps swapping X and Z errors exact in floating point.
    let common = stats.l_id - stats.l_y;
    let rx = (common + (stats.l_z - stats.l_x)) / s;
    let rz = (common + (stats.l_x - stats.l_z)) / s;
    let q_x = 0.5 * (1.0 - signed_chain_power(rx, stations));
    let q_z = 0.5 * (1.0 - signed_chain_power(rz, stations));
    let q = 0.5 * (q_x + q_z);
    let r_t0_unclamped = p_trans * (1.0 - 2.0 * binary_entropy(q));
    Ok(RateReport {
        p_trans,
        q_x,
        q_z,
        q,
        r_t0_unclamped,
        r_t0: r_t0_unclamped.max(0.0),
    })
}

/// Secure rate of a loss-only chain with PNRD detectors, `eta` combining fiber
/// and detector survival per photon.
pub fn closed_form_loss_rate(n: usize, m: usize, eta: f64, stations: f64) -> f64 {
    closed_form_adv_rate(n, m, eta, 0.0, stations)
}

/// Secure rate of a loss-only chain whose physical measurement resolves `phi0l`
/// with probability `p_adv`.
pub fn closed_form_adv_rate(n: usize, m: usize, eta_t: f64, p_adv: f64, stations: f64) -> f64 {
    let (n, m) = (n as i32, m as i32);
    let block_ok = 1.0 - (1.0 - eta_t).powi(m);
    let block_ambiguous = block_ok - (1.0 + p_adv.powi(m)) * eta_t.powi(m) / 2.0;
    chain_power(block_ok.powi(n) - block_ambiguous.powi(n), stations)
}

/// Transmission probability and hidden bit-flip rate of a loss-only chain with on-off detectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnOffClosedForm {
    pub p_trans: f64,
    pub q_x: f64,
}

impl OnOffClosedForm {
    /// Secure rate; only bit flips occur, so the mean error rate is `q_x / 2`.
    pub fn secure_rate(&self) -> f64 {
        (self.p_trans * (1.0 - 2.0 * binary_entropy(0.5 * self.q_x))).max(0.0)
    }
}

pub fn closed_form_onoff(n: usize, m: usize, eta: f64, stations: f64) -> OnOffClosedForm {
    let (n, m) = (n as i32, m as i32);
    let accepted = 1.0 - (1.0 - eta.powi(m) / 2.0).powi(n);
    let block_ok = 1.0 - (1.0 - eta).powi(m);
    let correct_minus_flipped = block_ok.powi(n) - (block_ok - eta.powi(m) / 2.0).powi(n);
    let p_trans = chain_power(accepted, stations);
    let q_x = if accepted > 0.0 {
        0.5 * (1.0 - chain_power(correct_minus_flipped / accepted, stations))
    } else {
        0.0
    };
    OnOffClosedForm { p_trans, q_x }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcome::Level;

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        assert!((binary_entropy(0.11) - 0.4999).abs() < 1e-3);
    }

    #[test]
    fn stats_examples() {
        let mut rows = [[0.0; 4]; 7];
        for v in 0..4 {
            rows[v][v] = 1.0;
        }
        let id = OutcomeMatrix::from_rows_unchecked(Level::Logical, rows);
        assert_eq!(
            bm_stats(&id),
            BmStats {
                l_id: 1.0,
                l_x: 0.0,
                l_y: 0.0,
                l_z: 0.0
            }
        );
        let uniform = OutcomeMatrix::from_rows_unchecked(Level::Logical, {
            let mut r = [[0.0; 4]; 7];
            for row in r.iter_mut().take(4) {
                *row = [0.25; 4];
            }
            r
        });
        let s = bm_stats(&uniform);
        for x in [s.l_id, s.l_x, s.l_y, s.l_z] {
            assert_eq!(x, 0.25);
        }
    }

    #[test]
    fn chain_examples() {
        let s = BmStats {
            l_id: 0.9,
            l_x: 0.0,
            l_y: 0.0,
            l_z: 0.0,
        };
        let r = chain_rates(&s, 10.0).unwrap();
        assert_eq!(r.q, 0.0);
        assert!((r.r_t0 - 0.9f64.powi(10)).abs() < 1e-15);

        let a = 0.2;
        let r = chain_rates(&BmStats { l_id: a, l_x: a, l_y: a, l_z: a }, 3.0).unwrap();
        assert_eq!(r.q_x, 0.5);
        assert_eq!(r.q_z, 0.5);
        assert_eq!(r.r_t0, 0.0);
        assert!(r.r_t0_unclamped < 0.0);

        let zero = BmStats { l_id: 0.0, l_x: 0.0, l_y: 0.0, l_z: 0.0 };
        let r = chain_rates(&zero, 3.0).unwrap();
        assert_eq!((r.p_trans, r.q, r.r_t0), (0.0, 0.0, 0.0));
        assert!(chain_rates(&s, 0.5).is_err());
    }

    #[test]
    fn negative_ratio_integer_exponent() {
        let s = BmStats { l_id: 0.0, l_x: 1.0, l_y: 0.0, l_z: 0.0 };
        assert_eq!(chain_rates(&s, 1.0).unwrap().q_x, 1.0);
        assert_eq!(chain_rates(&s, 2.0).unwrap().q_x, 0.0);
    }

    #[test]
    fn closed_form_limits() {
        let stations = 1000.0 / 2.4;
        for n in 1..8 {
            let ideal = closed_form_loss_rate(n, 3, 1.0, stations);
            let expect = chain_power(1.0 - 0.5f64.powi(n as i32), stations);
            assert!((ideal - expect).abs() < 1e-15);
        }
        assert_eq!(closed_form_loss_rate(23, 5, 0.0, stations), 0.0);
        let r = closed_form_loss_rate(23, 5, (-2.4f64 / 22.0).exp(), stations);
        assert!((r - 0.7618).abs() < 0.002);
        assert_eq!(closed_form_adv_rate(4, 2, 1.0, 1.0, 7.0), 1.0);
        let eta: f64 = 0.93;
        assert_eq!(closed_form_adv_rate(6, 3, eta, 0.0, 5.0), closed_form_loss_rate(6, 3, eta, 5.0));
    }

    #[test]
    fn onoff_closed_form() {
        let c = closed_form_onoff(5, 3, 1.0, 20.0);
        assert!((c.p_trans - (1.0 - 1.0 / 32.0f64).powi(20)).abs() < 1e-14);
        assert!(c.q_x.abs() < 1e-14);
        let c = closed_form_onoff(21, 5, (-1.9f64 / 22.0).exp(), 1000.0 / 1.9);
        assert!(c.q_x >= 0.0);
        assert!((c.secure_rate() - 0.72).abs() < 0.01, "{}", c.secure_rate());
    }
}
