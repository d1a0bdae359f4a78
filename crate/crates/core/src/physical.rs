//! Physical-level outcome matrices for the supported loss, Pauli, advanced-measurement,
//! on-off and dark-count models, plus the thermal-noise detector response.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, invalid, Result};
use crate::outcome::{Level, OutcomeMatrix, BELL_STATES, OUTCOMES};

type Rows = [[f64; BELL_STATES]; OUTCOMES];

const K1L0: usize = 2;
const K1L1: usize = 3;
const K0Q: usize = 4;
const FAIL: usize = 6;

fn physical(rows: Rows) -> OutcomeMatrix {
    OutcomeMatrix::from_rows_unchecked(Level::Physical, rows)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..=0.5).contains(&epsilon) {
        Ok(())
    } else {
        Err(invalid("epsilon", format!("{epsilon} is not in [0, 1/2]")))
    }
}

/// Photon loss only, `eta` being the survival probability of a photon pair's
/// single photons (fiber and detectors combined).
pub fn p_matrix_loss(eta: f64) -> Result<OutcomeMatrix> {
    check_probability("eta", eta)?;
    let mut rows = [[0.0; BELL_STATES]; OUTCOMES];
    rows[K1L0][2] = eta;
    rows[K1L1][3] = eta;
    rows[K0Q][0] = eta;
    rows[K0Q][1] = eta;
    rows[FAIL] = [1.0 - eta; BELL_STATES];
    Ok(physical(rows))
}

/// Column-mixing matrix of the symmetric Pauli channel: each of the three wrong
/// Bell states is reached with probability `epsilon / 2`.
pub fn depolarizing_mix(epsilon: f64) -> [[f64; BELL_STATES]; BELL_STATES] {
    std::array::from_fn(|w| {
        std::array::from_fn(|v| {
            if w == v {
                1.0 - 1.5 * epsilon
            } else {
                0.5 * epsilon
            }
        })
    })
}

/// Applies an independent symmetric Pauli channel before the measurement.
///
/// Pauli errors permute Bell states and commute with loss, so composing any
/// physical matrix with the channel is a column mix.
pub fn with_depolarizing(p: &OutcomeMatrix, epsilon: f64) -> Result<OutcomeMatrix> {
    check_epsilon(epsilon)?;
    Ok(p.mix_columns(&depolarizing_mix(epsilon)))
}

/// Loss together with a symmetric Pauli channel of strength `epsilon`.
pub fn p_matrix_depol(eta: f64, epsilon: f64) -> Result<OutcomeMatrix> {
    check_probability("eta", eta)?;
    check_epsilon(epsilon)?;
    let right = (1.0 - 1.5 * epsilon) * eta;
    let wrong = 0.5 * epsilon * eta;
    let mut rows = [[0.0; BELL_STATES]; OUTCOMES];
    rows[K1L0] = [wrong, wrong, right, wrong];
    rows[K1L1] = [wrong, wrong, wrong, right];
    rows[K0Q] = [
        (1.0 - epsilon) * eta,
        (1.0 - epsilon) * eta,
        epsilon * eta,
        epsilon * eta,
    ];
    rows[FAIL] = [1.0 - eta; BELL_STATES];
    Ok(physical(rows))
}

/// Advanced measurement that resolves `phi0l` with probability `p_adv`.
/// Takes the fiber transmission only; detectors are assumed lossless.
pub fn p_matrix_advanced(eta_t: f64, p_adv: f64) -> Result<OutcomeMatrix> {
    check_probability("eta_t", eta_t)?;
    check_probability("p_adv", p_adv)?;
    let mut rows = [[0.0; BELL_STATES]; OUTCOMES];
    rows[0][0] = p_adv * eta_t;
    rows[1][1] = p_adv * eta_t;
    rows[K1L0][2] = eta_t;
    rows[K1L1][3] = eta_t;
    rows[K0Q][0] = (1.0 - p_adv) * eta_t;
    rows[K0Q][1] = (1.0 - p_adv) * eta_t;
    rows[FAIL] = [1.0 - eta_t; BELL_STATES];
    Ok(physical(rows))
}

/// On-off detectors with loss and Pauli errors: vacuum and lost photons are
/// indistinguishable from a `k = 0` result, so the failure row folds into `(0,?)`.
pub fn p_matrix_onoff(eta: f64, epsilon: f64) -> Result<OutcomeMatrix> {
    let depol = p_matrix_depol(eta, epsilon)?;
    let mut rows = *depol.rows();
    for v in 0..BELL_STATES {
        rows[K0Q][v] += rows[FAIL][v];
        rows[FAIL][v] = 0.0;
    }
    Ok(physical(rows))
}

/// Probabilities `p[mu][nu]` that `mu` incident photons produce `nu` counts
/// (`nu = 2` meaning two or more) at a lossy detector with thermal background.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorResponse {
    pub p: [[f64; 3]; 3],
}

impl DetectorResponse {
    pub fn get(&self, incident: usize, detected: usize) -> f64 {
        self.p[incident][detected]
    }

    /// Largest deviation of a row sum from 1.
    pub fn row_defect(&self) -> f64 {
        self.p
            .iter()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Closed-form response of a detector with efficiency `eta_d` whose loss port
/// injects a thermal mode with mean photon number `nbar`.
pub fn build_detector_response(eta_d: f64, nbar: f64) -> Result<DetectorResponse> {
    check_probability("eta_d", eta_d)?;
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(invalid("nbar", format!("{nbar} must be nonnegative")));
    }
    let loss = 1.0 - eta_d;
    let x = nbar * loss;
    let d = 1.0 + x;
    let p00 = 1.0 / d;
    let p01 = x / (d * d);
    let p10 = loss * (1.0 + nbar) / (d * d);
    let p11 = (eta_d + loss * loss * nbar * (1.0 + nbar)) / d.powi(3);
    let p20 = loss * loss * (1.0 + nbar).powi(2) / d.powi(3);
    let p21 = (1.0 + nbar) * loss * (2.0 * eta_d + nbar * (1.0 + nbar) * loss * loss) / d.powi(4);
    Ok(DetectorResponse {
        p: [
            [p00, p01, 1.0 - p00 - p01],
            [p10, p11, 1.0 - p10 - p11],
            [p20, p21, 1.0 - p20 - p21],
        ],
    })
}

/// Probability that an empty detector clicks.
pub fn dark_count_probability(eta_d: f64, nbar: f64) -> Result<f64> {
    check_probability("eta_d", eta_d)?;
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(invalid("nbar", format!("{nbar} must be nonnegative")));
    }
    let x = nbar * (1.0 - eta_d);
    Ok(x / (1.0 + x))
}

/// Exact outcome matrix for PNRD detectors with dark counts. Fiber
/// transmission `eta_t` and detector efficiency `eta_d` enter separately.
/// Patterns with three or more clicks count as failures.
pub fn p_matrix_dark(eta_t: f64, eta_d: f64, nbar: f64) -> Result<OutcomeMatrix> {
    check_probability("eta_t", eta_t)?;
    let r = build_detector_response(eta_d, nbar)?;
    let [[p00, p01, p02], [p10, p11, p12], [p20, p21, p22]] = r.p;
    let lost = 1.0 - eta_t;

    // One photon lost in the fiber, one dark count: the same for every entry below.
    let one_lost = p11 * p01 * p00 * p00 + p10 * p00 * p01 * p01;

    let k_flip = eta_t * (p21 * p01 * p00 * p00 + p20 * p00 * p01 * p01) + lost * one_lost;
    let k0_ok = eta_t * ((p22 * p00 + 3.0 * p20 * p02) * p00 * p00)
        + lost * ((p12 * p00 + 3.0 * p10 * p02) * p00 * p00);
    let k1_ok = eta_t * (p11 * p11 * p00 * p00 + p01 * p01 * p10 * p10) + lost * one_lost;
    let l_flip = eta_t * (2.0 * p11 * p10 * p01 * p00) + lost * one_lost;
    let k1_as_k0 = eta_t * ((p12 * p00 + p10 * p02) * 2.0 * p10 * p00)
        + lost * ((p12 * p00 + 3.0 * p10 * p02) * p00 * p00);

    let mut rows = [[0.0; BELL_STATES]; OUTCOMES];
    rows[K1L0] = [k_flip, k_flip, k1_ok, l_flip];
    rows[K1L1] = [k_flip, k_flip, l_flip, k1_ok];
    rows[K0Q] = [k0_ok, k0_ok, k1_as_k0, k1_as_k0];
    for v in 0..BELL_STATES {
        rows[FAIL][v] = 1.0 - (0..FAIL).map(|u| rows[u][v]).sum::<f64>();
    }
    Ok(physical(rows))
}

/// Leading-order approximation of [`p_matrix_dark`] in the thermal photon number.
/// Used as a cross-check only.
pub fn p_matrix_dark_leading_order(eta_t: f64, eta_d: f64, nbar: f64) -> Result<OutcomeMatrix> {
    check_probability("eta_t", eta_t)?;
    check_probability("eta_d", eta_d)?;
    let pdc = nbar * (1.0 - eta_d);
    let single_loss = (1.0 - eta_t) * eta_d + eta_t * 2.0 * (1.0 - eta_d) * eta_d;
    let e = single_loss * pdc;
    let eta = eta_d * eta_d * eta_t;
    let k1_ok = eta * (1.0 - 8.0 * pdc) + e;
    let mut rows = [[0.0; BELL_STATES]; OUTCOMES];
    rows[K1L0] = [e, e, k1_ok, e];
    rows[K1L1] = [e, e, e, k1_ok];
    rows[K0Q] = [eta * (1.0 - 5.0 * pdc) + 2.0 * e, eta * (1.0 - 5.0 * pdc) + 2.0 * e, 2.0 * e, 2.0 * e];
    rows[FAIL] = [
        1.0 - eta * (1.0 - 5.0 * pdc) - 4.0 * e,
        1.0 - eta * (1.0 - 5.0 * pdc) - 4.0 * e,
        1.0 - eta * (1.0 - 8.0 * pdc) - 4.0 * e,
        1.0 - eta * (1.0 - 8.0 * pdc) - 4.0 * e,
    ];
    Ok(physical(rows))
}

/// Probability of losing exactly one of the two photons of a physical measurement,
/// either in the fiber or in a detector.
pub fn single_photon_loss_probability(eta_t: f64, eta_d: f64) -> f64 {
    (1.0 - eta_t) * eta_d + eta_t * 2.0 * (1.0 - eta_d) * eta_d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcome::{BellState, Outcome};

    fn close(a: &OutcomeMatrix, b: &OutcomeMatrix, tol: f64) -> bool {
        a.max_abs_diff(b) <= tol
    }

    #[test]
    fn loss_examples() {
        let p = p_matrix_loss(1.0).unwrap();
        assert_eq!(p.column(2), [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let eta = (-2.4f64 / 22.0).exp();
        let p = p_matrix_loss(eta).unwrap();
        for v in 0..4 {
            assert!((p.at(6, v) - 0.1034).abs() < 1e-4);
        }
        assert!(p.stochastic_defect() < 1e-15);
        assert!(p_matrix_loss(1.5).is_err());
    }

    #[test]
    fn depol_examples() {
        for eta in [0.0, 0.3, 0.9, 1.0] {
            assert!(close(&p_matrix_depol(eta, 0.0).unwrap(), &p_matrix_loss(eta).unwrap(), 0.0));
        }
        let p = p_matrix_depol(1.0, 0.01).unwrap();
        assert!((p.get(Outcome::K1L1, BellState::Phi10) - 0.005).abs() < 1e-15);
        assert!(p.stochastic_defect() < 1e-15);
    }

    #[test]
    fn depol_is_loss_followed_by_column_mix() {
        for (eta, eps) in [(0.9, 0.01), (0.5, 0.3), (1.0, 0.5), (0.1, 0.0)] {
            let mixed = with_depolarizing(&p_matrix_loss(eta).unwrap(), eps).unwrap();
            assert!(close(&mixed, &p_matrix_depol(eta, eps).unwrap(), 1e-15));
        }
    }

    #[test]
    fn advanced_examples() {
        let p = p_matrix_advanced(0.9, 0.5).unwrap();
        assert!((p.get(Outcome::K0L0, BellState::Phi00) - 0.45).abs() < 1e-15);
        assert!(close(&p_matrix_advanced(0.7, 0.0).unwrap(), &p_matrix_loss(0.7).unwrap(), 0.0));
        let perfect = p_matrix_advanced(1.0, 1.0).unwrap();
        for v in 0..4 {
            for u in 0..7 {
                assert_eq!(perfect.at(u, v), if u == v { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn onoff_examples() {
        let p = p_matrix_onoff(1.0, 0.0).unwrap();
        assert_eq!(p.at(4, 0), 1.0);
        let p = p_matrix_onoff(0.9, 0.01).unwrap();
        assert!((p.get(Outcome::K0Unknown, BellState::Phi10) - 0.109).abs() < 1e-15);
        for (eta, eps) in [(0.2, 0.1), (0.9, 0.01), (1.0, 0.5)] {
            let on = p_matrix_onoff(eta, eps).unwrap();
            let de = p_matrix_depol(eta, eps).unwrap();
            for v in 0..4 {
                assert!((on.at(4, v) - de.at(4, v) - de.at(6, v)).abs() < 1e-15);
                for u in [0, 1, 5, 6] {
                    assert_eq!(on.at(u, v), 0.0);
                }
            }
        }
    }

    #[test]
    fn detector_response_examples() {
        let r = build_detector_response(1.0, 0.4).unwrap();
        assert_eq!(r.get(1, 1), 1.0);
        assert_eq!(r.get(0, 0), 1.0);
        assert_eq!(r.get(2, 2), 1.0);
        let r = build_detector_response(0.9, 0.0).unwrap();
        assert!((r.get(1, 1) - 0.9).abs() < 1e-15);
        assert!((r.get(1, 0) - 0.1).abs() < 1e-15);
        assert!((r.get(2, 1) - 0.18).abs() < 1e-15);
        let r = build_detector_response(0.97, 0.03).unwrap();
        assert!((r.get(0, 0) - 1.0 / 1.0009).abs() < 1e-15);
        assert!(r.row_defect() < 1e-15);
    }

    #[test]
    fn dark_count_probability_examples() {
        assert_eq!(dark_count_probability(1.0, 0.5).unwrap(), 0.0);
        assert_eq!(dark_count_probability(0.5, 0.0).unwrap(), 0.0);
        let p = dark_count_probability(0.97, 0.03).unwrap();
        assert!((p - 9e-4 / 1.0009).abs() < 1e-15);
        assert!((p - 8.992e-4).abs() < 1e-7);
    }

    #[test]
    fn dark_reductions() {
        let eta_t = (-1.9f64 / 22.0).exp();
        let ideal = p_matrix_dark(eta_t, 1.0, 0.2).unwrap();
        assert!(close(&ideal, &p_matrix_loss(eta_t).unwrap(), 1e-15));
        let quiet = p_matrix_dark(eta_t, 0.97, 0.0).unwrap();
        assert!(close(&quiet, &p_matrix_loss(0.97 * 0.97 * eta_t).unwrap(), 1e-15));
    }

    #[test]
    fn dark_matches_leading_order_flip() {
        let eta_t = (-1.9f64 / 22.0).exp();
        let (eta_d, nbar) = (0.97, 0.03);
        let exact = p_matrix_dark(eta_t, eta_d, nbar).unwrap();
        let e = single_photon_loss_probability(eta_t, eta_d) * nbar * (1.0 - eta_d);
        let got = exact.get(Outcome::K1L1, BellState::Phi10);
        assert!((got - e).abs() < 10.0 * nbar * nbar * (1.0 - eta_d), "{got} vs {e}");
        assert!((e - 1.2e-4).abs() < 0.1e-4);
    }

    #[test]
    fn dark_columns_sum_to_one() {
        let p = p_matrix_dark(0.8, 0.9, 0.1).unwrap();
        assert!(p.stochastic_defect() < 1e-15);
        assert!(p.check_stochastic(1e-12).is_ok());
    }
}
