//! End-to-end consistency: engine against closed forms, optimizer behaviour and
//! sampling checks for the on-off rule families.

use proptest::prelude::*;

use qpc_repeater::optimizer::{
    grid_optimize, linear_grid, rate_profile, single_peak, Objective, SearchSpace,
};
use qpc_repeater::oracle::{mc_block_column, mc_logical_column, verify_bell_representation, McConfig};
use qpc_repeater::physical::p_matrix_onoff;
use qpc_repeater::propagation::{propagate_block, propagate_logical, RuleFamily};
use qpc_repeater::rates::{closed_form_adv_rate, closed_form_loss_rate, closed_form_onoff};
use qpc_repeater::{
    ChannelParams, CodeParams, DetectorKind, DetectorParams, ErrorModelSpec, Scenario, TiePolicy,
};

const CLOSED_FORM_TOL: f64 = 1e-10;

fn onoff_detector(eta_d: f64) -> DetectorParams {
    DetectorParams {
        eta_d,
        nbar: 0.0,
        kind: DetectorKind::OnOff,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn loss_only_engine_matches_closed_form(
        n in 1usize..=40,
        m in 1usize..=8,
        eta_d in 0.9f64..=1.0,
        l0 in 0.5f64..5.0,
        l_tot in 10.0f64..2000.0,
    ) {
        let channel = ChannelParams::new(l_tot, l0).unwrap();
        let code = CodeParams::new(n, m).unwrap();
        let engine = Scenario::loss(eta_d).rate(code, &channel).unwrap().r_t0;
        let eta = eta_d * eta_d * channel.segment_transmission();
        let closed = closed_form_loss_rate(n, m, eta, channel.stations());
        prop_assert!((engine - closed).abs() <= CLOSED_FORM_TOL, "{engine} vs {closed}");
    }

    #[test]
    fn advanced_engine_matches_closed_form(
        n in 1usize..=40,
        m in 1usize..=8,
        p_adv in 0.0f64..=1.0,
        l0 in 0.5f64..5.0,
        l_tot in 10.0f64..2000.0,
    ) {
        let channel = ChannelParams::new(l_tot, l0).unwrap();
        let s = Scenario::new(ErrorModelSpec::AdvancedBm { p_adv }, DetectorParams::ideal());
        let engine = s.rate(CodeParams::new(n, m).unwrap(), &channel).unwrap().r_t0;
        let closed = closed_form_adv_rate(n, m, channel.segment_transmission(), p_adv, channel.stations());
        prop_assert!((engine - closed).abs() <= CLOSED_FORM_TOL, "{engine} vs {closed}");
    }

    #[test]
    fn onoff_engine_matches_closed_form(
        n in 1usize..=40,
        m in 1usize..=8,
        eta_d in 0.9f64..=1.0,
        l0 in 0.5f64..5.0,
        l_tot in 10.0f64..2000.0,
    ) {
        let channel = ChannelParams::new(l_tot, l0).unwrap();
        let s = Scenario::new(
            ErrorModelSpec::OnOff { epsilon: 0.0, kappa: None, tie: TiePolicy::Discard },
            onoff_detector(eta_d),
        );
        let report = s.rate(CodeParams::new(n, m).unwrap(), &channel).unwrap();
        let eta = eta_d * eta_d * channel.segment_transmission();
        let closed = closed_form_onoff(n, m, eta, channel.stations());
        prop_assert!((report.p_trans - closed.p_trans).abs() <= CLOSED_FORM_TOL);
        prop_assert!((report.q_x - closed.q_x).abs() <= CLOSED_FORM_TOL);
        prop_assert!((report.r_t0 - closed.secure_rate()).abs() <= CLOSED_FORM_TOL);
    }
}

#[test]
fn loss_only_rate_has_a_single_peak_in_the_spacing() {
    // Large codes peak well below 0.1 km, so the scan is logarithmic.
    let grid: Vec<f64> = (0..=120).map(|i| 1e-4 * 10f64.powf(i as f64 * 5.3 / 120.0)).collect();
    for (n, m) in [(10, 3), (13, 4), (16, 4), (23, 5), (35, 6), (6, 2)] {
        let profile = rate_profile(&Scenario::loss(1.0), CodeParams::new(n, m).unwrap(), 1000.0, &grid, 22.0).unwrap();
        let rates: Vec<f64> = profile.iter().map(|p| p.rate).collect();
        assert!(single_peak(&rates, 1e-12), "({n},{m})");
        let peak = rates.iter().cloned().fold(0.0, f64::max);
        assert!(peak > rates[0] && peak > *rates.last().unwrap(), "({n},{m}) peak is interior");
    }
}

#[test]
fn larger_codes_reach_higher_peak_rates() {
    let grid = linear_grid(0.5, 6.0, 0.1);
    let peaks: Vec<f64> = [(10, 3), (13, 4), (16, 4), (23, 5), (35, 6)]
        .iter()
        .map(|&(n, m)| {
            rate_profile(&Scenario::loss(1.0), CodeParams::new(n, m).unwrap(), 1000.0, &grid, 22.0)
                .unwrap()
                .iter()
                .map(|p| p.rate)
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(peaks.windows(2).all(|w| w[0] < w[1]), "{peaks:?}");
}

#[test]
fn optimizer_is_deterministic_and_finds_the_cost_optimum() {
    let mut space = SearchSpace::new(Scenario::loss(1.0), 1000.0, 40, 8);
    space.l0_grid = linear_grid(1.5, 3.5, 0.1);
    let a = grid_optimize(&space, Objective::MinCost).unwrap();
    let b = grid_optimize(&space, Objective::MinCost).unwrap();
    assert_eq!(a, b);
    let best = a.require_best().unwrap();
    assert_eq!(best.code, CodeParams::new(23, 5).unwrap());
    assert!((best.l0_km - 2.4).abs() < 1e-9);
    assert!((best.cost - 62.9).abs() < 0.5);
    let rate = grid_optimize(&space, Objective::MaxRate).unwrap().require_best().unwrap();
    assert!(rate.rate >= best.rate);
}

#[test]
fn depolarizing_rate_curves_are_ordered() {
    let code = CodeParams::new(23, 5).unwrap();
    let channel = ChannelParams::new(1000.0, 2.4).unwrap();
    let rates: Vec<f64> = [0.0, 1e-4, 1e-3, 5e-3]
        .iter()
        .map(|&epsilon| {
            Scenario::new(ErrorModelSpec::LossDepol { epsilon }, DetectorParams::ideal())
                .rate(code, &channel)
                .unwrap()
                .r_t0
        })
        .collect();
    assert!(rates.windows(2).all(|w| w[0] > w[1]), "{rates:?}");
}

#[test]
fn threshold_choices_give_distinct_rate_curves() {
    let code = CodeParams::new(30, 8).unwrap();
    let grid = linear_grid(0.5, 4.0, 0.1);
    let curves: Vec<Vec<f64>> = (1..=4)
        .map(|kappa| {
            let s = Scenario::new(
                ErrorModelSpec::OnOff {
                    epsilon: 1e-3,
                    kappa: Some(kappa),
                    tie: TiePolicy::Discard,
                },
                onoff_detector(1.0),
            );
            rate_profile(&s, code, 1000.0, &grid, 22.0)
                .unwrap()
                .iter()
                .map(|p| p.rate)
                .collect()
        })
        .collect();
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            let gap = curves[i]
                .iter()
                .zip(&curves[j])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(gap > 1e-3, "kappa {} and {} give the same curve", i + 1, j + 1);
        }
    }
}

#[test]
fn onoff_rules_agree_with_sampling() {
    let eta = (-2.0f64 / 22.0).exp();
    let cases = [
        (p_matrix_onoff(eta, 0.0).unwrap(), RuleFamily::OnOffTildeF),
        (
            p_matrix_onoff(eta, 1e-2).unwrap(),
            RuleFamily::OnOffKappaF {
                kappa: 1,
                tie: TiePolicy::Discard,
            },
        ),
        (
            p_matrix_onoff(eta, 1e-2).unwrap(),
            RuleFamily::OnOffKappaF {
                kappa: 2,
                tie: TiePolicy::AcceptAsOne,
            },
        ),
    ];
    let mut seed = 100;
    for (p, rules) in &cases {
        for (n, m) in [(2usize, 2usize), (3, 2), (3, 3)] {
            if let RuleFamily::OnOffKappaF { kappa, .. } = rules {
                if *kappa >= m {
                    continue;
                }
            }
            let b = propagate_block(p, m, *rules).unwrap();
            let l = propagate_logical(&b, n, RuleFamily::StandardG).unwrap();
            for v in 0..4 {
                seed += 1;
                let cfg = McConfig::new(1_000_000, seed).unwrap();
                let (k, lb) = ((v / 2) as u8, (v % 2) as u8);
                let eb = mc_block_column(p, m, k, lb, *rules, cfg).unwrap();
                assert!(eb.agrees_with(&b.column(v), 4.0), "block {rules:?} ({n},{m}) column {v}");
                let el = mc_logical_column(p, n, m, k, lb, *rules, RuleFamily::StandardG, cfg).unwrap();
                assert!(el.agrees_with(&l.column(v), 4.0), "logical {rules:?} ({n},{m}) column {v}");
            }
        }
    }
}

#[test]
fn bell_representation_for_listed_codes() {
    for m in 1..=3 {
        assert!(verify_bell_representation(1, m).unwrap().block_residual <= 1e-12);
    }
    for (n, m) in [(2, 2), (1, 3), (3, 1)] {
        assert!(verify_bell_representation(n, m).unwrap().passed(1e-12));
    }
}
