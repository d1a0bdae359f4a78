//! Built-in invariant checks against the brute-force oracles.
//!
//! `quick` runs small cases in about a second; `full` widens sizes and sample
//! counts. Checks run in a fixed order and the report names the first failure.

use serde::Serialize;

use qpc_repeater::optimizer::{grid_optimize, linear_grid, Objective, SearchSpace};
use qpc_repeater::oracle::{mc_block_column, mc_logical_column, verify_bell_representation, McConfig};
use qpc_repeater::physical::{p_matrix_advanced, p_matrix_dark, p_matrix_depol, p_matrix_loss, p_matrix_onoff};
use qpc_repeater::propagation::reference::{propagate_block_naive, propagate_logical_naive};
use qpc_repeater::propagation::{propagate_block, propagate_logical};
use qpc_repeater::rates::closed_form_loss_rate;
use qpc_repeater::resources::{mux_source_count, MuxParams};
use qpc_repeater::{ChannelParams, CodeParams, OutcomeMatrix, RuleFamily, Scenario, TiePolicy};

use crate::error::CliError;

const ENGINE_TOL: f64 = 1e-12;
const CLOSED_FORM_TOL: f64 = 1e-10;
// A few hundred outcome probabilities are compared at once, so any seed
// should pass; 4 sigma would fail by chance on roughly one seed in fifty.
const MC_SIGMAS: f64 = 5.0;
const BELL_TOL: f64 = 1e-12;
const REFERENCE_RATE: f64 = 0.762;
const REFERENCE_RATE_TOL: f64 = 0.005;
const REFERENCE_SOURCES: f64 = 1.6e6;
const REFERENCE_SOURCES_REL_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub level: Level,
    pub passed: bool,
    pub first_failure: Option<&'static str>,
    pub checks: Vec<CheckResult>,
}

type Check = (&'static str, Box<dyn Fn() -> Result<(bool, String), CliError>>);

fn physical_samples() -> Result<Vec<(&'static str, OutcomeMatrix)>, CliError> {
    let eta = (-2.0f64 / 22.0).exp();
    Ok(vec![
        ("loss", p_matrix_loss(eta)?),
        ("depol", p_matrix_depol(eta, 1e-2)?),
        ("adv", p_matrix_advanced(eta, 0.3)?),
        ("onoff", p_matrix_onoff(eta, 1e-2)?),
        ("dark", p_matrix_dark(eta, 0.97, 0.03)?),
    ])
}

fn block_families(m: usize) -> Vec<(OutcomeMatrix, RuleFamily)> {
    let eta = (-2.0f64 / 22.0).exp();
    let mut out = vec![
        (p_matrix_depol(eta, 1e-2).unwrap(), RuleFamily::StandardF),
        (p_matrix_onoff(eta, 0.0).unwrap(), RuleFamily::OnOffTildeF),
    ];
    for kappa in 1..m {
        for tie in [TiePolicy::Discard, TiePolicy::AcceptAsOne] {
            out.push((p_matrix_onoff(eta, 1e-2).unwrap(), RuleFamily::OnOffKappaF { kappa, tie }));
        }
    }
    out
}

fn checks(level: Level, seed: u64) -> Vec<Check> {
    let full = level == Level::Full;
    let max_m = if full { 7 } else { 4 };
    let max_n = if full { 6 } else { 3 };
    let mc_samples: u64 = if full { 1_000_000 } else { 100_000 };
    let mut list: Vec<Check> = vec![
        (
            "physical matrices are column-stochastic",
            Box::new(|| {
                let worst = physical_samples()?
                    .iter()
                    .map(|(_, p)| p.stochastic_defect())
                    .fold(0.0, f64::max);
                Ok((worst <= ENGINE_TOL, format!("max defect {worst:.2e}")))
            }),
        ),
        (
            "fold engine equals enumeration",
            Box::new(move || {
                let mut worst: f64 = 0.0;
                for m in 1..=max_m {
                    for (p, rules) in block_families(m) {
                        let b = propagate_block(&p, m, rules)?;
                        worst = worst.max(b.max_abs_diff(&propagate_block_naive(&p, m, rules)?));
                        for n in 1..=max_n {
                            let l = propagate_logical(&b, n, RuleFamily::StandardG)?;
                            let naive = propagate_logical_naive(&b, n, RuleFamily::StandardG)?;
                            worst = worst.max(l.max_abs_diff(&naive));
                        }
                    }
                }
                Ok((worst <= ENGINE_TOL, format!("max difference {worst:.2e}")))
            }),
        ),
        (
            "loss-only rate equals closed form",
            Box::new(|| {
                let mut worst: f64 = 0.0;
                for (n, m, l0) in [(23, 5, 2.4), (10, 3, 1.0), (35, 6, 3.3), (2, 2, 0.7)] {
                    let channel = ChannelParams::new(1000.0, l0)?;
                    let engine = Scenario::loss(1.0).rate(CodeParams::new(n, m)?, &channel)?.r_t0;
                    let closed = closed_form_loss_rate(n, m, channel.segment_transmission(), channel.stations());
                    worst = worst.max((engine - closed).abs());
                }
                Ok((worst <= CLOSED_FORM_TOL, format!("max difference {worst:.2e}")))
            }),
        ),
        (
            "reference point (23,5) at 2.4 km",
            Box::new(|| {
                let r = Scenario::loss(1.0)
                    .rate(CodeParams::new(23, 5)?, &ChannelParams::new(1000.0, 2.4)?)?
                    .r_t0;
                Ok(((r - REFERENCE_RATE).abs() <= REFERENCE_RATE_TOL, format!("r_t0 {r:.4}")))
            }),
        ),
        (
            "sampled block and logical columns agree",
            Box::new(move || {
                let mut worst: f64 = 0.0;
                let mut s = seed;
                for (p, rules) in block_families(3) {
                    let b = propagate_block(&p, 3, rules)?;
                    let l = propagate_logical(&b, 2, RuleFamily::StandardG)?;
                    for v in 0..4 {
                        s = s.wrapping_add(1);
                        let cfg = McConfig::new(mc_samples, s)?;
                        let (k, lb) = ((v / 2) as u8, (v % 2) as u8);
                        let eb = mc_block_column(&p, 3, k, lb, rules, cfg)?;
                        worst = worst.max(eb.max_deviation_sigmas(&b.column(v)));
                        let el = mc_logical_column(&p, 2, 3, k, lb, rules, RuleFamily::StandardG, cfg)?;
                        worst = worst.max(el.max_deviation_sigmas(&l.column(v)));
                    }
                }
                Ok((worst <= MC_SIGMAS, format!("max deviation {worst:.2} sigma")))
            }),
        ),
        (
            "Bell-state representation",
            Box::new(move || {
                let codes: &[(usize, usize)] = if full {
                    &[(1, 1), (1, 3), (3, 1), (2, 2), (2, 3), (3, 2), (2, 4), (4, 2)]
                } else {
                    &[(1, 2), (2, 2)]
                };
                let mut worst: f64 = 0.0;
                for &(n, m) in codes {
                    worst = worst.max(verify_bell_representation(n, m)?.max_residual());
                }
                Ok((worst <= BELL_TOL, format!("max residual {worst:.2e}")))
            }),
        ),
        (
            "source count of (23,5)",
            Box::new(|| {
                let r = mux_source_count(CodeParams::new(23, 5)?, MuxParams::boosted_bm(1.0, 0.999))?;
                let rel = (r.n_s / REFERENCE_SOURCES - 1.0).abs();
                Ok((rel <= REFERENCE_SOURCES_REL_TOL, format!("n_s {:.3e}", r.n_s)))
            }),
        ),
    ];
    if full {
        list.push((
            "cost optimum at 1000 km",
            Box::new(|| {
                let mut space = SearchSpace::new(Scenario::loss(1.0), 1000.0, 40, 8);
                space.l0_grid = linear_grid(1.5, 3.5, 0.1);
                let best = grid_optimize(&space, Objective::MinCost)?.require_best()?;
                let ok = best.code == CodeParams::new(23, 5)? && (best.l0_km - 2.4).abs() < 1e-9;
                Ok((ok, format!("{} at {} km, cost {:.1}", best.code, best.l0_km, best.cost)))
            }),
        ));
    }
    list
}

/// Runs every check of `level`; errors inside a check count as failures.
pub fn run(level: Level, seed: u64) -> Summary {
    let checks: Vec<CheckResult> = checks(level, seed)
        .into_iter()
        .map(|(name, f)| match f() {
            Ok((passed, detail)) => CheckResult { name, passed, detail },
            Err(e) => CheckResult {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        })
        .collect();
    let first_failure = checks.iter().find(|c| !c.passed).map(|c| c.name);
    Summary {
        level,
        passed: first_failure.is_none(),
        first_failure,
        checks,
    }
}
