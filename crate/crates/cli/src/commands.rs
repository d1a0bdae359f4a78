//! Subcommands other than the self-check. Each returns a [`Report`] holding a
//! JSON result and the same data as a table.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use qpc_repeater::optimizer::{
    beating_interval, bound_table, cost, grid_optimize, plob_bound, tgw_bound, Bound,
};
use qpc_repeater::resources::{cpc_module_count, mux_source_count};
use qpc_repeater::{ChannelParams, CodeParams};

use crate::config::{Axis, ModelKind, RunConfig};
use crate::error::CliError;

/// Rows of formatted cells under a header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// Command output; rendered as JSON or CSV by the caller.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub result: Value,
    pub table: Table,
}

/// Shortest form that still round-trips: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_value<T: Serialize>(x: &T) -> Result<Value, CliError> {
    Ok(serde_json::to_value(x)?)
}

fn channel(cfg: &RunConfig) -> Result<ChannelParams, CliError> {
    Ok(ChannelParams::with_attenuation(cfg.l_tot_km, cfg.l0_km, cfg.l_att_km)?)
}

pub fn rates(cfg: &RunConfig) -> Result<Report, CliError> {
    let code = cfg.code()?;
    let eval = cfg.scenario().evaluate(code, &channel(cfg)?)?;
    let per_mode = eval.per_mode_rate();
    let c = cost(code.n, code.m, cfg.l0_km, eval.report.r_t0);
    let mut result = json!({
        "code": code,
        "channel": eval.channel,
        "stats": eval.stats,
        "report": eval.report,
        "per_mode_rate": per_mode,
        "cost": c,
    });
    if cfg.include_matrices {
        result["matrices"] = json!({
            "physical": eval.physical,
            "block": eval.block,
            "logical": eval.logical,
        });
    }
    let r = &eval.report;
    let table = Table {
        header: vec!["n", "m", "l0_km", "l_tot_km", "p_trans", "q_x", "q_z", "q", "r_t0", "per_mode_rate", "cost"],
        rows: vec![vec![
            code.n.to_string(),
            code.m.to_string(),
            num(cfg.l0_km),
            num(cfg.l_tot_km),
            num(r.p_trans),
            num(r.q_x),
            num(r.q_z),
            num(r.q),
            num(r.r_t0),
            num(per_mode),
            num(c),
        ]],
    };
    Ok(Report {
        command: "rates",
        result,
        table,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
struct SweepRow {
    code: CodeParams,
    value: f64,
    l0_km: f64,
    l_tot_km: f64,
    p_trans: f64,
    q: f64,
    r_t0: f64,
    per_mode_rate: f64,
    tgw: f64,
    plob: f64,
}

fn with_axis(cfg: &RunConfig, axis: Axis, value: f64) -> RunConfig {
    let mut c = cfg.clone();
    match axis {
        Axis::L0 => c.l0_km = value,
        Axis::Epsilon => c.epsilon = value,
        Axis::PAdv => c.p_adv = value,
        Axis::LTot => c.l_tot_km = value,
    }
    c
}

pub fn sweep(cfg: &RunConfig) -> Result<Report, CliError> {
    let axis = cfg.sweep.axis;
    match (axis, cfg.model) {
        (Axis::Epsilon, ModelKind::Loss | ModelKind::Adv) => {
            return Err(CliError::Config("the epsilon axis needs the depol, onoff or dark model".into()))
        }
        (Axis::PAdv, m) if m != ModelKind::Adv => {
            return Err(CliError::Config("the p_adv axis needs the adv model".into()))
        }
        _ => {}
    }
    let grid = cfg.sweep.grid()?;
    let codes: Vec<CodeParams> = if cfg.sweep.codes.is_empty() {
        vec![cfg.code()?]
    } else {
        cfg.sweep
            .codes
            .iter()
            .map(|c| CodeParams::with_cap(c.n, c.m, cfg.search.size_cap))
            .collect::<Result<_, _>>()?
    };
    let points: Vec<(CodeParams, f64)> = codes
        .iter()
        .flat_map(|&c| grid.iter().map(move |&v| (c, v)))
        .collect();
    let rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&(code, value)| {
            let c = with_axis(cfg, axis, value);
            let eval = c.scenario().evaluate(code, &channel(&c)?)?;
            let eta = (-c.l_tot_km / c.l_att_km).exp();
            Ok(SweepRow {
                code,
                value,
                l0_km: c.l0_km,
                l_tot_km: c.l_tot_km,
                p_trans: eval.report.p_trans,
                q: eval.report.q,
                r_t0: eval.report.r_t0,
                per_mode_rate: eval.per_mode_rate(),
                tgw: tgw_bound(eta),
                plob: plob_bound(eta),
            })
        })
        .collect::<Result<_, CliError>>()?;
    let table = Table {
        header: vec![
            "n", "m", "value", "l0_km", "l_tot_km", "p_trans", "q", "r_t0", "per_mode_rate", "tgw", "plob",
        ],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.code.n.to_string(),
                    r.code.m.to_string(),
                    num(r.value),
                    num(r.l0_km),
                    num(r.l_tot_km),
                    num(r.p_trans),
                    num(r.q),
                    num(r.r_t0),
                    num(r.per_mode_rate),
                    num(r.tgw),
                    num(r.plob),
                ]
            })
            .collect(),
    };
    Ok(Report {
        command: "sweep",
        result: json!({ "axis": axis, "rows": to_value(&rows)? }),
        table,
    })
}

pub fn optimize(cfg: &RunConfig) -> Result<Report, CliError> {
    let outcome = grid_optimize(&cfg.search_space(), cfg.objective())?;
    let shown = if cfg.search.include_grid {
        outcome.grid.clone()
    } else {
        outcome.best.into_iter().collect()
    };
    let mut result = json!({
        "objective": outcome.objective,
        "best": outcome.best,
        "evaluated_points": outcome.grid.len(),
    });
    if cfg.search.include_grid {
        result["grid"] = to_value(&outcome.grid)?;
    }
    let table = Table {
        header: vec!["n", "m", "l0_km", "rate", "cost", "per_mode_rate"],
        rows: shown
            .iter()
            .map(|p| {
                vec![
                    p.code.n.to_string(),
                    p.code.m.to_string(),
                    num(p.l0_km),
                    num(p.rate),
                    num(p.cost),
                    num(p.per_mode_rate),
                ]
            })
            .collect(),
    };
    Ok(Report {
        command: "optimize",
        result,
        table,
    })
}

pub fn bounds(cfg: &RunConfig) -> Result<Report, CliError> {
    let b = &cfg.bounds;
    let grid = qpc_repeater::optimizer::linear_grid(b.l_tot_start_km, b.l_tot_stop_km, b.l_tot_step_km);
    if grid.is_empty() {
        return Err(CliError::Config("bound table has no chain lengths".into()));
    }
    let code = cfg.code()?;
    let scenario = cfg.scenario();
    scenario.validate(Some(code.m))?;
    let rows = bound_table(&scenario, code, cfg.l0_km, &grid, cfg.l_att_km)?;
    let table = Table {
        header: vec!["l_tot_km", "rate", "per_mode_rate", "tgw", "plob"],
        rows: rows
            .iter()
            .map(|r| vec![num(r.l_tot_km), num(r.rate), num(r.per_mode_rate), num(r.tgw), num(r.plob)])
            .collect(),
    };
    let result = json!({
        "code": code,
        "l0_km": cfg.l0_km,
        "beats_tgw": beating_interval(&rows, Bound::Tgw),
        "beats_plob": beating_interval(&rows, Bound::Plob),
        "rows": to_value(&rows)?,
    });
    Ok(Report {
        command: "bounds",
        result,
        table,
    })
}

pub fn resources(cfg: &RunConfig) -> Result<Report, CliError> {
    let code = cfg.code()?;
    let params = cfg.mux_params();
    let r = mux_source_count(code, params)?;
    let modules = cpc_module_count(code);
    let table = Table {
        header: vec![
            "n", "m", "cpc_modules", "n_x", "n_tilde", "n_bm_total", "n_s", "ceil_tree_n_s", "conservative_n_s",
            "exponent", "coefficient",
        ],
        rows: vec![vec![
            code.n.to_string(),
            code.m.to_string(),
            modules.to_string(),
            r.n_x.to_string(),
            num(r.n_tilde),
            num(r.n_bm_total),
            num(r.n_s),
            num(r.ceil_tree_n_s),
            num(r.conservative_n_s),
            num(r.exponent),
            num(r.coefficient),
        ]],
    };
    Ok(Report {
        command: "resources",
        result: json!({
            "cpc_modules": modules,
            "effective_success": params.effective_success(),
            "linear_optics": r,
        }),
        table,
    })
}
