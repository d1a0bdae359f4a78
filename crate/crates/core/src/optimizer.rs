//! Grid searches over codes and spacings, repeaterless bounds and
//! bound-beating searches.
//!
//! Every search evaluates the exact propagation engine. For a fixed block size
//! and spacing one logical fold yields all block counts at once, so the unit of
//! parallel work is a `(m, L0)` pair.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::f64::consts::LN_2;

use crate::error::{invalid, Error, Result};
use crate::model::Scenario;
use crate::params::{CodeParams, DEFAULT_ATTENUATION_KM, DEFAULT_SIZE_CAP};
use crate::rates::{chain_rates, BmStats};

/// Photons per unit rate per km of spacing, `n m / (R t0 L0)`; infinite when the rate vanishes.
pub fn cost(n: usize, m: usize, l0_km: f64, rate: f64) -> f64 {
    if rate > 0.0 && l0_km > 0.0 {
        (n * m) as f64 / (rate * l0_km)
    } else {
        f64::INFINITY
    }
}

/// Two-way assisted repeaterless bound in bits per mode, `log2((1+eta)/(1-eta))`.
pub fn tgw_bound(eta: f64) -> f64 {
    if eta >= 1.0 {
        f64::INFINITY
    } else {
        (eta.ln_1p() - (-eta).ln_1p()) / LN_2
    }
}

/// Repeaterless secret-key capacity of a pure-loss channel, `-log2(1-eta)`.
pub fn plob_bound(eta: f64) -> f64 {
    if eta >= 1.0 {
        f64::INFINITY
    } else {
        -(-eta).ln_1p() / LN_2
    }
}

/// `start, start+step, ..., end` computed from integer multiples to avoid drift.
pub fn linear_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || end < start {
        return Vec::new();
    }
    let count = ((end - start) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| start + step * i as f64).map(|x| (x * 1e9).round() / 1e9).collect()
}

/// Spacings 0.5, 0.6, ..., 10 km.
pub fn default_l0_grid() -> Vec<f64> {
    linear_grid(0.5, 10.0, 0.1)
}

/// Spacings `l_tot / N` for integer station counts `N`, restricted to `[min_km, max_km]`
/// and sorted ascending. Use instead of a uniform grid to keep the station count integral.
pub fn integer_station_grid(l_tot_km: f64, min_km: f64, max_km: f64) -> Vec<f64> {
    if !(min_km > 0.0 && max_km >= min_km && l_tot_km >= min_km) {
        return Vec::new();
    }
    let first = (l_tot_km / max_km).ceil().max(1.0) as u64;
    let last = (l_tot_km / min_km).floor() as u64;
    let mut grid: Vec<f64> = (first..=last).map(|n| l_tot_km / n as f64).collect();
    grid.reverse();
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    MaxRate,
    MinCost,
}

/// Inclusive ranges of code sizes, a spacing grid and a chain length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub n_min: usize,
    pub n_max: usize,
    pub m_min: usize,
    pub m_max: usize,
    pub l0_grid: Vec<f64>,
    pub scenario: Scenario,
    pub l_tot_km: f64,
    pub l_att_km: f64,
    /// Codes with `n m` above this are skipped.
    pub size_cap: usize,
}

impl SearchSpace {
    /// Default spacing grid and attenuation.
    pub fn new(scenario: Scenario, l_tot_km: f64, n_max: usize, m_max: usize) -> Self {
        Self {
            n_min: 1,
            n_max,
            m_min: 1,
            m_max,
            l0_grid: default_l0_grid(),
            scenario,
            l_tot_km,
            l_att_km: DEFAULT_ATTENUATION_KM,
            size_cap: DEFAULT_SIZE_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(invalid("n range", format!("[{}, {}] is empty or starts at 0", self.n_min, self.n_max)));
        }
        if self.m_min == 0 || self.m_min > self.m_max {
            return Err(invalid("m range", format!("[{}, {}] is empty or starts at 0", self.m_min, self.m_max)));
        }
        if self.l0_grid.is_empty() {
            return Err(invalid("l0_grid", "must not be empty"));
        }
        if let Some(bad) = self
            .l0_grid
            .iter()
            .find(|&&l0| !(l0 > 0.0 && l0 <= self.l_tot_km && l0.is_finite()))
        {
            return Err(invalid("l0_grid", format!("{bad} is not in (0, l_tot_km = {}]", self.l_tot_km)));
        }
        if !(self.l_att_km > 0.0 && self.l_att_km.is_finite()) {
            return Err(invalid("l_att_km", "must be positive"));
        }
        for m in self.m_min..=self.m_max {
            self.scenario.validate(Some(m))?;
        }
        Ok(())
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimResult {
    pub code: CodeParams,
    pub l0_km: f64,
    /// Secure rate per station attempt, `R t0`.
    pub rate: f64,
    pub cost: f64,
    /// `R t0 / (2 n m)`.
    pub per_mode_rate: f64,
}

impl OptimResult {
    fn from_stats(code: CodeParams, l0_km: f64, stats: &BmStats, stations: f64) -> Result<Self> {
        let rate = chain_rates(stats, stations)?.r_t0;
        Ok(Self {
            code,
            l0_km,
            rate,
            cost: cost(code.n, code.m, l0_km, rate),
            per_mode_rate: rate / (2.0 * code.photons() as f64),
        })
    }
}

/// Ordering under `objective`: `Less` means `a` is preferred. Ties go to the
/// smaller `n m`, then the smaller `n`, then the larger spacing.
pub fn compare(a: &OptimResult, b: &OptimResult, objective: Objective) -> Ordering {
    let primary = match objective {
        Objective::MaxRate => b.rate.total_cmp(&a.rate),
        Objective::MinCost => a.cost.total_cmp(&b.cost),
    };
    primary
        .then(a.code.photons().cmp(&b.code.photons()))
        .then(a.code.n.cmp(&b.code.n))
        .then(b.l0_km.total_cmp(&a.l0_km))
}

/// Best point, if any has a positive rate, plus every evaluated point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimOutcome {
    pub objective: Objective,
    pub best: Option<OptimResult>,
    pub grid: Vec<OptimResult>,
}

impl OptimOutcome {
    /// The optimum, or [`Error::NoSolution`] when every rate is zero.
    pub fn require_best(&self) -> Result<OptimResult> {
        self.best
            .ok_or_else(|| Error::NoSolution("every grid point has zero secure rate".into()))
    }
}

/// Evaluates the whole grid and picks the optimum.
///
/// Grid order is `m`, then `L0`, then `n`; it does not depend on thread scheduling.
pub fn grid_optimize(space: &SearchSpace, objective: Objective) -> Result<OptimOutcome> {
    space.validate()?;
    let stations_of = |l0: f64| space.l_tot_km / l0;
    let jobs: Vec<(usize, f64)> = (space.m_min..=space.m_max)
        .flat_map(|m| space.l0_grid.iter().map(move |&l0| (m, l0)))
        .collect();
    let chunks: Result<Vec<Vec<OptimResult>>> = jobs
        .par_iter()
        .map(|&(m, l0)| {
            let n_max = space.n_max.min(space.size_cap / m);
            if n_max < space.n_min {
                return Ok(Vec::new());
            }
            let stats = space.scenario.stats_upto(m, n_max, l0, space.l_att_km)?;
            (space.n_min..=n_max)
                .map(|n| {
                    let code = CodeParams::with_cap(n, m, space.size_cap)?;
                    OptimResult::from_stats(code, l0, &stats[n - 1], stations_of(l0))
                })
                .collect()
        })
        .collect();
    let grid: Vec<OptimResult> = chunks?.into_iter().flatten().collect();
    let best = grid
        .iter()
        .filter(|p| p.rate > 0.0)
        .min_by(|a, b| compare(a, b, objective))
        .copied();
    Ok(OptimOutcome { objective, best, grid })
}

/// Rate at every spacing of `l0_grid` for one code; one fold per spacing.
pub fn rate_profile(
    scenario: &Scenario,
    code: CodeParams,
    l_tot_km: f64,
    l0_grid: &[f64],
    l_att_km: f64,
) -> Result<Vec<OptimResult>> {
    l0_grid
        .par_iter()
        .map(|&l0| {
            let stats = scenario.stats_upto(code.m, code.n, l0, l_att_km)?;
            OptimResult::from_stats(code, l0, &stats[code.n - 1], l_tot_km / l0)
        })
        .collect()
}

/// True when `values` rise (weakly) to one maximum and then fall (weakly), with
/// no second local maximum. Relative changes below `tol` count as flat.
pub fn single_peak(values: &[f64], tol: f64) -> bool {
    let mut falling = false;
    for w in values.windows(2) {
        let scale = w[0].abs().max(w[1].abs()).max(f64::MIN_POSITIVE);
        let delta = (w[1] - w[0]) / scale;
        if delta > tol {
            if falling {
                return false;
            }
        } else if delta < -tol {
            falling = true;
        }
    }
    true
}

/// Repeaterless benchmark a code has to beat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "bound", rename_all = "snake_case")]
pub enum Bound {
    Tgw,
    Plob,
    /// Distance-independent threshold in bits per mode.
    Constant { value: f64 },
}

impl Bound {
    /// Bound value for total channel transmission `eta`.
    pub fn at(&self, eta: f64) -> f64 {
        match *self {
            Bound::Tgw => tgw_bound(eta),
            Bound::Plob => plob_bound(eta),
            Bound::Constant { value } => value,
        }
    }
}

/// Limits of the code search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeatCaps {
    pub max_n: usize,
    pub max_m: usize,
    pub max_photons: usize,
}

impl Default for BeatCaps {
    fn default() -> Self {
        Self {
            max_n: 32,
            max_m: 8,
            max_photons: 64,
        }
    }
}

/// Chain lengths and spacings tried for each code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessGrid {
    pub l_tot_km: Vec<f64>,
    pub l0_km: Vec<f64>,
    pub l_att_km: f64,
}

impl Default for WitnessGrid {
    /// Chains of 10 to 3000 km in 10 km steps; spacings of 0.1 to 10 km in 0.1 km steps.
    fn default() -> Self {
        Self {
            l_tot_km: linear_grid(10.0, 3000.0, 10.0),
            l0_km: linear_grid(0.1, 10.0, 0.1),
            l_att_km: DEFAULT_ATTENUATION_KM,
        }
    }
}

/// A code and the point where its per-mode rate beats the bound by the largest factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeatWitness {
    pub code: CodeParams,
    pub l_tot_km: f64,
    pub l0_km: f64,
    pub per_mode_rate: f64,
    pub bound: f64,
}

/// Smallest code (by `n m`, then `n`) whose per-mode rate exceeds `bound` at some
/// point of `witness`. `Ok(None)` means no code within `caps` does.
pub fn smallest_code_beating_bound(
    scenario: &Scenario,
    bound: Bound,
    caps: BeatCaps,
    witness: &WitnessGrid,
) -> Result<Option<BeatWitness>> {
    if caps.max_n == 0 || caps.max_m == 0 || caps.max_photons == 0 {
        return Err(invalid("caps", "limits must be at least 1"));
    }
    if witness.l_tot_km.is_empty() || witness.l0_km.is_empty() {
        return Err(invalid("witness", "grids must not be empty"));
    }
    for m in 1..=caps.max_m {
        scenario.validate(Some(m))?;
    }
    let jobs: Vec<(usize, f64)> = (1..=caps.max_m)
        .flat_map(|m| witness.l0_km.iter().map(move |&l0| (m, l0)))
        .collect();
    let tables: Result<Vec<Vec<BmStats>>> = jobs
        .par_iter()
        .map(|&(m, l0)| {
            let n_max = caps.max_n.min(caps.max_photons / m);
            if n_max == 0 {
                return Ok(Vec::new());
            }
            scenario.stats_upto(m, n_max, l0, witness.l_att_km)
        })
        .collect();
    let tables = tables?;
    let bounds: Vec<f64> = witness
        .l_tot_km
        .iter()
        .map(|&l| bound.at((-l / witness.l_att_km).exp()))
        .collect();

    let mut codes: Vec<CodeParams> = (1..=caps.max_m)
        .flat_map(|m| (1..=caps.max_n).map(move |n| CodeParams { n, m }))
        .filter(|c| c.photons() <= caps.max_photons)
        .collect();
    codes.sort_by_key(|c| (c.photons(), c.n));

    for code in codes {
        let mut best: Option<(f64, BeatWitness)> = None;
        for (j, &(m, l0)) in jobs.iter().enumerate() {
            if m != code.m {
                continue;
            }
            let stats = &tables[j][code.n - 1];
            for (&l_tot, &b) in witness.l_tot_km.iter().zip(&bounds) {
                if l0 > l_tot {
                    continue;
                }
                let per_mode = chain_rates(stats, l_tot / l0)?.r_t0 / (2.0 * code.photons() as f64);
                if per_mode > b {
                    let margin = if b > 0.0 { per_mode / b } else { per_mode };
                    if best.map_or(true, |(bm, _)| margin > bm) {
                        best = Some((
                            margin,
                            BeatWitness {
                                code,
                                l_tot_km: l_tot,
                                l0_km: l0,
                                per_mode_rate: per_mode,
                                bound: b,
                            },
                        ));
                    }
                }
            }
        }
        if let Some((_, w)) = best {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Per-mode rate of a fixed code and spacing against both bounds along a chain-length axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub l_tot_km: f64,
    pub rate: f64,
    pub per_mode_rate: f64,
    pub tgw: f64,
    pub plob: f64,
}

impl BoundRow {
    pub fn beats(&self, bound: Bound) -> bool {
        let b = match bound {
            Bound::Tgw => self.tgw,
            Bound::Plob => self.plob,
            Bound::Constant { value } => value,
        };
        self.per_mode_rate > b
    }
}

/// One fold, then the chain formula for every `l_tot` (points shorter than `l0_km` are skipped).
pub fn bound_table(
    scenario: &Scenario,
    code: CodeParams,
    l0_km: f64,
    l_tot_grid: &[f64],
    l_att_km: f64,
) -> Result<Vec<BoundRow>> {
    let stats = scenario.stats_upto(code.m, code.n, l0_km, l_att_km)?;
    let stats = stats[code.n - 1];
    l_tot_grid
        .iter()
        .filter(|&&l| l >= l0_km)
        .map(|&l_tot| {
            let rate = chain_rates(&stats, l_tot / l0_km)?.r_t0;
            let eta = (-l_tot / l_att_km).exp();
            Ok(BoundRow {
                l_tot_km: l_tot,
                rate,
                per_mode_rate: rate / (2.0 * code.photons() as f64),
                tgw: tgw_bound(eta),
                plob: plob_bound(eta),
            })
        })
        .collect()
}

/// Chain lengths where the code beats `bound`, as `(first, last)` of the longest
/// consecutive run in the table.
pub fn beating_interval(rows: &[BoundRow], bound: Bound) -> Option<(f64, f64)> {
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < rows.len() {
        if !rows[i].beats(bound) {
            i += 1;
            continue;
        }
        let s = i;
        while i + 1 < rows.len() && rows[i + 1].beats(bound) {
            i += 1;
        }
        if best.map_or(true, |(a, b)| i - s > b - a) {
            best = Some((s, i));
        }
        i += 1;
    }
    best.map(|(a, b)| (rows[a].l_tot_km, rows[b].l_tot_km))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ErrorModelSpec;

    #[test]
    fn cost_examples() {
        assert!((cost(23, 5, 2.4, 0.7618) - 62.9).abs() < 0.5);
        assert!((cost(37, 6, 2.1, 0.73) - 144.8).abs() < 0.1);
        assert_eq!(cost(2, 3, 6.0, 1.0), 1.0);
        assert_eq!(cost(2, 3, 6.0, 0.0), f64::INFINITY);
    }

    #[test]
    fn bound_values() {
        assert!((plob_bound(0.5) - 1.0).abs() < 1e-15);
        assert_eq!(tgw_bound(1.0), f64::INFINITY);
        assert_eq!(plob_bound(1.0), f64::INFINITY);
        let eta = 1e-9;
        assert!((tgw_bound(eta) / plob_bound(eta) - 2.0).abs() < 1e-8);
        assert!((plob_bound(eta) / (eta / LN_2) - 1.0).abs() < 1e-8);
        let far = (-1000.0f64 / 22.0).exp();
        assert!((plob_bound(far) / (far / LN_2) - 1.0).abs() < 1e-12);
        assert!(plob_bound(far) > 0.0);
    }

    #[test]
    fn grid_helpers() {
        let g = default_l0_grid();
        assert_eq!(g.len(), 96);
        assert_eq!(g[0], 0.5);
        assert_eq!(g[95], 10.0);
        assert_eq!(g[19], 2.4);
        assert!(single_peak(&[0.0, 1.0, 3.0, 3.0, 2.0, 0.5], 1e-12));
        assert!(!single_peak(&[1.0, 3.0, 2.0, 2.5], 1e-12));
        let g = integer_station_grid(1000.0, 2.0, 2.5);
        assert_eq!(g.first().copied(), Some(1000.0 / 500.0));
        assert_eq!(g.last().copied(), Some(2.5));
        assert!(g.iter().all(|l| ((1000.0 / l) - (1000.0 / l).round()).abs() < 1e-9));
    }

    #[test]
    fn small_search_is_deterministic_and_consistent() {
        let mut space = SearchSpace::new(Scenario::loss(1.0), 1000.0, 12, 4);
        space.l0_grid = linear_grid(1.0, 3.0, 0.5);
        let a = grid_optimize(&space, Objective::MinCost).unwrap();
        let b = grid_optimize(&space, Objective::MinCost).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.grid.len(), 12 * 4 * 5);
        let best = a.require_best().unwrap();
        for p in &a.grid {
            assert_ne!(compare(p, &best, Objective::MinCost), Ordering::Less);
        }
        let direct = Scenario::loss(1.0)
            .rate(best.code, &crate::params::ChannelParams::new(1000.0, best.l0_km).unwrap())
            .unwrap();
        assert_eq!(direct.r_t0, best.rate);
    }

    #[test]
    fn empty_feasible_set_is_reported() {
        let mut space = SearchSpace::new(Scenario::loss(1.0), 100_000.0, 2, 1);
        space.l0_grid = vec![5.0];
        let out = grid_optimize(&space, Objective::MaxRate).unwrap();
        assert!(out.best.is_none());
        assert!(matches!(out.require_best(), Err(Error::NoSolution(_))));
    }

    #[test]
    fn invalid_spaces() {
        let mut space = SearchSpace::new(Scenario::loss(1.0), 1000.0, 2, 1);
        space.l0_grid = vec![2000.0];
        assert!(grid_optimize(&space, Objective::MaxRate).is_err());
        space.l0_grid = vec![1.0];
        space.n_min = 3;
        assert!(grid_optimize(&space, Objective::MaxRate).is_err());
    }

    #[test]
    fn zero_bound_is_beaten_by_the_trivial_code() {
        let w = smallest_code_beating_bound(
            &Scenario::loss(1.0),
            Bound::Constant { value: 0.0 },
            BeatCaps::default(),
            &WitnessGrid::default(),
        )
        .unwrap()
        .unwrap();
        assert_eq!(w.code, CodeParams { n: 1, m: 1 });
    }

    #[test]
    fn interval_extraction() {
        let s = Scenario::new(ErrorModelSpec::LossOnly, crate::params::DetectorParams::ideal());
        let rows = bound_table(&s, CodeParams::new(6, 2).unwrap(), 1.1, &linear_grid(10.0, 1500.0, 10.0), 22.0)
            .unwrap();
        let (a, b) = beating_interval(&rows, Bound::Tgw).unwrap();
        assert!(a < b);
        assert!(rows.iter().filter(|r| r.l_tot_km >= a && r.l_tot_km <= b).all(|r| r.beats(Bound::Tgw)));
    }
}
