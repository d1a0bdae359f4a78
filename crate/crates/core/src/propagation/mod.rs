//! Propagation of outcome matrices from the physical to the block level and from
//! the block to the logical level.
//!
//! Every entry of the next-level matrix has the form
//! `sum_gamma multinomial(gamma) * [x_plus^gamma +- x_minus^gamma] * [rule(gamma) = u]`
//! with `x_plus`/`x_minus` half the sum/difference of two source columns. The
//! production path evaluates that sum by folding outcomes one at a time through a
//! small sufficient statistic of the rule ([`rules::Tally`]), which also yields every
//! smaller level size along the way. [`reference`] keeps the literal composition sum
//! and the original parity-restricted double sum as independent oracles.

pub mod reference;
pub mod rules;

use crate::error::{invalid, Result};
use crate::outcome::{Level, OutcomeMatrix, BELL_STATES, OUTCOMES};
use rules::Tally;
pub use rules::{
    classify_onoff_kappa, classify_onoff_tilde, classify_standard_f, classify_standard_g,
    RuleFamily,
};

/// Tolerance on the column sums of matrices handed to the engine.
const INPUT_TOL: f64 = 1e-9;

/// For each target column: the source column pair `(a, b)` and the sign of the
/// difference term.
pub fn column_pairs(target: Level) -> [(usize, usize, f64); BELL_STATES] {
    match target {
        Level::Block => [(0, 1, 1.0), (0, 1, -1.0), (2, 3, 1.0), (2, 3, -1.0)],
        Level::Logical => [(0, 2, 1.0), (1, 3, 1.0), (0, 2, -1.0), (1, 3, -1.0)],
        Level::Physical => panic!("the physical level has no source level"),
    }
}

/// Half sum and half difference of two source columns.
pub(crate) fn half_sum_diff(src: &OutcomeMatrix, a: usize, b: usize) -> ([f64; OUTCOMES], [f64; OUTCOMES]) {
    let plus = std::array::from_fn(|w| 0.5 * (src.at(w, a) + src.at(w, b)));
    let minus = std::array::from_fn(|w| 0.5 * (src.at(w, a) - src.at(w, b)));
    (plus, minus)
}

/// Sums `prod_i x_{w_i}` over all outcome sequences of length `1..=horizon`,
/// grouped by the rule's verdict. Entry `t - 1` holds the sums for length `t`.
pub(crate) fn fold_weights(x: &[f64; OUTCOMES], rules: RuleFamily, horizon: usize) -> Vec<[f64; OUTCOMES]> {
    let tally = Tally::new(rules, horizon);
    let width = tally.width();
    let active: Vec<(usize, f64)> = x
        .iter()
        .enumerate()
        .filter(|(_, &w)| w != 0.0)
        .map(|(slot, &w)| (slot, w))
        .collect();
    let verdicts: Vec<usize> = (0..width).map(|s| tally.verdict(s).index()).collect();

    let mut cur = vec![0.0; width];
    let mut next = vec![0.0; width];
    cur[tally.start()] = 1.0;
    let mut out = Vec::with_capacity(horizon);
    for seen in 0..horizon {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (state, &mass) in cur.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for &(slot, w) in &active {
                next[tally.push(state, slot, seen)] += mass * w;
            }
        }
        std::mem::swap(&mut cur, &mut next);
        let mut sums = [0.0; OUTCOMES];
        for (state, &mass) in cur.iter().enumerate() {
            sums[verdicts[state]] += mass;
        }
        out.push(sums);
    }
    out
}

fn check_input(src: &OutcomeMatrix) -> Result<()> {
    src.check_stochastic(INPUT_TOL)
}

/// Next-level matrices for every level size `1..=horizon`.
pub fn propagate_upto(
    src: &OutcomeMatrix,
    horizon: usize,
    rules: RuleFamily,
    target: Level,
) -> Result<Vec<OutcomeMatrix>> {
    check_input(src)?;
    if horizon == 0 {
        return Err(invalid("size", "must be at least 1"));
    }
    let pairs = column_pairs(target);
    let mut folded: Vec<((usize, usize), Vec<[f64; OUTCOMES]>, Vec<[f64; OUTCOMES]>)> = Vec::new();
    for &(a, b, _) in &pairs {
        if folded.iter().any(|(p, _, _)| *p == (a, b)) {
            continue;
        }
        let (plus, minus) = half_sum_diff(src, a, b);
        folded.push((
            (a, b),
            fold_weights(&plus, rules, horizon),
            fold_weights(&minus, rules, horizon),
        ));
    }
    Ok((0..horizon)
        .map(|t| {
            let cols: [[f64; OUTCOMES]; BELL_STATES] = std::array::from_fn(|v| {
                let (a, b, sign) = pairs[v];
                let (_, plus, minus) = folded.iter().find(|(p, _, _)| *p == (a, b)).expect("pair folded");
                std::array::from_fn(|u| plus[t][u] + sign * minus[t][u])
            });
            OutcomeMatrix::from_columns_unchecked(target, cols)
        })
        .collect())
}

/// Block-level matrix for blocks of `m` photon pairs.
pub fn propagate_block(p: &OutcomeMatrix, m: usize, rules: RuleFamily) -> Result<OutcomeMatrix> {
    Ok(propagate_upto(p, m, rules, Level::Block)?.pop().expect("nonempty"))
}

/// Logical-level matrix for codes of `n` blocks.
pub fn propagate_logical(b: &OutcomeMatrix, n: usize, rules: RuleFamily) -> Result<OutcomeMatrix> {
    Ok(propagate_upto(b, n, rules, Level::Logical)?.pop().expect("nonempty"))
}

/// Logical-level matrices for every block count `1..=n_max`.
pub fn propagate_logical_upto(b: &OutcomeMatrix, n_max: usize, rules: RuleFamily) -> Result<Vec<OutcomeMatrix>> {
    propagate_upto(b, n_max, rules, Level::Logical)
}

/// Mean probability of a correct identification: `(L00 + L11 + L22 + L33) / 4`.
pub fn mean_diagonal(l: &OutcomeMatrix) -> f64 {
    (0..BELL_STATES).map(|v| l.at(v, v)).sum::<f64>() / 4.0
}
