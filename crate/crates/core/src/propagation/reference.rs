//! Direct evaluations of the propagation sums, used to validate the folding engine.
//!
//! [`propagate_enumerated`] sums over all count vectors on the nonzero outcome
//! slots. [`propagate_naive`] is the original form: an average over the parity
//! set of bit strings, split by how many positions draw from each source column.

use crate::combinatorics::{enumerate_compositions, multinomial, CompensatedSum};
use crate::error::{invalid, Error, Result};
use crate::outcome::{Level, OutcomeMatrix, BELL_STATES, OUTCOMES};
use crate::propagation::{column_pairs, half_sum_diff, RuleFamily};

/// Largest level size the naive double sum accepts.
pub const NAIVE_LIMIT: usize = 8;

/// Literal composition sum with zero-slot pruning and compensated accumulation.
pub fn propagate_enumerated(
    src: &OutcomeMatrix,
    size: usize,
    rules: RuleFamily,
    target: Level,
) -> Result<OutcomeMatrix> {
    if size == 0 {
        return Err(invalid("size", "must be at least 1"));
    }
    let pairs = column_pairs(target);
    let mut cols = [[0.0; OUTCOMES]; BELL_STATES];
    for (v, &(a, b, sign)) in pairs.iter().enumerate() {
        let (plus, minus) = half_sum_diff(src, a, b);
        let active: Vec<usize> = (0..OUTCOMES)
            .filter(|&w| plus[w] != 0.0 || minus[w] != 0.0)
            .collect();
        let mut acc = [CompensatedSum::default(); OUTCOMES];
        for gamma in enumerate_compositions(size, &active)? {
            let u = rules.classify(&gamma, size)?.index();
            let weight = multinomial(size, &gamma)?;
            acc[u].add(weight * gamma.monomial(&plus));
            acc[u].add(sign * weight * gamma.monomial(&minus));
        }
        cols[v] = std::array::from_fn(|u| acc[u].value());
    }
    Ok(OutcomeMatrix::from_columns_unchecked(target, cols))
}

/// Original double sum over bit strings of fixed parity: for target column
/// `(k, l)`, each position draws from one of two source columns according to its
/// bit, and the bit string is uniform over strings of the required parity.
pub fn propagate_naive(
    src: &OutcomeMatrix,
    size: usize,
    rules: RuleFamily,
    target: Level,
) -> Result<OutcomeMatrix> {
    if size == 0 {
        return Err(invalid("size", "must be at least 1"));
    }
    if size > NAIVE_LIMIT {
        return Err(Error::TooLarge {
            what: "naive propagation",
            size,
            limit: NAIVE_LIMIT,
        });
    }
    let all: Vec<usize> = (0..OUTCOMES).collect();
    let norm = 0.5f64.powi(size as i32 - 1);
    let mut cols = [[0.0; OUTCOMES]; BELL_STATES];
    for (v, col) in cols.iter_mut().enumerate() {
        let (k, l) = (v / 2, v % 2);
        // Source columns for bit 0 / bit 1, and the parity the bit string must have.
        let (zero_col, one_col, parity) = match target {
            Level::Block => (2 * k, 2 * k + 1, l),
            Level::Logical => (l, 2 + l, k),
            Level::Physical => return Err(invalid("target", "must be block or logical")),
        };
        let zero_src = src.column(zero_col);
        let one_src = src.column(one_col);
        let mut acc = [CompensatedSum::default(); OUTCOMES];
        for ones in (parity..=size).step_by(2) {
            for alpha in enumerate_compositions(size - ones, &all)? {
                let a_term = alpha.monomial(&zero_src);
                for beta in enumerate_compositions(ones, &all)? {
                    let gamma = alpha.plus(&beta);
                    // size! / (alpha! beta!) = multinomial(gamma) * prod_i C(gamma_i, alpha_i)
                    let split: f64 = (0..OUTCOMES)
                        .map(|i| crate::combinatorics::binomial(gamma.counts()[i] as usize, alpha.counts()[i] as usize))
                        .product();
                    let weight = multinomial(size, &gamma)? * split;
                    let u = rules.classify(&gamma, size)?.index();
                    acc[u].add(weight * a_term * beta.monomial(&one_src));
                }
            }
        }
        *col = std::array::from_fn(|u| norm * acc[u].value());
    }
    Ok(OutcomeMatrix::from_columns_unchecked(target, cols))
}

/// Naive block-level propagation.
pub fn propagate_block_naive(p: &OutcomeMatrix, m: usize, rules: RuleFamily) -> Result<OutcomeMatrix> {
    propagate_naive(p, m, rules, Level::Block)
}

/// Naive logical-level propagation.
pub fn propagate_logical_naive(b: &OutcomeMatrix, n: usize, rules: RuleFamily) -> Result<OutcomeMatrix> {
    propagate_naive(b, n, rules, Level::Logical)
}
