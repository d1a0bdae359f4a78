//! Bell-measurement outcomes, input Bell states, outcome matrices and count vectors.
//!
//! Row order of every [`OutcomeMatrix`] is `(0,0), (0,1), (1,0), (1,1), (0,?), (1,?), (?,?)`
//! and column order is `phi00, phi01, phi10, phi11`. Rule families and the
//! propagation engine index into this layout directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of distinct measurement results.
pub const OUTCOMES: usize = 7;
/// Number of Bell states.
pub const BELL_STATES: usize = 4;

/// Result of a Bell measurement: the identified `(k, l)` bits, with `?` for an unknown bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    K0L0,
    K0L1,
    K1L0,
    K1L1,
    K0Unknown,
    K1Unknown,
    Failure,
}

impl Outcome {
    pub const ALL: [Outcome; OUTCOMES] = [
        Outcome::K0L0,
        Outcome::K0L1,
        Outcome::K1L0,
        Outcome::K1L1,
        Outcome::K0Unknown,
        Outcome::K1Unknown,
        Outcome::Failure,
    ];

    /// Row index in an outcome matrix.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Fully identified outcome for bits `k`, `l`.
    pub fn known(k: u8, l: u8) -> Self {
        Self::ALL[usize::from(2 * (k & 1) + (l & 1))]
    }

    /// Outcome with `k` identified and `l` unknown.
    pub fn half_known(k: u8) -> Self {
        if k & 1 == 0 {
            Outcome::K0Unknown
        } else {
            Outcome::K1Unknown
        }
    }

    pub fn label(self) -> &'static str {
        ["(0,0)", "(0,1)", "(1,0)", "(1,1)", "(0,?)", "(1,?)", "(?,?)"][self.index()]
    }
}

/// One of the four Bell states `phi_{k,l}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellState {
    Phi00,
    Phi01,
    Phi10,
    Phi11,
}

impl BellState {
    pub const ALL: [BellState; BELL_STATES] =
        [BellState::Phi00, BellState::Phi01, BellState::Phi10, BellState::Phi11];

    pub fn new(k: u8, l: u8) -> Self {
        Self::ALL[usize::from(2 * (k & 1) + (l & 1))]
    }

    /// Column index in an outcome matrix.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn k(self) -> u8 {
        (self.index() / 2) as u8
    }

    pub fn l(self) -> u8 {
        (self.index() % 2) as u8
    }
}

/// Encoding level an outcome matrix refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Physical,
    Block,
    Logical,
}

/// Default tolerance for column sums.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// 7x4 table of outcome probabilities, one column per input Bell state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeMatrix {
    level: Level,
    rows: [[f64; BELL_STATES]; OUTCOMES],
}

impl OutcomeMatrix {
    /// Builds a matrix and checks entries and column sums against [`STOCHASTIC_TOL`].
    pub fn new(level: Level, rows: [[f64; BELL_STATES]; OUTCOMES]) -> Result<Self> {
        let m = Self { level, rows };
        m.check_stochastic(STOCHASTIC_TOL)?;
        Ok(m)
    }

    /// Builds a matrix without any check.
    pub fn from_rows_unchecked(level: Level, rows: [[f64; BELL_STATES]; OUTCOMES]) -> Self {
        Self { level, rows }
    }

    /// Builds a matrix from its four columns without any check.
    pub fn from_columns_unchecked(level: Level, cols: [[f64; OUTCOMES]; BELL_STATES]) -> Self {
        let mut rows = [[0.0; BELL_STATES]; OUTCOMES];
        for (v, col) in cols.iter().enumerate() {
            for (u, &x) in col.iter().enumerate() {
                rows[u][v] = x;
            }
        }
        Self { level, rows }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn with_level(mut self, level: Level) -> Self {
        self.level = level;
        self
    }

    pub fn rows(&self) -> &[[f64; BELL_STATES]; OUTCOMES] {
        &self.rows
    }

    pub fn get(&self, outcome: Outcome, state: BellState) -> f64 {
        self.rows[outcome.index()][state.index()]
    }

    pub fn at(&self, u: usize, v: usize) -> f64 {
        self.rows[u][v]
    }

    pub fn column(&self, v: usize) -> [f64; OUTCOMES] {
        std::array::from_fn(|u| self.rows[u][v])
    }

    pub fn column_sums(&self) -> [f64; BELL_STATES] {
        std::array::from_fn(|v| self.rows.iter().map(|r| r[v]).sum())
    }

    /// Largest deviation of a column sum from 1.
    pub fn stochastic_defect(&self) -> f64 {
        self.column_sums()
            .iter()
            .map(|s| (s - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Checks that entries lie in `[-tol, 1 + tol]` and columns sum to 1 within `tol`.
    pub fn check_stochastic(&self, tol: f64) -> Result<()> {
        for v in 0..BELL_STATES {
            let col = self.column(v);
            let sum: f64 = col.iter().sum();
            let in_range = col.iter().all(|&x| x >= -tol && x <= 1.0 + tol);
            if !in_range || (sum - 1.0).abs() > tol || !sum.is_finite() {
                return Err(Error::NotStochastic { column: v, sum });
            }
        }
        Ok(())
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &OutcomeMatrix) -> f64 {
        let mut d: f64 = 0.0;
        for u in 0..OUTCOMES {
            for v in 0..BELL_STATES {
                d = d.max((self.rows[u][v] - other.rows[u][v]).abs());
            }
        }
        d
    }

    /// Applies a 4x4 column-mixing matrix: `result[., v] = sum_w self[., w] * mix[w][v]`.
    pub fn mix_columns(&self, mix: &[[f64; BELL_STATES]; BELL_STATES]) -> Self {
        let mut rows = [[0.0; BELL_STATES]; OUTCOMES];
        for u in 0..OUTCOMES {
            for v in 0..BELL_STATES {
                rows[u][v] = (0..BELL_STATES).map(|w| self.rows[u][w] * mix[w][v]).sum();
            }
        }
        Self {
            level: self.level,
            rows,
        }
    }
}

/// How often each of the seven outcomes occurred among the photon pairs of a
/// block (or among the blocks of a code).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct CountVector {
    counts: [u32; OUTCOMES],
}

impl CountVector {
    pub fn new(counts: [u32; OUTCOMES]) -> Self {
        Self { counts }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Checks that the counts add up to `expected`.
    pub fn with_total(counts: [u32; OUTCOMES], expected: usize) -> Result<Self> {
        let v = Self { counts };
        if v.total() != expected {
            return Err(Error::TotalMismatch {
                expected,
                actual: v.total(),
            });
        }
        Ok(v)
    }

    pub fn counts(&self) -> &[u32; OUTCOMES] {
        &self.counts
    }

    pub fn get(&self, outcome: Outcome) -> u32 {
        self.counts[outcome.index()]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    /// Componentwise sum.
    pub fn plus(&self, other: &CountVector) -> CountVector {
        CountVector {
            counts: std::array::from_fn(|i| self.counts[i] + other.counts[i]),
        }
    }

    pub fn increment(&mut self, outcome: Outcome) {
        self.counts[outcome.index()] += 1;
    }

    /// `prod_i x_i^{c_i}`, with `0^0 = 1`.
    pub fn monomial(&self, x: &[f64; OUTCOMES]) -> f64 {
        self.counts
            .iter()
            .zip(x)
            .map(|(&c, &xi)| xi.powi(c as i32))
            .product()
    }
}
