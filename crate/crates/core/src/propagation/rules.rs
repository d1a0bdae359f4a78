//! Interpretation rules mapping outcome counts of one level to an outcome of the next.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::outcome::{CountVector, Outcome};
use crate::params::TiePolicy;

/// A total classification of count vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RuleFamily {
    /// Block rule for PNRD detectors: unanimous `k` with `l` from parity,
    /// otherwise a majority vote on `k`.
    StandardF,
    /// Logical rule: `k` from the parity of the `k = 1` blocks, `l` by majority,
    /// any failed block fails the code.
    StandardG,
    /// Block rule for on-off detectors without Pauli errors: a single `k = 1`
    /// result decides `k = 1`.
    OnOffTildeF,
    /// Block rule for on-off detectors with a threshold of `kappa` results `k = 1`.
    OnOffKappaF { kappa: usize, tie: TiePolicy },
}

impl RuleFamily {
    /// Classifies `counts`, which must sum to the level size `total`.
    pub fn classify(&self, counts: &CountVector, total: usize) -> Result<Outcome> {
        if counts.total() != total {
            return Err(Error::TotalMismatch {
                expected: total,
                actual: counts.total(),
            });
        }
        if total == 0 {
            return Err(invalid("total", "level size must be at least 1"));
        }
        let c = counts.counts();
        Ok(match *self {
            RuleFamily::StandardF => standard_f(c, total),
            RuleFamily::StandardG => standard_g(c),
            RuleFamily::OnOffTildeF => onoff_tilde(c, total),
            RuleFamily::OnOffKappaF { kappa, tie } => onoff_kappa(c, total, kappa, tie),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            RuleFamily::StandardF => "standard_f",
            RuleFamily::StandardG => "standard_g",
            RuleFamily::OnOffTildeF => "onoff_tilde_f",
            RuleFamily::OnOffKappaF { .. } => "onoff_kappa_f",
        }
    }
}

fn parity_outcome(k: u8, odd: u32) -> Outcome {
    Outcome::known(k, (odd % 2) as u8)
}

fn standard_f(c: &[u32; 7], m: usize) -> Outcome {
    let m = m as u32;
    if c[0] + c[1] == m {
        parity_outcome(0, c[1])
    } else if c[2] + c[3] == m {
        parity_outcome(1, c[3])
    } else {
        let zero = c[0] + c[1] + c[4];
        let one = c[2] + c[3] + c[5];
        match zero.cmp(&one) {
            std::cmp::Ordering::Greater => Outcome::K0Unknown,
            std::cmp::Ordering::Less => Outcome::K1Unknown,
            std::cmp::Ordering::Equal => Outcome::Failure,
        }
    }
}

fn standard_g(c: &[u32; 7]) -> Outcome {
    if c[6] > 0 {
        return Outcome::Failure;
    }
    let k = ((c[2] + c[3] + c[5]) % 2) as u8;
    let zero = c[0] + c[2];
    let one = c[1] + c[3];
    match zero.cmp(&one) {
        std::cmp::Ordering::Greater => Outcome::known(k, 0),
        std::cmp::Ordering::Less => Outcome::known(k, 1),
        std::cmp::Ordering::Equal => Outcome::half_known(k),
    }
}

fn onoff_tilde(c: &[u32; 7], m: usize) -> Outcome {
    let ones = c[2] + c[3];
    if ones == m as u32 {
        parity_outcome(1, c[3])
    } else if ones == 0 {
        Outcome::K0Unknown
    } else {
        Outcome::K1Unknown
    }
}

fn onoff_kappa(c: &[u32; 7], m: usize, kappa: usize, tie: TiePolicy) -> Outcome {
    let ones = (c[2] + c[3]) as usize;
    if ones == m {
        parity_outcome(1, c[3])
    } else if ones < kappa {
        Outcome::K0Unknown
    } else if ones > kappa {
        Outcome::K1Unknown
    } else {
        match tie {
            TiePolicy::Discard => Outcome::Failure,
            TiePolicy::AcceptAsOne => Outcome::K1Unknown,
        }
    }
}

/// Standard block rule on a count vector of size `m`.
pub fn classify_standard_f(gamma: &CountVector, m: usize) -> Result<Outcome> {
    RuleFamily::StandardF.classify(gamma, m)
}

/// Standard logical rule on a count vector of size `n`.
pub fn classify_standard_g(lambda: &CountVector, n: usize) -> Result<Outcome> {
    RuleFamily::StandardG.classify(lambda, n)
}

/// On-off block rule without threshold. Outcomes other than `(1,0)` and
/// `(1,1)` count as `k = 0` evidence.
pub fn classify_onoff_tilde(gamma: &CountVector, m: usize) -> Result<Outcome> {
    RuleFamily::OnOffTildeF.classify(gamma, m)
}

/// On-off block rule with threshold `kappa`.
pub fn classify_onoff_kappa(
    gamma: &CountVector,
    m: usize,
    kappa: usize,
    tie: TiePolicy,
) -> Result<Outcome> {
    RuleFamily::OnOffKappaF { kappa, tie }.classify(gamma, m)
}

/// Sufficient statistic of a partially observed count vector, encoded as a dense index.
///
/// `push` adds one outcome and `verdict` classifies the full vector. Both must agree
/// with [`RuleFamily::classify`] on every count vector; the folding engine relies on it.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Tally {
    family: RuleFamily,
    horizon: usize,
}

const EMPTY: usize = 0;

fn delta_zero_vs_one(slot: usize) -> i64 {
    match slot {
        0 | 1 | 4 => 1,
        2 | 3 | 5 => -1,
        _ => 0,
    }
}

impl Tally {
    pub(crate) fn new(family: RuleFamily, horizon: usize) -> Self {
        Self { family, horizon }
    }

    fn span(&self) -> usize {
        2 * self.horizon + 1
    }

    fn margin(&self, base: usize, d: i64) -> usize {
        base + (d + self.horizon as i64) as usize
    }

    fn unmargin(&self, base: usize, state: usize) -> i64 {
        (state - base) as i64 - self.horizon as i64
    }

    pub(crate) fn width(&self) -> usize {
        match self.family {
            // empty, pure-zero(parity), pure-one(parity), mixed(margin)
            RuleFamily::StandardF => 5 + self.span(),
            // dead, alive(parity, margin)
            RuleFamily::StandardG => 1 + 2 * self.span(),
            // empty, pure-one(parity), no-one, mixed
            RuleFamily::OnOffTildeF => 5,
            // empty, pure-one(parity), count of ones
            RuleFamily::OnOffKappaF { .. } => 4 + self.horizon,
        }
    }

    pub(crate) fn start(&self) -> usize {
        match self.family {
            RuleFamily::StandardG => self.margin(1, 0),
            _ => EMPTY,
        }
    }

    /// State after adding `slot` to a vector that already holds `seen` outcomes.
    pub(crate) fn push(&self, state: usize, slot: usize, seen: usize) -> usize {
        let is_one = slot == 2 || slot == 3;
        match self.family {
            RuleFamily::StandardF => {
                let mixed = 5;
                match state {
                    EMPTY => match slot {
                        0..=3 => 1 + slot,
                        _ => self.margin(mixed, delta_zero_vs_one(slot)),
                    },
                    1 | 2 => match slot {
                        0 => state,
                        1 => 3 - state,
                        _ => self.margin(mixed, seen as i64 + delta_zero_vs_one(slot)),
                    },
                    3 | 4 => match slot {
                        2 => state,
                        3 => 7 - state,
                        _ => self.margin(mixed, -(seen as i64) + delta_zero_vs_one(slot)),
                    },
                    _ => self.margin(mixed, self.unmargin(mixed, state) + delta_zero_vs_one(slot)),
                }
            }
            RuleFamily::StandardG => {
                if state == 0 || slot == 6 {
                    return 0;
                }
                let rel = state - 1;
                let parity = rel / self.span();
                let d = self.unmargin(0, rel % self.span());
                let flip = usize::from(matches!(slot, 2 | 3 | 5));
                let step = match slot {
                    0 | 2 => 1,
                    1 | 3 => -1,
                    _ => 0,
                };
                1 + (parity ^ flip) * self.span() + self.margin(0, d + step)
            }
            RuleFamily::OnOffTildeF => match (state, is_one) {
                (EMPTY, true) => 1 + usize::from(slot == 3),
                (EMPTY, false) => 3,
                (1 | 2, true) => {
                    if slot == 3 {
                        3 - state
                    } else {
                        state
                    }
                }
                (1 | 2, false) => 4,
                (3, true) => 4,
                (3, false) => 3,
                _ => 4,
            },
            RuleFamily::OnOffKappaF { .. } => {
                let count = |c: usize| 3 + c;
                match (state, is_one) {
                    (EMPTY, true) => 1 + usize::from(slot == 3),
                    (EMPTY, false) => count(0),
                    (1 | 2, true) => {
                        if slot == 3 {
                            3 - state
                        } else {
                            state
                        }
                    }
                    (1 | 2, false) => count(seen),
                    (s, true) => s + 1,
                    (s, false) => s,
                }
            }
        }
    }

    pub(crate) fn verdict(&self, state: usize) -> Outcome {
        match self.family {
            RuleFamily::StandardF => match state {
                EMPTY => Outcome::Failure,
                1 => Outcome::K0L0,
                2 => Outcome::K0L1,
                3 => Outcome::K1L0,
                4 => Outcome::K1L1,
                _ => match self.unmargin(5, state).signum() {
                    1 => Outcome::K0Unknown,
                    -1 => Outcome::K1Unknown,
                    _ => Outcome::Failure,
                },
            },
            RuleFamily::StandardG => {
                if state == 0 {
                    return Outcome::Failure;
                }
                let rel = state - 1;
                let k = (rel / self.span()) as u8;
                match self.unmargin(0, rel % self.span()).signum() {
                    1 => Outcome::known(k, 0),
                    -1 => Outcome::known(k, 1),
                    _ => Outcome::half_known(k),
                }
            }
            RuleFamily::OnOffTildeF => match state {
                EMPTY => Outcome::Failure,
                1 => Outcome::K1L0,
                2 => Outcome::K1L1,
                3 => Outcome::K0Unknown,
                _ => Outcome::K1Unknown,
            },
            RuleFamily::OnOffKappaF { kappa, tie } => match state {
                EMPTY => Outcome::Failure,
                1 => Outcome::K1L0,
                2 => Outcome::K1L1,
                s => {
                    let ones = s - 3;
                    match ones.cmp(&kappa) {
                        std::cmp::Ordering::Less => Outcome::K0Unknown,
                        std::cmp::Ordering::Greater => Outcome::K1Unknown,
                        std::cmp::Ordering::Equal => match tie {
                            TiePolicy::Discard => Outcome::Failure,
                            TiePolicy::AcceptAsOne => Outcome::K1Unknown,
                        },
                    }
                }
            },
        }
    }
}
