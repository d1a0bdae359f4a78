//! Weak compositions over a subset of outcome slots, multinomial coefficients and
//! compensated summation.

use crate::error::{invalid, Error, Result};
use crate::outcome::{CountVector, OUTCOMES};

/// Iterator over all count vectors of a fixed total supported on a set of slots.
///
/// Slots are 0-based row indices. Each vector is produced exactly once.
#[derive(Debug, Clone)]
pub struct Compositions {
    slots: Vec<usize>,
    parts: Vec<u32>,
    total: u32,
    done: bool,
}

/// Enumerates every [`CountVector`] with the given total whose support lies in `active_slots`.
///
/// Yields `C(total + k - 1, k - 1)` items for `k` distinct slots.
pub fn enumerate_compositions(total: usize, active_slots: &[usize]) -> Result<Compositions> {
    let mut slots = active_slots.to_vec();
    slots.sort_unstable();
    slots.dedup();
    if slots.is_empty() {
        return Err(invalid("active_slots", "must be nonempty"));
    }
    if let Some(&s) = slots.iter().find(|&&s| s >= OUTCOMES) {
        return Err(invalid("active_slots", format!("slot {s} is out of range")));
    }
    let total = u32::try_from(total).map_err(|_| invalid("total", "too large"))?;
    let mut parts = vec![0; slots.len()];
    parts[0] = total;
    Ok(Compositions {
        slots,
        parts,
        total,
        done: false,
    })
}

impl Compositions {
    fn current(&self) -> CountVector {
        let mut counts = [0u32; OUTCOMES];
        for (&s, &p) in self.slots.iter().zip(&self.parts) {
            counts[s] = p;
        }
        CountVector::new(counts)
    }

    fn advance(&mut self) {
        let k = self.parts.len();
        if k == 1 || self.parts[k - 1] == self.total {
            self.done = true;
            return;
        }
        let i = (0..k - 1)
            .rev()
            .find(|&i| self.parts[i] > 0)
            .expect("a nonterminal composition has a movable unit");
        let tail = self.parts[k - 1];
        self.parts[i] -= 1;
        if i + 1 == k - 1 {
            self.parts[k - 1] = tail + 1;
        } else {
            self.parts[i + 1] = tail + 1;
            self.parts[k - 1] = 0;
        }
    }
}

impl Iterator for Compositions {
    type Item = CountVector;

    fn next(&mut self) -> Option<CountVector> {
        if self.done {
            return None;
        }
        let out = self.current();
        self.advance();
        Some(out)
    }
}

/// `C(n, k)` as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 170 {
        (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64).round()
    } else {
        (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp()
    }
}

/// `ln(n!)`: exact summation for small `n`, Stirling series beyond.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 64 {
        return (2..=n).map(|i| (i as f64).ln()).sum();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// `total! / prod_i counts_i!`.
///
/// Exact integer arithmetic while it fits in 128 bits, log-space for `total > 170`.
pub fn multinomial(total: usize, counts: &CountVector) -> Result<f64> {
    if counts.total() != total {
        return Err(Error::TotalMismatch {
            expected: total,
            actual: counts.total(),
        });
    }
    if total > 170 {
        let ln = ln_factorial(total)
            - counts
                .counts()
                .iter()
                .map(|&c| ln_factorial(c as usize))
                .sum::<f64>();
        return Ok(ln.exp());
    }
    if let Some(exact) = multinomial_u128(counts) {
        return Ok(exact as f64);
    }
    let mut acc = 1.0;
    let mut running = 0usize;
    for &c in counts.counts() {
        running += c as usize;
        acc *= binomial(running, c as usize);
    }
    Ok(acc)
}

fn multinomial_u128(counts: &CountVector) -> Option<u128> {
    let mut acc: u128 = 1;
    let mut running: u128 = 0;
    for &c in counts.counts() {
        // acc * C(running + c, c), built one factor at a time so every division is exact.
        for j in 1..=c as u128 {
            running += 1;
            acc = acc.checked_mul(running)? / j;
        }
    }
    Some(acc)
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn small_examples() {
        let all: Vec<_> = enumerate_compositions(2, &[0, 1]).unwrap().collect();
        assert_eq!(all.len(), 3);
        assert!(all.contains(&CountVector::new([1, 1, 0, 0, 0, 0, 0])));
        assert!(all.contains(&CountVector::new([2, 0, 0, 0, 0, 0, 0])));
        assert!(all.contains(&CountVector::new([0, 2, 0, 0, 0, 0, 0])));

        let zero: Vec<_> = enumerate_compositions(0, &[0, 1, 2, 3, 4, 5, 6]).unwrap().collect();
        assert_eq!(zero, vec![CountVector::zero()]);

        assert_eq!(enumerate_compositions(5, &[2, 3, 4, 6]).unwrap().count(), 56);
        assert!(enumerate_compositions(3, &[]).is_err());
        assert!(enumerate_compositions(3, &[7]).is_err());
    }

    #[test]
    fn counts_match_stars_and_bars() {
        for total in 0..=8 {
            for k in 1..=7 {
                let slots: Vec<usize> = (0..k).collect();
                let items: Vec<_> = enumerate_compositions(total, &slots).unwrap().collect();
                let distinct: HashSet<_> = items.iter().copied().collect();
                assert_eq!(items.len(), distinct.len());
                assert_eq!(items.len() as f64, binomial(total + k - 1, k - 1));
                assert!(items.iter().all(|c| c.total() == total));
                assert!(items.iter().all(|c| c.counts()[k..].iter().all(|&x| x == 0)));
            }
        }
    }

    #[test]
    fn multinomial_examples() {
        let v = |c: [u32; 7]| CountVector::new(c);
        assert_eq!(multinomial(4, &v([2, 2, 0, 0, 0, 0, 0])).unwrap(), 6.0);
        assert_eq!(multinomial(9, &v([9, 0, 0, 0, 0, 0, 0])).unwrap(), 1.0);
        assert_eq!(multinomial(10, &v([3, 3, 4, 0, 0, 0, 0])).unwrap(), 4200.0);
        assert!(multinomial(5, &v([3, 3, 4, 0, 0, 0, 0])).is_err());
    }

    #[test]
    fn multinomial_log_space_branch() {
        let big = CountVector::new([100, 100, 0, 0, 0, 0, 0]);
        let direct = binomial(200, 100);
        let via = multinomial(200, &big).unwrap();
        assert!((via / direct - 1.0).abs() < 1e-10);
        let exact_ln: f64 = (2..=200).map(|i| (i as f64).ln()).sum();
        assert!((ln_factorial(200) - exact_ln).abs() < 1e-9);
    }

    #[test]
    fn multinomial_theorem() {
        for total in 0..=10 {
            for k in 1..=7 {
                let slots: Vec<usize> = (0..k).collect();
                let sum: f64 = enumerate_compositions(total, &slots)
                    .unwrap()
                    .map(|c| multinomial(total, &c).unwrap())
                    .sum();
                assert_eq!(sum, (k as f64).powi(total as i32));
            }
        }
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let mut s = CompensatedSum::default();
        for x in [1e16, 1.0, -1e16, 1.0] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }
}
