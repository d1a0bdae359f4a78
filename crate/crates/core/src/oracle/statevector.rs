//! Explicit amplitude vectors for encoded Bell states.
//!
//! Checks that an encoded Bell state equals, after reordering qubits, the uniform
//! superposition of products of lower-level Bell states over bit strings of fixed
//! parity. Both sides are built independently; the reordering permutation is
//! derived from qubit labels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::parity::{bit, ParitySet};

/// Largest register the check builds.
pub const MAX_QUBITS: usize = 16;

/// Identifies a physical qubit: which half of the Bell pair, which block, which photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct QubitLabel {
    side: u8,
    block: usize,
    photon: usize,
}

/// Real amplitudes over labeled qubits; the first label is the most significant bit.
#[derive(Debug, Clone)]
struct Register {
    labels: Vec<QubitLabel>,
    amps: Vec<f64>,
}

impl Register {
    fn scalar(x: f64) -> Self {
        Self {
            labels: Vec::new(),
            amps: vec![x],
        }
    }

    fn basis(labels: Vec<QubitLabel>, bits: &[u8]) -> Self {
        let mut index = 0usize;
        for &b in bits {
            index = (index << 1) | usize::from(b);
        }
        let mut amps = vec![0.0; 1 << labels.len()];
        amps[index] = 1.0;
        Self { labels, amps }
    }

    fn kron(&self, other: &Register) -> Register {
        let mut amps = vec![0.0; self.amps.len() * other.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.amps.iter().enumerate() {
                amps[i * other.amps.len() + j] = a * b;
            }
        }
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Register { labels, amps }
    }

    fn axpy(&mut self, scale: f64, other: &Register) {
        assert_eq!(self.labels, other.labels, "registers must share the qubit order");
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += scale * b;
        }
    }

    fn scaled(mut self, s: f64) -> Register {
        self.amps.iter_mut().for_each(|a| *a *= s);
        self
    }

    /// Same state with qubits listed in `order`.
    fn reordered(&self, order: &[QubitLabel]) -> Register {
        let q = self.labels.len();
        let position: Vec<usize> = order
            .iter()
            .map(|lab| self.labels.iter().position(|l| l == lab).expect("label present"))
            .collect();
        let mut amps = vec![0.0; self.amps.len()];
        for (src, &a) in self.amps.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let mut dst = 0usize;
            for &p in &position {
                dst = (dst << 1) | ((src >> (q - 1 - p)) & 1);
            }
            amps[dst] = a;
        }
        Register {
            labels: order.to_vec(),
            amps,
        }
    }

    fn max_abs_diff(&self, other: &Register) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn label(side: u8, block: usize, photon: usize) -> QubitLabel {
    QubitLabel { side, block, photon }
}

/// Block codeword `|b>^{(m)} = |b...b>` on block `block` of side `side`.
fn block_codeword(side: u8, block: usize, m: usize, b: u8) -> Register {
    let labels = (0..m).map(|i| label(side, block, i)).collect();
    Register::basis(labels, &vec![b; m])
}

/// Logical codeword `(|+>^{(m) n} + (-1)^b |->^{(m) n}) / sqrt 2` on side `side`.
fn logical_codeword(side: u8, n: usize, m: usize, b: u8) -> Register {
    let product = |sign: f64| {
        (0..n).fold(Register::scalar(1.0), |acc, j| {
            let mut blk = block_codeword(side, j, m, 0);
            blk.axpy(sign, &block_codeword(side, j, m, 1));
            acc.kron(&blk.scaled(std::f64::consts::FRAC_1_SQRT_2))
        })
    };
    let mut out = product(1.0);
    let sign = if b == 0 { 1.0 } else { -1.0 };
    out.axpy(sign, &product(-1.0));
    out.scaled(std::f64::consts::FRAC_1_SQRT_2)
}

/// `(|0,k> + (-1)^l |1,1-k>) / sqrt 2` for a codeword constructor on sides 0 and 1.
fn bell_from<F: Fn(u8, u8) -> Register>(codeword: F, k: u8, l: u8) -> Register {
    let mut out = codeword(0, 0).kron(&codeword(1, k));
    let sign = if l == 0 { 1.0 } else { -1.0 };
    out.axpy(sign, &codeword(0, 1).kron(&codeword(1, 1 - k)));
    out.scaled(std::f64::consts::FRAC_1_SQRT_2)
}

fn block_bell(block: usize, m: usize, k: u8, l: u8) -> Register {
    bell_from(|side, b| block_codeword(side, block, m, b), k, l)
}

/// Uniform parity superposition of per-part Bell products, `2^{-(size-1)/2} sum_r prod_i part(i, r_i)`.
fn parity_superposition<F: Fn(usize, u8) -> Register>(parity: u8, size: usize, part: F) -> Result<Register> {
    let set = ParitySet::new(parity, size)?;
    let mut acc: Option<Register> = None;
    for r in set.members() {
        let term = (0..size).fold(Register::scalar(1.0), |t, i| t.kron(&part(i, bit(r, i))));
        match acc.as_mut() {
            None => acc = Some(term),
            Some(a) => a.axpy(1.0, &term),
        }
    }
    let acc = acc.expect("parity sets are nonempty");
    Ok(acc.scaled((0.5f64).powf((size as f64 - 1.0) / 2.0)))
}

/// Outcome of the representation check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellCheck {
    pub n: usize,
    pub m: usize,
    /// Largest amplitude difference over the four block-level Bell states.
    pub block_residual: f64,
    /// Largest amplitude difference over the four logical Bell states.
    pub logical_residual: f64,
}

impl BellCheck {
    pub fn max_residual(&self) -> f64 {
        self.block_residual.max(self.logical_residual)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

/// Builds both sides of the block-level and logical-level representations for
/// every Bell state and reports the largest amplitude mismatch.
pub fn verify_bell_representation(n: usize, m: usize) -> Result<BellCheck> {
    let qubits = 2 * n * m;
    if n == 0 || m == 0 || qubits > MAX_QUBITS {
        return Err(Error::TooLarge {
            what: "state-vector check (qubits)",
            size: qubits,
            limit: MAX_QUBITS,
        });
    }
    let mut block_residual: f64 = 0.0;
    let mut logical_residual: f64 = 0.0;
    for k in 0..2u8 {
        for l in 0..2u8 {
            let encoded = block_bell(0, m, k, l);
            let pairs = parity_superposition(l, m, |i, r| {
                bell_from(|side, b| Register::basis(vec![label(side, 0, i)], &[b]), k, r)
            })?;
            block_residual = block_residual.max(encoded.max_abs_diff(&pairs.reordered(&encoded.labels)));

            let encoded = bell_from(|side, b| logical_codeword(side, n, m, b), k, l);
            let blocks = parity_superposition(k, n, |j, s| block_bell(j, m, s, l))?;
            logical_residual = logical_residual.max(encoded.max_abs_diff(&blocks.reordered(&encoded.labels)));
        }
    }
    Ok(BellCheck {
        n,
        m,
        block_residual,
        logical_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_codes() {
        for (n, m) in [(1, 1), (2, 2), (1, 3), (3, 1), (2, 1)] {
            let c = verify_bell_representation(n, m).unwrap();
            assert!(c.passed(1e-12), "{c:?}");
        }
        assert!(verify_bell_representation(3, 3).is_err());
    }

    #[test]
    fn wrong_parity_is_detected() {
        let encoded = block_bell(0, 2, 1, 1);
        let wrong = parity_superposition(0, 2, |i, r| {
            bell_from(|side, b| Register::basis(vec![label(side, 0, i)], &[b]), 1, r)
        })
        .unwrap();
        assert!(encoded.max_abs_diff(&wrong.reordered(&encoded.labels)) > 0.1);
    }

    #[test]
    fn reorder_roundtrip() {
        let r = block_bell(0, 2, 1, 0);
        let swapped: Vec<QubitLabel> = r.labels.iter().rev().copied().collect();
        let back = r.reordered(&swapped).reordered(&r.labels);
        assert_eq!(back.max_abs_diff(&r), 0.0);
    }
}
