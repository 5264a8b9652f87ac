//! Full statevector simulator, used as an oracle for the structured tier.
//! Qubit `q` is bit `q` of the basis index (little-endian).

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::Range;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2vec::BitVec;

pub const DEFAULT_DENSE_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    /// `|0...0>` on `num_qubits` qubits.
    pub fn new(num_qubits: usize) -> Result<Self> {
        Self::with_cap(num_qubits, DEFAULT_DENSE_CAP)
    }

    pub fn with_cap(num_qubits: usize, cap: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidLength("need at least one qubit".into()));
        }
        if num_qubits > cap {
            return Err(Error::CapExceeded {
                what: "dense state",
                requested: num_qubits,
                cap,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amps })
    }

    pub fn from_amps(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() < 2 || !amps.len().is_power_of_two() {
            return Err(Error::InvalidLength(format!(
                "{} amplitudes is not a qubit statevector",
                amps.len()
            )));
        }
        Ok(Self {
            num_qubits: amps.len().trailing_zeros() as usize,
            amps,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    /// `|<self|other>|^2`; insensitive to global phase.
    pub fn fidelity(&self, other: &DenseState) -> Result<f64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                actual: other.num_qubits,
            });
        }
        let inner: Complex64 = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(inner.norm_sqr())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::IndexOutOfRange {
                index: q,
                bound: self.num_qubits,
            });
        }
        Ok(())
    }

    pub fn apply_h(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a = self.amps[i];
                let b = self.amps[i | bit];
                self.amps[i] = (a + b) * FRAC_1_SQRT_2;
                self.amps[i | bit] = (a - b) * FRAC_1_SQRT_2;
            }
        }
        Ok(())
    }

    pub fn apply_x(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                self.amps.swap(i, i | bit);
            }
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::QubitCollision(format!("CNOT control and target are both {control}")));
        }
        let c = 1usize << control;
        let t = 1usize << target;
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
        Ok(())
    }

    /// `|y>|x> -> |y ^ (mask.x)>|x>`, where `x` is read from `inputs`
    /// (bit `k` of `mask` pairs with qubit `inputs.start + k`).
    pub fn apply_xor_oracle(&mut self, mask: &BitVec, inputs: Range<usize>, target: usize) -> Result<()> {
        if inputs.is_empty() || inputs.end > self.num_qubits {
            return Err(Error::IndexOutOfRange {
                index: inputs.end.saturating_sub(1),
                bound: self.num_qubits,
            });
        }
        if mask.len() != inputs.len() {
            return Err(Error::DimensionMismatch {
                expected: inputs.len(),
                actual: mask.len(),
            });
        }
        self.check_qubit(target)?;
        if inputs.contains(&target) {
            return Err(Error::QubitCollision(format!(
                "oracle target {target} lies inside input range {inputs:?}"
            )));
        }
        let mask = (mask.to_u64() as usize) << inputs.start;
        let t = 1usize << target;
        for i in 0..self.amps.len() {
            if i & t == 0 && (i & mask).count_ones() & 1 == 1 {
                self.amps.swap(i, i | t);
            }
        }
        Ok(())
    }

    /// Computational-basis probabilities, indexed by basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(Complex64::norm_sqr).collect()
    }

    /// Measures every qubit; returns the basis index.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        Ok(self.sampler()?.sample(rng))
    }

    /// A reusable sampler over basis indices.
    pub fn sampler(&self) -> Result<WeightedIndex<f64>> {
        WeightedIndex::new(self.probabilities()).map_err(|_| Error::Unnormalized(self.norm_sqr()))
    }
}

/// Reads qubits `range` of a basis index as a bit vector.
pub fn extract_register(index: usize, range: Range<usize>) -> Result<BitVec> {
    let width = range.len();
    let value = (index >> range.start) as u64 & ((1u64 << width) - 1);
    BitVec::from_u64(value, width)
}
