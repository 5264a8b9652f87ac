//! GHZ-diagonal states: `sum_x amps[x] |x>|x>...|x>` over `r` registers of
//! `p` qubits each.
//!
//! Every protocol state before the final Hadamard layer has this form, since
//! the phase oracles are diagonal and act identically on each copy of `x`.
//! Storing the `2^p` coefficients is enough to sample the joint outcome of
//! all `r` registers after `H^{(x)p}` is applied to each of them.
//!
//! Sampling rule. Applying `H^{(x)p}` to all registers maps the state to
//!
//! ```text
//! 2^(-(r-1)p/2) * sum_{y_0..y_{r-1}} c_hat[y_0 ^ ... ^ y_{r-1}] |y_{r-1}>...|y_0>
//! ```
//!
//! where `c_hat` is the normalized Walsh-Hadamard transform of `amps`. So the
//! XOR `z` of the outcomes has probability `|c_hat[z]|^2`, and given `z` the
//! tuple is uniform over the `2^((r-1)p)` tuples with that XOR.

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use super::wht::wht;
use crate::error::{Error, Result};
use crate::gf2vec::BitVec;

pub const DEFAULT_STRUCTURED_CAP: usize = 20;

const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GhzDiagonalState {
    p: usize,
    r: usize,
    amps: Vec<Complex64>,
}

impl GhzDiagonalState {
    /// `r` registers of `p` qubits, each position a GHZ_r tuple:
    /// `amps[x] = 2^(-p/2)` for every `x`.
    pub fn new(p: usize, r: usize) -> Result<Self> {
        Self::with_cap(p, r, DEFAULT_STRUCTURED_CAP)
    }

    pub fn with_cap(p: usize, r: usize, cap: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidLength("register width must be positive".into()));
        }
        if p > cap {
            return Err(Error::CapExceeded {
                what: "structured register",
                requested: p,
                cap,
            });
        }
        if r < 2 {
            return Err(Error::InvalidDimensions(format!("need at least 2 registers, got {r}")));
        }
        let size = 1usize << p;
        let amp = Complex64::new((size as f64).sqrt().recip(), 0.0);
        Ok(Self {
            p,
            r,
            amps: vec![amp; size],
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    /// Multiplies `amps[x]` by `(-1)^(v.x)`. This is the net effect of one
    /// party's XOR oracle on a `|->` target (phase kickback).
    pub fn apply_phase_oracle(&mut self, v: &BitVec) -> Result<()> {
        if v.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                actual: v.len(),
            });
        }
        let mask = v.to_u64() as usize;
        for (x, a) in self.amps.iter_mut().enumerate() {
            if (x & mask).count_ones() & 1 == 1 {
                *a = -*a;
            }
        }
        Ok(())
    }

    /// The outcome law of measuring every register after `H^{(x)p}`.
    pub fn measurement_distribution(&self) -> Result<OutcomeDistribution> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Unnormalized(norm));
        }
        let mut c_hat = self.amps.clone();
        wht(&mut c_hat)?;
        let xor_probs: Vec<f64> = c_hat.iter().map(Complex64::norm_sqr).collect();
        let sampler = WeightedIndex::new(&xor_probs).map_err(|_| Error::Unnormalized(norm))?;
        Ok(OutcomeDistribution {
            p: self.p,
            r: self.r,
            law: XorLaw::Table {
                probs: xor_probs,
                sampler,
            },
        })
    }

    /// One joint measurement of all `r` registers, indexed by register.
    pub fn sample_measurement<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<BitVec>> {
        self.measurement_distribution()?.sample(rng)
    }
}

/// A GHZ-diagonal state of the form `2^(-p/2) sum_x (-1)^(c.x) |x>...|x>`,
/// stored as the vector `c` alone.
///
/// The fresh state (`c = 0`) and everything reachable from it by phase
/// oracles has this form, so it covers register widths far beyond what the
/// amplitude table can hold. Its Walsh-Hadamard transform is the point mass
/// at `c`, so the outcome XOR is `c` with certainty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterState {
    r: usize,
    phase: BitVec,
}

impl CharacterState {
    pub fn new(p: usize, r: usize) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidDimensions(format!("need at least 2 registers, got {r}")));
        }
        Ok(Self {
            r,
            phase: BitVec::zero(p)?,
        })
    }

    pub fn p(&self) -> usize {
        self.phase.len()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// The accumulated phase vector `c`.
    pub fn phase(&self) -> &BitVec {
        &self.phase
    }

    pub fn apply_phase_oracle(&mut self, v: &BitVec) -> Result<()> {
        self.phase.xor_assign(v)
    }

    pub fn measurement_distribution(&self) -> OutcomeDistribution {
        OutcomeDistribution {
            p: self.p(),
            r: self.r,
            law: XorLaw::Point(self.phase.clone()),
        }
    }

    /// Expands to the amplitude table; fails if `p` exceeds `cap`.
    pub fn to_amplitudes(&self, cap: usize) -> Result<GhzDiagonalState> {
        let mut state = GhzDiagonalState::with_cap(self.p(), self.r, cap)?;
        state.apply_phase_oracle(&self.phase)?;
        Ok(state)
    }
}

/// Which representation backs a protocol resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Tier {
    /// Amplitude table when `p` fits the cap, character form otherwise.
    #[default]
    Auto,
    Amplitudes,
    Character,
}

/// The entangled resource handed out for one protocol phase.
#[derive(Debug, Clone, PartialEq)]
pub enum GhzResource {
    Amplitudes(GhzDiagonalState),
    Character(CharacterState),
}

impl GhzResource {
    pub fn new(p: usize, r: usize, tier: Tier, cap: usize) -> Result<Self> {
        match tier {
            Tier::Amplitudes => Ok(Self::Amplitudes(GhzDiagonalState::with_cap(p, r, cap)?)),
            Tier::Character => Ok(Self::Character(CharacterState::new(p, r)?)),
            Tier::Auto if p <= cap => Ok(Self::Amplitudes(GhzDiagonalState::with_cap(p, r, cap)?)),
            Tier::Auto => Ok(Self::Character(CharacterState::new(p, r)?)),
        }
    }

    pub fn p(&self) -> usize {
        match self {
            Self::Amplitudes(s) => s.p(),
            Self::Character(s) => s.p(),
        }
    }

    pub fn r(&self) -> usize {
        match self {
            Self::Amplitudes(s) => s.r(),
            Self::Character(s) => s.r(),
        }
    }

    pub fn tier_name(&self) -> &'static str {
        match self {
            Self::Amplitudes(_) => "amplitudes",
            Self::Character(_) => "character",
        }
    }

    pub fn apply_phase_oracle(&mut self, v: &BitVec) -> Result<()> {
        match self {
            Self::Amplitudes(s) => s.apply_phase_oracle(v),
            Self::Character(s) => s.apply_phase_oracle(v),
        }
    }

    pub fn measurement_distribution(&self) -> Result<OutcomeDistribution> {
        match self {
            Self::Amplitudes(s) => s.measurement_distribution(),
            Self::Character(s) => Ok(s.measurement_distribution()),
        }
    }
}

/// Joint distribution of the `r` measured registers.
#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    p: usize,
    r: usize,
    law: XorLaw,
}

/// Law of the XOR of all outcomes.
#[derive(Debug, Clone)]
enum XorLaw {
    Table { probs: Vec<f64>, sampler: WeightedIndex<f64> },
    Point(BitVec),
}

impl OutcomeDistribution {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// `P(y_0 ^ ... ^ y_{r-1} = z)`.
    pub fn xor_probability(&self, z: &BitVec) -> Result<f64> {
        if z.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                actual: z.len(),
            });
        }
        Ok(match &self.law {
            XorLaw::Table { probs, .. } => probs[z.to_u64() as usize],
            XorLaw::Point(c) => {
                if c == z {
                    1.0
                } else {
                    0.0
                }
            }
        })
    }

    /// The XOR value when it is certain (probability 1 within `1e-12`).
    pub fn deterministic_xor(&self) -> Option<BitVec> {
        match &self.law {
            XorLaw::Point(c) => Some(c.clone()),
            XorLaw::Table { probs, .. } => probs
                .iter()
                .position(|&q| (q - 1.0).abs() < 1e-12)
                .map(|z| BitVec::from_u64(z as u64, self.p).expect("p >= 1")),
        }
    }

    /// Exact probability of one outcome tuple.
    pub fn tuple_probability(&self, ys: &[BitVec]) -> Result<f64> {
        if ys.len() != self.r {
            return Err(Error::DimensionMismatch {
                expected: self.r,
                actual: ys.len(),
            });
        }
        let mut z = BitVec::zero(self.p)?;
        for y in ys {
            z.xor_assign(y)?;
        }
        let free_bits = (self.r - 1) * self.p;
        Ok(self.xor_probability(&z)? * 0.5f64.powi(free_bits as i32))
    }

    /// Samples with registers `0..r-1` drawn freely and register `r-1`
    /// completing the XOR constraint.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<BitVec>> {
        let order: Vec<usize> = (0..self.r).collect();
        self.sample_in_order(rng, &order)
    }

    /// Samples registers in the given order; the last register in `order` is
    /// the one fixed by the XOR constraint. The joint law does not depend on
    /// `order`.
    pub fn sample_in_order<R: Rng + ?Sized>(&self, rng: &mut R, order: &[usize]) -> Result<Vec<BitVec>> {
        let mut seen = vec![false; self.r];
        if order.len() != self.r || order.iter().any(|&k| k >= self.r || std::mem::replace(&mut seen[k], true)) {
            return Err(Error::InvalidPermutation(format!(
                "{order:?} is not an ordering of {} registers",
                self.r
            )));
        }
        let z = match &self.law {
            XorLaw::Table { sampler, .. } => BitVec::from_u64(sampler.sample(rng) as u64, self.p)?,
            XorLaw::Point(c) => c.clone(),
        };
        let mut out: Vec<Option<BitVec>> = vec![None; self.r];
        let mut rest = z;
        for &k in &order[..self.r - 1] {
            let y = BitVec::random(self.p, rng)?;
            rest.xor_assign(&y)?;
            out[k] = Some(y);
        }
        out[order[self.r - 1]] = Some(rest);
        Ok(out.into_iter().map(|y| y.expect("every register assigned")).collect())
    }
}
