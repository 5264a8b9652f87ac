//! Segment and block layout of the extended secret vectors.
//!
//! A register of `p = n * n * m` bits is split into `n` segments of `n * m`
//! bits, each split into `n` blocks of `m` bits. Segments and blocks are
//! numbered from zero, right to left: segment `j` occupies bits
//! `[j*n*m, (j+1)*n*m)` and block `k` of a segment occupies `[k*m, (k+1)*m)`.
//! The same addressing applies to classical vectors and quantum registers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2vec::BitVec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dimensions {
    n: usize,
    m: usize,
}

impl Dimensions {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimensions(format!("need at least 2 brokers, got n = {n}")));
        }
        if m == 0 {
            return Err(Error::InvalidDimensions("secret width m must be positive".into()));
        }
        n.checked_mul(n)
            .and_then(|nn| nn.checked_mul(m))
            .ok_or_else(|| Error::InvalidDimensions(format!("n = {n}, m = {m} overflows")))?;
        Ok(Self { n, m })
    }

    /// Number of information brokers.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Bits per secret, which is also the block width.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Register width `n^2 m`.
    pub fn p(&self) -> usize {
        self.n * self.n * self.m
    }

    pub fn segment_width(&self) -> usize {
        self.n * self.m
    }

    pub fn block_width(&self) -> usize {
        self.m
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, bound: self.n });
        }
        Ok(())
    }

    fn check_secret(&self, s: &BitVec) -> Result<()> {
        if s.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                actual: s.len(),
            });
        }
        Ok(())
    }

    fn check_register(&self, v: &BitVec) -> Result<()> {
        if v.len() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                actual: v.len(),
            });
        }
        Ok(())
    }
}

/// Segment `j` of a full-width register.
pub fn segment(v: &BitVec, dims: Dimensions, j: usize) -> Result<BitVec> {
    dims.check_register(v)?;
    dims.check_index(j)?;
    let w = dims.segment_width();
    v.slice(j * w, w)
}

/// Block `k` of a segment.
pub fn block(seg: &BitVec, dims: Dimensions, k: usize) -> Result<BitVec> {
    if seg.len() != dims.segment_width() {
        return Err(Error::DimensionMismatch {
            expected: dims.segment_width(),
            actual: seg.len(),
        });
    }
    dims.check_index(k)?;
    seg.slice(k * dims.m, dims.m)
}

/// All `n` blocks of a segment, in index order.
pub fn blocks(seg: &BitVec, dims: Dimensions) -> Result<Vec<BitVec>> {
    (0..dims.n).map(|k| block(seg, dims, k)).collect()
}

/// Reassembles a register from its segments given in index order.
pub fn from_segments(segments: &[BitVec], dims: Dimensions) -> Result<BitVec> {
    if segments.len() != dims.n {
        return Err(Error::DimensionMismatch {
            expected: dims.n,
            actual: segments.len(),
        });
    }
    for s in segments {
        if s.len() != dims.segment_width() {
            return Err(Error::DimensionMismatch {
                expected: dims.segment_width(),
                actual: s.len(),
            });
        }
    }
    BitVec::concat(segments)
}

/// Block `i` is zero, every other block holds `s`.
pub fn primary_segment(i: usize, s: &BitVec, dims: Dimensions) -> Result<BitVec> {
    dims.check_index(i)?;
    dims.check_secret(s)?;
    let zero = BitVec::zero(dims.m)?;
    let parts: Vec<BitVec> = (0..dims.n)
        .map(|k| if k == i { zero.clone() } else { s.clone() })
        .collect();
    BitVec::concat(&parts)
}

/// Block `i` holds `s`, every other block is zero.
pub fn auxiliary_segment(i: usize, s: &BitVec, dims: Dimensions) -> Result<BitVec> {
    dims.check_index(i)?;
    dims.check_secret(s)?;
    let mut seg = BitVec::zero(dims.segment_width())?;
    seg.write_slice(i * dims.m, s)?;
    Ok(seg)
}

/// The `n^2 m`-bit encoding of one broker's secret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedSecret {
    dims: Dimensions,
    owner: usize,
    bits: BitVec,
}

impl ExtendedSecret {
    /// Segment `owner` is the primary segment; every other segment is auxiliary.
    pub fn build(owner: usize, s: &BitVec, dims: Dimensions) -> Result<Self> {
        let primary = primary_segment(owner, s, dims)?;
        let auxiliary = auxiliary_segment(owner, s, dims)?;
        let segments: Vec<BitVec> = (0..dims.n)
            .map(|j| if j == owner { primary.clone() } else { auxiliary.clone() })
            .collect();
        Ok(Self {
            dims,
            owner,
            bits: BitVec::concat(&segments)?,
        })
    }

    pub fn dims(&self) -> Dimensions {
        self.dims
    }

    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn bits(&self) -> &BitVec {
        &self.bits
    }

    pub fn segment(&self, j: usize) -> Result<BitVec> {
        segment(&self.bits, self.dims, j)
    }
}

/// Trace form of an extended secret.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtendedRecord {
    pub n: usize,
    pub m: usize,
    pub owner: usize,
    pub bits_hex: String,
}

impl From<&ExtendedSecret> for ExtendedRecord {
    fn from(e: &ExtendedSecret) -> Self {
        Self {
            n: e.dims.n,
            m: e.dims.m,
            owner: e.owner,
            bits_hex: e.bits.to_hex(),
        }
    }
}

/// Convenience alias matching the operation name used across the crate.
pub fn build_extended(i: usize, s: &BitVec, dims: Dimensions) -> Result<ExtendedSecret> {
    ExtendedSecret::build(i, s, dims)
}

/// The XOR of all extended secrets, optionally with its blocks shuffled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregatedVector {
    dims: Dimensions,
    bits: BitVec,
    shuffled: bool,
}

impl AggregatedVector {
    pub fn from_bits(bits: BitVec, dims: Dimensions, shuffled: bool) -> Result<Self> {
        dims.check_register(&bits)?;
        Ok(Self { dims, bits, shuffled })
    }

    pub fn dims(&self) -> Dimensions {
        self.dims
    }

    pub fn bits(&self) -> &BitVec {
        &self.bits
    }

    pub fn into_bits(self) -> BitVec {
        self.bits
    }

    pub fn is_shuffled(&self) -> bool {
        self.shuffled
    }

    pub fn segment(&self, j: usize) -> Result<BitVec> {
        segment(&self.bits, self.dims, j)
    }

    /// Block `k` of segment `i`.
    pub fn block(&self, i: usize, k: usize) -> Result<BitVec> {
        block(&self.segment(i)?, self.dims, k)
    }

    /// Grouped text, one group per segment.
    pub fn format(&self) -> String {
        self.bits.format(Some(self.dims.segment_width()))
    }
}

/// XOR of one extended secret per broker.
pub fn aggregate(extended: &[ExtendedSecret], dims: Dimensions) -> Result<AggregatedVector> {
    if extended.len() != dims.n {
        return Err(Error::InvalidOwners(format!(
            "expected {} extended secrets, got {}",
            dims.n,
            extended.len()
        )));
    }
    let mut seen = vec![false; dims.n];
    let mut acc = BitVec::zero(dims.p())?;
    for e in extended {
        if e.dims != dims {
            return Err(Error::InvalidDimensions(format!(
                "extended secret has dimensions {:?}, expected {:?}",
                e.dims, dims
            )));
        }
        if e.owner >= dims.n {
            return Err(Error::InvalidOwners(format!("owner {} out of range", e.owner)));
        }
        if std::mem::replace(&mut seen[e.owner], true) {
            return Err(Error::InvalidOwners(format!("duplicate owner {}", e.owner)));
        }
        acc.xor_assign(&e.bits)?;
    }
    AggregatedVector::from_bits(acc, dims, false)
}

/// Builds the aggregated vector directly from its block form:
/// block `(i, i)` is zero and block `(i, j)` is `s_i ^ s_j`.
///
/// Independent of [`aggregate`]; used as its oracle.
pub fn expected_blocks(secrets: &[BitVec], dims: Dimensions) -> Result<AggregatedVector> {
    if secrets.len() != dims.n {
        return Err(Error::DimensionMismatch {
            expected: dims.n,
            actual: secrets.len(),
        });
    }
    for s in secrets {
        dims.check_secret(s)?;
    }
    let mut bits = BitVec::zero(dims.p())?;
    for (i, si) in secrets.iter().enumerate() {
        for (j, sj) in secrets.iter().enumerate() {
            let b = si.xor(sj)?;
            bits.write_slice(i * dims.segment_width() + j * dims.m, &b)?;
        }
    }
    AggregatedVector::from_bits(bits, dims, false)
}
