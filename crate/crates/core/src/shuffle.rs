//! Permutations of `{0, ..., n-1}` and the per-segment block shuffle.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2vec::BitVec;
use crate::layout::{self, AggregatedVector};

/// A bijection on `{0, ..., n-1}`; `map[k]` is the image of `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        if map.is_empty() {
            return Err(Error::InvalidPermutation("degree must be positive".into()));
        }
        let mut seen = vec![false; map.len()];
        for &k in &map {
            if k >= map.len() || std::mem::replace(&mut seen[k], true) {
                return Err(Error::InvalidPermutation(format!("{map:?} is not a bijection")));
            }
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new((0..n).collect())
    }

    pub fn degree(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, k: usize) -> usize {
        self.map[k]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (k, &img) in self.map.iter().enumerate() {
            inv[img] = k;
        }
        Self { map: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(k, &img)| k == img)
    }

    /// Every permutation of degree `n`, in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        (0..n).permutations(n).map(|map| Permutation { map })
    }
}

/// Uniform draw from S_n (Fisher-Yates).
pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Permutation> {
    if n == 0 {
        return Err(Error::InvalidPermutation("degree must be positive".into()));
    }
    let mut map: Vec<usize> = (0..n).collect();
    map.shuffle(rng);
    Ok(Permutation { map })
}

/// Rearranges the `n` equal-width blocks of a segment: output block `k` is
/// input block `perm(k)`.
pub fn permute_blocks(seg: &BitVec, width: usize, perm: &Permutation) -> Result<BitVec> {
    if seg.len() != width * perm.degree() {
        return Err(Error::DimensionMismatch {
            expected: width * perm.degree(),
            actual: seg.len(),
        });
    }
    let blocks: Vec<BitVec> = (0..perm.degree())
        .map(|k| seg.slice(perm.apply(k) * width, width))
        .collect::<Result<_>>()?;
    BitVec::concat(&blocks)
}

/// Shuffles the blocks inside every segment of `t`, one permutation per
/// segment (`perms[i]` acts on segment `i`). Segment order is unchanged.
pub fn shuffle_aggregated(t: &AggregatedVector, perms: &[Permutation]) -> Result<AggregatedVector> {
    if t.is_shuffled() {
        return Err(Error::AlreadyShuffled);
    }
    shuffle_segments(t, perms, true)
}

/// Applies the inverse permutations, recovering the unshuffled vector.
pub fn unshuffle_aggregated(t: &AggregatedVector, perms: &[Permutation]) -> Result<AggregatedVector> {
    let inverse: Vec<Permutation> = perms.iter().map(Permutation::inverse).collect();
    shuffle_segments(t, &inverse, false)
}

fn shuffle_segments(t: &AggregatedVector, perms: &[Permutation], shuffled: bool) -> Result<AggregatedVector> {
    let dims = t.dims();
    if perms.len() != dims.n() {
        return Err(Error::DimensionMismatch {
            expected: dims.n(),
            actual: perms.len(),
        });
    }
    let segments: Vec<BitVec> = perms
        .iter()
        .enumerate()
        .map(|(i, perm)| {
            if perm.degree() != dims.n() {
                return Err(Error::DimensionMismatch {
                    expected: dims.n(),
                    actual: perm.degree(),
                });
            }
            permute_blocks(&t.segment(i)?, dims.m(), perm)
        })
        .collect::<Result<_>>()?;
    AggregatedVector::from_bits(layout::from_segments(&segments, dims)?, dims, shuffled)
}

/// True iff every segment of `a` holds the same multiset of blocks as the
/// corresponding segment of `b`.
pub fn is_block_permutation(a: &AggregatedVector, b: &AggregatedVector) -> Result<bool> {
    if a.dims() != b.dims() {
        return Err(Error::InvalidDimensions(format!(
            "{:?} vs {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let dims = a.dims();
    for i in 0..dims.n() {
        let mut x = layout::blocks(&a.segment(i)?, dims)?;
        let mut y = layout::blocks(&b.segment(i)?, dims)?;
        x.sort();
        y.sort();
        if x != y {
            return Ok(false);
        }
    }
    Ok(true)
}
