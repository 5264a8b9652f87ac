//! Fixed-length bit vectors over GF(2).
//!
//! Bit 0 is the least significant bit and is displayed rightmost, so the
//! text form of a vector reads MSB-left exactly like a binary numeral.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// A fixed-length vector over GF(2), packed into 64-bit words.
///
/// All storage above bit `len - 1` is kept zero, so word-wise equality and
/// hashing agree with bitwise equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zero(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidLength("bit vector length must be positive".into()));
        }
        Ok(Self {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        })
    }

    /// Builds a vector from the low `len` bits of `value`.
    pub fn from_u64(value: u64, len: usize) -> Result<Self> {
        let mut v = Self::zero(len)?;
        v.words[0] = value;
        v.clear_tail();
        Ok(v)
    }

    /// Builds a vector from bits listed in index order (bit 0 first).
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mut v = Self::zero(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        Ok(v)
    }

    /// Uniformly random vector; each bit is drawn independently from `rng`.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Result<Self> {
        let mut v = Self::zero(len)?;
        for w in v.words.iter_mut() {
            *w = rng.gen();
        }
        v.clear_tail();
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    // A BitVec is never empty; provided for clippy's len_without_is_empty.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, b: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if b {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor(&self, other: &BitVec) -> Result<BitVec> {
        self.check_len(other)?;
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(BitVec {
            len: self.len,
            words,
        })
    }

    pub fn xor_assign(&mut self, other: &BitVec) -> Result<()> {
        self.check_len(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// Inner product mod 2: parity of the bitwise AND.
    pub fn dot(&self, other: &BitVec) -> Result<bool> {
        self.check_len(other)?;
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        Ok(ones & 1 == 1)
    }

    /// Copies `width` bits starting at `start` into a new vector.
    pub fn slice(&self, start: usize, width: usize) -> Result<BitVec> {
        if width == 0 {
            return Err(Error::InvalidLength("slice width must be positive".into()));
        }
        if start + width > self.len {
            return Err(Error::IndexOutOfRange {
                index: start + width - 1,
                bound: self.len,
            });
        }
        let mut out = BitVec::zero(width)?;
        for k in 0..width {
            if self.get(start + k) {
                out.set(k, true);
            }
        }
        Ok(out)
    }

    /// Overwrites bits `[start, start + src.len())` with `src`.
    pub fn write_slice(&mut self, start: usize, src: &BitVec) -> Result<()> {
        if start + src.len > self.len {
            return Err(Error::IndexOutOfRange {
                index: start + src.len - 1,
                bound: self.len,
            });
        }
        for k in 0..src.len {
            self.set(start + k, src.get(k));
        }
        Ok(())
    }

    /// Concatenates parts given in index order: `parts[0]` lands in the low bits.
    pub fn concat(parts: &[BitVec]) -> Result<BitVec> {
        let total = parts.iter().map(BitVec::len).sum();
        let mut out = BitVec::zero(total)?;
        let mut at = 0;
        for part in parts {
            out.write_slice(at, part)?;
            at += part.len;
        }
        Ok(out)
    }

    /// The vector as an integer basis index. Only valid for `len <= 64`.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= WORD_BITS, "vector of length {} does not fit a u64", self.len);
        self.words[0]
    }

    /// Parses MSB-left text of `0`/`1`. Whitespace and `_` separators are skipped.
    pub fn parse(text: &str, len: usize) -> Result<BitVec> {
        let digits: Vec<char> = text
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .collect();
        if digits.len() != len {
            return Err(Error::Parse(format!(
                "expected {len} bits, found {} in {text:?}",
                digits.len()
            )));
        }
        let mut v = BitVec::zero(len)?;
        for (pos, c) in digits.iter().enumerate() {
            let bit = match c {
                '0' => false,
                '1' => true,
                other => return Err(Error::Parse(format!("bad character {other:?} in {text:?}"))),
            };
            v.set(len - 1 - pos, bit);
        }
        Ok(v)
    }

    /// MSB-left text, with a space every `group` bits counted from the right.
    pub fn format(&self, group: Option<usize>) -> String {
        let mut out = String::with_capacity(self.len * 2);
        for i in (0..self.len).rev() {
            out.push(if self.get(i) { '1' } else { '0' });
            if let Some(g) = group.filter(|&g| g > 0) {
                if i > 0 && i % g == 0 {
                    out.push(' ');
                }
            }
        }
        out
    }

    /// Lowercase hex, MSB-left, `ceil(len / 4)` digits. The length is not encoded.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let mut nibble = 0u32;
            for b in 0..4 {
                let i = d * 4 + b;
                if i < self.len && self.get(i) {
                    nibble |= 1 << b;
                }
            }
            out.push(char::from_digit(nibble, 16).expect("nibble < 16"));
        }
        out
    }

    pub fn from_hex(text: &str, len: usize) -> Result<BitVec> {
        let text = text.trim();
        let text = text.strip_prefix("0x").unwrap_or(text);
        if text.is_empty() {
            return Err(Error::Parse("empty hex string".into()));
        }
        let mut v = BitVec::zero(len)?;
        for (d, c) in text.chars().rev().enumerate() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("bad hex character {c:?} in {text:?}")))?;
            for b in 0..4 {
                if nibble >> b & 1 == 1 {
                    let i = d * 4 + b;
                    if i >= len {
                        return Err(Error::Parse(format!("hex value {text:?} exceeds {len} bits")));
                    }
                    v.set(i, true);
                }
            }
        }
        Ok(v)
    }

    fn check_len(&self, other: &BitVec) -> Result<()> {
        if self.len != other.len {
            return Err(Error::DimensionMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        Ok(())
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << rem) - 1;
        }
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format(None))
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({})", self.format(None))
    }
}
