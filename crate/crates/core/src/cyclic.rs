//! Circular binary strings, multiple circular shifts and their columns.
//!
//! Positions are 1-based on the public surface: `s.get(1)` is the first
//! symbol, `column_at(.., 1)` the first column.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD: usize = 64;

/// A binary string stored as packed 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryString {
    len: usize,
    words: Vec<u64>,
    // The string written twice, so any rotation is a contiguous bit window.
    doubled: Vec<u64>,
}

impl BinaryString {
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Malformed("binary string must be non-empty".into()));
        }
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::Malformed(format!(
                "symbol {} at position {} is not binary",
                bits[pos],
                pos + 1
            )));
        }
        Ok(Self::from_bits_unchecked(bits))
    }

    fn from_bits_unchecked(bits: &[u8]) -> Self {
        let len = bits.len();
        let mut words = vec![0u64; len.div_ceil(WORD)];
        let mut doubled = vec![0u64; (2 * len).div_ceil(WORD) + 1];
        for (i, &b) in bits.iter().enumerate() {
            if b == 1 {
                words[i / WORD] |= 1 << (i % WORD);
                doubled[i / WORD] |= 1 << (i % WORD);
                let j = i + len;
                doubled[j / WORD] |= 1 << (j % WORD);
            }
        }
        BinaryString {
            len,
            words,
            doubled,
        }
    }

    /// All-ones string of length `n`.
    pub fn ones(n: usize) -> Result<Self> {
        Self::from_bits(&vec![1; n])
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Symbol at 1-based position `i`.
    pub fn get(&self, i: usize) -> u8 {
        assert!(i >= 1 && i <= self.len, "position {i} out of 1..={}", self.len);
        self.bit0(i - 1)
    }

    #[inline]
    fn bit0(&self, i: usize) -> u8 {
        ((self.words[i / WORD] >> (i % WORD)) & 1) as u8
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.bit0(i)).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Circular left shift by `delta` (reduced modulo the length).
    pub fn shift(&self, delta: usize) -> BinaryString {
        let d = delta % self.len;
        let bits: Vec<u8> = (0..self.len).map(|i| self.bit0((i + d) % self.len)).collect();
        Self::from_bits_unchecked(&bits)
    }

    /// Packed words of `self.shift(delta)`; bits past the length are zero.
    pub(crate) fn rotated_words(&self, delta: usize, out: &mut Vec<u64>) {
        let d = delta % self.len;
        let nwords = self.len.div_ceil(WORD);
        out.clear();
        for w in 0..nwords {
            let start = d + w * WORD;
            let (idx, off) = (start / WORD, start % WORD);
            let mut v = self.doubled[idx] >> off;
            if off != 0 && idx + 1 < self.doubled.len() {
                v |= self.doubled[idx + 1] << (WORD - off);
            }
            out.push(v);
        }
        let tail = self.len % WORD;
        if tail != 0 {
            *out.last_mut().unwrap() &= (1u64 << tail) - 1;
        }
    }

    /// Concatenation of several strings.
    pub fn concat(parts: &[BinaryString]) -> Result<BinaryString> {
        let bits: Vec<u8> = parts.iter().flat_map(|p| p.bits()).collect();
        Self::from_bits(&bits)
    }
}

impl FromStr for BinaryString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Malformed(format!(
                    "character {other:?} at position {} is not 0 or 1",
                    i + 1
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_bits(&bits)
    }
}

impl fmt::Display for BinaryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.bit0(i) == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryString(\"{self}\")")
    }
}

/// One circular shift amount per string, each reduced modulo the length.
impl Serialize for BinaryString {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BinaryString {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ShiftVector(Vec<usize>);

impl ShiftVector {
    pub fn new(deltas: Vec<usize>, n: usize) -> Self {
        assert!(n > 0);
        ShiftVector(deltas.into_iter().map(|d| d % n).collect())
    }

    pub fn zeros(k: usize) -> Self {
        ShiftVector(vec![0; k])
    }

    pub fn deltas(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Adds `t` to every entry, modulo `n`.
    pub fn offset(&self, t: usize, n: usize) -> ShiftVector {
        ShiftVector(self.0.iter().map(|&d| (d + t) % n).collect())
    }

    /// Rotates the vector so that entry `anchor` becomes zero.
    pub fn normalized(&self, anchor: usize, n: usize) -> ShiftVector {
        let a = self.0[anchor];
        ShiftVector(self.0.iter().map(|&d| (d + n - a) % n).collect())
    }

    /// Appends zero shifts for padding rows.
    pub fn extended(&self, extra: usize) -> ShiftVector {
        let mut v = self.0.clone();
        v.extend(std::iter::repeat_n(0, extra));
        ShiftVector(v)
    }
}

impl fmt::Display for ShiftVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Column {
    pub index: usize,
    pub entries: Vec<u8>,
    pub weight: usize,
}

/// Checks that `strings` is non-empty, equal-length and matches `delta`.
/// Returns the common length.
pub fn check_shape(strings: &[BinaryString], delta: &ShiftVector) -> Result<usize> {
    let n = common_length(strings)?;
    if delta.len() != strings.len() {
        return Err(Error::ArityMismatch {
            expected: strings.len(),
            got: delta.len(),
        });
    }
    Ok(n)
}

pub fn common_length(strings: &[BinaryString]) -> Result<usize> {
    let first = strings
        .first()
        .ok_or_else(|| Error::Malformed("no strings given".into()))?;
    let n = first.len();
    if let Some((j, s)) = strings.iter().enumerate().find(|(_, s)| s.len() != n) {
        return Err(Error::Malformed(format!(
            "string {} has length {} but string 1 has length {n}",
            j + 1,
            s.len()
        )));
    }
    Ok(n)
}

/// Column `i` (1-based) of the multiple circular shift `delta`.
pub fn column_at(strings: &[BinaryString], delta: &ShiftVector, i: usize) -> Result<Column> {
    let n = check_shape(strings, delta)?;
    if i == 0 || i > n {
        return Err(Error::InvalidArgument(format!("column {i} out of 1..={n}")));
    }
    let entries: Vec<u8> = strings
        .iter()
        .zip(delta.deltas())
        .map(|(s, &d)| s.bit0((i - 1 + d) % n))
        .collect();
    let weight = entries.iter().map(|&b| b as usize).sum();
    Ok(Column {
        index: i,
        entries,
        weight,
    })
}

/// Weight of every column, in column order.
pub fn column_weights(strings: &[BinaryString], delta: &ShiftVector) -> Result<Vec<usize>> {
    let n = check_shape(strings, delta)?;
    let mut weights = vec![0usize; n];
    let mut buf = Vec::new();
    for (s, &d) in strings.iter().zip(delta.deltas()) {
        s.rotated_words(d, &mut buf);
        for (w, word) in buf.iter().enumerate() {
            let mut bits = *word;
            while bits != 0 {
                let t = bits.trailing_zeros() as usize;
                weights[w * WORD + t] += 1;
                bits &= bits - 1;
            }
        }
    }
    Ok(weights)
}

/// Reusable scratch space for [`weight_histogram_into`].
#[derive(Debug, Default)]
pub struct HistogramScratch {
    rows: Vec<Vec<u64>>,
    planes: Vec<u64>,
}

/// Number of columns of each weight `0..=k` under `delta`.
pub fn weight_histogram(strings: &[BinaryString], delta: &ShiftVector) -> Result<Vec<u64>> {
    check_shape(strings, delta)?;
    let mut hist = vec![0u64; strings.len() + 1];
    weight_histogram_into(strings, delta.deltas(), &mut hist, &mut HistogramScratch::default());
    Ok(hist)
}

/// Bit-sliced column counting: each word position keeps a small binary
/// counter per column spread over `planes`. Shapes must already be checked.
pub(crate) fn weight_histogram_into(
    strings: &[BinaryString],
    deltas: &[usize],
    hist: &mut [u64],
    scratch: &mut HistogramScratch,
) {
    let k = strings.len();
    let n = strings[0].len();
    let nwords = n.div_ceil(WORD);
    let nplanes = (usize::BITS - k.leading_zeros()) as usize;
    scratch.rows.resize_with(k, Vec::new);
    for ((s, &d), buf) in strings.iter().zip(deltas).zip(scratch.rows.iter_mut()) {
        s.rotated_words(d, buf);
    }
    hist.iter_mut().for_each(|h| *h = 0);
    scratch.planes.resize(nplanes, 0);
    for w in 0..nwords {
        let planes = &mut scratch.planes;
        planes.iter_mut().for_each(|p| *p = 0);
        for row in &scratch.rows {
            let mut carry = row[w];
            for p in planes.iter_mut() {
                if carry == 0 {
                    break;
                }
                let sum = *p ^ carry;
                carry &= *p;
                *p = sum;
            }
        }
        let valid = if w + 1 == nwords && !n.is_multiple_of(WORD) {
            (1u64 << (n % WORD)) - 1
        } else {
            u64::MAX
        };
        let mut counted = 0u64;
        for (weight, h) in hist.iter_mut().enumerate().skip(1) {
            let mut mask = valid;
            for (b, p) in planes.iter().enumerate() {
                mask &= if (weight >> b) & 1 == 1 { *p } else { !*p };
            }
            let c = mask.count_ones() as u64;
            *h += c;
            counted += c;
        }
        hist[0] += valid.count_ones() as u64 - counted;
    }
}
