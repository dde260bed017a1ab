//! f-MSCS with `phi` to DTW-Mean.
//!
//! Each character of `s_j` becomes a segment, `t_A = (10)^m` for `0` and
//! `t_B = 100(10)^{m-1}` for `1`, and `x_j` is `r` copies of the segment
//! string. An extra series `(1)` is appended. Every segment has `2m` blocks
//! (maximal runs); its first 0-block is the coding block, of length 2 exactly
//! for `t_B`.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::costfn::{Builtin, CostTable};
use crate::cyclic::{BinaryString, ShiftVector};
use crate::dtw::{alignment_cost, TimeSeries, WarpingPath};
use crate::error::{Error, Guard, Result};
use crate::mscs::MscsInstance;
use crate::rational::Rational;

/// Smallest arity at which the lower-bound argument is carried out.
pub const PROOF_MIN_K: usize = 15;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DtwInstance {
    pub series: Vec<TimeSeries>,
    pub target: Option<Rational>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DtwOverrides {
    pub m: Option<usize>,
    pub r: Option<usize>,
    /// Permit `k < 15`.
    pub allow_small_k: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DtwReductionParams {
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub r: usize,
    /// Source target cost.
    pub c: Rational,
    pub epsilon: Rational,
    /// `f_k(0) = k/(k+1)`.
    pub f0: Rational,
    pub c_prime: Rational,
    pub m_formula: String,
    pub r_formula: String,
    pub outside_proof_regime: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coding {
    A,
    B,
}

/// A maximal run in a series; `start` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub start: usize,
    pub len: usize,
    pub bit: u8,
    pub coding: Option<Coding>,
}

impl Block {
    pub fn end(&self) -> usize {
        self.start + self.len - 1
    }
}

/// Block decomposition of the main series `x_1..x_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockMap {
    pub m: usize,
    pub series: Vec<Vec<Block>>,
}

impl BlockMap {
    /// Decompose series made of `t_A`/`t_B` segments with parameter `m`.
    pub fn from_series(series: &[TimeSeries], m: usize) -> Result<Self> {
        let mut out = Vec::with_capacity(series.len());
        for (j, x) in series.iter().enumerate() {
            let mut blocks: Vec<Block> = Vec::new();
            for (i0, v) in x.values().iter().enumerate() {
                let bit = if v.is_zero() {
                    0
                } else if *v == Rational::one() {
                    1
                } else {
                    return Err(Error::Malformed(format!("series {} has non-binary value {v}", j + 1)));
                };
                match blocks.last_mut() {
                    Some(b) if b.bit == bit => b.len += 1,
                    _ => blocks.push(Block { start: i0 + 1, len: 1, bit, coding: None }),
                }
            }
            if !blocks.len().is_multiple_of(2 * m) {
                return Err(Error::Malformed(format!(
                    "series {} has {} blocks, not a multiple of 2m = {}",
                    j + 1,
                    blocks.len(),
                    2 * m
                )));
            }
            for seg in blocks.chunks_mut(2 * m) {
                let ok_shape = seg.iter().enumerate().all(|(t, b)| {
                    b.bit == u8::from(t % 2 == 0) && (b.len == 1 || (t == 1 && b.len == 2))
                });
                if !ok_shape {
                    return Err(Error::Malformed(format!("series {} is not made of t_A/t_B segments", j + 1)));
                }
                seg[1].coding = Some(if seg[1].len == 2 { Coding::B } else { Coding::A });
            }
            out.push(blocks);
        }
        Ok(BlockMap { m, series: out })
    }

    /// 0-based block index of each element of series `j` (0-based).
    pub fn element_blocks(&self, j: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (bi, b) in self.series[j].iter().enumerate() {
            out.extend(std::iter::repeat_n(bi, b.len));
        }
        out
    }
}

pub fn t_a(m: usize) -> Vec<u8> {
    [1u8, 0].repeat(m)
}

pub fn t_b(m: usize) -> Vec<u8> {
    let mut v = vec![1u8, 0, 0];
    v.extend([1u8, 0].repeat(m - 1));
    v
}

/// Parameters from the formulas, with overrides applied.
pub fn dtw_params(k: usize, n: usize, c: &Rational, overrides: &DtwOverrides) -> Result<DtwReductionParams> {
    if k < PROOF_MIN_K && !overrides.allow_small_k {
        return Err(Error::OutsideProofRegime(format!(
            "k = {k} < {PROOF_MIN_K}; pass the small-k override to build anyway"
        )));
    }
    let epsilon = CostTable::builtin(Builtin::Phi, k)?.derive()?.gap_or_err()?;
    let ce = c + &epsilon;
    let m_formula: BigInt = (Rational::from(1600 * k) * &ce).ceil();
    let m = match overrides.m {
        Some(m) => m,
        None => m_formula
            .to_usize()
            .ok_or_else(|| Error::Infeasible(format!("m = {m_formula} is too large")))?,
    };
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let r_of = |m: usize| -> BigInt {
        ((Rational::from(3 * m * n * k) + Rational::from(2) * &ce) / &epsilon).ceil() + 1
    };
    let r_formula = r_of(m_formula.to_usize().unwrap_or(m));
    let r = match overrides.r {
        Some(r) => r,
        None => r_of(m)
            .to_usize()
            .ok_or_else(|| Error::Infeasible(format!("r = {} is too large", r_of(m))))?,
    };
    if r < 2 {
        return Err(Error::InvalidArgument("r must be at least 2".into()));
    }
    let f0 = Rational::new(k as i64, k as i64 + 1);
    let c_prime = Rational::from(r) * (c + Rational::from(m * n) * &f0) + Rational::from(3 * m * n * k);
    Ok(DtwReductionParams {
        k,
        n,
        m,
        r,
        c: c.clone(),
        epsilon,
        f0,
        c_prime,
        m_formula: m_formula.to_string(),
        r_formula: r_formula.to_string(),
        outside_proof_regime: overrides.m.is_some() || overrides.r.is_some() || k < PROOF_MIN_K,
    })
}

/// Build `x_1..x_{k+1}` and `c'` from a `phi` instance with target `c`.
pub fn mscs_phi_to_dtw(
    inst: &MscsInstance,
    c: &Rational,
    overrides: &DtwOverrides,
    guard: &Guard,
) -> Result<(DtwInstance, DtwReductionParams, BlockMap)> {
    if inst.cost.builtin_kind() != Some(Builtin::Phi) {
        return Err(Error::InvalidArgument(format!(
            "the DTW construction needs the phi cost table, instance uses {}",
            inst.cost.name
        )));
    }
    let (k, n) = (inst.k(), inst.n());
    let params = dtw_params(k, n, c, overrides)?;
    let (m, r) = (params.m, params.r);
    let per_series = (r as u128) * (n as u128) * (2 * m as u128 + 1);
    guard.check_states("DTW series elements", per_series * k as u128)?;

    let (ta, tb) = (t_a(m), t_b(m));
    let mut series = Vec::with_capacity(k + 1);
    for s in &inst.strings {
        let mut one = Vec::new();
        for i in 1..=n {
            one.extend_from_slice(if s.get(i) == 0 { &ta } else { &tb });
        }
        let bits = one.repeat(r);
        series.push(TimeSeries::new(bits.into_iter().map(|b| Rational::from(b as usize)).collect())?);
    }
    series.push(TimeSeries::from_ints(&[1])?);
    let blocks = BlockMap::from_series(&series[..k], m)?;
    debug_assert!(blocks.series.iter().all(|b| b.len() == 2 * m * n * r));
    Ok((
        DtwInstance {
            series,
            target: Some(params.c_prime.clone()),
        },
        params,
        blocks,
    ))
}

/// The witness mean of the yes-direction and the pieces of its cost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessMean {
    pub z: TimeSeries,
    /// One path per series `x_1..x_{k+1}`.
    pub paths: Vec<WarpingPath>,
    pub alignment_cost: Rational,
    /// `(r-1)(mn f_k(0) + cost_phi(delta))`.
    pub regular_cost: Rational,
    /// Cost of the first and last position with least-squares values.
    pub extreme_cost: Rational,
    /// Cost of the first and last position if their values were 0.
    pub extreme_cost_at_zero: [Rational; 2],
    pub phi_cost: Rational,
}

/// Build `z` of length `2mn(r-1)+2` from a shift of the source strings.
///
/// Position 1 covers blocks `1..2 delta_j m` of `x_j` (block 1 when
/// `delta_j = 0`), position `i` in `2..L-1` covers block `(i-1) + 2 delta_j m`,
/// and position `L` covers the last `2(n - delta_j)m` blocks. Regular values
/// are the least-squares averages; an all-ones position is 1 and a non-coding
/// zero position is `1/(k+1)`.
pub fn witness_mean_from_shift(
    params: &DtwReductionParams,
    source: &MscsInstance,
    delta: &ShiftVector,
    inst: &DtwInstance,
    blocks: &BlockMap,
) -> Result<WitnessMean> {
    let (k, n, m, r) = (params.k, params.n, params.m, params.r);
    if delta.len() != k || delta.deltas().iter().any(|&d| d >= n) {
        return Err(Error::InvalidArgument(format!(
            "witness shift must have {k} entries in 0..{n}, got {delta}"
        )));
    }
    if inst.series.len() != k + 1 || blocks.series.len() != k {
        return Err(Error::ArityMismatch { expected: k + 1, got: inst.series.len() });
    }
    let len = 2 * m * n * (r - 1) + 2;
    let total_blocks = 2 * m * n * r;
    let mut intervals: Vec<Vec<(usize, usize)>> = Vec::with_capacity(k + 1);
    for j in 0..k {
        let bl = &blocks.series[j];
        let off = 2 * delta.deltas()[j] * m;
        let span = |a: usize, b: usize| (bl[a - 1].start, bl[b - 1].end());
        let mut iv = Vec::with_capacity(len);
        iv.push(if off == 0 { span(1, 1) } else { span(1, off) });
        for i in 2..len {
            let b = (i - 1) + off;
            iv.push(span(b, b));
        }
        iv.push(span(total_blocks - 2 * (n - delta.deltas()[j]) * m + 1, total_blocks));
        intervals.push(iv);
    }
    intervals.push(vec![(1, 1); len]);
    let paths = intervals
        .iter()
        .map(|iv| WarpingPath::from_intervals(iv))
        .collect::<Result<Vec<_>>>()?;
    let z = crate::dtw::optimal_values_for_alignment(&paths, &inst.series, len)?;
    let alignment = alignment_cost(&z, &paths, &inst.series)?;

    let position_cost = |v: usize, value: &Rational| -> Rational {
        intervals
            .iter()
            .zip(&inst.series)
            .map(|(iv, x)| {
                let (a, b) = iv[v - 1];
                (a..=b).map(|i| (x.at(i) - value).square()).sum::<Rational>()
            })
            .sum()
    };
    let extreme_cost = position_cost(1, z.at(1)) + position_cost(len, z.at(len));
    let extreme_cost_at_zero = [position_cost(1, &Rational::zero()), position_cost(len, &Rational::zero())];
    let phi_cost = source.cost_of_shift(delta)?;
    let regular_cost = Rational::from(r - 1) * (Rational::from(m * n) * &params.f0 + &phi_cost);
    Ok(WitnessMean {
        z,
        paths,
        alignment_cost: alignment,
        regular_cost,
        extreme_cost,
        extreme_cost_at_zero,
        phi_cost,
    })
}

/// Convert between the `A`/`B` alphabet and bits (`A = 0`, `B = 1`).
pub fn from_ab(s: &str) -> Result<BinaryString> {
    let bits: Vec<u8> = s
        .chars()
        .map(|c| match c {
            'A' => Ok(0),
            'B' => Ok(1),
            other => Err(Error::Parse(format!("character {other:?} is not A or B"))),
        })
        .collect::<Result<_>>()?;
    BinaryString::from_bits(&bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtw::fcost;
    use crate::error::Guard;
    use crate::mscs::solve_exhaustive;
    use crate::rational::q;

    fn micro() -> MscsInstance {
        let s = ["AB", "BA", "BB"].iter().map(|s| from_ab(s).unwrap()).collect();
        MscsInstance::new(s, CostTable::builtin(Builtin::Phi, 3).unwrap(), None).unwrap()
    }

    fn small() -> DtwOverrides {
        DtwOverrides { m: Some(4), r: Some(3), allow_small_k: true }
    }

    #[test]
    fn segments() {
        assert_eq!(t_a(2), vec![1, 0, 1, 0]);
        assert_eq!(t_b(2), vec![1, 0, 0, 1, 0]);
    }

    #[test]
    fn structure_matches_closed_forms() {
        let src = micro();
        let c = solve_exhaustive(&src, None, &Guard::default()).unwrap().cost;
        let (inst, p, blocks) = mscs_phi_to_dtw(&src, &c, &small(), &Guard::default()).unwrap();
        assert!(p.outside_proof_regime);
        assert_eq!(inst.series.len(), 4);
        assert_eq!(inst.series[3], TimeSeries::from_ints(&[1]).unwrap());
        for (j, s) in src.strings.iter().enumerate() {
            let b = &blocks.series[j];
            assert_eq!(b.len(), 2 * 4 * 2 * 3);
            assert_eq!(b.iter().filter(|x| x.bit == 0).count(), 4 * 2 * 3);
            let ones = s.count_ones();
            assert_eq!(inst.series[j].len(), 3 * (2 * 4 * 2 + ones));
            let b_coding = b.iter().filter(|x| x.coding == Some(Coding::B)).count();
            assert_eq!(b_coding, 3 * ones);
            assert!(b.iter().all(|x| (x.len == 2) == (x.coding == Some(Coding::B))));
            assert_eq!(b.iter().filter(|x| x.coding.is_some()).count(), 2 * 3);
        }
    }

    #[test]
    fn witness_cost_decomposes() {
        let src = micro();
        let best = solve_exhaustive(&src, None, &Guard::default()).unwrap();
        let (inst, p, blocks) = mscs_phi_to_dtw(&src, &best.cost, &small(), &Guard::default()).unwrap();
        let w = witness_mean_from_shift(&p, &src, &best.delta, &inst, &blocks).unwrap();
        assert_eq!(w.z.len(), 2 * 4 * 2 * 2 + 2);
        assert_eq!(w.alignment_cost, &w.regular_cost + &w.extreme_cost);
        let bound = Rational::from(3 * 4 * 2 + 1);
        assert!(w.extreme_cost_at_zero.iter().all(|c| c <= &bound));
        assert!(w.extreme_cost <= &w.extreme_cost_at_zero[0] + &w.extreme_cost_at_zero[1]);
        assert!(fcost(&w.z, &inst.series) <= w.alignment_cost);
        assert!(w.alignment_cost <= p.c_prime);
        // A regular non-coding zero position has value 1/(k+1).
        assert_eq!(w.z.at(5), &q(1, 4));
        assert_eq!(w.z.at(2), &q(1, 1));
    }

    #[test]
    fn every_shift_gives_a_consistent_witness() {
        let src = micro();
        let (inst, p, blocks) = mscs_phi_to_dtw(&src, &Rational::zero(), &small(), &Guard::default()).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let d = ShiftVector::new(vec![a, b, c], 2);
                    let w = witness_mean_from_shift(&p, &src, &d, &inst, &blocks).unwrap();
                    assert_eq!(w.alignment_cost, &w.regular_cost + &w.extreme_cost);
                }
            }
        }
    }

    #[test]
    fn regime_and_input_checks() {
        let src = micro();
        assert!(matches!(
            mscs_phi_to_dtw(&src, &Rational::zero(), &DtwOverrides::default(), &Guard::default()),
            Err(Error::OutsideProofRegime(_))
        ));
        let sigma = MscsInstance::new(src.strings.clone(), CostTable::builtin(Builtin::Sigma, 3).unwrap(), None).unwrap();
        assert!(mscs_phi_to_dtw(&sigma, &Rational::zero(), &small(), &Guard::default()).is_err());
        assert!(from_ab("ABC").is_err());
    }

    #[test]
    fn full_formula_parameters() {
        // k = 15, c = 0: m = ceil(1600 * 15 * eps), eps = 1/(16 * 30 * 31).
        let p = dtw_params(15, 2, &Rational::zero(), &DtwOverrides::default()).unwrap();
        assert_eq!(p.epsilon, q(1, 16 * 30 * 31));
        assert_eq!(p.m, 2);
        assert!(!p.outside_proof_regime);
        // r = ceil(14880 * (3*2*2*15 + 2/14880)) + 1.
        assert_eq!(p.r, 14880 * 180 + 3);
        assert_eq!(p.f0, q(15, 16));
    }
}
