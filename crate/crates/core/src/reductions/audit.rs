//! Per-position lower-bound audit for means of DTW reduction series.
//!
//! For a mean position `p`, `#0`/`#1` count the zeros and ones of
//! `x_1..x_k` matched to it. The extra series `(1)` is matched to every
//! position, so the best cost of `p` is `C = #0(#1+1)/(#0+#1+1)`. The audit
//! compares `C` with `LB = d0/(k+1) + q/((k+q+1)(k+1)) + g/100`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dtw_from_mscs::{t_a, t_b, BlockMap, Coding};
use crate::dtw::{TimeSeries, WarpingPath};
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionClass {
    ZeroSimple,
    OneSimple,
    Bad,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionAudit {
    pub p: usize,
    pub class: PositionClass,
    pub zeros: usize,
    pub ones: usize,
    /// Matched 0-blocks and 1-blocks across `x_1..x_k`.
    pub d0: usize,
    pub d1: usize,
    /// Blocks of each series matched to `p`.
    pub r: Vec<usize>,
    /// B-coding blocks assigned to `p`.
    pub q: usize,
    pub g: usize,
    pub c: Rational,
    pub lb: Rational,
    /// Cost of `p` at the given value `z[p]`, extra series included.
    pub actual: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub k: usize,
    pub positions: Vec<PositionAudit>,
    /// Blocks with no simple position fully matched and no bad position matched.
    pub unassigned_blocks: usize,
}

impl AuditReport {
    /// Positions where `C < LB`.
    pub fn bound_violations(&self) -> Vec<usize> {
        self.positions.iter().filter(|a| a.c < a.lb).map(|a| a.p).collect()
    }

    /// 0-simple positions cost exactly `f_k(q)` and match `LB`; 1-simple cost 0.
    pub fn simple_positions_exact(&self) -> bool {
        let k = self.k as i64;
        self.positions.iter().all(|a| match a.class {
            PositionClass::ZeroSimple => {
                let q = a.q as i64;
                let fq = Rational::new(k + q, k + q + 1);
                a.c == fq && a.lb == fq
            }
            PositionClass::OneSimple => a.c.is_zero() && a.lb.is_zero(),
            PositionClass::Bad => true,
        })
    }

    pub fn actual_dominates_c(&self) -> bool {
        self.positions.iter().all(|a| a.actual >= a.c)
    }

    pub fn passes(&self) -> bool {
        self.bound_violations().is_empty() && self.simple_positions_exact() && self.actual_dominates_c()
    }
}

pub fn lower_bound(d0: usize, q: usize, g: usize, k: usize) -> Rational {
    let (k, q) = (k as i64, q as i64);
    Rational::new(d0 as i64, k + 1) + Rational::new(q, (k + q + 1) * (k + 1)) + Rational::new(g as i64, 100)
}

/// Audit `z` against `x_1..x_k` (with block map) and the extra series.
///
/// `series` holds `x_1..x_{k+1}` and `paths[j]` aligns `series[j]` with `z`.
pub fn position_cost_audit(
    z: &TimeSeries,
    series: &[TimeSeries],
    paths: &[WarpingPath],
    blocks: &BlockMap,
) -> Result<AuditReport> {
    let k = blocks.series.len();
    if series.len() != k + 1 || paths.len() != k + 1 {
        return Err(Error::ArityMismatch {
            expected: k + 1,
            got: series.len().min(paths.len()),
        });
    }
    let len = z.len();
    for (j, (p, x)) in paths.iter().zip(series).enumerate() {
        if p.order() != (x.len(), len) {
            return Err(Error::Malformed(format!(
                "path {} has order {:?}, expected ({}, {len})",
                j + 1,
                p.order(),
                x.len()
            )));
        }
    }
    let ranges: Vec<Vec<(usize, usize)>> = paths.iter().map(WarpingPath::intervals).collect();
    let elem_block: Vec<Vec<usize>> = (0..k).map(|j| blocks.element_blocks(j)).collect();

    let mut positions = Vec::with_capacity(len);
    // block_range[j][p] = inclusive 0-based block range of series j matched to p.
    let mut block_range = vec![vec![(0usize, 0usize); len]; k];
    for p in 0..len {
        let (mut zeros, mut ones, mut d0, mut d1) = (0, 0, 0, 0);
        let mut r = Vec::with_capacity(k);
        for j in 0..k {
            let (a, b) = ranges[j][p];
            for i in a..=b {
                if series[j].at(i).is_zero() {
                    zeros += 1;
                } else {
                    ones += 1;
                }
            }
            let (ba, bb) = (elem_block[j][a - 1], elem_block[j][b - 1]);
            block_range[j][p] = (ba, bb);
            for blk in &blocks.series[j][ba..=bb] {
                if blk.bit == 0 {
                    d0 += 1;
                } else {
                    d1 += 1;
                }
            }
            r.push(bb - ba + 1);
        }
        let class = match (zeros, ones) {
            (_, 0) => PositionClass::ZeroSimple,
            (0, _) => PositionClass::OneSimple,
            _ => PositionClass::Bad,
        };
        let c = Rational::new((zeros * (ones + 1)) as i64, (zeros + ones + 1) as i64);
        let actual: Rational = (0..=k)
            .map(|j| {
                let (a, b) = ranges[j][p];
                (a..=b).map(|i| (series[j].at(i) - z.at(p + 1)).square()).sum::<Rational>()
            })
            .sum();
        let g = match class {
            PositionClass::Bad => r.iter().map(|&x| x.saturating_sub(1)).max().unwrap_or(0).max(1),
            _ => 0,
        };
        positions.push(PositionAudit {
            p: p + 1,
            class,
            zeros,
            ones,
            d0,
            d1,
            r,
            q: 0,
            g,
            c,
            lb: Rational::zero(),
            actual,
        });
    }

    // Assignment: leftmost simple position fully matched, else leftmost bad
    // position matched. Positions matched to a block form a contiguous run.
    let mut unassigned = 0;
    for j in 0..k {
        let mut first_p = 0;
        for (bi, blk) in blocks.series[j].iter().enumerate() {
            while first_p < len && block_range[j][first_p].1 < bi {
                first_p += 1;
            }
            let mut simple = None;
            let mut bad = None;
            let mut p = first_p;
            while p < len && block_range[j][p].0 <= bi {
                let (a, b) = ranges[j][p];
                let full = a <= blk.start && blk.end() <= b;
                match positions[p].class {
                    PositionClass::Bad => {
                        bad.get_or_insert(p);
                    }
                    _ if full => {
                        simple.get_or_insert(p);
                    }
                    _ => {}
                }
                if simple.is_some() {
                    break;
                }
                p += 1;
            }
            match simple.or(bad) {
                Some(p) => {
                    if blk.coding == Some(Coding::B) {
                        positions[p].q += 1;
                    }
                }
                None => unassigned += 1,
            }
        }
    }
    for a in &mut positions {
        a.lb = lower_bound(a.d0, a.q, a.g, k);
    }
    Ok(AuditReport {
        k,
        positions,
        unassigned_blocks: unassigned,
    })
}

/// Random series fragments, a mean and paths for audit testing.
#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub series: Vec<TimeSeries>,
    pub blocks: BlockMap,
    pub z: TimeSeries,
    pub paths: Vec<WarpingPath>,
}

/// Random warping path of order `m x n`: uniform among the valid steps.
pub fn random_path<R: Rng>(m: usize, n: usize, diagonal_bias: f64, rng: &mut R) -> WarpingPath {
    let (mut i, mut j) = (1, 1);
    let mut pairs = vec![(1, 1)];
    while (i, j) != (m, n) {
        let step = if i == m {
            (0, 1)
        } else if j == n {
            (1, 0)
        } else if rng.gen_bool(diagonal_bias) {
            (1, 1)
        } else {
            *[(1, 0), (0, 1), (1, 1)].choose(rng).unwrap()
        };
        i += step.0;
        j += step.1;
        pairs.push((i, j));
    }
    WarpingPath::new(pairs).expect("steps are valid")
}

/// `k` series of `segments` random `t_A`/`t_B` segments, the extra `(1)`
/// series and a mean with paths. Half of the configurations use the block
/// by block alignment of the witness mean with random per-series offsets,
/// the others random paths. Mean values are random in `[0, 1]`.
pub fn synthetic_configuration<R: Rng>(k: usize, m: usize, segments: usize, rng: &mut R) -> Result<SyntheticConfig> {
    let mut series = Vec::with_capacity(k + 1);
    for _ in 0..k {
        let mut bits = Vec::new();
        for _ in 0..segments {
            bits.extend(if rng.gen_bool(0.5) { t_a(m) } else { t_b(m) });
        }
        series.push(TimeSeries::new(bits.into_iter().map(|b| Rational::from(b as usize)).collect())?);
    }
    series.push(TimeSeries::from_ints(&[1])?);
    let blocks = BlockMap::from_series(&series[..k], m)?;
    let total_blocks = 2 * m * segments;

    let (len, mut paths) = if rng.gen_bool(0.5) && segments >= 2 {
        // Witness-style: regular positions hit one block each.
        let shift_max = segments - 1;
        let len = 2 * m * (segments - shift_max) + 2;
        let regular = len - 2;
        let mut paths = Vec::with_capacity(k + 1);
        for j in 0..k {
            let bl = &blocks.series[j];
            let off = 2 * m * rng.gen_range(0..=shift_max);
            let mut iv = vec![(bl[0].start, bl[off.max(1) - 1].end())];
            for i in 0..regular {
                let b = &bl[off + i];
                iv.push((b.start, b.end()));
            }
            let tail = off + regular;
            if tail < total_blocks {
                iv.push((bl[tail].start, bl[total_blocks - 1].end()));
            } else {
                let last = &bl[total_blocks - 1];
                iv.push((last.end(), last.end()));
            }
            // A B-coding block may be split between neighbours instead.
            if rng.gen_bool(0.3) {
                let v = rng.gen_range(1..iv.len() - 1);
                let (a, b) = iv[v];
                if b > a && iv[v + 1].0 > b {
                    iv[v] = (a, a);
                    iv[v + 1].0 = b;
                }
            }
            paths.push(WarpingPath::from_intervals(&iv)?);
        }
        (len, paths)
    } else {
        let longest = series[..k].iter().map(TimeSeries::len).max().unwrap_or(1);
        let len = rng.gen_range(2..=longest + 3);
        let bias = rng.gen_range(0.0..0.9);
        let paths = series[..k]
            .iter()
            .map(|x| random_path(x.len(), len, bias, rng))
            .collect();
        (len, paths)
    };
    paths.push(WarpingPath::from_intervals(&vec![(1, 1); len])?);
    let z = TimeSeries::new(
        (0..len)
            .map(|_| Rational::new(rng.gen_range(0..=12), 12))
            .collect(),
    )?;
    Ok(SyntheticConfig { series, blocks, z, paths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costfn::{Builtin, CostTable};
    use crate::cyclic::ShiftVector;
    use crate::error::Guard;
    use crate::mscs::MscsInstance;
    use crate::rational::q;
    use crate::reductions::dtw_from_mscs::{from_ab, mscs_phi_to_dtw, witness_mean_from_shift, DtwOverrides};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lower_bound_values() {
        assert_eq!(lower_bound(0, 0, 0, 15), q(0, 1));
        assert_eq!(lower_bound(15, 0, 0, 15), q(15, 16));
        assert_eq!(lower_bound(15, 3, 0, 15), q(18, 19));
        assert_eq!(lower_bound(2, 1, 3, 15), q(2, 16) + q(1, 17 * 16) + q(3, 100));
    }

    #[test]
    fn witness_positions_at_k15() {
        let rows = ["ABAB", "BBAA", "AABB", "BABA", "ABBA", "BAAB", "AAAA", "BBBB", "ABAA", "BABB", "AABA", "BBAB",
            "ABBB", "BAAA", "AAAB"];
        let strings = rows.iter().map(|s| from_ab(s).unwrap()).collect();
        let src = MscsInstance::new(strings, CostTable::builtin(Builtin::Phi, 15).unwrap(), None).unwrap();
        let ov = DtwOverrides { m: Some(2), r: Some(2), allow_small_k: false };
        let (inst, p, blocks) = mscs_phi_to_dtw(&src, &Rational::zero(), &ov, &Guard::default()).unwrap();
        let delta = ShiftVector::new((0..15).map(|j| j % 4).collect(), 4);
        let w = witness_mean_from_shift(&p, &src, &delta, &inst, &blocks).unwrap();
        let rep = position_cost_audit(&w.z, &inst.series, &w.paths, &blocks).unwrap();
        assert!(rep.passes(), "{:?}", rep.bound_violations());
        // Position 4 is 1-simple, position 5 is a non-coding 0-simple position.
        assert_eq!(rep.positions[3].class, PositionClass::OneSimple);
        assert_eq!((rep.positions[3].c.clone(), rep.positions[3].lb.clone()), (q(0, 1), q(0, 1)));
        let p5 = &rep.positions[4];
        assert_eq!((p5.class, p5.q), (PositionClass::ZeroSimple, 0));
        assert_eq!((p5.c.clone(), p5.lb.clone()), (q(15, 16), q(15, 16)));
        // Position 3 is a coding position with q equal to the column weight.
        let p3 = &rep.positions[2];
        assert_eq!(p3.class, PositionClass::ZeroSimple);
        assert_eq!(p3.c, q(15 + p3.q as i64, 16 + p3.q as i64));
        // Regular positions: the actual cost is the least-squares cost.
        for a in &rep.positions[1..rep.positions.len() - 1] {
            assert_eq!(a.actual, a.c);
        }
    }

    #[test]
    fn random_audits_at_k15() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let cfg = synthetic_configuration(15, 2, 3, &mut rng).unwrap();
            let rep = position_cost_audit(&cfg.z, &cfg.series, &cfg.paths, &cfg.blocks).unwrap();
            assert!(rep.bound_violations().is_empty());
            assert!(rep.simple_positions_exact());
            assert!(rep.actual_dominates_c());
        }
    }

    #[test]
    fn arity_checked() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = synthetic_configuration(3, 2, 2, &mut rng).unwrap();
        assert!(position_cost_audit(&cfg.z, &cfg.series[..3], &cfg.paths, &cfg.blocks).is_err());
    }
}
