//! Multiple circular shift cost and exhaustive minimisation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::costfn::CostTable;
use crate::cyclic::{
    check_shape, column_at, common_length, weight_histogram, weight_histogram_into, BinaryString,
    HistogramScratch, ShiftVector,
};
use crate::error::{Error, Guard, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MscsInstance {
    pub strings: Vec<BinaryString>,
    pub cost: CostTable,
    pub target: Option<Rational>,
}

impl MscsInstance {
    pub fn new(strings: Vec<BinaryString>, cost: CostTable, target: Option<Rational>) -> Result<Self> {
        common_length(&strings)?;
        if cost.k != strings.len() {
            return Err(Error::ArityMismatch {
                expected: strings.len(),
                got: cost.k,
            });
        }
        Ok(MscsInstance {
            strings,
            cost,
            target,
        })
    }

    pub fn k(&self) -> usize {
        self.strings.len()
    }

    pub fn n(&self) -> usize {
        self.strings[0].len()
    }

    pub fn cost_of_shift(&self, delta: &ShiftVector) -> Result<Rational> {
        let hist = weight_histogram(&self.strings, delta)?;
        Ok(cost_from_histogram(&self.cost, &hist))
    }

    /// Column-by-column evaluation, kept as the reference for the packed path.
    pub fn cost_of_shift_naive(&self, delta: &ShiftVector) -> Result<Rational> {
        let n = check_shape(&self.strings, delta)?;
        let mut total = Rational::zero();
        for i in 1..=n {
            total += self.cost.eval_local(&column_at(&self.strings, delta, i)?)?;
        }
        Ok(total)
    }
}

pub fn cost_from_histogram(table: &CostTable, hist: &[u64]) -> Rational {
    hist.iter()
        .zip(&table.values)
        .filter(|(&c, _)| c > 0)
        .map(|(&c, v)| Rational::from(BigInt::from(c)) * v)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MscsSolution {
    pub delta: ShiftVector,
    pub cost: Rational,
    /// Whether the search covered every normalised shift vector.
    pub optimal: bool,
    /// Number of searched shift vectors attaining `cost`.
    pub optimal_count: u64,
    pub searched: u64,
    pub stride: Option<usize>,
    /// `cost <= target`, when the instance has a target.
    pub decision: Option<bool>,
}

/// Table scaled to a common denominator so the search loop works on
/// integers: `cost = sum(hist[w] * numer[w]) / denom`.
struct ScaledTable {
    numer: Vec<i128>,
}

impl ScaledTable {
    fn new(table: &CostTable, n: usize) -> Option<Self> {
        let denom = table
            .values
            .iter()
            .fold(BigInt::from(1), |acc, v| acc.lcm(v.denom()));
        let numer = table
            .values
            .iter()
            .map(|v| (v.numer() * (&denom / v.denom())).to_i128())
            .collect::<Option<Vec<i128>>>()?;
        let max = numer.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
        // Every partial sum is bounded by n * max.
        max.checked_mul(n as u128)?.checked_mul(2)?;
        Some(ScaledTable { numer })
    }

    fn key(&self, hist: &[u64]) -> i128 {
        hist.iter()
            .zip(&self.numer)
            .map(|(&c, &v)| c as i128 * v)
            .sum()
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
enum CostKey {
    Small(i128),
    Exact(Rational),
}

/// Exhaustive minimisation over shift vectors with the first entry fixed
/// to zero. With `stride = Some(s)` every other entry ranges over the
/// multiples of `s` below the length. Ties resolve to the lexicographically
/// smallest vector.
pub fn solve_exhaustive(inst: &MscsInstance, stride: Option<usize>, guard: &Guard) -> Result<MscsSolution> {
    let k = inst.k();
    let n = inst.n();
    let step = stride.unwrap_or(1);
    if step == 0 {
        return Err(Error::InvalidArgument("stride must be positive".into()));
    }
    let choices = n.div_ceil(step);
    let free = k - 1;
    let total = (choices as u128)
        .checked_pow(free as u32)
        .unwrap_or(u128::MAX);
    guard.check_states("shift vectors", total)?;
    let total = total as u64;

    let scaled = ScaledTable::new(&inst.cost, n);
    let chunk = 4096u64;
    let nchunks = total.div_ceil(chunk);

    let best = (0..nchunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk;
            let hi = (lo + chunk).min(total);
            let mut deltas = decode(lo, choices, free, step);
            let mut scratch = HistogramScratch::default();
            let mut hist = vec![0u64; k + 1];
            let mut best: Option<(CostKey, u64, u64)> = None;
            for idx in lo..hi {
                weight_histogram_into(&inst.strings, &deltas, &mut hist, &mut scratch);
                let key = match &scaled {
                    Some(s) => CostKey::Small(s.key(&hist)),
                    None => CostKey::Exact(cost_from_histogram(&inst.cost, &hist)),
                };
                best = match best {
                    None => Some((key, idx, 1)),
                    Some((bk, bi, cnt)) => match key.cmp(&bk) {
                        std::cmp::Ordering::Less => Some((key, idx, 1)),
                        std::cmp::Ordering::Equal => Some((bk, bi, cnt + 1)),
                        std::cmp::Ordering::Greater => Some((bk, bi, cnt)),
                    },
                };
                advance(&mut deltas, choices, step);
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (None, x) | (x, None) => x,
                (Some(a), Some(b)) => Some(match a.0.cmp(&b.0) {
                    std::cmp::Ordering::Less => a,
                    std::cmp::Ordering::Greater => b,
                    std::cmp::Ordering::Equal => (a.0, a.1.min(b.1), a.2 + b.2),
                }),
            },
        )
        .expect("at least one shift vector");

    let (_, idx, count) = best;
    let delta = ShiftVector::new(decode(idx, choices, free, step), n);
    let cost = inst.cost_of_shift(&delta)?;
    let decision = inst.target.as_ref().map(|c| &cost <= c);
    Ok(MscsSolution {
        delta,
        cost,
        optimal: step == 1,
        optimal_count: count,
        searched: total,
        stride,
        decision,
    })
}

/// Every searched shift vector attaining the minimum, in lexicographic order.
pub fn all_optima(
    inst: &MscsInstance,
    stride: Option<usize>,
    guard: &Guard,
    limit: usize,
) -> Result<Vec<ShiftVector>> {
    let best = solve_exhaustive(inst, stride, guard)?;
    let (k, n) = (inst.k(), inst.n());
    let step = stride.unwrap_or(1);
    let choices = n.div_ceil(step);
    let mut out = Vec::new();
    let mut deltas = vec![0usize; k];
    let mut scratch = HistogramScratch::default();
    let mut hist = vec![0u64; k + 1];
    for _ in 0..best.searched {
        weight_histogram_into(&inst.strings, &deltas, &mut hist, &mut scratch);
        if cost_from_histogram(&inst.cost, &hist) == best.cost {
            out.push(ShiftVector::new(deltas.clone(), n));
            if out.len() >= limit {
                break;
            }
        }
        advance(&mut deltas, choices, step);
    }
    Ok(out)
}

/// Mixed-radix decode with entry 0 pinned to zero and entry 1 most significant.
fn decode(mut idx: u64, choices: usize, free: usize, step: usize) -> Vec<usize> {
    let mut deltas = vec![0usize; free + 1];
    for j in (1..=free).rev() {
        deltas[j] = (idx % choices as u64) as usize * step;
        idx /= choices as u64;
    }
    deltas
}

fn advance(deltas: &mut [usize], choices: usize, step: usize) {
    for j in (1..deltas.len()).rev() {
        let next = deltas[j] / step + 1;
        if next < choices {
            deltas[j] = next * step;
            return;
        }
        deltas[j] = 0;
    }
}
