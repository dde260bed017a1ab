//! Dynamic time warping with exact rational arithmetic.
//!
//! Distances are always squared so every quantity stays rational. Paths
//! between a candidate mean `z` and an input `x` are stored with the input
//! index first: pair `(i, v)` aligns `x[i]` with `z[v]`.

use std::collections::HashMap;
use std::fmt;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Guard, Result};
use crate::rational::Rational;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Rational>", into = "Vec<Rational>")]
pub struct TimeSeries {
    values: Vec<Rational>,
}

impl TimeSeries {
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Malformed("time series must be nonempty".into()));
        }
        Ok(TimeSeries { values })
    }

    pub fn from_ints(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Rational::from_int(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// 1-based access.
    pub fn at(&self, i: usize) -> &Rational {
        &self.values[i - 1]
    }

    pub fn reversed(&self) -> TimeSeries {
        let mut values = self.values.clone();
        values.reverse();
        TimeSeries { values }
    }
}

impl TryFrom<Vec<Rational>> for TimeSeries {
    type Error = Error;
    fn try_from(values: Vec<Rational>) -> Result<Self> {
        TimeSeries::new(values)
    }
}

impl From<TimeSeries> for Vec<Rational> {
    fn from(s: TimeSeries) -> Self {
        s.values
    }
}

impl fmt::Display for TimeSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for TimeSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TimeSeries{self}")
    }
}

/// Monotone staircase of 1-based index pairs from `(1,1)` to `(m,n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<(usize, usize)>", into = "Vec<(usize, usize)>")]
pub struct WarpingPath {
    pairs: Vec<(usize, usize)>,
}

impl WarpingPath {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let Some(&first) = pairs.first() else {
            return Err(Error::Malformed("warping path must be nonempty".into()));
        };
        if first != (1, 1) {
            return Err(Error::Malformed(format!("warping path starts at {first:?}, not (1, 1)")));
        }
        for (l, w) in pairs.windows(2).enumerate() {
            let step = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
            if !matches!(step, (1, 0) | (0, 1) | (1, 1)) {
                return Err(Error::Malformed(format!(
                    "warping path step {} goes from {:?} to {:?}",
                    l + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(WarpingPath { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// `(m, n)` of the last pair.
    pub fn order(&self) -> (usize, usize) {
        *self.pairs.last().expect("nonempty")
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same path with the roles of the two series swapped.
    pub fn transposed(&self) -> WarpingPath {
        WarpingPath {
            pairs: self.pairs.iter().map(|&(i, j)| (j, i)).collect(),
        }
    }

    /// For each index `v` of the second series, the inclusive interval of
    /// first-series indices aligned with it.
    pub fn intervals(&self) -> Vec<(usize, usize)> {
        let n = self.order().1;
        let mut out = vec![(usize::MAX, 0); n];
        for &(i, v) in &self.pairs {
            let e = &mut out[v - 1];
            e.0 = e.0.min(i);
            e.1 = e.1.max(i);
        }
        out
    }

    /// Build the path whose second-series index `v` is aligned with the
    /// first-series interval `intervals[v-1]`.
    pub fn from_intervals(intervals: &[(usize, usize)]) -> Result<Self> {
        let mut pairs = Vec::new();
        for (v, &(a, b)) in intervals.iter().enumerate() {
            if a > b {
                return Err(Error::Malformed(format!("empty interval at position {}", v + 1)));
            }
            pairs.extend((a..=b).map(|i| (i, v + 1)));
        }
        WarpingPath::new(pairs)
    }

    /// Squared cost of aligning `x` (first index) with `y` (second index).
    pub fn cost(&self, x: &TimeSeries, y: &TimeSeries) -> Result<Rational> {
        if self.order() != (x.len(), y.len()) {
            return Err(Error::Malformed(format!(
                "path of order {:?} used on series of lengths ({}, {})",
                self.order(),
                x.len(),
                y.len()
            )));
        }
        Ok(self.pairs.iter().map(|&(i, j)| (x.at(i) - y.at(j)).square()).sum())
    }
}

impl From<WarpingPath> for Vec<(usize, usize)> {
    fn from(p: WarpingPath) -> Self {
        p.pairs
    }
}

impl TryFrom<Vec<(usize, usize)>> for WarpingPath {
    type Error = Error;
    fn try_from(pairs: Vec<(usize, usize)>) -> Result<Self> {
        WarpingPath::new(pairs)
    }
}

/// Squared dtw-distance and one optimal path of order `|x| x |y|`.
///
/// Backtracking prefers the diagonal step, then `(1,0)`, then `(0,1)`.
pub fn dtw_sq(x: &TimeSeries, y: &TimeSeries) -> (Rational, WarpingPath) {
    let (m, n) = (x.len(), y.len());
    let mut d: Vec<Rational> = Vec::with_capacity(m * n);
    let idx = |i: usize, j: usize| (i - 1) * n + (j - 1);
    for i in 1..=m {
        for j in 1..=n {
            let local = (x.at(i) - y.at(j)).square();
            let best = match (i, j) {
                (1, 1) => None,
                (1, _) => Some(&d[idx(1, j - 1)]),
                (_, 1) => Some(&d[idx(i - 1, 1)]),
                _ => [&d[idx(i - 1, j - 1)], &d[idx(i - 1, j)], &d[idx(i, j - 1)]]
                    .into_iter()
                    .min(),
            };
            d.push(match best {
                Some(b) => local + b,
                None => local,
            });
        }
    }
    let mut pairs = vec![(m, n)];
    let (mut i, mut j) = (m, n);
    while (i, j) != (1, 1) {
        (i, j) = if i == 1 {
            (1, j - 1)
        } else if j == 1 {
            (i - 1, 1)
        } else {
            let diag = &d[idx(i - 1, j - 1)];
            let up = &d[idx(i - 1, j)];
            let left = &d[idx(i, j - 1)];
            if diag <= up && diag <= left {
                (i - 1, j - 1)
            } else if up <= left {
                (i - 1, j)
            } else {
                (i, j - 1)
            }
        };
        pairs.push((i, j));
    }
    pairs.reverse();
    let cost = d[idx(m, n)].clone();
    (cost, WarpingPath { pairs })
}

/// Number of warping paths of order `m x n` (the Delannoy number D(m-1, n-1)).
pub fn count_paths(m: usize, n: usize) -> u128 {
    let mut row = vec![1u128; n];
    for _ in 1..m {
        let mut next = vec![1u128; n];
        for j in 1..n {
            next[j] = next[j - 1].saturating_add(row[j]).saturating_add(row[j - 1]);
        }
        row = next;
    }
    row[n - 1]
}

/// Every warping path of order `m x n`, in a fixed depth-first order.
pub fn enumerate_paths(m: usize, n: usize, guard: &Guard) -> Result<Vec<WarpingPath>> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("path order needs m, n >= 1".into()));
    }
    guard.check_paths("warping paths", count_paths(m, n))?;
    let mut out = Vec::new();
    let mut cur = vec![(1, 1)];
    fn rec(m: usize, n: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<WarpingPath>) {
        let (i, j) = *cur.last().unwrap();
        if (i, j) == (m, n) {
            out.push(WarpingPath { pairs: cur.clone() });
            return;
        }
        for (di, dj) in [(1, 1), (1, 0), (0, 1)] {
            if i + di <= m && j + dj <= n {
                cur.push((i + di, j + dj));
                rec(m, n, cur, out);
                cur.pop();
            }
        }
    }
    rec(m, n, &mut cur, &mut out);
    Ok(out)
}

/// Minimum over all enumerated paths; a reference for [`dtw_sq`].
pub fn dtw_sq_bruteforce(x: &TimeSeries, y: &TimeSeries, guard: &Guard) -> Result<Rational> {
    Ok(enumerate_paths(x.len(), y.len(), guard)?
        .iter()
        .map(|p| p.cost(x, y).expect("order matches"))
        .min()
        .expect("at least one path"))
}

pub fn fcost(z: &TimeSeries, inputs: &[TimeSeries]) -> Rational {
    inputs.iter().map(|x| dtw_sq(z, x).0).sum()
}

/// Least-squares mean values for a fixed alignment: `z[v]` is the average of
/// every input element aligned with position `v`.
pub fn optimal_values_for_alignment(
    paths: &[WarpingPath],
    inputs: &[TimeSeries],
    mean_len: usize,
) -> Result<TimeSeries> {
    if paths.len() != inputs.len() {
        return Err(Error::ArityMismatch {
            expected: inputs.len(),
            got: paths.len(),
        });
    }
    let mut sums = vec![Rational::zero(); mean_len];
    let mut counts = vec![0usize; mean_len];
    for (p, x) in paths.iter().zip(inputs) {
        if p.order() != (x.len(), mean_len) {
            return Err(Error::Malformed(format!(
                "path of order {:?} does not match series length {} and mean length {mean_len}",
                p.order(),
                x.len()
            )));
        }
        for &(i, v) in p.pairs() {
            sums[v - 1] += x.at(i).clone();
            counts[v - 1] += 1;
        }
    }
    TimeSeries::new(
        sums.into_iter()
            .zip(counts)
            .map(|(s, c)| s / Rational::from(c))
            .collect(),
    )
}

/// Cost of `z` under fixed paths, `sum_j` of the path cost between `x_j` and `z`.
pub fn alignment_cost(z: &TimeSeries, paths: &[WarpingPath], inputs: &[TimeSeries]) -> Result<Rational> {
    if paths.len() != inputs.len() {
        return Err(Error::ArityMismatch {
            expected: inputs.len(),
            got: paths.len(),
        });
    }
    paths.iter().zip(inputs).map(|(p, x)| p.cost(x, z)).sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeanSolution {
    pub mean: TimeSeries,
    pub cost: Rational,
    /// One path per input, pairs `(index in input, index in mean)`.
    pub paths: Vec<WarpingPath>,
    pub max_len: usize,
    /// The optimum was found at the length cap, so a longer mean was not ruled out.
    pub at_cap: bool,
}

fn default_cap(inputs: &[TimeSeries]) -> usize {
    inputs.iter().map(TimeSeries::len).sum()
}

fn check_inputs(inputs: &[TimeSeries], max_len: usize) -> Result<()> {
    if inputs.is_empty() {
        return Err(Error::InvalidArgument("need at least one input series".into()));
    }
    if max_len == 0 {
        return Err(Error::InvalidArgument("max_len must be at least 1".into()));
    }
    Ok(())
}

/// Aggregate of the elements aligned with one mean position.
#[derive(Clone, Default)]
struct Agg {
    count: usize,
    sum: Rational,
    sumsq: Rational,
}

impl Agg {
    fn cost(&self) -> Rational {
        &self.sumsq - self.sum.square() / Rational::from(self.count)
    }

    fn value(&self) -> Rational {
        &self.sum / Rational::from(self.count)
    }
}

/// Mixed-radix iteration over all vectors `v` with `lo <= v <= hi`.
fn for_each_box(lo: &[usize], hi: &[usize], mut f: impl FnMut(&[usize])) {
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return;
    }
    let mut cur = lo.to_vec();
    loop {
        f(&cur);
        let mut j = 0;
        loop {
            if j == cur.len() {
                return;
            }
            if cur[j] < hi[j] {
                cur[j] += 1;
                break;
            }
            cur[j] = lo[j];
            j += 1;
        }
    }
}

/// Exact mean by dynamic programming over the tuple of input end indices.
///
/// A mean position aligns with one interval `[a_j, b_j]` of every input, and
/// the next position starts at `b_j` or `b_j + 1`. Position costs only depend
/// on the intervals, so the DP runs over states `(b_1, ..., b_k)` level by
/// level. Among optimal means the shortest wins, then the lexicographically
/// smallest value sequence.
pub fn solve_mean_exact(inputs: &[TimeSeries], max_len: Option<usize>, guard: &Guard) -> Result<MeanSolution> {
    let max_len = max_len.unwrap_or_else(|| default_cap(inputs));
    check_inputs(inputs, max_len)?;
    let k = inputs.len();
    let lens: Vec<usize> = inputs.iter().map(TimeSeries::len).collect();

    // States are end vectors with 0 <= b_j <= n_j; 0 only at the start.
    let radix: Vec<usize> = lens.iter().map(|&n| n + 1).collect();
    let n_states = radix.iter().try_fold(1u128, |acc, &r| acc.checked_mul(r as u128));
    let tri: Vec<usize> = lens.iter().map(|&n| n * (n + 1) / 2).collect();
    let n_pairs = tri.iter().try_fold(1u128, |acc, &t| acc.checked_mul(t as u128));
    let work = n_states
        .zip(n_pairs)
        .and_then(|(s, p)| s.checked_mul(1 << k.min(64))?.checked_add(p)?.checked_mul(max_len as u128));
    guard.check_states("mean DP cells", work.unwrap_or(u128::MAX))?;
    let n_states = n_states.unwrap() as usize;

    let encode = |v: &[usize]| v.iter().zip(&radix).rev().fold(0usize, |acc, (&x, &r)| acc * r + x);
    // Interval (a, b) of series j, 1 <= a <= b <= n_j, as a triangular index.
    let tri_index = |a: usize, b: usize| b * (b - 1) / 2 + (a - 1);
    let pair_index = |a: &[usize], b: &[usize]| {
        (0..k)
            .rev()
            .fold(0usize, |acc, j| acc * tri[j] + tri_index(a[j], b[j]))
    };

    // Per-series interval aggregates, then combined position cost per pair.
    let per_series: Vec<Vec<Agg>> = inputs
        .iter()
        .map(|x| {
            let n = x.len();
            let mut out = vec![Agg::default(); n * (n + 1) / 2];
            for b in 1..=n {
                for a in 1..=b {
                    let e = &mut out[tri_index(a, b)];
                    e.count = b - a + 1;
                    e.sum = (a..=b).map(|i| x.at(i).clone()).sum();
                    e.sumsq = (a..=b).map(|i| x.at(i).square()).sum();
                }
            }
            out
        })
        .collect();
    let n_pairs = n_pairs.unwrap() as usize;
    let mut pair_cost: Vec<Option<(Rational, Rational)>> = vec![None; n_pairs];
    let ones = vec![1usize; k];
    for_each_box(&ones, &lens, |b| {
        for_each_box(&ones, b, |a| {
            let mut agg = Agg::default();
            for j in 0..k {
                let e = &per_series[j][tri_index(a[j], b[j])];
                agg.count += e.count;
                agg.sum += e.sum.clone();
                agg.sumsq += e.sumsq.clone();
            }
            pair_cost[pair_index(a, b)] = Some((agg.cost(), agg.value()));
        });
    });
    let pc = |a: &[usize], b: &[usize]| pair_cost[pair_index(a, b)].as_ref().expect("a <= b");

    // Successor interval starts of a state: a_j in {b_j, b_j + 1} within 1..=n_j.
    let successors = |s: &[usize]| {
        let lo: Vec<usize> = s.iter().map(|&b| b.max(1)).collect();
        let hi: Vec<usize> = s.iter().zip(&lens).map(|(&b, &n)| (b + 1).min(n)).collect();
        (lo, hi)
    };

    let start = encode(&vec![0; k]);
    let end = encode(&lens);
    let states: Vec<Vec<usize>> = {
        let zeros = vec![0usize; k];
        let mut v = vec![Vec::new(); n_states];
        for_each_box(&zeros, &lens, |s| v[encode(s)] = s.to_vec());
        v
    };

    // One forward level: best[a] over predecessor states, then extend to b >= a.
    let step_forward = |prev: &[Option<Rational>]| -> Vec<Option<Rational>> {
        let mut via: Vec<Option<Rational>> = vec![None; n_states];
        for (si, c) in prev.iter().enumerate() {
            let Some(c) = c else { continue };
            let (lo, hi) = successors(&states[si]);
            for_each_box(&lo, &hi, |a| {
                let e = &mut via[encode(a)];
                if e.as_ref().is_none_or(|x| c < x) {
                    *e = Some(c.clone());
                }
            });
        }
        let mut next: Vec<Option<Rational>> = vec![None; n_states];
        for_each_box(&ones, &lens, |b| {
            let mut best: Option<Rational> = None;
            for_each_box(&ones, b, |a| {
                if let Some(c) = &via[encode(a)] {
                    let t = c + &pc(a, b).0;
                    if best.as_ref().is_none_or(|x| &t < x) {
                        best = Some(t);
                    }
                }
            });
            next[encode(b)] = best;
        });
        next
    };

    let mut level = vec![None; n_states];
    level[start] = Some(Rational::zero());
    let mut best: Option<(Rational, usize)> = None;
    for v in 1..=max_len {
        level = step_forward(&level);
        if let Some(c) = &level[end] {
            if best.as_ref().is_none_or(|(b, _)| c < b) {
                best = Some((c.clone(), v));
            }
        }
    }
    let (opt, len) = best.expect("the diagonal-free alignment of length 1 always exists");

    // Backward costs-to-go for exactly `len` levels: to_go[v][s] is the
    // cheapest completion from state s after v positions.
    let mut to_go: Vec<Vec<Option<Rational>>> = vec![vec![None; n_states]; len + 1];
    to_go[len][end] = Some(Rational::zero());
    for v in (0..len).rev() {
        let mut from_a: Vec<Option<Rational>> = vec![None; n_states];
        for_each_box(&ones, &lens, |b| {
            let Some(g) = &to_go[v + 1][encode(b)] else { return };
            for_each_box(&ones, b, |a| {
                let t = g + &pc(a, b).0;
                let e = &mut from_a[encode(a)];
                if e.as_ref().is_none_or(|x| &t < x) {
                    *e = Some(t);
                }
            });
        });
        for (si, s) in states.iter().enumerate() {
            let (lo, hi) = successors(s);
            let mut best: Option<Rational> = None;
            for_each_box(&lo, &hi, |a| {
                if let Some(t) = &from_a[encode(a)] {
                    if best.as_ref().is_none_or(|x| t < x) {
                        best = Some(t.clone());
                    }
                }
            });
            to_go[v][si] = best;
        }
    }

    // Greedy lexicographic reconstruction. Each frontier entry keeps the
    // cheapest prefix cost reaching the state with the chosen values, and a
    // back pointer (previous frontier entry, interval starts).
    struct Entry {
        state: usize,
        cost: Rational,
        back: Option<(usize, Vec<usize>)>,
    }
    let mut layers: Vec<Vec<Entry>> = vec![vec![Entry {
        state: start,
        cost: Rational::zero(),
        back: None,
    }]];
    let mut mean = Vec::with_capacity(len);
    for v in 0..len {
        let frontier = &layers[v];
        let mut cands: Vec<(Rational, usize, Rational, usize, Vec<usize>)> = Vec::new();
        for (fi, e) in frontier.iter().enumerate() {
            let (lo, hi) = successors(&states[e.state]);
            for_each_box(&lo, &hi, |a| {
                for_each_box(a, &lens, |b| {
                    let bi = encode(b);
                    let Some(g) = &to_go[v + 1][bi] else { return };
                    let (c, z) = pc(a, b);
                    let prefix = &e.cost + c;
                    if &prefix + g == opt {
                        cands.push((z.clone(), bi, prefix, fi, a.to_vec()));
                    }
                });
            });
        }
        let zmin = cands.iter().map(|c| &c.0).min().expect("optimal continuation exists").clone();
        let mut next: HashMap<usize, Entry> = HashMap::new();
        for (z, bi, prefix, fi, a) in cands {
            if z != zmin {
                continue;
            }
            match next.get(&bi) {
                Some(e) if e.cost <= prefix => {}
                _ => {
                    next.insert(bi, Entry { state: bi, cost: prefix, back: Some((fi, a)) });
                }
            }
        }
        let mut next: Vec<Entry> = next.into_values().collect();
        next.sort_by_key(|e| e.state);
        mean.push(zmin);
        layers.push(next);
    }

    // Walk back from the end state to recover the intervals.
    let mut per_level_intervals: Vec<Vec<(usize, usize)>> = Vec::with_capacity(len);
    let mut idx = layers[len].iter().position(|e| e.state == end).expect("end reached");
    for v in (1..=len).rev() {
        let e = &layers[v][idx];
        let (fi, a) = e.back.as_ref().expect("non-start entry");
        let b = &states[e.state];
        per_level_intervals.push(a.iter().zip(b).map(|(&a, &b)| (a, b)).collect());
        idx = *fi;
    }
    per_level_intervals.reverse();
    let paths = (0..k)
        .map(|j| {
            let iv: Vec<(usize, usize)> = per_level_intervals.iter().map(|l| l[j]).collect();
            WarpingPath::from_intervals(&iv)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = TimeSeries::new(mean)?;
    debug_assert_eq!(alignment_cost(&mean, &paths, inputs).ok(), Some(opt.clone()));
    Ok(MeanSolution {
        mean,
        cost: opt,
        paths,
        max_len,
        at_cap: len == max_len,
    })
}

/// Per-position integer aggregates of one path; values are pre-scaled to integers.
type PathAgg = Vec<(i128, i128, i128)>;

/// Independent exact mean: every length, every tuple of warping paths, with
/// least-squares values per alignment. Same tie-break as [`solve_mean_exact`].
pub fn brute_force_mean_oracle(inputs: &[TimeSeries], max_len: usize, guard: &Guard) -> Result<MeanSolution> {
    check_inputs(inputs, max_len)?;
    let k = inputs.len();
    let total: usize = default_cap(inputs);
    let tuples: u128 = (1..=max_len)
        .map(|l| {
            inputs
                .iter()
                .map(|x| count_paths(x.len(), l))
                .fold(1u128, |a, c| a.saturating_mul(c))
        })
        .fold(0u128, |a, c| a.saturating_add(c));
    guard.check_paths("warping-path tuples", tuples)?;

    // Scale values to integers: x = X / den.
    let den = inputs
        .iter()
        .flat_map(|x| x.values())
        .fold(num_bigint::BigInt::from(1), |acc, v| acc.lcm(v.denom()));
    let too_big = || Error::InvalidArgument("series values too large for the brute-force oracle".into());
    let scaled: Vec<Vec<i128>> = inputs
        .iter()
        .map(|x| {
            x.values()
                .iter()
                .map(|v| {
                    let s = v.numer() * (&den / v.denom());
                    i128::try_from(s).map_err(|_| too_big())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    // Common multiple of all possible counts so position costs compare as integers.
    let lcm_counts = (1..=total as i128).fold(1i128, |a, c| a.lcm(&c));

    let mut best: Option<(i128, usize, Vec<Rational>, Vec<WarpingPath>)> = None;
    for l in 1..=max_len {
        // Deduplicate path aggregates per input, keeping the first path seen.
        let mut options: Vec<Vec<(PathAgg, WarpingPath)>> = Vec::with_capacity(k);
        for (x, xs) in inputs.iter().zip(&scaled) {
            let mut seen: HashMap<PathAgg, WarpingPath> = HashMap::new();
            let mut order = Vec::new();
            for p in enumerate_paths(x.len(), l, guard)? {
                let mut agg = vec![(0i128, 0i128, 0i128); l];
                for &(i, v) in p.pairs() {
                    let e = &mut agg[v - 1];
                    e.0 += 1;
                    e.1 += xs[i - 1];
                    e.2 += xs[i - 1] * xs[i - 1];
                }
                if let std::collections::hash_map::Entry::Vacant(slot) = seen.entry(agg) {
                    order.push(slot.key().clone());
                    slot.insert(p);
                }
            }
            options.push(order.into_iter().map(|a| { let p = seen.remove(&a).unwrap(); (a, p) }).collect());
        }

        // Scaled cost: sum_v (SQ * L - S^2 * (L / N)); equals cost * den^2 * L.
        let position = |choice: &[usize], v: usize| {
            let (mut n, mut s, mut sq) = (0i128, 0i128, 0i128);
            for (j, &c) in choice.iter().enumerate() {
                let e = options[j][c].0[v];
                n += e.0;
                s += e.1;
                sq += e.2;
            }
            (n, s, sq)
        };
        let eval = |choice: &[usize]| -> Option<i128> {
            let mut total = 0i128;
            for v in 0..l {
                let (n, s, sq) = position(choice, v);
                let term = sq
                    .checked_mul(lcm_counts)?
                    .checked_sub(s.checked_mul(s)?.checked_mul(lcm_counts / n)?)?;
                total = total.checked_add(term)?;
            }
            Some(total)
        };
        let values = |choice: &[usize]| -> Vec<Rational> {
            (0..l)
                .map(|v| {
                    let (n, s, _) = position(choice, v);
                    Rational::from_bigint(s.into(), &den * num_bigint::BigInt::from(n))
                })
                .collect()
        };

        let sizes: Vec<usize> = options.iter().map(Vec::len).collect();
        let count: usize = sizes.iter().product();
        let decode = |mut idx: usize| {
            let mut c = vec![0usize; k];
            for j in 0..k {
                c[j] = idx % sizes[j];
                idx /= sizes[j];
            }
            c
        };
        let (t, idx) = (0..count)
            .into_par_iter()
            .map(|idx| eval(&decode(idx)).map(|t| (t, idx)).ok_or_else(too_big))
            .try_reduce_with(|a, b| {
                let pick_b = match b.0.cmp(&a.0) {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Greater => false,
                    std::cmp::Ordering::Equal => {
                        (values(&decode(b.1)), b.1) < (values(&decode(a.1)), a.1)
                    }
                };
                Ok(if pick_b { b } else { a })
            })
            .expect("at least one tuple")?;
        let vals = values(&decode(idx));
        let c = decode(idx);
        if best.as_ref().is_none_or(|(bt, _, _, _)| t < *bt) {
            let paths = c.iter().enumerate().map(|(j, &ci)| options[j][ci].1.clone()).collect();
            best = Some((t, l, vals, paths));
        }
    }
    let (_, l, vals, paths) = best.expect("max_len >= 1");
    let mean = TimeSeries::new(vals)?;
    let cost = alignment_cost(&mean, &paths, inputs)?;
    Ok(MeanSolution {
        mean,
        cost,
        paths,
        max_len,
        at_cap: l == max_len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    fn ts(v: &[i64]) -> TimeSeries {
        TimeSeries::from_ints(v).unwrap()
    }

    fn three_series() -> Vec<TimeSeries> {
        vec![ts(&[1, 10, 0, 0, 4]), ts(&[0, 2, 10, 0, 0]), ts(&[0, 0, 0, 10, 0])]
    }

    fn drawn_mean() -> TimeSeries {
        TimeSeries::new(vec![q(1, 4), q(1, 1), q(10, 1), q(0, 1), q(4, 3)]).unwrap()
    }

    #[test]
    fn dtw_examples() {
        let x = ts(&[3, 1, 4]);
        assert_eq!(dtw_sq(&x, &x).0, q(0, 1));
        assert_eq!(dtw_sq(&ts(&[1, 10]), &ts(&[1, 1, 10])).0, q(0, 1));
        let (c, p) = dtw_sq(&ts(&[0, 4]), &ts(&[1, 0]));
        assert_eq!(c, q(17, 1));
        assert_eq!(p.cost(&ts(&[0, 4]), &ts(&[1, 0])).unwrap(), c);
        assert_eq!(dtw_sq_bruteforce(&ts(&[0, 4]), &ts(&[1, 0]), &Guard::default()).unwrap(), q(17, 1));
    }

    #[test]
    fn path_enumeration_counts() {
        let g = Guard::default();
        assert_eq!(enumerate_paths(1, 1, &g).unwrap(), vec![WarpingPath::new(vec![(1, 1)]).unwrap()]);
        assert_eq!(enumerate_paths(2, 2, &g).unwrap().len(), 3);
        assert_eq!(enumerate_paths(1, 6, &g).unwrap().len(), 1);
        for m in 1..=6 {
            for n in 1..=6 {
                let paths = enumerate_paths(m, n, &g).unwrap();
                assert_eq!(paths.len() as u128, count_paths(m, n));
                let distinct: std::collections::HashSet<_> = paths.iter().collect();
                assert_eq!(distinct.len(), paths.len());
            }
        }
        assert_eq!(count_paths(5, 5), 321);
        assert!(enumerate_paths(12, 12, &Guard { max_states: 1, max_paths: 100 }).unwrap_err().is_guard());
    }

    #[test]
    fn path_validation() {
        assert!(WarpingPath::new(vec![(1, 2)]).is_err());
        assert!(WarpingPath::new(vec![(1, 1), (3, 2)]).is_err());
        assert!(WarpingPath::new(vec![(1, 1), (1, 1)]).is_err());
        let p = WarpingPath::new(vec![(1, 1), (2, 1), (2, 2), (3, 3)]).unwrap();
        assert_eq!(p.intervals(), vec![(1, 2), (2, 2), (3, 3)]);
        assert_eq!(WarpingPath::from_intervals(&p.intervals()).unwrap(), p);
    }

    #[test]
    fn fcost_examples() {
        assert_eq!(fcost(&drawn_mean(), &three_series()), q(161, 12));
        let x = ts(&[2, 7, 1]);
        assert_eq!(fcost(&x, std::slice::from_ref(&x)), q(0, 1));
        assert_eq!(fcost(&ts(&[0]), &vec![ts(&[1]); 4]), q(4, 1));
    }

    /// The drawn alignment: first mean element sees (1, 0, 0, 0).
    fn drawn_paths() -> Vec<WarpingPath> {
        vec![
            WarpingPath::from_intervals(&[(1, 1), (1, 1), (2, 2), (3, 4), (5, 5)]).unwrap(),
            WarpingPath::from_intervals(&[(1, 1), (2, 2), (3, 3), (4, 5), (5, 5)]).unwrap(),
            WarpingPath::from_intervals(&[(1, 2), (3, 3), (4, 4), (5, 5), (5, 5)]).unwrap(),
        ]
    }

    #[test]
    fn drawn_alignment_values() {
        let paths = drawn_paths();
        let z = optimal_values_for_alignment(&paths, &three_series(), 5).unwrap();
        assert_eq!(z.at(1), &q(1, 4));
        assert!(alignment_cost(&z, &paths, &three_series()).unwrap() >= fcost(&z, &three_series()));
    }

    #[test]
    fn alignment_identity() {
        let x = ts(&[4, 0, 2]);
        let diag = WarpingPath::new(vec![(1, 1), (2, 2), (3, 3)]).unwrap();
        let z = optimal_values_for_alignment(&[diag.clone(), diag], &[x.clone(), x.clone()], 3).unwrap();
        assert_eq!(z, x);
        assert!(optimal_values_for_alignment(&[], &[x], 3).is_err());
    }

    #[test]
    fn exact_mean_examples() {
        let g = Guard::default();
        let x = ts(&[1, 5, 2]);
        let sol = solve_mean_exact(&vec![x.clone(); 3], None, &g).unwrap();
        assert_eq!((sol.mean, sol.cost), (x, q(0, 1)));

        let sol = solve_mean_exact(&three_series(), Some(5), &g).unwrap();
        assert_eq!(sol.cost, q(161, 12));
        assert_eq!(sol.mean.len(), 5);
        assert_eq!(fcost(&sol.mean, &three_series()), q(161, 12));
        assert!(sol.at_cap);
    }

    #[test]
    fn shorter_means_cost_more() {
        let g = Guard::default();
        let by_len: Vec<Rational> = (1..=4).map(|l| {
            let s = solve_mean_exact(&three_series(), Some(l), &g).unwrap();
            s.cost
        }).collect();
        assert_eq!(by_len, vec![q(3446, 15), q(3439, 18), q(101, 6), q(85, 6)]);
        let long = solve_mean_exact(&three_series(), Some(7), &g).unwrap();
        assert_eq!((long.cost, long.mean.len()), (q(161, 12), 5));
    }

    #[test]
    fn oracle_examples() {
        let g = Guard::default();
        let x = ts(&[1, 0, 2]);
        let sol = brute_force_mean_oracle(std::slice::from_ref(&x), 3, &g).unwrap();
        assert_eq!((sol.mean, sol.cost), (x, q(0, 1)));
        let sol = brute_force_mean_oracle(&[ts(&[0]), ts(&[1])], 1, &g).unwrap();
        assert_eq!(sol.mean, TimeSeries::new(vec![q(1, 2)]).unwrap());
        assert_eq!(sol.cost, q(1, 2));
        let inputs = [ts(&[0, 1]), ts(&[1, 0])];
        let a = brute_force_mean_oracle(&inputs, 3, &g).unwrap();
        let b = solve_mean_exact(&inputs, Some(3), &g).unwrap();
        assert_eq!((a.mean, a.cost), (b.mean, b.cost));
    }

    #[test]
    fn mean_respects_guard() {
        let inputs = vec![ts(&[0, 1, 2, 3, 4, 5]); 4];
        assert!(solve_mean_exact(&inputs, None, &Guard::with_max_states(1000)).unwrap_err().is_guard());
    }

    fn small_series(max_len: usize) -> impl Strategy<Value = TimeSeries> {
        proptest::collection::vec(0i64..=2, 1..=max_len).prop_map(|v| TimeSeries::from_ints(&v).unwrap())
    }

    fn rational_series() -> impl Strategy<Value = TimeSeries> {
        proptest::collection::vec((-6i64..=6, 1i64..=3), 1..=5)
            .prop_map(|v| TimeSeries::new(v.into_iter().map(|(a, b)| q(a, b)).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn dp_matches_bruteforce(x in small_series(5), y in small_series(5)) {
            prop_assert_eq!(dtw_sq(&x, &y).0, dtw_sq_bruteforce(&x, &y, &Guard::default()).unwrap());
        }

        #[test]
        fn dtw_symmetric_and_nonnegative(x in rational_series(), y in rational_series()) {
            let (a, p) = dtw_sq(&x, &y);
            prop_assert_eq!(&a, &dtw_sq(&y, &x).0);
            prop_assert!(!a.is_negative());
            prop_assert_eq!(p.cost(&x, &y).unwrap(), a);
            prop_assert!(dtw_sq(&x, &x).0.is_zero());
        }

        #[test]
        fn fcost_reversal_invariant(z in rational_series(), inputs in proptest::collection::vec(rational_series(), 1..=3)) {
            let rev: Vec<_> = inputs.iter().map(TimeSeries::reversed).collect();
            prop_assert_eq!(fcost(&z, &inputs), fcost(&z.reversed(), &rev));
        }

        #[test]
        fn exact_mean_matches_oracle(inputs in proptest::collection::vec(small_series(3), 1..=3)) {
            let g = Guard::default();
            let cap = inputs.iter().map(TimeSeries::len).sum::<usize>().min(4);
            let a = solve_mean_exact(&inputs, Some(cap), &g).unwrap();
            let b = brute_force_mean_oracle(&inputs, cap, &g).unwrap();
            prop_assert_eq!(&a.cost, &b.cost);
            prop_assert_eq!(&a.mean, &b.mean);
        }

        #[test]
        fn exact_mean_is_a_lower_bound(inputs in proptest::collection::vec(small_series(3), 1..=3), z in small_series(4)) {
            let sol = solve_mean_exact(&inputs, Some(4), &Guard::default()).unwrap();
            prop_assert!(sol.cost <= fcost(&z, &inputs));
            prop_assert_eq!(fcost(&sol.mean, &inputs), sol.cost.clone());
            let refit = optimal_values_for_alignment(&sol.paths, &inputs, sol.mean.len()).unwrap();
            prop_assert_eq!(refit, sol.mean);
        }

        #[test]
        fn alignment_values_are_averages(x in rational_series(), l in 1usize..=5) {
            let paths = enumerate_paths(x.len(), l, &Guard::default()).unwrap();
            let p = &paths[paths.len() / 2];
            let z = optimal_values_for_alignment(std::slice::from_ref(p), std::slice::from_ref(&x), l).unwrap();
            for (v, (a, b)) in p.intervals().into_iter().enumerate() {
                let avg: Rational = (a..=b).map(|i| x.at(i).clone()).sum::<Rational>() / Rational::from(b - a + 1);
                prop_assert_eq!(z.at(v + 1), &avg);
            }
        }
    }
}
