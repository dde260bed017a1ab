//! Circular Consensus String over binary strings.
//!
//! The optimal consensus for a fixed shift takes a majority symbol in every
//! column, so the cost of a column is `min(#0, #1)`. The exhaustive solver
//! is the `ccs` cost table run through [`crate::mscs::solve_exhaustive`].

use serde::{Deserialize, Serialize};

use crate::costfn::{Builtin, CostTable};
use crate::cyclic::{check_shape, column_at, BinaryString, ShiftVector};
use crate::error::{Guard, Result};
use crate::mscs::{solve_exhaustive, MscsInstance};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcsSolution {
    pub delta: ShiftVector,
    pub consensus: BinaryString,
    /// Sum of Hamming distances from the shifted strings to `consensus`.
    pub cost: u64,
}

/// Majority consensus for a fixed shift; ties pick `0`.
pub fn consensus_for_shift(strings: &[BinaryString], delta: &ShiftVector) -> Result<CcsSolution> {
    let n = check_shape(strings, delta)?;
    let k = strings.len();
    let mut consensus = Vec::with_capacity(n);
    let mut cost = 0u64;
    for i in 1..=n {
        let ones = column_at(strings, delta, i)?.weight;
        let zeros = k - ones;
        consensus.push(u8::from(ones > zeros));
        cost += ones.min(zeros) as u64;
    }
    Ok(CcsSolution {
        delta: delta.clone(),
        consensus: BinaryString::from_bits(&consensus)?,
        cost,
    })
}

pub fn as_mscs(strings: &[BinaryString]) -> Result<MscsInstance> {
    MscsInstance::new(
        strings.to_vec(),
        CostTable::builtin(Builtin::Ccs, strings.len())?,
        None,
    )
}

pub fn solve_ccs_exhaustive(strings: &[BinaryString], guard: &Guard) -> Result<CcsSolution> {
    let inst = as_mscs(strings)?;
    let best = solve_exhaustive(&inst, None, guard)?;
    let sol = consensus_for_shift(strings, &best.delta)?;
    debug_assert_eq!(crate::rational::Rational::from(sol.cost as usize), best.cost);
    Ok(sol)
}

/// Hamming distance between equal-length strings.
pub fn hamming(a: &BinaryString, b: &BinaryString) -> u64 {
    assert_eq!(a.len(), b.len());
    a.bits().iter().zip(b.bits()).filter(|(x, y)| **x != *y).count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;
    use proptest::prelude::*;

    fn strs(v: &[&str]) -> Vec<BinaryString> {
        v.iter().map(|s| s.parse().unwrap()).collect()
    }

    /// Direct oracle: try every normalised shift and every consensus string.
    fn brute_ccs(strings: &[BinaryString]) -> u64 {
        let (k, n) = (strings.len(), strings[0].len());
        let mut best = u64::MAX;
        for idx in 0..n.pow(k as u32 - 1) {
            let mut r = idx;
            let shifted: Vec<BinaryString> = strings
                .iter()
                .enumerate()
                .map(|(j, s)| {
                    if j == 0 {
                        return s.clone();
                    }
                    let d = r % n;
                    r /= n;
                    s.shift(d)
                })
                .collect();
            for mask in 0u32..(1 << n) {
                let cand: Vec<u8> = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
                let cand = BinaryString::from_bits(&cand).unwrap();
                best = best.min(shifted.iter().map(|s| hamming(s, &cand)).sum());
            }
        }
        best
    }

    #[test]
    fn small_examples() {
        let s = strs(&["01", "01"]);
        let sol = consensus_for_shift(&s, &ShiftVector::zeros(2)).unwrap();
        assert_eq!((sol.consensus.to_string(), sol.cost), ("01".into(), 0));

        let s = strs(&["10", "01"]);
        let sol = consensus_for_shift(&s, &ShiftVector::new(vec![0, 1], 2)).unwrap();
        assert_eq!((sol.consensus.to_string(), sol.cost), ("10".into(), 0));
        assert_eq!(solve_ccs_exhaustive(&s, &Guard::default()).unwrap().cost, 0);

        let s = strs(&["0110", "0110", "0110"]);
        assert_eq!(solve_ccs_exhaustive(&s, &Guard::default()).unwrap().cost, 0);
    }

    #[test]
    fn three_strings_strings_column_counts() {
        let s = strs(&["10011", "11000", "01001"]);
        let delta = ShiftVector::new(vec![0, 2, 1], 5);
        let sol = consensus_for_shift(&s, &delta).unwrap();
        // Shifted rows 10011 / 00011 / 10010: columns (1,0,1) (0,0,0) (0,0,0) (1,1,1) (1,1,0),
        // one mismatch each in the first and last column.
        assert_eq!(sol.cost, 2);
        assert_eq!(sol.consensus.to_string(), "10011");
        let direct: u64 = s
            .iter()
            .zip(delta.deltas())
            .map(|(x, &d)| hamming(&x.shift(d), &sol.consensus))
            .sum();
        assert_eq!(direct, sol.cost);
    }

    #[test]
    fn ties_resolve_to_zero() {
        let s = strs(&["1", "0"]);
        let sol = consensus_for_shift(&s, &ShiftVector::zeros(2)).unwrap();
        assert_eq!(sol.consensus.to_string(), "0");
        assert_eq!(sol.cost, 1);
    }

    fn arb_strings() -> impl Strategy<Value = Vec<BinaryString>> {
        (1usize..=4, 1usize..=6).prop_flat_map(|(k, n)| {
            proptest::collection::vec(proptest::collection::vec(0u8..=1, n), k)
                .prop_map(|rows| rows.iter().map(|r| BinaryString::from_bits(r).unwrap()).collect())
        })
    }

    proptest! {
        #[test]
        fn matches_brute_force(strings in arb_strings()) {
            let sol = solve_ccs_exhaustive(&strings, &Guard::default()).unwrap();
            prop_assert_eq!(sol.cost, brute_ccs(&strings));
        }

        #[test]
        fn per_shift_equals_ccs_table(strings in arb_strings(), seed in any::<u32>()) {
            let n = strings[0].len();
            let deltas = (0..strings.len()).map(|j| (seed as usize >> (3 * j)) % n).collect();
            let delta = ShiftVector::new(deltas, n);
            let sol = consensus_for_shift(&strings, &delta).unwrap();
            let inst = as_mscs(&strings).unwrap();
            prop_assert_eq!(Rational::from(sol.cost as usize), inst.cost_of_shift(&delta).unwrap());
        }

        #[test]
        fn invariant_under_common_rotation(strings in arb_strings(), t in 0usize..6) {
            let rotated: Vec<_> = strings.iter().map(|s| s.shift(t)).collect();
            prop_assert_eq!(
                solve_ccs_exhaustive(&strings, &Guard::default()).unwrap().cost,
                solve_ccs_exhaustive(&rotated, &Guard::default()).unwrap().cost
            );
        }

        #[test]
        fn unshifted_matches_column_majority(strings in arb_strings()) {
            let k = strings.len();
            let n = strings[0].len();
            let bound: u64 = (1..=n)
                .map(|i| {
                    let ones = strings.iter().filter(|s| s.get(i) == 1).count();
                    ones.min(k - ones) as u64
                })
                .sum();
            prop_assert_eq!(consensus_for_shift(&strings, &ShiftVector::zeros(k)).unwrap().cost, bound);
        }
    }
}
