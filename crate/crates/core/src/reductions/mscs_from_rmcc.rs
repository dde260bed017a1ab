//! Multicolored clique to f-MSCS.
//!
//! Row `j` (1-based) lists the vertices of color `j` as blocks
//! `1 u_{j,i}` separated by `gamma + j` empty blocks `1 0^{m'}`; row 0 is the
//! dummy string that pins the vertex columns. Every block has length `m'+1`
//! and starts with a separator 1.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::costfn::{CostFamily, CostTable};
use crate::cyclic::{column_weights, BinaryString, ShiftVector};
use crate::error::{Error, Guard, Result};
use crate::mscs::MscsInstance;
use crate::rational::Rational;
use crate::rmcc::{MulticoloredClique, RmccGraph};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MscsOverrides {
    pub lambda: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MscsReductionParams {
    pub k: usize,
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub m_prime: usize,
    pub kappa: usize,
    pub gamma: usize,
    pub lambda: usize,
    /// The value the formula gives, kept even when `lambda` is overridden.
    pub lambda_formula: String,
    pub ell: usize,
    pub epsilon: Rational,
    pub mu: Rational,
    pub target: Rational,
    pub cost_fn: String,
    pub outside_proof_regime: bool,
}

impl MscsReductionParams {
    /// Stride that keeps every row aligned to block boundaries.
    pub fn block_len(&self) -> usize {
        self.m_prime + 1
    }

    /// Smallest lambda the separation argument needs on aligned shifts.
    pub fn aligned_lambda(n: usize, k: usize) -> usize {
        2 * n * (n * k + k + 1) + 1
    }
}

/// `p_j`: length-`k` unit vector with a 1 at `j` (1-based).
pub fn unit_vector(k: usize, j: usize) -> Vec<u8> {
    (1..=k).map(|h| u8::from(h == j)).collect()
}

/// `q_{j,i}`: edge-incidence row of `v_{j,i}` over `e_1..e_m`.
pub fn incidence_row(g: &RmccGraph, j: usize, i: usize) -> Vec<u8> {
    g.edges
        .iter()
        .map(|&(u, v)| u8::from((u.color == j && u.index == i) || (v.color == j && v.index == i)))
        .collect()
}

fn binom2(k: usize) -> usize {
    k * (k - 1) / 2
}

/// Parameters and target for `g` under the cost family at arity `k+1`.
pub fn reduction_params(g: &RmccGraph, family: &CostFamily, overrides: &MscsOverrides) -> Result<(MscsReductionParams, CostTable)> {
    let (k, n, d, m) = (g.k, g.n, g.d, g.m());
    if k < 3 {
        return Err(Error::InvalidArgument(format!("the construction assumes k >= 3, got {k}")));
    }
    let table = family.at_arity(k + 1)?;
    let derived = table.derive()?;
    if !derived.is_grouping {
        return Err(Error::NotGrouping(format!("{} at arity {}", table.name, k + 1)));
    }
    let epsilon = derived.gap_or_err()?;
    let mu = derived.range.clone();
    let m_prime = m + k;
    let kappa = k * n * d + k * n + k;
    let gamma = n * k;
    let by_gap = (Rational::from(kappa) * (Rational::from(2) * &mu / &epsilon + Rational::one())).ceil();
    let by_blocks = BigInt::from(2 * n * (gamma + k + 1));
    let formula: BigInt = by_gap.max(by_blocks) + BigInt::from(1);
    let lambda = match overrides.lambda {
        Some(l) => {
            if l < n * (gamma + k + 1) {
                return Err(Error::Infeasible(format!(
                    "lambda = {l} is below n(gamma+k+1) = {}, rows would not fit",
                    n * (gamma + k + 1)
                )));
            }
            l
        }
        None => formula
            .to_usize()
            .ok_or_else(|| Error::Infeasible(format!("lambda = {formula} does not fit in memory")))?,
    };
    let ell = lambda
        .checked_mul(m_prime + 1)
        .ok_or_else(|| Error::Infeasible("string length overflows".into()))?;

    let f = |x: usize| derived.fprime_at(x).clone();
    let target = Rational::from(ell) * table.at(0)
        + Rational::from(lambda * (k + 1)) * f(k + 1)
        + Rational::from(2 * (k + binom2(k))) * (f(2) - f(1))
        + Rational::from(kappa) * f(1);
    let params = MscsReductionParams {
        k,
        n,
        d,
        m,
        m_prime,
        kappa,
        gamma,
        lambda,
        lambda_formula: formula.to_string(),
        ell,
        epsilon,
        mu,
        target,
        cost_fn: table.name.clone(),
        outside_proof_regime: overrides.lambda.is_some(),
    };
    Ok((params, table))
}

/// Build `s_0..s_k` and the target cost. The instance's target is set to `c`.
pub fn rmcc_to_mscs(
    g: &RmccGraph,
    family: &CostFamily,
    overrides: &MscsOverrides,
    guard: &Guard,
) -> Result<(MscsInstance, MscsReductionParams)> {
    g.ensure_valid()?;
    let (params, table) = reduction_params(g, family, overrides)?;
    let (k, n, mp, lambda, gamma) = (params.k, params.n, params.m_prime, params.lambda, params.gamma);
    guard.check_states("reduction string bits", (params.ell as u128) * (k as u128 + 1))?;

    let empty_block = |out: &mut Vec<u8>, count: usize| {
        for _ in 0..count {
            out.push(1);
            out.extend(std::iter::repeat_n(0u8, mp));
        }
    };
    let mut strings = Vec::with_capacity(k + 1);
    let mut s0 = vec![1u8];
    s0.extend(std::iter::repeat_n(1u8, k));
    s0.extend(std::iter::repeat_n(0u8, params.m));
    empty_block(&mut s0, lambda - 1);
    strings.push(BinaryString::from_bits(&s0)?);
    for j in 1..=k {
        let mut s = Vec::with_capacity(params.ell);
        let p = unit_vector(k, j);
        for i in 1..=n {
            s.push(1);
            s.extend_from_slice(&p);
            s.extend(incidence_row(g, j, i));
            empty_block(&mut s, gamma + j);
        }
        empty_block(&mut s, lambda - n * (gamma + j + 1));
        debug_assert_eq!(s.len(), params.ell);
        strings.push(BinaryString::from_bits(&s)?);
    }
    let inst = MscsInstance::new(strings, table, Some(params.target.clone()))?;
    Ok((inst, params))
}

/// `delta_0 = 0`, `delta_j = (i_j - 1)(m'+1)(gamma + j + 1)`.
pub fn witness_shift_from_clique(
    g: &RmccGraph,
    params: &MscsReductionParams,
    clique: &MulticoloredClique,
) -> Result<ShiftVector> {
    g.check_clique(clique)?;
    let mut deltas = vec![0usize];
    for (j0, &i) in clique.indices.iter().enumerate() {
        let j = j0 + 1;
        deltas.push((i - 1) * (params.m_prime + 1) * (params.gamma + j + 1));
    }
    Ok(ShiftVector::new(deltas, params.ell))
}

/// Column-level facts about one shift of a reduction instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnAudit {
    /// Every shift is a multiple of `m'+1`.
    pub aligned: bool,
    pub weight_histogram: Vec<u64>,
    pub weight2_columns: u64,
    /// Separator columns whose weight is not `k+1`.
    pub broken_separator_columns: u64,
    pub max_vertex_column_weight: usize,
    pub max_edge_column_weight: usize,
    /// Row pairs sharing more than one vertex block: `(j, j', shared blocks)`.
    pub block_pair_violations: Vec<(usize, usize, usize)>,
}

impl ColumnAudit {
    pub fn passes_weight_bounds(&self) -> bool {
        self.aligned && self.max_vertex_column_weight < 3 && self.max_edge_column_weight < 3
    }

    pub fn passes_block_pairs(&self) -> bool {
        self.aligned && self.block_pair_violations.is_empty()
    }
}

/// Classify columns of the shifted reduction strings. Block-level checks are
/// only meaningful for aligned shifts and are left empty otherwise.
pub fn audit_columns(inst: &MscsInstance, params: &MscsReductionParams, delta: &ShiftVector) -> Result<ColumnAudit> {
    let weights = column_weights(&inst.strings, delta)?;
    let mut hist = vec![0u64; inst.k() + 1];
    for &w in &weights {
        hist[w] += 1;
    }
    let b = params.block_len();
    let aligned = delta.deltas().iter().all(|d| d % b == 0);
    let mut audit = ColumnAudit {
        aligned,
        weight2_columns: hist.get(2).copied().unwrap_or(0),
        weight_histogram: hist,
        broken_separator_columns: 0,
        max_vertex_column_weight: 0,
        max_edge_column_weight: 0,
        block_pair_violations: Vec::new(),
    };
    if !aligned {
        return Ok(audit);
    }
    let k = params.k;
    for (i0, &w) in weights.iter().enumerate() {
        match i0 % b {
            0 => audit.broken_separator_columns += u64::from(w != k + 1),
            o if o <= k => audit.max_vertex_column_weight = audit.max_vertex_column_weight.max(w),
            _ => audit.max_edge_column_weight = audit.max_edge_column_weight.max(w),
        }
    }
    // Blocks (0-based, in the shifted frame) holding a vertex encoding.
    let lambda = params.lambda;
    let rows: Vec<BTreeSet<usize>> = (0..=k)
        .map(|j| {
            let t = delta.deltas()[j] / b;
            let original: Vec<usize> = if j == 0 {
                vec![0]
            } else {
                (0..params.n).map(|i| i * (params.gamma + j + 1)).collect()
            };
            original.into_iter().map(|blk| (blk + lambda - t % lambda) % lambda).collect()
        })
        .collect();
    for a in 0..=k {
        for c in a + 1..=k {
            let shared = rows[a].intersection(&rows[c]).count();
            if shared > 1 {
                audit.block_pair_violations.push((a, c, shared));
            }
        }
    }
    Ok(audit)
}

/// Structural scan: every string has length `ell` and exactly `lambda`
/// separator 1s at positions `i` with `i mod (m'+1) = 1`.
pub fn separator_counts(inst: &MscsInstance, params: &MscsReductionParams) -> Vec<usize> {
    inst.strings
        .iter()
        .map(|s| {
            (1..=s.len())
                .filter(|&i| i % params.block_len() == 1 && s.get(i) == 1)
                .count()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costfn::Builtin;
    use crate::rational::q;
    use crate::rmcc::{sample_graph, generate};

    #[test]
    fn unit_vectors() {
        assert_eq!(unit_vector(3, 2), vec![0, 1, 0]);
    }

    #[test]
    fn sample_parameters() {
        let g = sample_graph();
        let (p, _) = reduction_params(&g, &Builtin::Sigma.into(), &MscsOverrides::default()).unwrap();
        assert_eq!((p.kappa, p.gamma), (48, 9));
        assert_eq!((p.m, p.m_prime), (18, 21));
        // sigma_4: gap 1/4, range 3/4, so ceil(48 * 7) = 336 against 2*3*13 = 78.
        assert_eq!((p.epsilon.clone(), p.mu.clone()), (q(1, 4), q(3, 4)));
        assert_eq!(p.lambda, 337);
        assert_eq!(p.ell, 337 * 22);
        assert!(!p.outside_proof_regime);
    }

    #[test]
    fn sample_witness_hits_target() {
        let g = sample_graph();
        let (inst, p) = rmcc_to_mscs(&g, &Builtin::Sigma.into(), &MscsOverrides::default(), &Guard::default()).unwrap();
        assert!(inst.strings.iter().all(|s| s.len() == p.ell));
        assert!(separator_counts(&inst, &p).iter().all(|&c| c == p.lambda));
        let clique = MulticoloredClique { indices: vec![1, 3, 2] };
        let w = witness_shift_from_clique(&g, &p, &clique).unwrap();
        assert_eq!(inst.cost_of_shift(&w).unwrap(), p.target);
        let audit = audit_columns(&inst, &p, &w).unwrap();
        assert_eq!(audit.weight2_columns, 3 + 3);
        assert!(audit.passes_weight_bounds());
        assert!(audit.passes_block_pairs());
        assert_eq!(audit.broken_separator_columns, 0);
    }

    #[test]
    fn identity_clique_gives_zero_shift() {
        let gen = generate(3, 2, 4, false, 3).unwrap().graph;
        let (p, _) = reduction_params(&gen, &Builtin::Sigma.into(), &MscsOverrides::default()).unwrap();
        let w = witness_shift_from_clique(&gen, &p, &MulticoloredClique { indices: vec![1, 1, 1] }).unwrap();
        assert_eq!(w, ShiftVector::zeros(4));
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = sample_graph();
        assert!(matches!(
            reduction_params(&g, &Builtin::Ccs.into(), &MscsOverrides::default()),
            Err(Error::NotGrouping(_))
        ));
        let mut bad = g.clone();
        bad.edges.pop();
        assert!(matches!(
            rmcc_to_mscs(&bad, &Builtin::Sigma.into(), &MscsOverrides::default(), &Guard::default()),
            Err(Error::InvalidGraph(_))
        ));
        let (p, _) = reduction_params(&g, &Builtin::Sigma.into(), &MscsOverrides::default()).unwrap();
        assert!(matches!(
            witness_shift_from_clique(&g, &p, &MulticoloredClique { indices: vec![1, 1, 1] }),
            Err(Error::InvalidClique(_))
        ));
        assert!(matches!(
            reduction_params(&g, &Builtin::Sigma.into(), &MscsOverrides { lambda: Some(10) }),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn overridden_lambda_is_flagged() {
        let g = sample_graph();
        let l = MscsReductionParams::aligned_lambda(3, 3);
        let (inst, p) =
            rmcc_to_mscs(&g, &Builtin::Sigma.into(), &MscsOverrides { lambda: Some(l) }, &Guard::default()).unwrap();
        assert!(p.outside_proof_regime);
        assert_eq!(p.lambda_formula, "337");
        let w = witness_shift_from_clique(&g, &p, &MulticoloredClique { indices: vec![1, 3, 2] }).unwrap();
        assert_eq!(inst.cost_of_shift(&w).unwrap(), p.target);
    }

    #[test]
    fn planted_witnesses_for_several_costs() {
        for b in [Builtin::Sigma, Builtin::Phi, Builtin::PhiF] {
            for seed in 0..3 {
                let gen = generate(3, 3, 2, true, seed).unwrap();
                let l = MscsReductionParams::aligned_lambda(3, 3);
                let (inst, p) =
                    rmcc_to_mscs(&gen.graph, &b.into(), &MscsOverrides { lambda: Some(l) }, &Guard::default()).unwrap();
                let w = witness_shift_from_clique(&gen.graph, &p, gen.planted.as_ref().unwrap()).unwrap();
                assert_eq!(inst.cost_of_shift(&w).unwrap(), p.target, "{b} seed {seed}");
            }
        }
    }
}
