//! End-to-end verification of instance files and reduction bundles.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::ccs::{consensus_for_shift, solve_ccs_exhaustive};
use crate::costfn::CostFamily;
use crate::dtw::{fcost, solve_mean_exact};
use crate::error::{Error, Guard, Result};
use crate::io::{Instance, InstanceFile, Payload, Provenance, Witness};
use crate::mscs::{solve_exhaustive, MscsInstance};
use crate::rational::Rational;
use crate::reductions::dtw_from_mscs::Coding;
use crate::reductions::{
    audit_columns, mscs_g_to_ccs, mscs_phi_to_dtw, rmcc_to_mscs, witness_mean_from_shift, witness_shift_from_clique,
    DtwOverrides, MscsOverrides,
};
use crate::rmcc::{solve_clique_bruteforce, RmccGraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub kind: String,
    pub reduction: Option<String>,
    pub outside_proof_regime: bool,
    pub checks: Vec<Check>,
    /// Exact costs met along the way (targets, witness costs, optima).
    pub costs: BTreeMap<String, Rational>,
    pub notes: Vec<String>,
    pub pass: bool,
    /// Wall time; kept out of the canonical output.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl VerifyReport {
    fn new(file: &InstanceFile) -> Self {
        VerifyReport {
            kind: file.kind().into(),
            reduction: file.provenance.as_ref().map(|p| p.reduction.clone()),
            outside_proof_regime: file.provenance.as_ref().is_some_and(|p| p.outside_proof_regime),
            checks: Vec::new(),
            costs: BTreeMap::new(),
            notes: Vec::new(),
            pass: true,
            elapsed: Duration::ZERO,
        }
    }

    fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.pass &= pass;
        self.checks.push(Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    fn cost(&mut self, name: &str, v: &Rational) {
        self.costs.insert(name.into(), v.clone());
    }

    /// Deterministic JSON (no timing), newline-terminated.
    pub fn canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let head = match &self.reduction {
            Some(r) => format!("{} instance from {r}", self.kind),
            None => format!("{} instance", self.kind),
        };
        out.push_str(&head);
        if self.outside_proof_regime {
            out.push_str(" (outside proof regime)");
        }
        out.push('\n');
        for c in &self.checks {
            let mark = if c.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!("  {mark} {}: {}\n", c.name, c.detail));
        }
        for (k, v) in &self.costs {
            out.push_str(&format!("  {k} = {v} ({})\n", v.to_decimal(6)));
        }
        for n in &self.notes {
            out.push_str(&format!("  note: {n}\n"));
        }
        out.push_str(if self.pass { "all checks passed\n" } else { "some checks failed\n" });
        out
    }
}

/// Verify a file. Structural problems become failed checks; only guard
/// overruns of a requested decision are returned as errors.
pub fn verify(file: &InstanceFile, guard: &Guard) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut rep = VerifyReport::new(file);
    let inst = match file.validate() {
        Ok(i) => {
            rep.check("well_formed", true, "instance validates");
            i
        }
        Err(e) => {
            rep.check("well_formed", false, e.to_string());
            rep.elapsed = start.elapsed();
            return Ok(rep);
        }
    };
    match file.provenance.as_ref() {
        Some(prov) if prov.reduction == "generate" => verify_generated(&mut rep, &inst, prov),
        Some(prov) => verify_bundle(&mut rep, file, &inst, prov, guard)?,
        None if file.target.is_some() => verify_decision(&mut rep, &inst, guard)?,
        None => rep.notes.push("no target and no provenance: only structure was checked".into()),
    }
    rep.elapsed = start.elapsed();
    Ok(rep)
}

fn verify_generated(rep: &mut VerifyReport, inst: &Instance, prov: &Provenance) {
    let Instance::Rmcc(g) = inst else {
        rep.check("generated_kind", false, "generated files hold rmcc graphs");
        return;
    };
    match prov.witness.as_ref().and_then(|w| w.clique.as_ref()) {
        Some(c) => match g.check_clique(c) {
            Ok(()) => rep.check("planted_clique", true, format!("{c} is a multicolored clique")),
            Err(e) => rep.check("planted_clique", false, e.to_string()),
        },
        None => rep.notes.push("no planted clique recorded".into()),
    }
}

fn verify_decision(rep: &mut VerifyReport, inst: &Instance, guard: &Guard) -> Result<()> {
    let (cost, target) = match inst {
        Instance::Rmcc(g) => {
            let c = solve_clique_bruteforce(g, guard)?;
            let detail = c.map_or("no multicolored clique".to_string(), |c| format!("clique {c}"));
            rep.check("decision", detail.starts_with("clique"), detail);
            return Ok(());
        }
        Instance::Mscs(m) => (solve_exhaustive(m, None, guard)?.cost, m.target.clone()),
        Instance::Ccs { strings, target } => (Rational::from(solve_ccs_exhaustive(strings, guard)?.cost as usize), target.clone()),
        Instance::Dtw(d) => (solve_mean_exact(&d.series, None, guard)?.cost, d.target.clone()),
    };
    let target = target.expect("decision needs a target");
    rep.cost("optimum", &cost);
    rep.cost("target", &target);
    rep.check("decision", cost <= target, format!("optimum {cost} against target {target}"));
    Ok(())
}

fn source_of<'a>(rep: &mut VerifyReport, prov: &'a Provenance) -> Option<&'a InstanceFile> {
    let Some(src) = prov.source.as_deref() else {
        rep.check("source_present", false, "provenance has no embedded source");
        return None;
    };
    let hash = src.sha256();
    match prov.source_sha256.as_deref() {
        Some(h) if h == hash => rep.check("source_hash", true, format!("sha256 {hash}")),
        Some(h) => rep.check("source_hash", false, format!("recorded {h}, computed {hash}")),
        None => rep.check("source_hash", false, "no source hash recorded"),
    }
    Some(src)
}

fn same_payload(rep: &mut VerifyReport, file: &InstanceFile, payload: &Payload, target: &Option<Rational>) {
    let ok = &file.payload == payload && &file.target == target;
    rep.check(
        "reconstruction",
        ok,
        if ok { "rebuilt instance is identical" } else { "rebuilt instance differs" },
    );
}

fn verify_bundle(
    rep: &mut VerifyReport,
    file: &InstanceFile,
    inst: &Instance,
    prov: &Provenance,
    guard: &Guard,
) -> Result<()> {
    let Some(src) = source_of(rep, prov) else {
        return Ok(());
    };
    let src_inst = match src.validate() {
        Ok(i) => i,
        Err(e) => {
            rep.check("source_valid", false, e.to_string());
            return Ok(());
        }
    };
    let witness = prov.witness.as_ref();
    let outcome = match (prov.reduction.as_str(), src_inst, inst) {
        ("rmcc-to-mscs", Instance::Rmcc(g), Instance::Mscs(m)) => verify_rmcc_to_mscs(rep, file, &g, m, prov, witness, guard),
        ("mscs-to-ccs", Instance::Mscs(s), Instance::Ccs { .. }) => verify_mscs_to_ccs(rep, file, &s, witness, guard),
        ("mscs-to-dtw", Instance::Mscs(s), Instance::Dtw(_)) => verify_mscs_to_dtw(rep, file, &s, prov, witness, guard),
        (r, _, _) => {
            rep.check("reduction_known", false, format!("{r:?} with a {} source and {} output", src.kind(), file.kind()));
            Ok(())
        }
    };
    match outcome {
        Err(e) if !e.is_guard() => {
            rep.check("reduction_runs", false, e.to_string());
            Ok(())
        }
        other => other,
    }
}

fn regime_flag(rep: &mut VerifyReport, recorded: bool, computed: bool) {
    rep.check(
        "regime_flag",
        recorded == computed,
        format!("outside_proof_regime recorded {recorded}, computed {computed}"),
    );
}

fn verify_rmcc_to_mscs(
    rep: &mut VerifyReport,
    file: &InstanceFile,
    g: &RmccGraph,
    out: &MscsInstance,
    prov: &Provenance,
    witness: Option<&Witness>,
    guard: &Guard,
) -> Result<()> {
    let Payload::Mscs { cost_fn, .. } = &file.payload else { unreachable!() };
    let ov: MscsOverrides = serde_json::from_value(prov.overrides.clone())
        .map_err(|e| Error::Malformed(format!("field provenance.overrides: {e}")))?;
    let (rebuilt, params) = rmcc_to_mscs(g, cost_fn, &ov, guard)?;
    same_payload(
        rep,
        file,
        &Payload::Mscs {
            strings: rebuilt.strings.clone(),
            cost_fn: cost_fn.clone(),
        },
        &rebuilt.target,
    );
    rep.check(
        "parameters",
        prov.params == serde_json::to_value(&params).expect("parameters serialize"),
        format!("lambda {} (formula {}), ell {}, target {}", params.lambda, params.lambda_formula, params.ell, params.target),
    );
    regime_flag(rep, prov.outside_proof_regime, params.outside_proof_regime);
    rep.cost("target", &params.target);
    let Some(clique) = witness.and_then(|w| w.clique.as_ref()) else {
        rep.notes.push("no clique witness recorded".into());
        return Ok(());
    };
    if let Err(e) = g.check_clique(clique) {
        rep.check("witness_clique", false, e.to_string());
        return Ok(());
    }
    rep.check("witness_clique", true, format!("{clique} is a multicolored clique"));
    let shift = witness_shift_from_clique(g, &params, clique)?;
    let recorded = witness.and_then(|w| w.shift.as_ref());
    rep.check(
        "witness_shift",
        recorded == Some(&shift),
        format!("expected {shift}"),
    );
    let cost = out.cost_of_shift(&shift)?;
    rep.cost("witness", &cost);
    rep.check("witness_cost", cost == params.target, format!("cost {cost}, target {}", params.target));
    let audit = audit_columns(out, &params, &shift)?;
    let k = params.k as u64;
    let expected_w2 = k + k * (k - 1) / 2;
    rep.check(
        "weight2_columns",
        audit.weight2_columns == expected_w2,
        format!("{} weight-2 columns, expected {expected_w2}", audit.weight2_columns),
    );
    rep.check(
        "column_weights",
        audit.passes_weight_bounds(),
        format!(
            "max vertex column weight {}, max edge column weight {}",
            audit.max_vertex_column_weight, audit.max_edge_column_weight
        ),
    );
    rep.check(
        "block_pairs",
        audit.passes_block_pairs(),
        format!("{} row pairs share more than one block", audit.block_pair_violations.len()),
    );
    Ok(())
}

fn verify_mscs_to_ccs(
    rep: &mut VerifyReport,
    file: &InstanceFile,
    src: &MscsInstance,
    witness: Option<&Witness>,
    guard: &Guard,
) -> Result<()> {
    let padded = mscs_g_to_ccs(src)?;
    same_payload(
        rep,
        file,
        &Payload::Ccs {
            strings: padded.strings.clone(),
        },
        &padded.target,
    );
    if let Some(shift) = witness.and_then(|w| w.shift.as_ref()) {
        let k = src.k();
        let source_shift = crate::cyclic::ShiftVector::new(shift.deltas()[..k].to_vec(), src.n());
        let source_cost = src.cost_of_shift(&source_shift)?;
        let ccs = consensus_for_shift(&padded.strings, shift)?;
        let ccs_cost = Rational::from(ccs.cost as usize);
        rep.cost("witness", &ccs_cost);
        rep.check(
            "witness_cost",
            ccs_cost == source_cost,
            format!("consensus distance {ccs_cost}, source g-cost {source_cost}"),
        );
    }
    match (solve_exhaustive(src, None, guard), solve_ccs_exhaustive(&padded.strings, guard)) {
        (Ok(a), Ok(b)) => {
            let b_cost = Rational::from(b.cost as usize);
            rep.cost("source_optimum", &a.cost);
            rep.cost("optimum", &b_cost);
            rep.check("optimum_preserved", a.cost == b_cost, format!("source {}, padded {b_cost}", a.cost));
        }
        (Err(e), _) | (_, Err(e)) if e.is_guard() => rep.notes.push(format!("optimum comparison skipped: {e}")),
        (Err(e), _) | (_, Err(e)) => return Err(e),
    }
    Ok(())
}

fn verify_mscs_to_dtw(
    rep: &mut VerifyReport,
    file: &InstanceFile,
    src: &MscsInstance,
    prov: &Provenance,
    witness: Option<&Witness>,
    guard: &Guard,
) -> Result<()> {
    let ov: DtwOverrides = serde_json::from_value(prov.overrides.clone())
        .map_err(|e| Error::Malformed(format!("field provenance.overrides: {e}")))?;
    let c = src
        .target
        .clone()
        .ok_or_else(|| Error::Malformed("mscs-to-dtw source has no target".into()))?;
    let (dtw, params, blocks) = mscs_phi_to_dtw(src, &c, &ov, guard)?;
    same_payload(rep, file, &Payload::Dtw { series: dtw.series.clone() }, &dtw.target);
    rep.check(
        "parameters",
        prov.params == serde_json::to_value(&params).expect("parameters serialize"),
        format!("m {} (formula {}), r {} (formula {}), c' {}", params.m, params.m_formula, params.r, params.r_formula, params.c_prime),
    );
    regime_flag(rep, prov.outside_proof_regime, params.outside_proof_regime);
    rep.cost("target", &params.c_prime);

    let (m, n, r) = (params.m, params.n, params.r);
    let mut bad = Vec::new();
    for (j, bl) in blocks.series.iter().enumerate() {
        if bl.len() != 2 * m * n * r {
            bad.push(format!("series {} has {} blocks", j + 1, bl.len()));
        }
        for (s, seg) in bl.chunks(2 * m).enumerate() {
            let bit = src.strings[j].get(s % n + 1);
            let want = if bit == 1 { Coding::B } else { Coding::A };
            if seg.get(1).and_then(|b| b.coding) != Some(want) {
                bad.push(format!("series {} segment {} miscoded", j + 1, s + 1));
            }
        }
    }
    rep.check(
        "blocks",
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} blocks per series with correct coding marks", 2 * m * n * r)
        } else {
            bad.join("; ")
        },
    );

    let Some(shift) = witness.and_then(|w| w.shift.as_ref()) else {
        rep.notes.push("no witness shift recorded".into());
        return Ok(());
    };
    let w = witness_mean_from_shift(&params, src, shift, &dtw, &blocks)?;
    let len = 2 * m * n * (r - 1) + 2;
    rep.check("witness_length", w.z.len() == len, format!("length {}, expected {len}", w.z.len()));
    let decomposed = &w.regular_cost + &w.extreme_cost;
    rep.check(
        "witness_decomposition",
        w.alignment_cost == decomposed,
        format!("alignment {}, regular + extreme {decomposed}", w.alignment_cost),
    );
    rep.cost("witness", &w.alignment_cost);
    rep.cost("witness_phi", &w.phi_cost);
    rep.check(
        "witness_bound",
        w.alignment_cost <= params.c_prime,
        format!("alignment {} against c' {}", w.alignment_cost, params.c_prime),
    );
    let cells: u128 = dtw.series.iter().map(|x| (x.len() as u128) * (len as u128)).sum();
    match guard.check_states("DTW cells for fcost", cells) {
        Ok(()) => {
            let f = fcost(&w.z, &dtw.series);
            rep.cost("witness_fcost", &f);
            rep.check("fcost_bound", f <= w.alignment_cost, format!("fcost {f}"));
        }
        Err(e) => rep.notes.push(format!("fcost skipped: {e}")),
    }
    Ok(())
}

/// Cost family named on the command line or in a file.
pub fn parse_cost_family(name: &str) -> Result<CostFamily> {
    Ok(CostFamily::Builtin(name.parse()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{reduce_mscs_to_ccs, reduce_mscs_to_dtw, reduce_rmcc_to_mscs};
    use crate::costfn::Builtin;
    use crate::rmcc::sample_graph;

    #[test]
    fn sample_bundle_verifies() {
        let src = InstanceFile::rmcc(&sample_graph());
        let out = reduce_rmcc_to_mscs(&src, &Builtin::Sigma.into(), &MscsOverrides::default(), &Guard::default()).unwrap();
        let rep = verify(&out, &Guard::default()).unwrap();
        assert!(rep.pass, "{}", rep.to_text());
        assert_eq!(rep.costs["witness"], rep.costs["target"]);
        assert_eq!(rep.canonical_json(), verify(&out, &Guard::default()).unwrap().canonical_json());
    }

    #[test]
    fn tampering_is_caught() {
        let src = InstanceFile::rmcc(&sample_graph());
        let mut out = reduce_rmcc_to_mscs(&src, &Builtin::Sigma.into(), &MscsOverrides::default(), &Guard::default()).unwrap();
        out.target = Some(Rational::from(1));
        let rep = verify(&out, &Guard::default()).unwrap();
        assert!(!rep.pass);
        assert!(rep.checks.iter().any(|c| c.name == "reconstruction" && !c.pass));

        let mut out = reduce_rmcc_to_mscs(&src, &Builtin::Sigma.into(), &MscsOverrides::default(), &Guard::default()).unwrap();
        out.provenance.as_mut().unwrap().source_sha256 = Some("00".into());
        assert!(!verify(&out, &Guard::default()).unwrap().pass);
    }

    #[test]
    fn padding_bundle_verifies() {
        let src = InstanceFile::from_json(r#"{"kind": "mscs", "strings": ["1001", "0110", "1100"], "cost_fn": "g", "target": 2}"#).unwrap();
        let out = reduce_mscs_to_ccs(&src).unwrap();
        let rep = verify(&out, &Guard::default()).unwrap();
        assert!(rep.pass, "{}", rep.to_text());
        assert!(rep.checks.iter().any(|c| c.name == "optimum_preserved"));
    }

    #[test]
    fn dtw_bundle_verifies() {
        let src = InstanceFile::from_json(r#"{"kind": "mscs", "strings": ["10", "01", "11"], "cost_fn": "phi", "target": "1"}"#).unwrap();
        let ov = DtwOverrides {
            m: Some(4),
            r: Some(3),
            allow_small_k: true,
        };
        let out = reduce_mscs_to_dtw(&src, &ov, &Guard::default()).unwrap();
        let rep = verify(&out, &Guard::default()).unwrap();
        assert!(rep.pass, "{}", rep.to_text());
        assert!(rep.outside_proof_regime);
        assert!(rep.checks.iter().any(|c| c.name == "fcost_bound"));
    }

    #[test]
    fn plain_decisions() {
        let yes = InstanceFile::from_json(r#"{"kind": "mscs", "strings": ["10011", "11000", "01001"], "cost_fn": "sigma", "target": "4/3"}"#).unwrap();
        assert!(verify(&yes, &Guard::default()).unwrap().pass);
        let no = InstanceFile::from_json(r#"{"kind": "mscs", "strings": ["10011", "11000", "01001"], "cost_fn": "sigma", "target": "1"}"#).unwrap();
        assert!(!verify(&no, &Guard::default()).unwrap().pass);
    }
}
