//! Reduction bundles: instance files produced by a construction, carrying
//! the source, its hash, the parameters and a witness when one is known.

use serde::Serialize;

use crate::costfn::{Builtin, CostFamily};
use crate::error::{Error, Guard, Result};
use crate::io::{Instance, InstanceFile, Payload, Provenance, Witness};
use crate::mscs::{solve_exhaustive, MscsInstance};
use crate::rational::Rational;
use crate::reductions::{
    mscs_g_to_ccs, mscs_phi_to_dtw, pad_shift, rmcc_to_mscs,
    witness_mean_from_shift, witness_shift_from_clique, DtwOverrides, MscsOverrides,
};
use crate::rmcc::{generate, generate_no_instance, solve_clique_bruteforce, MulticoloredClique, RmccGraph};

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("parameters serialize")
}

fn provenance(
    reduction: &str,
    source: &InstanceFile,
    params: serde_json::Value,
    overrides: serde_json::Value,
    outside: bool,
    witness: Option<Witness>,
) -> Provenance {
    Provenance {
        reduction: reduction.into(),
        source_sha256: Some(source.sha256()),
        source: Some(Box::new(source.clone())),
        params,
        overrides,
        outside_proof_regime: outside,
        witness,
    }
}

fn source_witness(source: &InstanceFile) -> Option<&Witness> {
    source.provenance.as_ref().and_then(|p| p.witness.as_ref())
}

/// How `gen-rmcc` builds its graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GenMode {
    Planted,
    Random,
    /// Certified clique-free.
    NoInstance,
}

/// A generated RMCC instance file. Planted cliques are recorded as witnesses.
pub fn generated_graph_file(k: usize, n: usize, d: usize, mode: GenMode, seed: u64, guard: &Guard) -> Result<InstanceFile> {
    let (graph, clique) = match mode {
        GenMode::Planted | GenMode::Random => {
            let g = generate(k, n, d, mode == GenMode::Planted, seed)?;
            (g.graph, g.planted)
        }
        GenMode::NoInstance => (generate_no_instance(k, n, d, seed, guard)?, None),
    };
    let mut file = InstanceFile::rmcc(&graph);
    file.provenance = Some(Provenance {
        reduction: "generate".into(),
        source_sha256: None,
        source: None,
        params: serde_json::json!({ "k": k, "n": n, "d": d, "seed": seed, "mode": mode }),
        overrides: serde_json::Value::Null,
        outside_proof_regime: false,
        witness: clique.map(|c| Witness {
            clique: Some(c),
            ..Witness::default()
        }),
    });
    Ok(file)
}

/// The clique to certify a graph with: a recorded one, else the solver's
/// answer when it fits the guard.
fn clique_for(graph: &RmccGraph, source: &InstanceFile, guard: &Guard) -> Result<Option<MulticoloredClique>> {
    if let Some(c) = source_witness(source).and_then(|w| w.clique.clone()) {
        graph.check_clique(&c)?;
        return Ok(Some(c));
    }
    match solve_clique_bruteforce(graph, guard) {
        Ok(c) => Ok(c),
        Err(e) if e.is_guard() => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn reduce_rmcc_to_mscs(
    source: &InstanceFile,
    family: &CostFamily,
    overrides: &MscsOverrides,
    guard: &Guard,
) -> Result<InstanceFile> {
    let Payload::Rmcc { graph } = &source.payload else {
        return Err(Error::InvalidArgument(format!("rmcc-to-mscs needs an rmcc source, got {}", source.kind())));
    };
    let (inst, params) = rmcc_to_mscs(graph, family, overrides, guard)?;
    let witness = match clique_for(graph, source, guard)? {
        Some(clique) => {
            let shift = witness_shift_from_clique(graph, &params, &clique)?;
            let cost = inst.cost_of_shift(&shift)?;
            Some(Witness {
                clique: Some(clique),
                shift: Some(shift),
                cost: Some(cost),
            })
        }
        None => None,
    };
    let mut file = InstanceFile::mscs(&inst, family.clone());
    file.provenance = Some(provenance(
        "rmcc-to-mscs",
        source,
        to_value(&params),
        to_value(overrides),
        params.outside_proof_regime,
        witness,
    ));
    Ok(file)
}

fn source_mscs(source: &InstanceFile, what: &str) -> Result<MscsInstance> {
    match source.validate()? {
        Instance::Mscs(inst) => Ok(inst),
        _ => Err(Error::InvalidArgument(format!("{what} needs an mscs source, got {}", source.kind()))),
    }
}

pub fn reduce_mscs_to_ccs(source: &InstanceFile) -> Result<InstanceFile> {
    let inst = source_mscs(source, "mscs-to-ccs")?;
    let padded = mscs_g_to_ccs(&inst)?;
    let witness = match source_witness(source).and_then(|w| w.shift.clone()) {
        Some(shift) => {
            let padded_shift = pad_shift(&shift, inst.k());
            let cost = padded.cost_of_shift(&padded_shift)?;
            Some(Witness {
                clique: None,
                shift: Some(padded_shift),
                cost: Some(cost),
            })
        }
        None => None,
    };
    let file = InstanceFile {
        payload: Payload::Ccs {
            strings: padded.strings.clone(),
        },
        target: padded.target.clone(),
        provenance: Some(provenance(
            "mscs-to-ccs",
            source,
            serde_json::json!({ "k": inst.k(), "n": inst.n(), "padding_rows": inst.k() - 2 }),
            serde_json::Value::Null,
            false,
            witness,
        )),
    };
    Ok(file)
}

/// The witness shift for the DTW construction: a recorded one, else an
/// optimal shift when the search fits the guard and meets the target.
fn phi_witness(inst: &MscsInstance, source: &InstanceFile, c: &Rational, guard: &Guard) -> Result<Option<crate::cyclic::ShiftVector>> {
    if let Some(shift) = source_witness(source).and_then(|w| w.shift.clone()) {
        return Ok(Some(shift));
    }
    match solve_exhaustive(inst, None, guard) {
        Ok(sol) if &sol.cost <= c => Ok(Some(sol.delta)),
        Ok(_) => Ok(None),
        Err(e) if e.is_guard() => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn reduce_mscs_to_dtw(source: &InstanceFile, overrides: &DtwOverrides, guard: &Guard) -> Result<InstanceFile> {
    let inst = source_mscs(source, "mscs-to-dtw")?;
    if inst.cost.builtin_kind() != Some(Builtin::Phi) {
        return Err(Error::InvalidArgument(format!(
            "mscs-to-dtw needs the phi cost function, source uses {}",
            inst.cost.name
        )));
    }
    let c = inst
        .target
        .clone()
        .ok_or_else(|| Error::InvalidArgument("mscs-to-dtw needs a source target cost".into()))?;
    let (dtw, params, blocks) = mscs_phi_to_dtw(&inst, &c, overrides, guard)?;
    let witness = match phi_witness(&inst, source, &c, guard)? {
        Some(shift) => {
            let w = witness_mean_from_shift(&params, &inst, &shift, &dtw, &blocks)?;
            Some(Witness {
                clique: None,
                shift: Some(shift),
                cost: Some(w.alignment_cost),
            })
        }
        None => None,
    };
    let mut file = InstanceFile::dtw(&dtw);
    file.provenance = Some(provenance(
        "mscs-to-dtw",
        source,
        to_value(&params),
        to_value(overrides),
        params.outside_proof_regime,
        witness,
    ));
    Ok(file)
}

/// Recompute a bundle from its embedded source.
pub fn rebuild(file: &InstanceFile, guard: &Guard) -> Result<InstanceFile> {
    let prov = file
        .provenance
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("instance has no provenance record".into()))?;
    let source = prov
        .source
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("provenance has no embedded source".into()))?;
    let overrides_err = |e: serde_json::Error| Error::Malformed(format!("field provenance.overrides: {e}"));
    match prov.reduction.as_str() {
        "rmcc-to-mscs" => {
            let Payload::Mscs { cost_fn, .. } = &file.payload else {
                return Err(Error::Malformed(format!("rmcc-to-mscs bundle holds a {} instance", file.kind())));
            };
            let ov: MscsOverrides = serde_json::from_value(prov.overrides.clone()).map_err(overrides_err)?;
            reduce_rmcc_to_mscs(source, cost_fn, &ov, guard)
        }
        "mscs-to-ccs" => reduce_mscs_to_ccs(source),
        "mscs-to-dtw" => {
            let ov: DtwOverrides = serde_json::from_value(prov.overrides.clone()).map_err(overrides_err)?;
            reduce_mscs_to_dtw(source, &ov, guard)
        }
        other => Err(Error::InvalidArgument(format!("unknown reduction {other:?}"))),
    }
}
