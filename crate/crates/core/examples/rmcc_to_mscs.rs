//! The clique construction on the 3x3 sample graph: parameters,
//! witness shift, its cost and the column audit.

use circcons::costfn::Builtin;
use circcons::reductions::{audit_columns, rmcc_to_mscs, witness_shift_from_clique, MscsOverrides};
use circcons::rmcc::{sample_graph, solve_clique_bruteforce};
use circcons::Guard;

fn main() -> circcons::Result<()> {
    let g = sample_graph();
    print!("{}", g.to_text());
    let guard = Guard::default();
    let clique = solve_clique_bruteforce(&g, &guard)?.expect("the sample graph has a clique");
    println!("first clique {clique}");

    let (inst, p) = rmcc_to_mscs(&g, &Builtin::Sigma.into(), &MscsOverrides::default(), &guard)?;
    println!(
        "m={} m'={} kappa={} gamma={} lambda={} ell={} eps={} mu={} target={}",
        p.m, p.m_prime, p.kappa, p.gamma, p.lambda, p.ell, p.epsilon, p.mu, p.target
    );
    let shift = witness_shift_from_clique(&g, &p, &clique)?;
    let cost = inst.cost_of_shift(&shift)?;
    println!("witness shift {shift}, cost {cost} ({})", cost.to_decimal(6));

    let audit = audit_columns(&inst, &p, &shift)?;
    println!("column weight histogram {:?}", audit.weight_histogram);
    println!(
        "weight-2 columns {}, vertex/edge max weight {}/{}, block pair violations {}",
        audit.weight2_columns,
        audit.max_vertex_column_weight,
        audit.max_edge_column_weight,
        audit.block_pair_violations.len()
    );
    Ok(())
}
