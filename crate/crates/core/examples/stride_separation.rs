//! Yes/no separation of the clique construction at desk scale: aligned
//! lambda, search restricted to multiples of m'+1.

use circcons::costfn::{Builtin, CostTable};
use circcons::mscs::solve_exhaustive;
use circcons::reductions::mscs_from_rmcc::MscsReductionParams;
use circcons::reductions::{rmcc_to_mscs, MscsOverrides};
use circcons::rmcc::{colored_cycle, solve_clique_bruteforce, RmccGraph, Vertex};
use circcons::Guard;

fn complete_tripartite() -> RmccGraph {
    let mut edges = Vec::new();
    for a in 1..=3 {
        for b in a + 1..=3 {
            for i in 1..=2 {
                for j in 1..=2 {
                    edges.push((Vertex::new(a, i), Vertex::new(b, j)));
                }
            }
        }
    }
    RmccGraph::new(3, 2, 4, edges)
}

fn main() -> circcons::Result<()> {
    let guard = Guard::default();
    let eps = CostTable::builtin(Builtin::Sigma, 4)?.derive()?.gap_or_err()?;
    for (name, g) in [("K_{2,2,2}", complete_tripartite()), ("colored 6-cycle", colored_cycle(3, 2)?)] {
        let lambda = MscsReductionParams::aligned_lambda(g.n, g.k);
        let ov = MscsOverrides { lambda: Some(lambda) };
        let (inst, p) = rmcc_to_mscs(&g, &Builtin::Sigma.into(), &ov, &guard)?;
        let sol = solve_exhaustive(&inst, Some(p.m_prime + 1), &guard)?;
        let has_clique = solve_clique_bruteforce(&g, &guard)?.is_some();
        println!(
            "{name}: clique {has_clique}, lambda {lambda}, ell {}, {} aligned shifts, min {} at {}, target {}, min - target {} (eps {eps})",
            p.ell,
            sol.searched,
            sol.cost,
            sol.delta,
            p.target,
            &sol.cost - &p.target
        );
    }
    Ok(())
}
