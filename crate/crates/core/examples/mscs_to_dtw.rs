//! The DTW construction on a micro phi instance with small overridden
//! parameters, and the witness mean built from a shift.

use circcons::costfn::{Builtin, CostTable};
use circcons::cyclic::BinaryString;
use circcons::dtw::fcost;
use circcons::mscs::{solve_exhaustive, MscsInstance};
use circcons::reductions::{mscs_phi_to_dtw, witness_mean_from_shift, DtwOverrides};
use circcons::Guard;

fn main() -> circcons::Result<()> {
    let strings = ["10", "01", "11"]
        .iter()
        .map(|s| s.parse())
        .collect::<circcons::Result<Vec<BinaryString>>>()?;
    let src = MscsInstance::new(strings, CostTable::builtin(Builtin::Phi, 3)?, None)?;
    let guard = Guard::default();
    let best = solve_exhaustive(&src, None, &guard)?;
    println!("phi optimum {} at {}", best.cost, best.delta);

    let ov = DtwOverrides {
        m: Some(4),
        r: Some(3),
        allow_small_k: true,
    };
    let (dtw, p, blocks) = mscs_phi_to_dtw(&src, &best.cost, &ov, &guard)?;
    println!(
        "m={} r={} eps={} c'={} (formula m {}, r {}), outside proof regime {}",
        p.m, p.r, p.epsilon, p.c_prime, p.m_formula, p.r_formula, p.outside_proof_regime
    );
    for (j, x) in dtw.series.iter().enumerate() {
        let bits: String = x.values().iter().map(|v| if v.is_zero() { '0' } else { '1' }).collect();
        let blocks_here = blocks.series.get(j).map_or(0, |b| b.len());
        println!("x{} ({} blocks): {bits}", j + 1, blocks_here);
    }

    let w = witness_mean_from_shift(&p, &src, &best.delta, &dtw, &blocks)?;
    println!("witness mean length {}: {}", w.z.len(), w.z);
    println!(
        "alignment {} = regular {} + extreme {}",
        w.alignment_cost, w.regular_cost, w.extreme_cost
    );
    println!("fcost {} <= alignment <= c' {}", fcost(&w.z, &dtw.series), p.c_prime);
    Ok(())
}
