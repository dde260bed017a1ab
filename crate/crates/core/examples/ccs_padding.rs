//! Padding an f-MSCS instance with the g cost into a consensus string
//! instance, and checking that the optima agree.

use circcons::ccs::solve_ccs_exhaustive;
use circcons::costfn::{Builtin, CostTable};
use circcons::cyclic::BinaryString;
use circcons::mscs::{solve_exhaustive, MscsInstance};
use circcons::reductions::{mscs_g_to_ccs, pad_shift};
use circcons::Guard;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> circcons::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let guard = Guard::default();
    for round in 0..5 {
        let k = rng.gen_range(3..=4);
        let n = rng.gen_range(2..=5);
        let strings = (0..k)
            .map(|_| BinaryString::from_bits(&(0..n).map(|_| rng.gen_range(0..2)).collect::<Vec<u8>>()))
            .collect::<circcons::Result<Vec<_>>>()?;
        let src = MscsInstance::new(strings, CostTable::builtin(Builtin::G, k)?, None)?;
        let padded = mscs_g_to_ccs(&src)?;

        let a = solve_exhaustive(&src, None, &guard)?;
        let b = solve_ccs_exhaustive(&padded.strings, &guard)?;
        let lifted = padded.cost_of_shift(&pad_shift(&a.delta, k))?;
        println!(
            "#{round} k={k} n={n}: g-optimum {} at {}, consensus optimum {} ({}), lifted shift costs {lifted}",
            a.cost, a.delta, b.cost, b.consensus
        );
        for s in &padded.strings {
            println!("    {s}");
        }
    }
    Ok(())
}
