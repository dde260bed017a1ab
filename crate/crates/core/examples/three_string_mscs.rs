//! Exhaustive f-MSCS on the three-string sample with the sigma cost.

use circcons::costfn::{Builtin, CostTable};
use circcons::cyclic::{column_weights, BinaryString, ShiftVector};
use circcons::mscs::{all_optima, solve_exhaustive, MscsInstance};
use circcons::Guard;

fn main() -> circcons::Result<()> {
    let strings: Vec<BinaryString> = ["10011", "11000", "01001"]
        .iter()
        .map(|s| s.parse())
        .collect::<circcons::Result<_>>()?;
    let inst = MscsInstance::new(strings, CostTable::builtin(Builtin::Sigma, 3)?, None)?;
    let guard = Guard::default();

    let best = solve_exhaustive(&inst, None, &guard)?;
    println!("optimal {} ({}), delta {}", best.cost, best.cost.to_decimal(6), best.delta);
    println!("searched {} normalized shift vectors", best.searched);

    for delta in all_optima(&inst, None, &guard, usize::MAX)? {
        let weights = column_weights(&inst.strings, &delta)?;
        println!("  optimum {delta}: column weights {weights:?}");
    }

    // A second optimum with a different column layout.
    let drawn = ShiftVector::new(vec![0, 2, 1], inst.n());
    for (j, s) in inst.strings.iter().enumerate() {
        println!("  s{} shifted by {}: {}", j + 1, drawn.deltas()[j], s.shift(drawn.deltas()[j]));
    }
    println!("cost of {drawn}: {}", inst.cost_of_shift(&drawn)?);
    Ok(())
}
