//! Derived quantities of the built-in cost tables.

use circcons::costfn::{Builtin, CostTable};

fn main() -> circcons::Result<()> {
    for b in Builtin::ALL {
        println!("{b}");
        for k in 2..=6 {
            let t = CostTable::builtin(b, k)?;
            let d = t.derive()?;
            let values: Vec<String> = t.values.iter().map(|v| v.to_string()).collect();
            let fp: Vec<String> = d.fprime.iter().map(|v| v.to_string()).collect();
            let gap = d.gap.as_ref().map_or("none".to_string(), |g| g.to_string());
            println!(
                "  k={k}: f = [{}], f' = [{}], gap {gap}, range {}, grouping {}",
                values.join(", "),
                fp.join(", "),
                d.range,
                d.is_grouping
            );
        }
    }
    Ok(())
}
