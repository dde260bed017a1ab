//! Per-position cost audits of random mean/path configurations over
//! reduced series fragments with k = 15.

use circcons::reductions::audit::synthetic_configuration;
use circcons::reductions::{position_cost_audit, PositionClass};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> circcons::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut positions, mut violations, mut unassigned) = (0, 0, 0);
    let mut by_class = [0usize; 3];
    for _ in 0..100 {
        let cfg = synthetic_configuration(15, 2, 3, &mut rng)?;
        let rep = position_cost_audit(&cfg.z, &cfg.series, &cfg.paths, &cfg.blocks)?;
        positions += rep.positions.len();
        violations += rep.bound_violations().len();
        unassigned += rep.unassigned_blocks;
        for p in &rep.positions {
            by_class[match p.class {
                PositionClass::ZeroSimple => 0,
                PositionClass::OneSimple => 1,
                PositionClass::Bad => 2,
            }] += 1;
        }
        assert!(rep.passes());
    }
    println!(
        "{positions} positions audited: {} 0-simple, {} 1-simple, {} bad; {violations} bound violations, {unassigned} unassigned blocks",
        by_class[0], by_class[1], by_class[2]
    );

    let cfg = synthetic_configuration(15, 2, 2, &mut rng)?;
    let rep = position_cost_audit(&cfg.z, &cfg.series, &cfg.paths, &cfg.blocks)?;
    for p in rep.positions.iter().take(8) {
        println!(
            "  position {}: {:?}, #0={} #1={} q={} g={} C={} LB={}",
            p.p, p.class, p.zeros, p.ones, p.q, p.g, p.c, p.lb
        );
    }
    Ok(())
}
