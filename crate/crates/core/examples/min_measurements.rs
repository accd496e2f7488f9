//! Fewest measurements that can make a GNSS problem solvable, checked on
//! constructed scenarios that use exactly that many.

use pseudorange_rigidity::gnss::{
    is_solvable, min_measurements, minimal_solvable_scenario, SolvabilityOptions,
};

fn main() -> pseudorange_rigidity::Result<()> {
    println!("R C d | min | solvable");
    for d in [2, 3] {
        for r in 1..=3 {
            for c in 1..=3 {
                let s = minimal_solvable_scenario(r, c, d, 1)?;
                let rep = is_solvable(&s, SolvabilityOptions::default())?;
                println!(
                    "{r} {c} {d} | {:>3} | {}",
                    min_measurements(r, c, d),
                    rep.solvable
                );
            }
        }
    }
    Ok(())
}
