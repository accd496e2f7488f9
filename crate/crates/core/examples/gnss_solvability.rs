//! Two receivers, eight satellites, one inter-receiver range. Splitting the
//! satellites into two constellations makes the problem solvable.

use pseudorange_rigidity::fixtures;
use pseudorange_rigidity::gnss::{is_solvable, SolvabilityOptions};

fn main() -> pseudorange_rigidity::Result<()> {
    for (name, s) in [
        ("one constellation", fixtures::fig1a_scenario()),
        ("two constellations", fixtures::fig1b_scenario()),
    ] {
        let r = is_solvable(&s, SolvabilityOptions::default())?;
        println!(
            "{name}: {} measurements, rank {} / {} -> {}",
            s.measurement_count(),
            r.rank,
            r.bound,
            if r.solvable { "solvable" } else { "unsolvable" }
        );
        if let Some(c) = &r.combinatorial {
            let w = c.witness();
            println!(
                "  distance part rank {}, sync part rank {}",
                w.rank_d, w.rank_s
            );
        }
    }
    Ok(())
}
