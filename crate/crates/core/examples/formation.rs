//! Message counts for a minimally rigid formation: two-way ranging versus
//! one-way pseudoranges.

use pseudorange_rigidity::combinatorics::{find_rigid_decomposition, OracleOptions};
use pseudorange_rigidity::gnss::{asymptotic_ratio, formation_graph, formation_savings};

fn main() -> pseudorange_rigidity::Result<()> {
    for d in [2, 3] {
        println!("d = {d} (limit {:.1}%)", 100.0 * asymptotic_ratio(d));
        for n in [d + 1, 5, 10, 20, 50, 100] {
            let f = formation_savings(n, d)?;
            println!(
                "  n={n:>3}: {:>3} two-way, {:>3} pseudorange, {:.2}% saved",
                f.two_way,
                f.pseudorange,
                100.0 * f.ratio
            );
        }
    }
    let g = formation_graph(8, 3)?;
    let out = find_rigid_decomposition(&g, 3, OracleOptions::default())?;
    println!(
        "leader-follower graph with 8 agents: {} arcs, rigid: {}",
        g.len(),
        out.is_rigid()
    );
    Ok(())
}
