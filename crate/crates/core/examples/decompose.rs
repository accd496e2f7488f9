//! Splits a rigid pseudorange graph into a distance graph and a sync graph
//! whose ranks add up to the maximum.

use pseudorange_rigidity::combinatorics::{find_rigid_decomposition, OracleOptions};
use pseudorange_rigidity::fixtures;

fn main() -> pseudorange_rigidity::Result<()> {
    let g = fixtures::fig2c();
    let out = find_rigid_decomposition(&g, 2, OracleOptions::default())?;
    let w = out.witness();
    println!(
        "rigid: {}, rank {} = {} + {}",
        out.is_rigid(),
        out.rank(),
        w.rank_d,
        w.rank_s
    );
    println!("G_D: {:?}", w.decomposition.g_d.edges());
    println!("G_S: {:?}", w.decomposition.g_s.edges());
    Ok(())
}
