//! The double banana meets the 3n - 6 edge count but is flexible; only the
//! randomized rank test notices.

use pseudorange_rigidity::combinatorics::randomized_distance_rank;
use pseudorange_rigidity::graphs::{Edge, SimpleGraph};
use pseudorange_rigidity::rigidity::s_d;

fn main() -> pseudorange_rigidity::Result<()> {
    let mut edges = Vec::new();
    for half in [[2, 3, 4], [5, 6, 7]] {
        for i in 0..3 {
            edges.push(Edge::new(half[i], half[(i + 1) % 3]));
            edges.push(Edge::new(0, half[i]));
            edges.push(Edge::new(1, half[i]));
        }
    }
    let g = SimpleGraph::new(8, edges)?;
    println!("edges {} (3n - 6 = {})", g.len(), s_d(8, 3));
    println!("randomized rank {}", randomized_distance_rank(&g, 3, 5, 0));
    Ok(())
}
