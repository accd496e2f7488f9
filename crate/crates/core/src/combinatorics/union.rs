//! Matroid union (matroid partition) by shortest augmenting paths.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{Edge, UndirectedMultigraph};

use super::oracle::{DistanceOracle, GraphicMatroid, MatroidRankOracle, OracleOptions};

/// Which of the two matroids an element is assigned to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Distance,
    Sync,
}

impl Side {
    const BOTH: [Side; 2] = [Side::Distance, Side::Sync];

    fn index(self) -> usize {
        match self {
            Side::Distance => 0,
            Side::Sync => 1,
        }
    }
}

/// Sides an element may be assigned to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Allowed {
    Both,
    DistanceOnly,
    SyncOnly,
}

impl Allowed {
    fn permits(self, side: Side) -> bool {
        matches!(
            (self, side),
            (Allowed::Both, _)
                | (Allowed::DistanceOnly, Side::Distance)
                | (Allowed::SyncOnly, Side::Sync)
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnionElement {
    pub edge: Edge,
    pub allowed: Allowed,
}

impl UnionElement {
    pub fn both(edge: Edge) -> Self {
        Self {
            edge,
            allowed: Allowed::Both,
        }
    }
}

/// A maximum union-independent set, described by the side of every element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnionAssignment {
    pub sides: Vec<Option<Side>>,
    pub rank: usize,
}

impl UnionAssignment {
    /// Element indices assigned to `side`.
    pub fn members(&self, side: Side) -> Vec<usize> {
        self.sides
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Some(side))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Partitions as many elements as possible into an independent set of the
/// distance matroid and an independent set of the sync matroid.
///
/// Elements are inserted one at a time. For each insertion, a breadth-first
/// search runs over the exchange graph: from an element `z` not in side `i`,
/// there is an arc to every `y` in the fundamental circuit of `z` in side
/// `i` (meaning `z` may replace `y` there), and `z` is a sink when side `i`
/// can absorb it directly. Shortest paths keep every exchange valid.
pub fn matroid_union(
    elements: &[UnionElement],
    distance: &dyn MatroidRankOracle,
    sync: &dyn MatroidRankOracle,
) -> Result<UnionAssignment> {
    let oracles: [&dyn MatroidRankOracle; 2] = [distance, sync];
    let mut sides: Vec<Option<Side>> = vec![None; elements.len()];

    for source in 0..elements.len() {
        let members: [Vec<usize>; 2] = [0, 1].map(|s| {
            (0..elements.len())
                .filter(|&i| sides[i].map(Side::index) == Some(s))
                .collect()
        });
        let bases: [Vec<Edge>; 2] =
            [0, 1].map(|s| members[s].iter().map(|&i| elements[i].edge).collect());
        let finders = [
            oracles[0].circuit_finder(&bases[0]),
            oracles[1].circuit_finder(&bases[1]),
        ];

        let mut parent: Vec<Option<(usize, Side)>> = vec![None; elements.len()];
        let mut visited = vec![false; elements.len()];
        visited[source] = true;
        let mut queue = VecDeque::from([source]);
        let mut sink = None;

        'bfs: while let Some(z) = queue.pop_front() {
            for side in Side::BOTH {
                if sides[z] == Some(side) || !elements[z].allowed.permits(side) {
                    continue;
                }
                let s = side.index();
                match finders[s](elements[z].edge) {
                    None => {
                        sink = Some((z, side));
                        break 'bfs;
                    }
                    Some(circuit) => {
                        for pos in circuit {
                            let y = members[s][pos];
                            if !visited[y] {
                                visited[y] = true;
                                parent[y] = Some((z, side));
                                queue.push_back(y);
                            }
                        }
                    }
                }
            }
        }

        if let Some((mut cur, mut side)) = sink {
            loop {
                sides[cur] = Some(side);
                match parent[cur] {
                    Some((prev, prev_side)) => {
                        cur = prev;
                        side = prev_side;
                    }
                    None => break,
                }
            }
        }
    }

    let assignment = UnionAssignment {
        rank: sides.iter().filter(|s| s.is_some()).count(),
        sides,
    };
    for side in Side::BOTH {
        let set: Vec<Edge> = assignment
            .members(side)
            .iter()
            .map(|&i| elements[i].edge)
            .collect();
        if !oracles[side.index()].is_independent(&set) {
            return Err(Error::OracleInconsistency(format!(
                "{side:?} side of the union is not independent"
            )));
        }
    }
    Ok(assignment)
}

/// Rank of the union of the distance rigidity matroid in `R^d` and the cycle
/// matroid over the elements of `m`; the generic pseudorange rank.
pub fn matroid_union_rank(
    m: &UndirectedMultigraph,
    d: usize,
    opts: OracleOptions,
) -> Result<usize> {
    let elements: Vec<UnionElement> = m.elements().into_iter().map(UnionElement::both).collect();
    let distance = DistanceOracle::for_dimension(m.n(), d, opts);
    let sync = GraphicMatroid { n: m.n() };
    Ok(matroid_union(&elements, &distance, &sync)?.rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{DirectedPseudorangeGraph, SimpleGraph};

    fn fig2a() -> UndirectedMultigraph {
        DirectedPseudorangeGraph::from_pairs(3, &[(0, 1), (1, 0), (0, 2), (1, 2)])
            .unwrap()
            .underlying()
    }

    fn fig2c() -> UndirectedMultigraph {
        let mut pairs = vec![(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)];
        pairs.extend([(0, 3), (1, 3), (2, 3)]);
        DirectedPseudorangeGraph::from_pairs(4, &pairs)
            .unwrap()
            .underlying()
    }

    #[test]
    fn union_ranks_of_planar_fixtures() {
        assert_eq!(
            matroid_union_rank(&fig2a(), 2, OracleOptions::default()).unwrap(),
            4
        );
        assert_eq!(
            matroid_union_rank(&fig2c(), 2, OracleOptions::default()).unwrap(),
            8
        );
    }

    #[test]
    fn two_graphic_matroids_on_k4() {
        // K4 has 6 edges and splits into two edge-disjoint spanning trees
        let k4 = SimpleGraph::complete(4);
        let elements: Vec<UnionElement> =
            k4.edges().iter().copied().map(UnionElement::both).collect();
        let g = GraphicMatroid { n: 4 };
        let a = matroid_union(&elements, &g, &g).unwrap();
        assert_eq!(a.rank, 6);
    }

    #[test]
    fn restricted_elements_stay_on_their_side() {
        let elements = vec![
            UnionElement {
                edge: Edge::new(0, 1),
                allowed: Allowed::SyncOnly,
            },
            UnionElement {
                edge: Edge::new(0, 1),
                allowed: Allowed::SyncOnly,
            },
            UnionElement {
                edge: Edge::new(1, 2),
                allowed: Allowed::DistanceOnly,
            },
        ];
        let g = GraphicMatroid { n: 3 };
        let a = matroid_union(&elements, &g, &g).unwrap();
        assert_eq!(a.rank, 2);
        assert_eq!(a.sides[2], Some(Side::Distance));
        assert!(a.sides[..2].contains(&None));
    }

    #[test]
    fn augmenting_path_reassigns_elements() {
        // triangle + pendant, graphic on both sides: greedy would strand an
        // element without exchanges
        let tri = [Edge::new(0, 1), Edge::new(1, 2), Edge::new(0, 2)];
        let mut elements: Vec<UnionElement> = tri.iter().copied().map(UnionElement::both).collect();
        elements.extend(tri.iter().copied().map(UnionElement::both));
        let g = GraphicMatroid { n: 3 };
        let a = matroid_union(&elements, &g, &g).unwrap();
        assert_eq!(a.rank, 4);
    }
}
