//! (2,3) pebble game for generic rigidity in the plane.

use crate::graphs::{Edge, SimpleGraph, VertexId};

/// Incremental (2,3) pebble game. Each vertex starts with two pebbles; an
/// edge is accepted when four pebbles can be gathered on its endpoints.
#[derive(Clone, Debug)]
pub struct PebbleGame {
    pebbles: Vec<u8>,
    out: Vec<Vec<VertexId>>,
    accepted: usize,
}

impl PebbleGame {
    pub fn new(n: usize) -> Self {
        Self {
            pebbles: vec![2; n],
            out: vec![Vec::new(); n],
            accepted: 0,
        }
    }

    /// Number of accepted (independent) edges so far.
    pub fn accepted(&self) -> usize {
        self.accepted
    }

    /// Tries to insert edge `uv`. Returns whether it is independent of the
    /// edges accepted so far.
    pub fn try_insert(&mut self, u: VertexId, v: VertexId) -> bool {
        if u == v {
            return false;
        }
        while self.pebbles[u] < 2 && self.fetch(u, v) {}
        while self.pebbles[v] < 2 && self.fetch(v, u) {}
        if self.pebbles[u] + self.pebbles[v] < 4 {
            return false;
        }
        self.pebbles[u] -= 1;
        self.out[u].push(v);
        self.accepted += 1;
        true
    }

    /// Moves one free pebble to `root` by reversing a directed path, never
    /// passing through `keep`.
    fn fetch(&mut self, root: VertexId, keep: VertexId) -> bool {
        let n = self.pebbles.len();
        let mut pred: Vec<Option<VertexId>> = vec![None; n];
        let mut visited = vec![false; n];
        visited[root] = true;
        visited[keep] = true;
        let mut stack = vec![root];
        let mut found = None;
        'search: while let Some(x) = stack.pop() {
            let mut next: Vec<VertexId> = self.out[x].clone();
            next.sort_unstable();
            next.dedup();
            // reversed so that the smallest id is explored first
            for &y in next.iter().rev() {
                if visited[y] {
                    continue;
                }
                visited[y] = true;
                pred[y] = Some(x);
                if self.pebbles[y] > 0 {
                    found = Some(y);
                    break 'search;
                }
                stack.push(y);
            }
        }
        let Some(w) = found else {
            return false;
        };
        let mut cur = w;
        while let Some(p) = pred[cur] {
            let pos = self.out[p]
                .iter()
                .position(|&t| t == cur)
                .expect("path edge exists");
            self.out[p].swap_remove(pos);
            self.out[cur].push(p);
            cur = p;
        }
        self.pebbles[w] -= 1;
        self.pebbles[root] += 1;
        true
    }
}

/// Rank of an edge list in the generic 2D distance rigidity matroid. Repeated
/// pairs are allowed and count as parallel elements.
pub fn pebble_rank(n: usize, edges: &[Edge]) -> usize {
    let mut game = PebbleGame::new(n);
    for e in edges {
        game.try_insert(e.u(), e.v());
    }
    game.accepted()
}

/// Generic rank of the planar distance rigidity matrix of `g`.
pub fn laman_rank_2d(g: &SimpleGraph) -> usize {
    pebble_rank(g.n(), g.edges())
}
