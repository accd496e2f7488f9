//! Shared helpers: random graph generation and a brute-force rank oracle that
//! does not go through the matroid machinery.
#![allow(dead_code)]

use nalgebra::DMatrix;
use pseudorange_rigidity::graphs::{
    enumerate_decompositions, incidence_matrix, Arc, DirectedPseudorangeGraph, Edge, SimpleGraph,
};
use pseudorange_rigidity::numeric::{
    numeric_rank, rng_from_seed, sample_configuration, SampleMode, TolerancePolicy,
};
use pseudorange_rigidity::rigidity::Configuration;
use rand::Rng;

/// Random directed pseudorange graph. Each vertex pair independently gets no
/// arc, one arc (random direction) or both arcs; graphs with more than
/// `max_single` one-way pairs are redrawn so exhaustive enumeration stays cheap.
pub fn random_digraph(n: usize, max_single: usize, seed: u64) -> DirectedPseudorangeGraph {
    let mut rng = rng_from_seed(seed);
    loop {
        let mut arcs = Vec::new();
        let mut singles = 0;
        for u in 0..n {
            for v in u + 1..n {
                match rng.random_range(0..4) {
                    0 => {}
                    1 => {
                        arcs.push(if rng.random_bool(0.5) {
                            Arc::new(u, v)
                        } else {
                            Arc::new(v, u)
                        });
                        singles += 1;
                    }
                    _ if rng.random_bool(0.5) => {
                        arcs.push(Arc::new(u, v));
                        arcs.push(Arc::new(v, u));
                    }
                    _ => {
                        arcs.push(if rng.random_bool(0.5) {
                            Arc::new(u, v)
                        } else {
                            Arc::new(v, u)
                        });
                        singles += 1;
                    }
                }
            }
        }
        if singles <= max_single {
            return DirectedPseudorangeGraph::new(n, arcs).unwrap();
        }
    }
}

/// Distance rigidity matrix written out directly from its definition.
pub fn distance_matrix(n: usize, d: usize, edges: &[Edge], config: &Configuration) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(edges.len(), n * d);
    for (row, e) in edges.iter().enumerate() {
        let (u, v) = (e.u(), e.v());
        for k in 0..d {
            let diff = config.position(u)[k] - config.position(v)[k];
            m[(row, u * d + k)] = diff;
            m[(row, v * d + k)] = -diff;
        }
    }
    m
}

pub fn configs(n: usize, d: usize, count: usize, seed: u64) -> Vec<Configuration> {
    (0..count)
        .map(|k| {
            sample_configuration(
                n,
                d,
                seed.wrapping_mul(7919).wrapping_add(k as u64),
                SampleMode::default(),
            )
            .unwrap()
        })
        .collect()
}

pub fn max_distance_rank(g: &SimpleGraph, d: usize, configs: &[Configuration]) -> usize {
    configs
        .iter()
        .map(|c| {
            numeric_rank(
                &distance_matrix(g.n(), d, g.edges(), c),
                TolerancePolicy::default(),
            )
            .unwrap()
        })
        .max()
        .unwrap_or(0)
}

/// `max over decompositions of rank R_D(G_D) + rank B(G_S)` by brute force.
pub fn exhaustive_rank(gamma: &DirectedPseudorangeGraph, d: usize, seed: u64) -> usize {
    let m = gamma.underlying();
    let cs = configs(gamma.n(), d, 3, seed);
    enumerate_decompositions(&m, 20)
        .unwrap()
        .map(|dec| {
            let rs = numeric_rank(&incidence_matrix(&dec.g_s), TolerancePolicy::default()).unwrap();
            max_distance_rank(&dec.g_d, d, &cs) + rs
        })
        .max()
        .unwrap()
}

/// Wall-clock helper for the runtime bounds.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, std::time::Duration) {
    let start = std::time::Instant::now();
    let out = f();
    (out, start.elapsed())
}
