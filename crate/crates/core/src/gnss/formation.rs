//! Measurement counts for formations that use one-way pseudoranges instead
//! of two-way ranging.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{Arc, DirectedPseudorangeGraph};
use crate::rigidity::{s_d, s_p};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormationSavings {
    pub n: usize,
    pub d: usize,
    /// Messages for a minimally rigid distance formation with two-way ranging.
    pub two_way: usize,
    /// Messages for a minimally rigid pseudorange formation.
    pub pseudorange: usize,
    pub saved: usize,
    /// `saved / two_way`.
    pub ratio: f64,
}

pub fn formation_savings(n: usize, d: usize) -> Result<FormationSavings> {
    if d < 2 || n < d + 1 {
        return Err(Error::InvalidArgument(format!(
            "need d >= 2 and n >= d + 1, got n={n}, d={d}"
        )));
    }
    let two_way = 2 * s_d(n, d);
    let pseudorange = s_p(n, d);
    let saved = two_way - pseudorange;
    Ok(FormationSavings {
        n,
        d,
        two_way,
        pseudorange,
        saved,
        ratio: saved as f64 / two_way as f64,
    })
}

/// Large-`n` limit of the savings ratio, `(d − 1) / (2d)`.
pub fn asymptotic_ratio(d: usize) -> f64 {
    (d as f64 - 1.0) / (2.0 * d as f64)
}

/// Leader–follower formation: the first `d + 1` agents hear each other, and
/// every later agent hears the `d + 1` agents just before it.
pub fn formation_graph(n: usize, d: usize) -> Result<DirectedPseudorangeGraph> {
    if d < 2 || n < d + 1 {
        return Err(Error::InvalidArgument(format!(
            "need d >= 2 and n >= d + 1, got n={n}, d={d}"
        )));
    }
    let mut arcs = Vec::new();
    for u in 0..=d {
        for v in 0..=d {
            if u != v {
                arcs.push(Arc::new(u, v));
            }
        }
    }
    for v in d + 1..n {
        arcs.extend((v - d - 1..v).map(|u| Arc::new(u, v)));
    }
    DirectedPseudorangeGraph::new(n, arcs)
}
