//! Certificates for generic rigidity of pseudorange and GNSS graphs.

use std::collections::BTreeSet;

use log::debug;

use crate::error::{Error, Result};
use crate::graphs::{
    underlying_multigraph, Decomposition, DirectedPseudorangeGraph, Edge, GnssGraph, SimpleGraph,
};
use crate::numeric::trial_seed;
use crate::rigidity::s_p;

use super::oracle::{DistanceOracle, GraphicMatroid, MatroidRankOracle, OracleOptions};
use super::union::{matroid_union, Allowed, Side, UnionElement};

const RETRIES: u64 = 3;

/// A decomposition achieving the generic rank, with the ranks of its parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionWitness {
    pub decomposition: Decomposition,
    pub rank_d: usize,
    pub rank_s: usize,
}

/// Evidence that no decomposition reaches the rank bound: the union rank
/// (a maximum over all decompositions) falls short by `deficit`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlexibleCertificate {
    pub rank: usize,
    pub bound: usize,
    pub deficit: usize,
    pub best: DecompositionWitness,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecompositionOutcome {
    Rigid(DecompositionWitness),
    Flexible(FlexibleCertificate),
}

impl DecompositionOutcome {
    pub fn is_rigid(&self) -> bool {
        matches!(self, DecompositionOutcome::Rigid(_))
    }

    /// Generic rank of the constraint set.
    pub fn rank(&self) -> usize {
        match self {
            DecompositionOutcome::Rigid(w) => w.rank_d + w.rank_s,
            DecompositionOutcome::Flexible(c) => c.rank,
        }
    }

    pub fn witness(&self) -> &DecompositionWitness {
        match self {
            DecompositionOutcome::Rigid(w) => w,
            DecompositionOutcome::Flexible(c) => &c.best,
        }
    }
}

/// Decides generic rigidity of a pseudorange graph in `R^d` and returns a
/// maximizing decomposition of its underlying multigraph.
pub fn find_rigid_decomposition(
    gamma: &DirectedPseudorangeGraph,
    d: usize,
    opts: OracleOptions,
) -> Result<DecompositionOutcome> {
    find_gnss_decomposition(&GnssGraph::from_pseudorange(gamma.clone()), d, opts)
}

/// Decides generic rigidity of a GNSS graph. Extra distance edges can only
/// join the distance side and extra sync edges only the sync side.
pub fn find_gnss_decomposition(
    gg: &GnssGraph,
    d: usize,
    opts: OracleOptions,
) -> Result<DecompositionOutcome> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "dimension must be at least 2, got {d}"
        )));
    }
    let mut last_err = None;
    for attempt in 0..RETRIES {
        let seeded = OracleOptions {
            seed: if attempt == 0 {
                opts.seed
            } else {
                trial_seed(opts.seed, 1000 + attempt)
            },
            ..opts
        };
        let oracle = DistanceOracle::for_dimension(gg.n(), d, seeded);
        match decompose_with(gg, d, &oracle) {
            Ok(out) if oracle.consistent() => return Ok(out),
            Ok(_) => {
                debug!("oracle samples disagreed on attempt {attempt}; resampling");
                last_err = Some(Error::OracleInconsistency(
                    "random samples kept disagreeing on independence".into(),
                ));
            }
            Err(e @ Error::OracleInconsistency(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

fn decompose_with(
    gg: &GnssGraph,
    d: usize,
    oracle: &DistanceOracle,
) -> Result<DecompositionOutcome> {
    let n = gg.n();
    let m = underlying_multigraph(&gg.gamma);
    let restricted = |edges: &[Edge], allowed| -> Vec<UnionElement> {
        edges
            .iter()
            .map(|&edge| UnionElement { edge, allowed })
            .collect()
    };
    let mut elements = restricted(gg.g_d.edges(), Allowed::DistanceOnly);
    elements.extend(restricted(gg.g_s.edges(), Allowed::SyncOnly));
    let first_pr = elements.len();
    elements.extend(m.elements().into_iter().map(UnionElement::both));

    let sync = GraphicMatroid { n };
    let assignment = matroid_union(&elements, oracle, &sync)?;

    let mut e_d: Vec<Edge> = gg.g_d.edges().to_vec();
    let mut e_s: Vec<Edge> = gg.g_s.edges().to_vec();
    e_d.extend(m.double_edges());
    e_s.extend(m.double_edges());
    let singles: BTreeSet<Edge> = m.single_edges().iter().copied().collect();
    for (i, el) in elements.iter().enumerate().skip(first_pr) {
        if !singles.contains(&el.edge) {
            continue;
        }
        if assignment.sides[i] == Some(Side::Sync) {
            e_s.push(el.edge);
        } else {
            e_d.push(el.edge);
        }
    }
    let g_d = SimpleGraph::from_edges_dedup(n, e_d);
    let g_s = SimpleGraph::from_edges_dedup(n, e_s);
    let rank_d = oracle.rank(g_d.edges());
    let rank_s = sync.rank(g_s.edges());
    if rank_d + rank_s != assignment.rank {
        return Err(Error::OracleInconsistency(format!(
            "decomposition ranks {rank_d} + {rank_s} differ from union rank {}",
            assignment.rank
        )));
    }
    let witness = DecompositionWitness {
        decomposition: Decomposition { g_d, g_s },
        rank_d,
        rank_s,
    };
    let bound = s_p(n, d);
    Ok(if assignment.rank >= bound {
        DecompositionOutcome::Rigid(witness)
    } else {
        DecompositionOutcome::Flexible(FlexibleCertificate {
            rank: assignment.rank,
            bound,
            deficit: bound - assignment.rank,
            best: witness,
        })
    })
}

/// Checks that `dec` is a decomposition of a GNSS graph: every double
/// pseudorange edge sits in both parts, every single one in at least one
/// part (and in exactly one unless the other part already has it as an
/// extra constraint), and nothing else appears beyond the extra constraints.
pub fn validate_gnss_decomposition(gg: &GnssGraph, dec: &Decomposition) -> bool {
    let n = gg.n();
    if dec.g_d.n() != n || dec.g_s.n() != n {
        return false;
    }
    let m = underlying_multigraph(&gg.gamma);
    let out_d = dec.g_d.edge_set();
    let out_s = dec.g_s.edge_set();
    let in_d = gg.g_d.edge_set();
    let in_s = gg.g_s.edge_set();
    let pairs: BTreeSet<Edge> = m
        .single_edges()
        .iter()
        .chain(m.double_edges())
        .copied()
        .collect();

    if !out_d.iter().all(|e| in_d.contains(e) || pairs.contains(e))
        || !out_s.iter().all(|e| in_s.contains(e) || pairs.contains(e))
        || !in_d.is_subset(&out_d)
        || !in_s.is_subset(&out_s)
    {
        return false;
    }
    let doubles_ok = m
        .double_edges()
        .iter()
        .all(|e| out_d.contains(e) && out_s.contains(e));
    let singles_ok = m.single_edges().iter().all(|e| {
        let (a, b) = (out_d.contains(e), out_s.contains(e));
        (a && (!b || in_s.contains(e))) || (b && (!a || in_d.contains(e)))
    });
    doubles_ok && singles_ok
}
