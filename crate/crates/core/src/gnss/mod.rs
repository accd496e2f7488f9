//! Cooperative GNSS: scenarios, their GNSS graphs, solvability, simulated
//! measurements, Newton estimation and formation measurement counts.

mod estimator;
mod formation;
mod scenario;

pub use estimator::{
    estimate, initial_guess, partition_parameters, simulate_measurements, unknown_count,
    EstimateOptions, EstimationResult, Init, MeasurementModel, Parameters,
};
pub use formation::{asymptotic_ratio, formation_graph, formation_savings, FormationSavings};
pub use scenario::{
    build_gnss_graph, generate_random_scenario, min_measurements, minimal_solvable_scenario,
    Constellation, GeneratorSpec, Receiver, Satellite, Scenario, SCHEMA_VERSION, SHELL_RADIUS,
};

use log::warn;

use crate::combinatorics::{find_gnss_decomposition, DecompositionOutcome, OracleOptions};
use crate::error::Result;
use crate::graphs::GnssGraph;
use crate::numeric::TolerancePolicy;
use crate::rigidity::{generic_gnss_rank_numeric, s_p, RankOptions, SampledRank};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolvabilityOptions {
    pub trials: usize,
    pub seed: u64,
    pub tol: TolerancePolicy,
}

impl Default for SolvabilityOptions {
    fn default() -> Self {
        Self {
            trials: 5,
            seed: 0,
            tol: TolerancePolicy::default(),
        }
    }
}

/// Both verdicts on a scenario. `solvable` follows the numeric generic rank;
/// `agree` is false if the decomposition search says otherwise.
#[derive(Clone, Debug)]
pub struct SolvabilityReport {
    pub graph: GnssGraph,
    pub solvable: bool,
    pub rank: usize,
    pub bound: usize,
    pub numeric: SampledRank,
    /// Absent when the scenario has fewer than `d` satellites.
    pub combinatorial: Option<DecompositionOutcome>,
    pub agree: bool,
    pub warnings: Vec<String>,
}

pub fn is_solvable(s: &Scenario, opts: SolvabilityOptions) -> Result<SolvabilityReport> {
    let graph = build_gnss_graph(s)?;
    let d = s.d();
    let numeric = generic_gnss_rank_numeric(
        &graph,
        d,
        RankOptions {
            trials: opts.trials,
            seed: opts.seed,
            tol: opts.tol,
            ..RankOptions::default()
        },
    )?;
    let mut warnings = Vec::new();
    if !numeric.consistent() {
        warnings.push(format!(
            "sampled ranks disagree across trials: {:?}",
            numeric.trial_ranks
        ));
    }
    let combinatorial = if s.satellite_count() < d {
        let msg = format!(
            "only {} satellites for dimension {d}; using the numeric rank alone",
            s.satellite_count()
        );
        warn!("{msg}");
        warnings.push(msg);
        None
    } else {
        Some(find_gnss_decomposition(
            &graph,
            d,
            OracleOptions {
                trials: opts.trials,
                seed: opts.seed,
                tol: opts.tol,
            },
        )?)
    };
    let solvable = numeric.rigid();
    let agree = combinatorial
        .as_ref()
        .is_none_or(|c| c.is_rigid() == solvable && c.rank() == numeric.rank);
    if !agree {
        let msg = "numeric and combinatorial verdicts disagree".to_string();
        warn!("{msg}");
        warnings.push(msg);
    }
    Ok(SolvabilityReport {
        rank: numeric.rank,
        bound: s_p(graph.n(), d),
        graph,
        solvable,
        numeric,
        combinatorial,
        agree,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_pvt_is_solvable() {
        let s = generate_random_scenario(GeneratorSpec {
            receivers: 1,
            constellations: 1,
            sats_per_constellation: 4,
            d: 3,
            visibility: 4,
            inter_receiver_edges: 0,
            seed: 1,
        })
        .unwrap();
        let r = is_solvable(&s, SolvabilityOptions::default()).unwrap();
        assert!(r.solvable && r.agree);
        assert_eq!(r.rank, r.bound);

        let short = s
            .with_measurements(s.pseudoranges[..3].to_vec(), vec![])
            .unwrap();
        let r = is_solvable(&short, SolvabilityOptions::default()).unwrap();
        assert!(!r.solvable && r.agree);
    }

    #[test]
    fn minimal_scenarios_are_solvable() {
        for (rc, cc, d) in [(1, 2, 2), (2, 2, 3), (3, 1, 2)] {
            let s = minimal_solvable_scenario(rc, cc, d, 4).unwrap();
            let r = is_solvable(&s, SolvabilityOptions::default()).unwrap();
            assert!(
                r.solvable && r.agree,
                "R={rc} C={cc} d={d}: {} / {}",
                r.rank,
                r.bound
            );
        }
    }
}
