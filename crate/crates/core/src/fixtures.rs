//! Bundled example instances (the files under `fixtures/`).

use crate::error::Result;
use crate::gnss::Scenario;
use crate::graphs::{DirectedPseudorangeGraph, GnssGraph, GraphFile};

pub const FIG2A: &str = include_str!("../fixtures/fig2a.json");
pub const FIG2B: &str = include_str!("../fixtures/fig2b.json");
pub const FIG2C: &str = include_str!("../fixtures/fig2c.json");
pub const FIG2D: &str = include_str!("../fixtures/fig2d.json");
pub const FIG3A: &str = include_str!("../fixtures/fig3a_gnss.json");
pub const FIG3B: &str = include_str!("../fixtures/fig3b_gnss.json");
pub const FIG7: &str = include_str!("../fixtures/fig7_formation.json");
pub const FIG1A_SCENARIO: &str = include_str!("../fixtures/fig1a_scenario.json");
pub const FIG1B_SCENARIO: &str = include_str!("../fixtures/fig1b_scenario.json");

fn pseudorange_graph(text: &str) -> Result<DirectedPseudorangeGraph> {
    Ok(GraphFile::from_json_str(text)?.to_gnss_graph()?.gamma)
}

/// Two-way link between agents 0 and 1; agent 2 hears both (a hyperbola of
/// positions for agent 2).
pub fn fig2a() -> DirectedPseudorangeGraph {
    pseudorange_graph(FIG2A).expect("bundled fixture")
}

/// As [`fig2a`] with the arc between agents 1 and 2 flipped (an ellipse).
pub fn fig2b() -> DirectedPseudorangeGraph {
    pseudorange_graph(FIG2B).expect("bundled fixture")
}

/// Fully connected triangle plus a fourth agent hearing each corner.
pub fn fig2c() -> DirectedPseudorangeGraph {
    pseudorange_graph(FIG2C).expect("bundled fixture")
}

/// Same graph as [`fig2c`].
pub fn fig2d() -> DirectedPseudorangeGraph {
    pseudorange_graph(FIG2D).expect("bundled fixture")
}

/// Two receivers, one constellation, seven measurements.
pub fn fig1a_scenario() -> Scenario {
    Scenario::from_json_str(FIG1A_SCENARIO).expect("bundled fixture")
}

/// Two receivers, two constellations, nine measurements.
pub fn fig1b_scenario() -> Scenario {
    Scenario::from_json_str(FIG1B_SCENARIO).expect("bundled fixture")
}

pub fn fig3a() -> GnssGraph {
    GraphFile::from_json_str(FIG3A)
        .and_then(|f| f.to_gnss_graph())
        .expect("bundled fixture")
}

pub fn fig3b() -> GnssGraph {
    GraphFile::from_json_str(FIG3B)
        .and_then(|f| f.to_gnss_graph())
        .expect("bundled fixture")
}

/// Leader–follower formation with six agents in the plane.
pub fn fig7_formation() -> DirectedPseudorangeGraph {
    pseudorange_graph(FIG7).expect("bundled fixture")
}
