use std::collections::{BTreeSet, HashMap};

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{Arc, DirectedPseudorangeGraph, Edge, GnssGraph, SimpleGraph, VertexId};
use crate::numeric::rng_from_seed;
use crate::rigidity::Configuration;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Satellite {
    pub id: String,
    pub position: Vec<f64>,
}

/// Satellites sharing one clock.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constellation {
    pub id: String,
    pub bias: f64,
    pub satellites: Vec<Satellite>,
}

/// A cooperating receiver. Position and bias are the ground truth used for
/// simulation and error reporting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Receiver {
    pub id: String,
    pub position: Vec<f64>,
    pub bias: f64,
}

/// A positioning problem: who sees whom, plus ground truth. Array order is
/// the canonical order of vertices and measurements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub dimension: usize,
    pub constellations: Vec<Constellation>,
    pub receivers: Vec<Receiver>,
    /// `[satellite, receiver]` pairs.
    #[serde(default)]
    pub pseudoranges: Vec<[String; 2]>,
    /// `[receiver, receiver]` pairs.
    #[serde(default)]
    pub distances: Vec<[String; 2]>,
    #[serde(default)]
    pub noise_sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Agent {
    Satellite {
        constellation: usize,
        vertex: VertexId,
    },
    Receiver {
        index: usize,
        vertex: VertexId,
    },
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(s)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn d(&self) -> usize {
        self.dimension
    }

    pub fn satellite_count(&self) -> usize {
        self.constellations.iter().map(|c| c.satellites.len()).sum()
    }

    pub fn receiver_count(&self) -> usize {
        self.receivers.len()
    }

    pub fn constellation_count(&self) -> usize {
        self.constellations.len()
    }

    /// Agents in the GNSS graph: satellites first, then receivers.
    pub fn agent_count(&self) -> usize {
        self.satellite_count() + self.receiver_count()
    }

    /// Pseudoranges plus receiver distances.
    pub fn measurement_count(&self) -> usize {
        self.pseudoranges.len() + self.distances.len()
    }

    /// Vertex labels in vertex order.
    pub fn vertex_labels(&self) -> Vec<String> {
        self.constellations
            .iter()
            .flat_map(|c| c.satellites.iter().map(|s| s.id.clone()))
            .chain(self.receivers.iter().map(|r| r.id.clone()))
            .collect()
    }

    /// Vertex id of receiver `index`.
    pub fn receiver_vertex(&self, index: usize) -> VertexId {
        self.satellite_count() + index
    }

    fn agents(&self) -> Result<HashMap<&str, Agent>> {
        let mut map = HashMap::new();
        let mut vertex = 0;
        for (c, con) in self.constellations.iter().enumerate() {
            for sat in &con.satellites {
                if map
                    .insert(
                        sat.id.as_str(),
                        Agent::Satellite {
                            constellation: c,
                            vertex,
                        },
                    )
                    .is_some()
                {
                    return Err(Error::InvalidScenario(format!("duplicate id `{}`", sat.id)));
                }
                vertex += 1;
            }
        }
        for (index, r) in self.receivers.iter().enumerate() {
            if map
                .insert(r.id.as_str(), Agent::Receiver { index, vertex })
                .is_some()
            {
                return Err(Error::InvalidScenario(format!("duplicate id `{}`", r.id)));
            }
            vertex += 1;
        }
        Ok(map)
    }

    fn lookup(map: &HashMap<&str, Agent>, id: &str) -> Result<Agent> {
        map.get(id)
            .copied()
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    /// Resolved pseudoranges as `(constellation, satellite vertex, receiver index)`.
    pub(crate) fn resolved_pseudoranges(&self) -> Result<Vec<(usize, VertexId, usize)>> {
        let map = self.agents()?;
        self.pseudoranges
            .iter()
            .map(
                |[s, r]| match (Self::lookup(&map, s)?, Self::lookup(&map, r)?) {
                    (
                        Agent::Satellite {
                            constellation,
                            vertex,
                        },
                        Agent::Receiver { index, .. },
                    ) => Ok((constellation, vertex, index)),
                    _ => Err(Error::InvalidScenario(format!(
                        "pseudorange [{s}, {r}] must go from a satellite to a receiver"
                    ))),
                },
            )
            .collect()
    }

    /// Resolved receiver distances as pairs of receiver indices.
    pub(crate) fn resolved_distances(&self) -> Result<Vec<(usize, usize)>> {
        let map = self.agents()?;
        self.distances
            .iter()
            .map(
                |[a, b]| match (Self::lookup(&map, a)?, Self::lookup(&map, b)?) {
                    (Agent::Receiver { index: i, .. }, Agent::Receiver { index: j, .. })
                        if i != j =>
                    {
                        Ok((i, j))
                    }
                    _ => Err(Error::InvalidScenario(format!(
                        "distance [{a}, {b}] must join two different receivers"
                    ))),
                },
            )
            .collect()
    }

    /// Checks schema, dimensions, finiteness, id uniqueness and measurement
    /// endpoints.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::InvalidScenario(format!(
                "unsupported schema {}, expected {SCHEMA_VERSION}",
                self.schema
            )));
        }
        if self.dimension < 2 {
            return Err(Error::InvalidScenario(format!(
                "dimension must be at least 2, got {}",
                self.dimension
            )));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(Error::InvalidScenario(
                "noise_sigma must be a non-negative number".into(),
            ));
        }
        let check_point = |id: &str, p: &[f64]| {
            if p.len() != self.dimension {
                Err(Error::InvalidScenario(format!(
                    "`{id}` has {} coordinates, expected {}",
                    p.len(),
                    self.dimension
                )))
            } else if p.iter().any(|v| !v.is_finite()) {
                Err(Error::InvalidScenario(format!(
                    "`{id}` has a non-finite coordinate"
                )))
            } else {
                Ok(())
            }
        };
        let mut constellation_ids = BTreeSet::new();
        for c in &self.constellations {
            if !constellation_ids.insert(&c.id) {
                return Err(Error::InvalidScenario(format!(
                    "duplicate constellation `{}`",
                    c.id
                )));
            }
            if !c.bias.is_finite() {
                return Err(Error::InvalidScenario(format!(
                    "constellation `{}` has a non-finite bias",
                    c.id
                )));
            }
            for s in &c.satellites {
                check_point(&s.id, &s.position)?;
            }
        }
        for r in &self.receivers {
            check_point(&r.id, &r.position)?;
            if !r.bias.is_finite() {
                return Err(Error::InvalidScenario(format!(
                    "receiver `{}` has a non-finite bias",
                    r.id
                )));
            }
        }
        let arcs = self.resolved_pseudoranges()?;
        let mut seen = BTreeSet::new();
        for &(_, s, r) in &arcs {
            if !seen.insert((s, r)) {
                return Err(Error::InvalidScenario(format!(
                    "pseudorange to `{}` listed twice",
                    self.receivers[r].id
                )));
            }
        }
        let mut seen = BTreeSet::new();
        for (i, j) in self.resolved_distances()? {
            if !seen.insert(Edge::new(i, j)) {
                return Err(Error::InvalidScenario(format!(
                    "distance between `{}` and `{}` listed twice",
                    self.receivers[i].id, self.receivers[j].id
                )));
            }
        }
        Ok(())
    }

    /// Ground-truth configuration in vertex order; satellites carry their
    /// constellation's bias.
    pub fn truth_configuration(&self) -> Result<Configuration> {
        let mut positions = Vec::with_capacity(self.agent_count());
        let mut biases = Vec::with_capacity(self.agent_count());
        for c in &self.constellations {
            for s in &c.satellites {
                positions.push(s.position.clone());
                biases.push(c.bias);
            }
        }
        for r in &self.receivers {
            positions.push(r.position.clone());
            biases.push(r.bias);
        }
        Configuration::new(self.dimension, &positions, biases)
    }

    /// Largest distance of any agent from the centroid of all agents.
    pub fn scene_scale(&self) -> f64 {
        let points: Vec<&[f64]> = self
            .constellations
            .iter()
            .flat_map(|c| c.satellites.iter().map(|s| s.position.as_slice()))
            .chain(self.receivers.iter().map(|r| r.position.as_slice()))
            .collect();
        if points.is_empty() {
            return 0.0;
        }
        let d = self.dimension;
        let mut centroid = vec![0.0; d];
        for p in &points {
            for k in 0..d {
                centroid[k] += p[k] / points.len() as f64;
            }
        }
        points
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&centroid)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Same agents with a different measurement set.
    pub fn with_measurements(
        &self,
        pseudoranges: Vec<[String; 2]>,
        distances: Vec<[String; 2]>,
    ) -> Result<Self> {
        let out = Scenario {
            pseudoranges,
            distances,
            ..self.clone()
        };
        out.validate()?;
        Ok(out)
    }
}

/// The GNSS graph of a scenario. Vertices are satellites (in constellation
/// order) followed by receivers. Arcs run satellite → receiver; distance
/// edges are the receiver distances followed by all satellite pairs; each
/// constellation contributes a sync path through its satellites.
pub fn build_gnss_graph(s: &Scenario) -> Result<GnssGraph> {
    s.validate()?;
    let n = s.agent_count();
    let arcs = s
        .resolved_pseudoranges()?
        .into_iter()
        .map(|(_, sat, r)| Arc::new(sat, s.receiver_vertex(r)))
        .collect();
    let gamma = DirectedPseudorangeGraph::new(n, arcs)?;

    let mut distance: Vec<Edge> = s
        .resolved_distances()?
        .into_iter()
        .map(|(i, j)| Edge::new(s.receiver_vertex(i), s.receiver_vertex(j)))
        .collect();
    let sats = s.satellite_count();
    for a in 0..sats {
        for b in a + 1..sats {
            distance.push(Edge::new(a, b));
        }
    }
    let mut sync = Vec::new();
    let mut first = 0;
    for c in &s.constellations {
        let k = c.satellites.len();
        sync.extend(
            (first..first + k)
                .zip(first + 1..first + k)
                .map(|(a, b)| Edge::new(a, b)),
        );
        first += k;
    }
    GnssGraph::new(
        gamma,
        SimpleGraph::new(n, distance)?,
        SimpleGraph::new(n, sync)?,
    )
}

/// Fewest measurements that can make `receivers` receivers solvable with
/// `constellations` constellations in `R^d`.
pub fn min_measurements(receivers: usize, constellations: usize, d: usize) -> usize {
    receivers * (d + 1) + constellations - 1
}

/// Parameters of [`generate_random_scenario`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub receivers: usize,
    pub constellations: usize,
    pub sats_per_constellation: usize,
    pub d: usize,
    /// Pseudoranges per receiver per constellation.
    pub visibility: usize,
    pub inter_receiver_edges: usize,
    pub seed: u64,
}

pub const SHELL_RADIUS: f64 = 10.0;

fn constellation_label(c: usize) -> String {
    let mut label = String::new();
    let mut k = c;
    loop {
        label.insert(0, (b'A' + (k % 26) as u8) as char);
        if k < 26 {
            break;
        }
        k = k / 26 - 1;
    }
    label
}

fn shell_point<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| SHELL_RADIUS * x / norm).collect();
        }
    }
}

/// Random scenario: satellites on a shell of radius 10, receivers in the
/// unit box, biases uniform in `[-1, 1]`, measurements wired uniformly at
/// random. Deterministic per seed.
pub fn generate_random_scenario(spec: GeneratorSpec) -> Result<Scenario> {
    let GeneratorSpec {
        receivers,
        constellations,
        sats_per_constellation,
        d,
        visibility,
        inter_receiver_edges,
        seed,
    } = spec;
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "dimension must be at least 2, got {d}"
        )));
    }
    if visibility > sats_per_constellation {
        return Err(Error::Infeasible(format!(
            "{visibility} pseudoranges per constellation but only {sats_per_constellation} satellites"
        )));
    }
    let pairs = receivers * receivers.saturating_sub(1) / 2;
    if inter_receiver_edges > pairs {
        return Err(Error::Infeasible(format!(
            "{inter_receiver_edges} distance edges but only {pairs} receiver pairs"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let constellations: Vec<Constellation> = (0..constellations)
        .map(|c| {
            let label = constellation_label(c);
            Constellation {
                bias: rng.random_range(-1.0..=1.0),
                satellites: (0..sats_per_constellation)
                    .map(|k| Satellite {
                        id: format!("{label}{}", k + 1),
                        position: shell_point(&mut rng, d),
                    })
                    .collect(),
                id: label,
            }
        })
        .collect();
    let receivers: Vec<Receiver> = (0..receivers)
        .map(|i| Receiver {
            id: format!("r{}", i + 1),
            position: (0..d).map(|_| rng.random_range(0.0..=1.0)).collect(),
            bias: rng.random_range(-1.0..=1.0),
        })
        .collect();
    let mut pseudoranges = Vec::new();
    for r in &receivers {
        for c in &constellations {
            let mut picks = sample(&mut rng, sats_per_constellation, visibility).into_vec();
            picks.sort_unstable();
            pseudoranges.extend(
                picks
                    .into_iter()
                    .map(|k| [c.satellites[k].id.clone(), r.id.clone()]),
            );
        }
    }
    let all_pairs: Vec<(usize, usize)> = (0..receivers.len())
        .flat_map(|i| (i + 1..receivers.len()).map(move |j| (i, j)))
        .collect();
    let mut picks = sample(&mut rng, all_pairs.len(), inter_receiver_edges).into_vec();
    picks.sort_unstable();
    let distances = picks
        .into_iter()
        .map(|k| {
            let (i, j) = all_pairs[k];
            [receivers[i].id.clone(), receivers[j].id.clone()]
        })
        .collect();
    let scenario = Scenario {
        schema: SCHEMA_VERSION,
        dimension: d,
        constellations,
        receivers,
        pseudoranges,
        distances,
        noise_sigma: 0.0,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// A solvable scenario with exactly [`min_measurements`] measurements.
///
/// Every constellation has `d + 1` satellites. The first receiver sees all
/// of the first constellation and one satellite of each other one; each later
/// receiver ranges to its predecessor and sees `d` satellites of the first
/// constellation.
pub fn minimal_solvable_scenario(
    receivers: usize,
    constellations: usize,
    d: usize,
    seed: u64,
) -> Result<Scenario> {
    if receivers == 0 || constellations == 0 {
        return Err(Error::InvalidArgument(
            "need at least one receiver and one constellation".into(),
        ));
    }
    let base = generate_random_scenario(GeneratorSpec {
        receivers,
        constellations,
        sats_per_constellation: d + 1,
        d,
        visibility: 0,
        inter_receiver_edges: 0,
        seed,
    })?;
    let rid = |i: usize| base.receivers[i].id.clone();
    let sat = |c: usize, k: usize| base.constellations[c].satellites[k].id.clone();
    let mut pseudoranges: Vec<[String; 2]> = (0..=d).map(|k| [sat(0, k), rid(0)]).collect();
    pseudoranges.extend((1..constellations).map(|c| [sat(c, 0), rid(0)]));
    let mut distances = Vec::new();
    for i in 1..receivers {
        pseudoranges.extend((0..d).map(|k| [sat(0, k), rid(i)]));
        distances.push([rid(i - 1), rid(i)]);
    }
    base.with_measurements(pseudoranges, distances)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Scenario {
        Scenario::from_json_str(
            r#"{"schema":1,"dimension":3,
                "constellations":[{"id":"G","bias":0.5,"satellites":[{"id":"G1","position":[10,0,0]}]}],
                "receivers":[{"id":"r1","position":[0,0,0],"bias":0.1}],
                "pseudoranges":[["G1","r1"]]}"#,
        )
        .unwrap()
    }

    #[test]
    fn single_arc_graph() {
        let gg = build_gnss_graph(&tiny()).unwrap();
        assert_eq!(gg.gamma.arcs(), &[Arc::new(0, 1)]);
        assert!(gg.g_d.is_empty());
        assert!(gg.g_s.is_empty());
    }

    #[test]
    fn singleton_constellations_have_no_sync_edges() {
        let mut s = tiny();
        s.constellations.push(Constellation {
            id: "E".into(),
            bias: 0.0,
            satellites: vec![Satellite {
                id: "E1".into(),
                position: vec![0.0, 10.0, 0.0],
            }],
        });
        let gg = build_gnss_graph(&s).unwrap();
        assert!(gg.g_s.is_empty());
        assert_eq!(gg.g_d.edges(), &[Edge::new(0, 1)]);
    }

    #[test]
    fn rejects_bad_documents() {
        let mut s = tiny();
        s.pseudoranges = vec![["r1".into(), "G1".into()]];
        assert!(matches!(s.validate(), Err(Error::InvalidScenario(_))));
        s.pseudoranges = vec![["G9".into(), "r1".into()]];
        assert!(matches!(s.validate(), Err(Error::UnknownId(_))));
        let mut s = tiny();
        s.receivers[0].id = "G1".into();
        assert!(s.validate().is_err());
        let mut s = tiny();
        s.schema = 2;
        assert!(s.validate().is_err());
        assert!(Scenario::from_json_str(
            r#"{"schema":1,"dimension":3,"constellations":[],"receivers":[],"extra":1}"#
        )
        .is_err());
    }

    #[test]
    fn minimum_measurement_counts() {
        assert_eq!(min_measurements(1, 1, 3), 4);
        assert_eq!(min_measurements(2, 2, 3), 9);
        assert_eq!(min_measurements(2, 1, 3), 8);
    }

    #[test]
    fn generator_is_deterministic_and_shaped() {
        let spec = GeneratorSpec {
            receivers: 2,
            constellations: 2,
            sats_per_constellation: 2,
            d: 3,
            visibility: 2,
            inter_receiver_edges: 1,
            seed: 7,
        };
        let a = generate_random_scenario(spec).unwrap();
        assert_eq!(a, generate_random_scenario(spec).unwrap());
        assert_eq!(a.pseudoranges.len(), 8);
        assert_eq!(a.distances.len(), 1);
        for c in &a.constellations {
            for s in &c.satellites {
                let r = s.position.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((r - SHELL_RADIUS).abs() < 1e-12);
            }
        }
        assert!(generate_random_scenario(GeneratorSpec {
            visibility: 3,
            ..spec
        })
        .is_err());
        assert!(generate_random_scenario(GeneratorSpec {
            inter_receiver_edges: 2,
            ..spec
        })
        .is_err());
    }

    #[test]
    fn minimal_scenario_has_minimum_count() {
        for (r, c, d) in [(1, 1, 2), (3, 3, 3), (2, 1, 3)] {
            let s = minimal_solvable_scenario(r, c, d, 1).unwrap();
            assert_eq!(s.measurement_count(), min_measurements(r, c, d));
        }
    }

    #[test]
    fn labels_roll_over() {
        assert_eq!(constellation_label(0), "A");
        assert_eq!(constellation_label(25), "Z");
        assert_eq!(constellation_label(26), "AA");
    }
}
