//! Constraint evaluation and rigidity matrices of pseudorange and GNSS
//! frameworks, the rank bounds `S_D`/`S_P`, and numeric rigidity decisions.
//!
//! Configurations group all positions first and all clock biases last, so a
//! pseudorange rigidity matrix has `n * d` spatial columns followed by `n`
//! bias columns. Biases carry length units (clock offset times celerity).

use log::warn;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{DirectedPseudorangeGraph, Endpoints, GnssGraph, VertexId};
use crate::numeric::{
    numeric_rank, rng_from_seed, sample_configuration_with, trial_seed, DenseMatrix, SampleMode,
    TolerancePolicy,
};

/// Positions in `R^d` plus one clock bias per agent.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    d: usize,
    coords: Vec<f64>,
    biases: Vec<f64>,
}

impl Configuration {
    pub fn new(d: usize, positions: &[Vec<f64>], biases: Vec<f64>) -> Result<Self> {
        let mut coords = Vec::with_capacity(positions.len() * d);
        for p in positions {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(d, coords, biases)
    }

    /// `coords` holds `n * d` values, agent by agent.
    pub fn from_flat(d: usize, coords: Vec<f64>, biases: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if coords.len() != biases.len() * d {
            return Err(Error::DimensionMismatch {
                expected: biases.len() * d,
                found: coords.len(),
            });
        }
        if coords.iter().chain(&biases).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "configuration has a non-finite value".into(),
            ));
        }
        Ok(Self { d, coords, biases })
    }

    pub fn n(&self) -> usize {
        self.biases.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn position(&self, i: VertexId) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn bias(&self, i: VertexId) -> f64 {
        self.biases[i]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn set_position(&mut self, i: VertexId, p: &[f64]) {
        self.coords[i * self.d..(i + 1) * self.d].copy_from_slice(p);
    }

    pub fn set_bias(&mut self, i: VertexId, b: f64) {
        self.biases[i] = b;
    }

    pub fn distance(&self, u: VertexId, v: VertexId) -> f64 {
        self.position(u)
            .iter()
            .zip(self.position(v))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Stacked parameter vector `(x_1, .., x_n, beta_1, .., beta_n)`.
    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.coords.len() + self.biases.len(),
            self.coords.iter().chain(&self.biases).copied(),
        )
    }

    pub fn from_vector(d: usize, p: &DVector<f64>) -> Result<Self> {
        let n = p.len() / (d + 1);
        if n * (d + 1) != p.len() {
            return Err(Error::DimensionMismatch {
                expected: n * (d + 1),
                found: p.len(),
            });
        }
        Self::from_flat(
            d,
            p.as_slice()[..n * d].to_vec(),
            p.as_slice()[n * d..].to_vec(),
        )
    }

    fn constrained_distance(&self, u: VertexId, v: VertexId) -> Result<f64> {
        let dist = self.distance(u, v);
        if dist == 0.0 {
            Err(Error::DegeneratePair(u, v))
        } else {
            Ok(dist)
        }
    }
}

/// A directed pseudorange graph paired with a configuration of its agents.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudorangeFramework {
    graph: DirectedPseudorangeGraph,
    config: Configuration,
}

impl PseudorangeFramework {
    pub fn new(graph: DirectedPseudorangeGraph, config: Configuration) -> Result<Self> {
        if graph.n() != config.n() {
            return Err(Error::DimensionMismatch {
                expected: graph.n(),
                found: config.n(),
            });
        }
        Ok(Self { graph, config })
    }

    pub fn graph(&self) -> &DirectedPseudorangeGraph {
        &self.graph
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }
}

/// Outcome of an infinitesimal-rigidity test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub rank: usize,
    pub bound: usize,
    pub rigid: bool,
    pub flex_dofs: usize,
    pub seeds: Vec<u64>,
}

impl RigidityReport {
    fn new(rank: usize, bound: usize, seeds: Vec<u64>) -> Self {
        Self {
            rank,
            bound,
            rigid: rank == bound,
            flex_dofs: bound.saturating_sub(rank),
            seeds,
        }
    }
}

/// `‖x_u − x_v‖ + β_v − β_u`, the pseudorange of a signal sent from `u` to `v`.
pub fn pseudorange(config: &Configuration, u: VertexId, v: VertexId) -> Result<f64> {
    let dist = config.constrained_distance(u, v)?;
    Ok(dist + config.bias(v) - config.bias(u))
}

/// One pseudorange per arc, in arc order.
pub fn evaluate_constraints(fw: &PseudorangeFramework) -> Result<DVector<f64>> {
    let values = fw
        .graph
        .arcs()
        .iter()
        .map(|a| pseudorange(&fw.config, a.tail, a.head))
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(values))
}

/// Recovers `(‖x_u − x_v‖, β_u − β_v)` from the two opposite pseudoranges.
pub fn symmetric_pair_resolve(rho_uv: f64, rho_vu: f64) -> Result<(f64, f64)> {
    let distance = (rho_uv + rho_vu) / 2.0;
    if distance.is_nan() || distance <= 0.0 {
        return Err(Error::NonPositiveDistance(distance));
    }
    Ok((distance, (rho_vu - rho_uv) / 2.0))
}

/// `m × nd` matrix; the row of pair `uv` holds `x_u − x_v` in `u`'s block and
/// `x_v − x_u` in `v`'s block.
pub fn distance_rigidity_matrix<P: Endpoints>(
    pairs: &[P],
    config: &Configuration,
) -> Result<DenseMatrix> {
    let d = config.d();
    let mut r = DenseMatrix::zeros(pairs.len(), config.n() * d);
    for (row, pair) in pairs.iter().enumerate() {
        let (u, v) = pair.endpoints();
        config.constrained_distance(u, v)?;
        let (xu, xv) = (config.position(u), config.position(v));
        for k in 0..d {
            r[(row, u * d + k)] = xu[k] - xv[k];
            r[(row, v * d + k)] = xv[k] - xu[k];
        }
    }
    Ok(r)
}

/// `m × n` matrix `D Bᵀ`: `−‖x_u − x_v‖` at the tail, `+‖x_u − x_v‖` at the head.
pub fn sync_matrix<P: Endpoints>(pairs: &[P], config: &Configuration) -> Result<DenseMatrix> {
    let mut r = DenseMatrix::zeros(pairs.len(), config.n());
    for (row, pair) in pairs.iter().enumerate() {
        let (u, v) = pair.endpoints();
        let dist = config.constrained_distance(u, v)?;
        r[(row, u)] = -dist;
        r[(row, v)] = dist;
    }
    Ok(r)
}

/// `[R_D | R_S]` over the arcs, i.e. the constraint Jacobian scaled row-wise
/// by the arc distances.
pub fn pseudorange_rigidity_matrix(fw: &PseudorangeFramework) -> Result<DenseMatrix> {
    let arcs = fw.graph.arcs();
    let rd = distance_rigidity_matrix(arcs, &fw.config)?;
    let rs = sync_matrix(arcs, &fw.config)?;
    let (n, d) = (fw.config.n(), fw.config.d());
    let mut r = DenseMatrix::zeros(arcs.len(), n * (d + 1));
    r.view_mut((0, 0), (arcs.len(), n * d)).copy_from(&rd);
    r.view_mut((0, n * d), (arcs.len(), n)).copy_from(&rs);
    Ok(r)
}

/// Block matrix with pseudorange rows `[R_D | R_S]`, then distance rows
/// `[R_D | 0]`, then synchronization rows `[0 | R_S]`.
pub fn gnss_rigidity_matrix(gg: &GnssGraph, config: &Configuration) -> Result<DenseMatrix> {
    if gg.n() != config.n() {
        return Err(Error::DimensionMismatch {
            expected: gg.n(),
            found: config.n(),
        });
    }
    let (n, d) = (config.n(), config.d());
    let (mp, md, ms) = (gg.gamma.len(), gg.g_d.len(), gg.g_s.len());
    let mut r = DenseMatrix::zeros(mp + md + ms, n * (d + 1));
    let arcs = gg.gamma.arcs();
    r.view_mut((0, 0), (mp, n * d))
        .copy_from(&distance_rigidity_matrix(arcs, config)?);
    r.view_mut((0, n * d), (mp, n))
        .copy_from(&sync_matrix(arcs, config)?);
    r.view_mut((mp, 0), (md, n * d))
        .copy_from(&distance_rigidity_matrix(gg.g_d.edges(), config)?);
    r.view_mut((mp + md, n * d), (ms, n))
        .copy_from(&sync_matrix(gg.g_s.edges(), config)?);
    Ok(r)
}

fn binomial2(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// Maximal rank of a distance rigidity matrix of `n` agents in `R^d`.
pub fn s_d(n: usize, d: usize) -> usize {
    if n > d {
        n * d - binomial2(d + 1)
    } else {
        binomial2(n)
    }
}

/// Maximal rank of a pseudorange rigidity matrix: `S_D(n, d) + n − 1`.
pub fn s_p(n: usize, d: usize) -> usize {
    if n == 0 {
        return 0;
    }
    s_d(n, d) + n - 1
}

pub fn is_infinitesimally_rigid(
    fw: &PseudorangeFramework,
    tol: TolerancePolicy,
) -> Result<RigidityReport> {
    let rank = numeric_rank(&pseudorange_rigidity_matrix(fw)?, tol)?;
    Ok(RigidityReport::new(
        rank,
        s_p(fw.config.n(), fw.config.d()),
        Vec::new(),
    ))
}

/// Settings for sampled (generic) rank estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankOptions {
    pub trials: usize,
    pub seed: u64,
    pub mode: SampleMode,
    pub tol: TolerancePolicy,
}

impl Default for RankOptions {
    fn default() -> Self {
        Self {
            trials: 5,
            seed: 0,
            mode: SampleMode::default(),
            tol: TolerancePolicy::default(),
        }
    }
}

impl RankOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Maximum rank over independently sampled configurations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledRank {
    pub rank: usize,
    pub bound: usize,
    pub trial_ranks: Vec<usize>,
    pub seeds: Vec<u64>,
}

impl SampledRank {
    /// True when every trial produced the same rank.
    pub fn consistent(&self) -> bool {
        self.trial_ranks.iter().all(|&r| r == self.rank)
    }

    pub fn rigid(&self) -> bool {
        self.rank == self.bound
    }

    pub fn report(&self) -> RigidityReport {
        RigidityReport::new(self.rank, self.bound, self.seeds.clone())
    }
}

/// Generic rank of a matrix family, estimated by sampling configurations.
pub(crate) fn sampled_rank<F>(
    n: usize,
    d: usize,
    bound: usize,
    opts: RankOptions,
    assemble: F,
) -> Result<SampledRank>
where
    F: Fn(&Configuration) -> Result<DenseMatrix>,
{
    if opts.trials == 0 {
        return Err(Error::InvalidArgument(
            "at least one trial is required".into(),
        ));
    }
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "dimension must be at least 2, got {d}"
        )));
    }
    let mut trial_ranks = Vec::with_capacity(opts.trials);
    let mut seeds = Vec::with_capacity(opts.trials);
    for k in 0..opts.trials {
        let seed = trial_seed(opts.seed, k as u64);
        let config = sample_configuration_with(&mut rng_from_seed(seed), n, d, opts.mode);
        trial_ranks.push(numeric_rank(&assemble(&config)?, opts.tol)?);
        seeds.push(seed);
    }
    let rank = trial_ranks.iter().copied().max().unwrap_or(0);
    let out = SampledRank {
        rank,
        bound,
        trial_ranks,
        seeds,
    };
    if !out.consistent() {
        warn!(
            "sampled ranks disagree across trials ({:?}); a non-generic sample is suspected",
            out.trial_ranks
        );
    }
    Ok(out)
}

pub fn generic_rank_numeric(
    graph: &DirectedPseudorangeGraph,
    d: usize,
    trials: usize,
    seed: u64,
) -> Result<SampledRank> {
    generic_rank_numeric_with(
        graph,
        d,
        RankOptions {
            trials,
            seed,
            ..RankOptions::default()
        },
    )
}

pub fn generic_rank_numeric_with(
    graph: &DirectedPseudorangeGraph,
    d: usize,
    opts: RankOptions,
) -> Result<SampledRank> {
    let n = graph.n();
    sampled_rank(n, d, s_p(n, d), opts, |config| {
        pseudorange_rigidity_matrix(&PseudorangeFramework::new(graph.clone(), config.clone())?)
    })
}

pub fn generic_gnss_rank_numeric(
    gg: &GnssGraph,
    d: usize,
    opts: RankOptions,
) -> Result<SampledRank> {
    let n = gg.n();
    sampled_rank(n, d, s_p(n, d), opts, |config| {
        gnss_rigidity_matrix(gg, config)
    })
}

/// One line per row, comma separated.
pub fn matrix_to_csv(m: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
