use std::cell::OnceCell;
use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, Ordering};

use log::warn;
use nalgebra::DVector;

use crate::graphs::{DisjointSets, Edge, SimpleGraph};
use crate::numeric::{
    least_squares_solve, numeric_rank, rng_from_seed, sample_configuration_with, trial_seed,
    DenseMatrix, PseudoInverse, SampleMode, TolerancePolicy,
};
use crate::rigidity::{distance_rigidity_matrix, s_d, sampled_rank, Configuration, RankOptions};

use super::pebble::pebble_rank;

/// Rank function of a matroid whose elements are vertex pairs. Repeated
/// pairs in an argument are distinct (parallel) elements.
pub trait MatroidRankOracle {
    fn rank(&self, elements: &[Edge]) -> usize;

    fn is_independent(&self, elements: &[Edge]) -> bool {
        self.rank(elements) == elements.len()
    }

    /// For an independent set `basis` and a new element `extra`, returns
    /// `None` if `basis + extra` is independent, and otherwise the positions
    /// in `basis` of the unique circuit through `extra` (the elements whose
    /// removal makes room for it).
    fn fundamental_circuit(&self, basis: &[Edge], extra: Edge) -> Option<Vec<usize>> {
        let mut set = basis.to_vec();
        set.push(extra);
        if self.is_independent(&set) {
            return None;
        }
        let mut circuit = Vec::new();
        for i in 0..basis.len() {
            set[i] = extra;
            set.pop();
            if self.is_independent(&set) {
                circuit.push(i);
            }
            set.push(extra);
            set[i] = basis[i];
        }
        Some(circuit)
    }

    /// Answers [`MatroidRankOracle::fundamental_circuit`] queries against one
    /// fixed `basis`, letting implementations factor the basis once.
    fn circuit_finder<'a>(
        &'a self,
        basis: &'a [Edge],
    ) -> Box<dyn Fn(Edge) -> Option<Vec<usize>> + 'a> {
        Box::new(move |extra| self.fundamental_circuit(basis, extra))
    }
}

/// Cycle matroid of the complete graph on `n` vertices.
#[derive(Clone, Copy, Debug)]
pub struct GraphicMatroid {
    pub n: usize,
}

impl MatroidRankOracle for GraphicMatroid {
    fn rank(&self, elements: &[Edge]) -> usize {
        let mut sets = DisjointSets::new(self.n);
        elements.iter().filter(|e| sets.union(e.u(), e.v())).count()
    }

    /// The circuit of a forest plus one edge is the tree path between its ends.
    fn fundamental_circuit(&self, basis: &[Edge], extra: Edge) -> Option<Vec<usize>> {
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.n];
        for (i, e) in basis.iter().enumerate() {
            adj[e.u()].push((e.v(), i));
            adj[e.v()].push((e.u(), i));
        }
        let mut via: Vec<Option<(usize, usize)>> = vec![None; self.n];
        let mut seen = vec![false; self.n];
        let (src, dst) = (extra.u(), extra.v());
        seen[src] = true;
        let mut queue = VecDeque::from([src]);
        while let Some(x) = queue.pop_front() {
            if x == dst {
                break;
            }
            for &(y, i) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    via[y] = Some((x, i));
                    queue.push_back(y);
                }
            }
        }
        if !seen[dst] {
            return None;
        }
        let mut circuit = Vec::new();
        let mut cur = dst;
        while let Some((prev, i)) = via[cur] {
            circuit.push(i);
            cur = prev;
        }
        circuit.sort_unstable();
        Some(circuit)
    }
}

/// Generic planar distance rigidity matroid, decided by the pebble game.
#[derive(Clone, Copy, Debug)]
pub struct LamanMatroid {
    pub n: usize,
}

impl MatroidRankOracle for LamanMatroid {
    fn rank(&self, elements: &[Edge]) -> usize {
        pebble_rank(self.n, elements)
    }
}

/// Settings shared by the randomized oracles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleOptions {
    pub trials: usize,
    pub seed: u64,
    pub tol: TolerancePolicy,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            trials: 5,
            seed: 0,
            tol: TolerancePolicy::default(),
        }
    }
}

impl OracleOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Distance rigidity matroid realized as the row matroid of distance
/// rigidity matrices at several random configurations. A set is independent
/// when it is independent at some sample; disagreements between samples are
/// recorded and can be queried with [`LinearDistanceMatroid::consistent`].
#[derive(Debug)]
pub struct LinearDistanceMatroid {
    n: usize,
    d: usize,
    configs: Vec<Configuration>,
    seeds: Vec<u64>,
    tol: TolerancePolicy,
    disagreement: AtomicBool,
}

impl LinearDistanceMatroid {
    pub fn new(n: usize, d: usize, opts: OracleOptions) -> Self {
        let trials = opts.trials.max(1);
        let seeds: Vec<u64> = (0..trials as u64)
            .map(|k| trial_seed(opts.seed, k))
            .collect();
        let configs = seeds
            .iter()
            .map(|&s| sample_configuration_with(&mut rng_from_seed(s), n, d, SampleMode::default()))
            .collect();
        Self {
            n,
            d,
            configs,
            seeds,
            tol: opts.tol,
            disagreement: AtomicBool::new(false),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    /// False once two samples have disagreed on some query.
    pub fn consistent(&self) -> bool {
        !self.disagreement.load(Ordering::Relaxed)
    }

    fn flag(&self, what: &str) {
        if !self.disagreement.swap(true, Ordering::Relaxed) {
            warn!("random samples disagree on {what}; a non-generic sample is suspected");
        }
    }

    fn rank_at(&self, config: &Configuration, elements: &[Edge]) -> usize {
        let m = distance_rigidity_matrix(elements, config).expect("sampled points are distinct");
        numeric_rank(&m, self.tol).expect("finite matrix")
    }

    fn circuit_at(
        &self,
        config: &Configuration,
        basis: &[Edge],
        extra: Edge,
    ) -> Option<Vec<usize>> {
        let mut rows = basis.to_vec();
        rows.push(extra);
        let m = distance_rigidity_matrix(&rows, config).expect("sampled points are distinct");
        if numeric_rank(&m, self.tol).expect("finite matrix") > basis.len() {
            return None;
        }
        let k = basis.len();
        let a_t: DenseMatrix = m.rows(0, k).transpose();
        let target: DVector<f64> = m.row(k).transpose();
        let coef = least_squares_solve(&a_t, &target, self.tol).expect("consistent dimensions");
        let scale = target.norm();
        Some(
            (0..k)
                .filter(|&i| coef[i].abs() * m.row(i).norm() > 1e-7 * scale)
                .collect(),
        )
    }
}

impl MatroidRankOracle for LinearDistanceMatroid {
    fn rank(&self, elements: &[Edge]) -> usize {
        let ranks: Vec<usize> = self
            .configs
            .iter()
            .map(|c| self.rank_at(c, elements))
            .collect();
        let best = ranks.iter().copied().max().unwrap_or(0);
        if ranks.iter().any(|&r| r != best) {
            self.flag("a rank query");
        }
        best
    }

    fn fundamental_circuit(&self, basis: &[Edge], extra: Edge) -> Option<Vec<usize>> {
        let answers = self
            .configs
            .iter()
            .map(|c| self.circuit_at(c, basis, extra))
            .collect();
        self.reconcile(answers)
    }

    fn circuit_finder<'a>(
        &'a self,
        basis: &'a [Edge],
    ) -> Box<dyn Fn(Edge) -> Option<Vec<usize>> + 'a> {
        let factors: OnceCell<Vec<Option<BasisFactor>>> = OnceCell::new();
        Box::new(move |extra| {
            let factors = factors.get_or_init(|| {
                self.configs
                    .iter()
                    .map(|c| BasisFactor::new(c, basis, self.tol))
                    .collect()
            });
            let answers = self
                .configs
                .iter()
                .zip(factors)
                .map(|(c, f)| match f {
                    Some(f) => f.circuit(c, extra, self.tol),
                    None => self.circuit_at(c, basis, extra),
                })
                .collect();
            self.reconcile(answers)
        })
    }
}

impl LinearDistanceMatroid {
    /// Independence wins when samples disagree: a dependency seen at only
    /// some samples is a coincidence of those samples.
    fn reconcile(&self, answers: Vec<Option<Vec<usize>>>) -> Option<Vec<usize>> {
        if answers.iter().any(|a| a != &answers[0]) {
            self.flag("a circuit query");
            if answers.iter().any(Option::is_none) {
                return None;
            }
        }
        answers.into_iter().next().flatten()
    }
}

/// Pseudo-inverse of the transposed rigidity rows of an independent set at
/// one sample; a candidate row's circuit is read off its least-squares
/// coefficients.
struct BasisFactor {
    pinv: PseudoInverse,
    row_norms: Vec<f64>,
    rows: usize,
}

impl BasisFactor {
    /// `None` when the basis rows are dependent at this sample.
    fn new(config: &Configuration, basis: &[Edge], tol: TolerancePolicy) -> Option<Self> {
        let m = distance_rigidity_matrix(basis, config).expect("sampled points are distinct");
        let pinv = PseudoInverse::new(&m.transpose(), tol).expect("finite matrix");
        (pinv.rank() == basis.len()).then(|| Self {
            pinv,
            row_norms: m.row_iter().map(|r| r.norm()).collect(),
            rows: basis.len(),
        })
    }

    fn circuit(
        &self,
        config: &Configuration,
        extra: Edge,
        tol: TolerancePolicy,
    ) -> Option<Vec<usize>> {
        let row = distance_rigidity_matrix(&[extra], config).expect("sampled points are distinct");
        let target: DVector<f64> = row.row(0).transpose();
        let scale = target.norm();
        let cutoff = tol.cutoff(
            self.pinv.sigma_max().max(scale),
            self.rows + 1,
            target.len(),
        );
        if self.pinv.residual(&target).norm() > cutoff {
            return None;
        }
        let coef = self.pinv.solve(&target);
        Some(
            (0..self.rows)
                .filter(|&i| coef[i].abs() * self.row_norms[i] > 1e-7 * scale)
                .collect(),
        )
    }
}

/// Distance rigidity matroid for a given dimension: pebble game in the
/// plane, random-configuration rank tests otherwise.
#[derive(Debug)]
pub enum DistanceOracle {
    Laman(LamanMatroid),
    Linear(LinearDistanceMatroid),
}

impl DistanceOracle {
    pub fn for_dimension(n: usize, d: usize, opts: OracleOptions) -> Self {
        if d == 2 {
            DistanceOracle::Laman(LamanMatroid { n })
        } else {
            DistanceOracle::Linear(LinearDistanceMatroid::new(n, d, opts))
        }
    }

    pub fn randomized(n: usize, d: usize, opts: OracleOptions) -> Self {
        DistanceOracle::Linear(LinearDistanceMatroid::new(n, d, opts))
    }

    pub fn consistent(&self) -> bool {
        match self {
            DistanceOracle::Laman(_) => true,
            DistanceOracle::Linear(l) => l.consistent(),
        }
    }

    pub fn seeds(&self) -> &[u64] {
        match self {
            DistanceOracle::Laman(_) => &[],
            DistanceOracle::Linear(l) => l.seeds(),
        }
    }
}

impl MatroidRankOracle for DistanceOracle {
    fn rank(&self, elements: &[Edge]) -> usize {
        match self {
            DistanceOracle::Laman(m) => m.rank(elements),
            DistanceOracle::Linear(m) => m.rank(elements),
        }
    }

    fn fundamental_circuit(&self, basis: &[Edge], extra: Edge) -> Option<Vec<usize>> {
        match self {
            DistanceOracle::Laman(m) => m.fundamental_circuit(basis, extra),
            DistanceOracle::Linear(m) => m.fundamental_circuit(basis, extra),
        }
    }

    fn circuit_finder<'a>(
        &'a self,
        basis: &'a [Edge],
    ) -> Box<dyn Fn(Edge) -> Option<Vec<usize>> + 'a> {
        match self {
            DistanceOracle::Laman(m) => m.circuit_finder(basis),
            DistanceOracle::Linear(m) => m.circuit_finder(basis),
        }
    }
}

/// Rank of the cycle matroid: covered vertices minus components of the support.
pub fn graphic_rank(g: &SimpleGraph) -> usize {
    GraphicMatroid { n: g.n() }.rank(g.edges())
}

/// Maximum numeric rank of the distance rigidity matrix over sampled
/// configurations.
pub fn randomized_distance_rank(g: &SimpleGraph, d: usize, trials: usize, seed: u64) -> usize {
    let opts = RankOptions {
        trials: trials.max(1),
        seed,
        ..RankOptions::default()
    };
    sampled_rank(g.n(), d.max(2), s_d(g.n(), d.max(2)), opts, |c| {
        distance_rigidity_matrix(g.edges(), c)
    })
    .map(|r| r.rank)
    .unwrap_or(0)
}
