//! Newton (Gauss–Newton) estimation of receiver positions and clock biases.
//!
//! Unknowns are expressed relative to the first constellation's clock:
//! receiver biases `β_r − β_1` and one offset `β_c − β_1` per further
//! constellation. Satellite positions are known.

use log::warn;
use nalgebra::DVector;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{
    least_squares_solve, numeric_rank, rng_from_seed, DenseMatrix, TolerancePolicy,
};

use super::scenario::Scenario;

/// Known parameters (satellite coordinates, then the reference bias 0) and
/// unknown parameters at ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameters {
    pub known: DVector<f64>,
    pub unknown: DVector<f64>,
}

/// Number of unknowns: `R·d + R + C − 1`.
pub fn unknown_count(s: &Scenario) -> usize {
    s.receiver_count() * (s.d() + 1) + s.constellation_count().saturating_sub(1)
}

pub fn partition_parameters(s: &Scenario) -> Parameters {
    let mut known: Vec<f64> = s
        .constellations
        .iter()
        .flat_map(|c| {
            c.satellites
                .iter()
                .flat_map(|sat| sat.position.iter().copied())
        })
        .collect();
    known.push(0.0);
    let reference = s.constellations.first().map_or(0.0, |c| c.bias);
    let mut unknown: Vec<f64> = s
        .receivers
        .iter()
        .flat_map(|r| r.position.iter().copied())
        .collect();
    unknown.extend(s.receivers.iter().map(|r| r.bias - reference));
    unknown.extend(s.constellations.iter().skip(1).map(|c| c.bias - reference));
    Parameters {
        known: DVector::from_vec(known),
        unknown: DVector::from_vec(unknown),
    }
}

/// Simulated measurements: pseudoranges in file order, then receiver
/// distances, each with Gaussian noise of the scenario's `noise_sigma`.
pub fn simulate_measurements(s: &Scenario, seed: u64) -> Result<DVector<f64>> {
    let model = MeasurementModel::new(s)?;
    let mut y = model.evaluate(&partition_parameters(s).unknown)?;
    if s.noise_sigma > 0.0 {
        let noise =
            Normal::new(0.0, s.noise_sigma).map_err(|e| Error::InvalidScenario(e.to_string()))?;
        let mut rng = rng_from_seed(seed);
        for v in y.iter_mut() {
            *v += noise.sample(&mut rng);
        }
    }
    Ok(y)
}

/// Measurement function of a scenario with its satellites pinned.
#[derive(Clone, Debug)]
pub struct MeasurementModel {
    d: usize,
    receivers: usize,
    sat_positions: Vec<Vec<f64>>,
    /// (constellation, satellite position index, receiver)
    pseudoranges: Vec<(usize, usize, usize)>,
    distances: Vec<(usize, usize)>,
}

impl MeasurementModel {
    pub fn new(s: &Scenario) -> Result<Self> {
        s.validate()?;
        Ok(Self {
            d: s.d(),
            receivers: s.receiver_count(),
            sat_positions: s
                .constellations
                .iter()
                .flat_map(|c| c.satellites.iter().map(|sat| sat.position.clone()))
                .collect(),
            pseudoranges: s.resolved_pseudoranges()?,
            distances: s.resolved_distances()?,
        })
    }

    pub fn measurement_count(&self) -> usize {
        self.pseudoranges.len() + self.distances.len()
    }

    fn position<'a>(&self, p: &'a DVector<f64>, r: usize) -> &'a [f64] {
        &p.as_slice()[r * self.d..(r + 1) * self.d]
    }

    fn bias_index(&self, r: usize) -> usize {
        self.receivers * self.d + r
    }

    fn offset_index(&self, c: usize) -> Option<usize> {
        (c > 0).then(|| self.receivers * (self.d + 1) + c - 1)
    }

    fn diff(a: &[f64], b: &[f64]) -> (Vec<f64>, f64) {
        let v: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        (v, norm)
    }

    /// Predicted measurements at unknowns `p`.
    pub fn evaluate(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        let mut out = Vec::with_capacity(self.measurement_count());
        for &(c, sat, r) in &self.pseudoranges {
            let (_, dist) = Self::diff(self.position(p, r), &self.sat_positions[sat]);
            if dist == 0.0 {
                return Err(Error::DegeneratePair(sat, self.sat_positions.len() + r));
            }
            let offset = self.offset_index(c).map_or(0.0, |k| p[k]);
            out.push(dist + p[self.bias_index(r)] - offset);
        }
        for &(i, j) in &self.distances {
            let (_, dist) = Self::diff(self.position(p, i), self.position(p, j));
            if dist == 0.0 {
                let base = self.sat_positions.len();
                return Err(Error::DegeneratePair(base + i, base + j));
            }
            out.push(dist);
        }
        Ok(DVector::from_vec(out))
    }

    /// Jacobian of [`MeasurementModel::evaluate`] with respect to the unknowns.
    pub fn jacobian(&self, p: &DVector<f64>) -> Result<DenseMatrix> {
        let d = self.d;
        let mut j = DenseMatrix::zeros(self.measurement_count(), p.len());
        for (row, &(c, sat, r)) in self.pseudoranges.iter().enumerate() {
            let (v, dist) = Self::diff(self.position(p, r), &self.sat_positions[sat]);
            if dist == 0.0 {
                return Err(Error::DegeneratePair(sat, self.sat_positions.len() + r));
            }
            for k in 0..d {
                j[(row, r * d + k)] = v[k] / dist;
            }
            j[(row, self.bias_index(r))] = 1.0;
            if let Some(k) = self.offset_index(c) {
                j[(row, k)] = -1.0;
            }
        }
        let first = self.pseudoranges.len();
        for (row, &(a, b)) in self.distances.iter().enumerate() {
            let (v, dist) = Self::diff(self.position(p, a), self.position(p, b));
            if dist == 0.0 {
                let base = self.sat_positions.len();
                return Err(Error::DegeneratePair(base + a, base + b));
            }
            for k in 0..d {
                j[(first + row, a * d + k)] = v[k] / dist;
                j[(first + row, b * d + k)] = -v[k] / dist;
            }
        }
        Ok(j)
    }
}

/// Starting point of the iteration.
#[derive(Clone, Debug, PartialEq)]
pub enum Init {
    /// Truth plus Gaussian noise with standard deviation `fraction · scene scale`
    /// on every unknown.
    Perturb(f64),
    Explicit(DVector<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateOptions {
    pub init: Init,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            init: Init::Perturb(0.1),
            max_iter: 50,
            tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub receiver_positions: Vec<Vec<f64>>,
    /// Receiver biases relative to the first constellation.
    pub receiver_biases: Vec<f64>,
    /// One offset per constellation; the first is 0 by convention.
    pub constellation_offsets: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Column rank of the Jacobian at the final iterate.
    pub jacobian_rank: usize,
    pub unknowns: usize,
    /// False when the Jacobian lacks full column rank, i.e. the solution is
    /// not locally unique.
    pub identifiable: bool,
    pub diagnostic: Option<String>,
}

impl EstimationResult {
    fn from_vector(s: &Scenario, p: &DVector<f64>) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
        let (d, r) = (s.d(), s.receiver_count());
        let positions = (0..r)
            .map(|i| p.as_slice()[i * d..(i + 1) * d].to_vec())
            .collect();
        let biases = p.as_slice()[r * d..r * (d + 1)].to_vec();
        let mut offsets = vec![0.0; s.constellation_count().min(1)];
        offsets.extend_from_slice(&p.as_slice()[r * (d + 1)..]);
        (positions, biases, offsets)
    }

    /// Distance of each estimated receiver from its true position.
    pub fn position_errors(&self, s: &Scenario) -> Vec<f64> {
        self.receiver_positions
            .iter()
            .zip(&s.receivers)
            .map(|(est, r)| {
                est.iter()
                    .zip(&r.position)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    pub fn max_position_error(&self, s: &Scenario) -> f64 {
        self.position_errors(s).into_iter().fold(0.0, f64::max)
    }
}

/// Initial unknowns for `init`.
pub fn initial_guess(s: &Scenario, init: &Init, seed: u64) -> Result<DVector<f64>> {
    let truth = partition_parameters(s).unknown;
    match init {
        Init::Explicit(p) if p.len() == truth.len() => Ok(p.clone()),
        Init::Explicit(p) => Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: p.len(),
        }),
        Init::Perturb(fraction) => {
            if !fraction.is_finite() || *fraction < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "perturbation must be non-negative, got {fraction}"
                )));
            }
            let sigma = fraction * s.scene_scale();
            if sigma == 0.0 {
                return Ok(truth);
            }
            let noise =
                Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let mut rng = rng_from_seed(seed);
            Ok(truth.map(|v| v + noise.sample(&mut rng)))
        }
    }
}

/// Iterates `p ← p − J⁺ (F(p) − y)` until the residual norm drops below
/// `tol` or `max_iter` steps are taken. Numerical trouble ends the run with
/// `converged = false` and a diagnostic rather than an error.
pub fn estimate(
    s: &Scenario,
    y: &DVector<f64>,
    opts: &EstimateOptions,
) -> Result<EstimationResult> {
    let model = MeasurementModel::new(s)?;
    if y.len() != model.measurement_count() {
        return Err(Error::DimensionMismatch {
            expected: model.measurement_count(),
            found: y.len(),
        });
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let unknowns = unknown_count(s);
    let mut p = initial_guess(s, &opts.init, opts.seed)?;
    let tol_policy = TolerancePolicy::default();

    let residual_at = |p: &DVector<f64>| -> Result<f64> { Ok((model.evaluate(p)? - y).norm()) };
    // an initial guess sitting on a satellite is a caller error
    let mut residual = residual_at(&p)?;
    let mut iterations = 0;
    let mut diagnostic = None;
    let mut converged = false;

    // `residual` always holds the last finite value so reports stay serializable
    while iterations < opts.max_iter {
        iterations += 1;
        let step = model
            .jacobian(&p)
            .and_then(|j| least_squares_solve(&j, &(model.evaluate(&p)? - y), tol_policy));
        let next = match step {
            Ok(step) => &p - step,
            Err(e) => {
                diagnostic = Some(format!("iteration {iterations}: {e}"));
                break;
            }
        };
        if next.iter().any(|v| !v.is_finite()) {
            diagnostic = Some(format!("iteration {iterations}: iterate became non-finite"));
            break;
        }
        match residual_at(&next) {
            Ok(r) if r.is_finite() => {
                p = next;
                residual = r;
            }
            Ok(_) => {
                diagnostic = Some(format!(
                    "iteration {iterations}: residual became non-finite"
                ));
                break;
            }
            Err(e) => {
                diagnostic = Some(format!("iteration {iterations}: {e}"));
                break;
            }
        }
        if residual < opts.tol {
            converged = true;
            break;
        }
    }
    if !converged && diagnostic.is_none() {
        diagnostic = Some(format!(
            "no convergence after {iterations} iterations (residual {residual:.3e})"
        ));
    }

    let jacobian_rank = if unknowns == 0 {
        0
    } else {
        model
            .jacobian(&p)
            .ok()
            .and_then(|j| numeric_rank(&j, tol_policy).ok())
            .unwrap_or(0)
    };
    let identifiable = jacobian_rank == unknowns;
    if !identifiable {
        warn!("Jacobian has column rank {jacobian_rank} < {unknowns}; the solution is not unique");
        let note =
            format!("rank-deficient Jacobian: column rank {jacobian_rank} of {unknowns} unknowns");
        diagnostic = Some(match diagnostic {
            Some(d) => format!("{d}; {note}"),
            None => note,
        });
    }
    let (receiver_positions, receiver_biases, constellation_offsets) =
        EstimationResult::from_vector(s, &p);
    Ok(EstimationResult {
        receiver_positions,
        receiver_biases,
        constellation_offsets,
        iterations,
        residual,
        converged,
        jacobian_rank,
        unknowns,
        identifiable,
        diagnostic,
    })
}
