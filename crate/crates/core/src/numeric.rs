//! Dense linear algebra: SVD-based rank, minimum-norm least squares and
//! seeded sampling of configurations.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rigidity::Configuration;

pub type DenseMatrix = DMatrix<f64>;

/// Relative threshold for deciding that a singular value is zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TolerancePolicy {
    rel_tol: f64,
}

impl TolerancePolicy {
    pub const DEFAULT_REL_TOL: f64 = 1e-9;

    pub fn new(rel_tol: f64) -> Result<Self> {
        if rel_tol.is_finite() && rel_tol > 0.0 {
            Ok(Self { rel_tol })
        } else {
            Err(Error::InvalidArgument(format!(
                "relative tolerance must be positive, got {rel_tol}"
            )))
        }
    }

    pub fn rel_tol(self) -> f64 {
        self.rel_tol
    }

    /// Absolute cutoff `rel_tol * sigma_max * max(rows, cols)`.
    pub fn cutoff(self, sigma_max: f64, rows: usize, cols: usize) -> f64 {
        self.rel_tol * sigma_max * rows.max(cols) as f64
    }
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            rel_tol: Self::DEFAULT_REL_TOL,
        }
    }
}

fn check_finite(m: &DenseMatrix) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

struct Svd {
    singular_values: DVector<f64>,
    u: Option<DenseMatrix>,
    v: Option<DenseMatrix>,
}

// nalgebra's bidiagonal SVD can lose accuracy on rank-deficient inputs, so
// the decomposition itself is delegated to faer.
fn faer_svd(m: &DenseMatrix, vectors: bool) -> Result<Svd> {
    let a = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let failed = |_| Error::InvalidArgument("singular value decomposition did not converge".into());
    if !vectors {
        let s = a.singular_values().map_err(failed)?;
        return Ok(Svd {
            singular_values: DVector::from_vec(s),
            u: None,
            v: None,
        });
    }
    let svd = a.thin_svd().map_err(failed)?;
    let s = svd.S().column_vector();
    let (u, v) = (svd.U(), svd.V());
    let k = s.nrows();
    Ok(Svd {
        singular_values: DVector::from_fn(k, |i, _| s[i]),
        u: Some(DenseMatrix::from_fn(u.nrows(), k, |i, j| u[(i, j)])),
        v: Some(DenseMatrix::from_fn(v.nrows(), k, |i, j| v[(i, j)])),
    })
}

/// Number of singular values above the tolerance cutoff.
pub fn numeric_rank(m: &DenseMatrix, tol: TolerancePolicy) -> Result<usize> {
    check_finite(m)?;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0);
    }
    let sv = faer_svd(m, false)?.singular_values;
    let sigma_max = sv.max();
    if sigma_max == 0.0 {
        return Ok(0);
    }
    let cutoff = tol.cutoff(sigma_max, m.nrows(), m.ncols());
    Ok(sv.iter().filter(|&&s| s > cutoff).count())
}

/// Minimum-norm least-squares solution of `m x = y` through a truncated SVD.
pub fn least_squares_solve(
    m: &DenseMatrix,
    y: &DVector<f64>,
    tol: TolerancePolicy,
) -> Result<DVector<f64>> {
    if m.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: y.len(),
        });
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 0 });
    }
    Ok(PseudoInverse::new(m, tol)?.solve(y))
}

/// Truncated SVD of a fixed matrix, kept for repeated solves against it.
#[derive(Clone, Debug)]
pub struct PseudoInverse {
    u: DenseMatrix,
    v: DenseMatrix,
    sigma: DVector<f64>,
    sigma_max: f64,
}

impl PseudoInverse {
    pub fn new(m: &DenseMatrix, tol: TolerancePolicy) -> Result<Self> {
        check_finite(m)?;
        let empty = || Self {
            u: DenseMatrix::zeros(m.nrows(), 0),
            v: DenseMatrix::zeros(m.ncols(), 0),
            sigma: DVector::zeros(0),
            sigma_max: 0.0,
        };
        if m.nrows() == 0 || m.ncols() == 0 {
            return Ok(empty());
        }
        let svd = faer_svd(m, true)?;
        let sigma_max = svd.singular_values.max();
        if sigma_max == 0.0 {
            return Ok(empty());
        }
        let cutoff = tol.cutoff(sigma_max, m.nrows(), m.ncols());
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&k| svd.singular_values[k] > cutoff)
            .collect();
        Ok(Self {
            u: svd.u.expect("U requested").select_columns(&keep),
            v: svd.v.expect("V requested").select_columns(&keep),
            sigma: svd.singular_values.select_rows(&keep),
            sigma_max,
        })
    }

    /// Number of singular values kept.
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    /// Minimum-norm least-squares solution; `y` must have one entry per row.
    pub fn solve(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut c = self.u.tr_mul(y);
        c.component_div_assign(&self.sigma);
        &self.v * c
    }

    /// Component of `y` orthogonal to the column space.
    pub fn residual(&self, y: &DVector<f64>) -> DVector<f64> {
        y - &self.u * self.u.tr_mul(y)
    }
}

/// How sampled positions are drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleMode {
    /// Uniform reals in `[-range, range]`.
    Real { range: f64 },
    /// Uniform integers in `[-bound, bound]`; biases stay real in the same range.
    Integer { bound: i64 },
}

impl SampleMode {
    pub const DEFAULT_INTEGER_BOUND: i64 = 1 << 20;

    pub fn integer() -> Self {
        SampleMode::Integer {
            bound: Self::DEFAULT_INTEGER_BOUND,
        }
    }
}

impl Default for SampleMode {
    fn default() -> Self {
        SampleMode::Real { range: 1.0 }
    }
}

/// Deterministic generator for a seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives the seed of trial `k` from a base seed (splitmix64 finalizer).
pub fn trial_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed.wrapping_add(k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn sample_configuration_with<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    d: usize,
    mode: SampleMode,
) -> Configuration {
    let mut coords = Vec::with_capacity(n * d);
    let bias_range = match mode {
        SampleMode::Real { range } => {
            for _ in 0..n * d {
                coords.push(rng.random_range(-range..=range));
            }
            range
        }
        SampleMode::Integer { bound } => {
            for _ in 0..n * d {
                coords.push(rng.random_range(-bound..=bound) as f64);
            }
            bound as f64
        }
    };
    let biases = (0..n)
        .map(|_| rng.random_range(-bias_range..=bias_range))
        .collect();
    Configuration::from_flat(d, coords, biases).expect("sampled values are finite")
}

/// Samples `n` agents in `R^d` with their clock biases.
pub fn sample_configuration(
    n: usize,
    d: usize,
    seed: u64,
    mode: SampleMode,
) -> Result<Configuration> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one agent".into()));
    }
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "dimension must be at least 2, got {d}"
        )));
    }
    Ok(sample_configuration_with(
        &mut rng_from_seed(seed),
        n,
        d,
        mode,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ranks_of_small_matrices() {
        let tol = TolerancePolicy::default();
        assert_eq!(numeric_rank(&DenseMatrix::identity(3, 3), tol).unwrap(), 3);
        assert_eq!(numeric_rank(&DenseMatrix::zeros(3, 4), tol).unwrap(), 0);
        let m = DenseMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(numeric_rank(&m, tol).unwrap(), 1);
        assert_eq!(numeric_rank(&DenseMatrix::zeros(0, 5), tol).unwrap(), 0);
    }

    #[test]
    fn rank_rejects_non_finite() {
        let m = DenseMatrix::from_row_slice(1, 2, &[1.0, f64::NAN]);
        assert!(matches!(
            numeric_rank(&m, TolerancePolicy::default()),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn tolerance_must_be_positive() {
        assert!(TolerancePolicy::new(0.0).is_err());
        assert!(TolerancePolicy::new(-1.0).is_err());
        assert!(TolerancePolicy::new(1e-12).is_ok());
    }

    #[test]
    fn least_squares_examples() {
        let tol = TolerancePolicy::default();
        let y = DVector::from_vec(vec![1.0, -2.0, 3.0]);
        let x = least_squares_solve(&DenseMatrix::identity(3, 3), &y, tol).unwrap();
        assert!((x - &y).norm() < 1e-14);

        // stacked duplicate rows of a consistent system
        let a = DenseMatrix::from_row_slice(4, 2, &[1.0, 1.0, 1.0, -1.0, 1.0, 1.0, 1.0, -1.0]);
        let y = DVector::from_vec(vec![3.0, 1.0, 3.0, 1.0]);
        let x = least_squares_solve(&a, &y, tol).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert!((&a * &x - &y).norm() < 1e-12);

        // x = (1, 0) solves the normal equations with the smallest norm
        let a = DenseMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let y = DVector::from_vec(vec![1.0, 0.0]);
        let x = least_squares_solve(&a, &y, tol).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && x[1].abs() < 1e-14);
    }

    #[test]
    fn least_squares_dimension_mismatch() {
        let err = least_squares_solve(
            &DenseMatrix::identity(3, 3),
            &DVector::zeros(2),
            TolerancePolicy::default(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 3,
                found: 2
            }
        ));
    }

    #[test]
    fn sampling_is_deterministic_and_bounded() {
        let a = sample_configuration(3, 2, 42, SampleMode::Real { range: 2.0 }).unwrap();
        let b = sample_configuration(3, 2, 42, SampleMode::Real { range: 2.0 }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.coords().len(), 6);
        assert_eq!(a.biases().len(), 3);
        assert!(a.coords().iter().chain(a.biases()).all(|v| v.abs() <= 2.0));

        let c = sample_configuration(4, 3, 7, SampleMode::integer()).unwrap();
        assert!(c
            .coords()
            .iter()
            .all(|v| v.fract() == 0.0 && v.abs() <= (1 << 20) as f64));

        assert!(sample_configuration(0, 2, 1, SampleMode::default()).is_err());
        assert!(sample_configuration(2, 1, 1, SampleMode::default()).is_err());
    }

    #[test]
    fn trial_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..100).map(|k| trial_seed(5, k)).collect();
        assert_eq!(seeds.len(), 100);
    }

    fn matrix_strategy() -> impl Strategy<Value = DenseMatrix> {
        (1usize..6, 1usize..6, 0usize..4).prop_flat_map(|(r, c, k)| {
            // product of random factors gives rank at most k
            let k = k.min(r).min(c).max(1);
            (
                proptest::collection::vec(-3.0f64..3.0, r * k),
                proptest::collection::vec(-3.0f64..3.0, k * c),
            )
                .prop_map(move |(a, b)| {
                    DenseMatrix::from_vec(r, k, a) * DenseMatrix::from_vec(k, c, b)
                })
        })
    }

    proptest! {
        #[test]
        fn rank_invariances(m in matrix_strategy(), scales in proptest::collection::vec(0.5f64..2.0, 6), shift in 0usize..6) {
            let tol = TolerancePolicy::default();
            let r = numeric_rank(&m, tol).unwrap();
            prop_assert_eq!(r, numeric_rank(&m.transpose(), tol).unwrap());
            let mut scaled = m.clone();
            for (i, &c) in scales.iter().enumerate().take(m.nrows()) {
                scaled.row_mut(i).scale_mut(c);
            }
            prop_assert_eq!(r, numeric_rank(&scaled, tol).unwrap());
            let mut permuted = m.clone();
            for i in 0..m.nrows() {
                permuted.set_row(i, &m.row((i + shift) % m.nrows()));
            }
            prop_assert_eq!(r, numeric_rank(&permuted, tol).unwrap());
        }

        #[test]
        fn residual_orthogonal_to_columns(m in matrix_strategy(), seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let y = DVector::from_fn(m.nrows(), |_, _| rng.random_range(-1.0..1.0));
            let x = least_squares_solve(&m, &y, TolerancePolicy::default()).unwrap();
            let residual = &m * &x - &y;
            let projected = m.transpose() * residual;
            let scale = m.norm() * y.norm() + 1.0;
            prop_assert!(projected.norm() <= 1e-8 * scale);
        }
    }
}
