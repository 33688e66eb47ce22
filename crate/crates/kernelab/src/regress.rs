//! The regression core shared by Gaussian process regression and kernel
//! ridge regression: Gram matrices, jittered Cholesky factorization, joint
//! path simulation, the regularized dual-weight predictor, conditional
//! variance / power function, RKHS norms of fits, and the regularization
//! schedules.

use nalgebra::{DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::designs::Design;
use crate::kernels::{Kernel, KernelError};

#[derive(Debug, Error)]
pub enum RegressError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Training data: a design, responses, and the noise variance they carry.
#[derive(Debug, Clone)]
pub struct Observations {
    pub design: Design,
    pub y: DVector<f64>,
    pub noise_variance: f64,
}

impl Observations {
    pub fn new(design: Design, y: Vec<f64>, noise_variance: f64) -> Result<Self, RegressError> {
        if y.len() != design.n() {
            return Err(RegressError::Validation(format!(
                "response length {} does not match design size {}",
                y.len(),
                design.n()
            )));
        }
        if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
            return Err(RegressError::Validation(format!(
                "noise variance must be nonnegative, got {noise_variance}"
            )));
        }
        Ok(Self {
            design,
            y: DVector::from_vec(y),
            noise_variance,
        })
    }
}

/// The data-generating process: a true correlation function and its variance.
#[derive(Debug, Clone)]
pub struct GPSpec {
    pub kernel: Kernel,
    pub process_variance: f64,
}

impl GPSpec {
    pub fn new(kernel: Kernel, process_variance: f64) -> Result<Self, RegressError> {
        if !(process_variance > 0.0 && process_variance.is_finite()) {
            return Err(RegressError::Validation(format!(
                "process variance must be positive, got {process_variance}"
            )));
        }
        Ok(Self {
            kernel,
            process_variance,
        })
    }
}

/// Correlation matrix of a kernel over a design (unit diagonal, symmetric).
pub fn gram_matrix(kernel: &Kernel, design: &Design) -> Result<DMatrix<f64>, RegressError> {
    cross_correlation_symmetric(kernel, &collect_points(design))
}

/// Correlation matrix over an arbitrary point list. Unlike [`gram_matrix`]
/// the points need not form a valid `Design` (the joint train/test sampler
/// may pass near-coincident unions; positive definiteness is then restored
/// by the jitter ladder).
pub(crate) fn cross_correlation_symmetric(
    kernel: &Kernel,
    pts: &[Vec<f64>],
) -> Result<DMatrix<f64>, RegressError> {
    let n = pts.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let lag: Vec<f64> = pts[i].iter().zip(&pts[j]).map(|(a, b)| a - b).collect();
            let v = kernel.eval(&lag)?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Matrix of kernel values between target points (rows) and a design (cols).
pub(crate) fn cross_correlation(
    kernel: &Kernel,
    targets: &[Vec<f64>],
    design: &Design,
) -> Result<DMatrix<f64>, RegressError> {
    let mut m = DMatrix::zeros(targets.len(), design.n());
    for (i, t) in targets.iter().enumerate() {
        for j in 0..design.n() {
            let lag: Vec<f64> = t.iter().zip(design.point(j)).map(|(a, b)| a - b).collect();
            m[(i, j)] = kernel.eval(&lag)?;
        }
    }
    Ok(m)
}

fn collect_points(design: &Design) -> Vec<Vec<f64>> {
    design.points().map(|p| p.to_vec()).collect()
}

/// Relative jitter ladder: 0, then 1e-12 * trace/n escalating by 10 up to
/// 1e-6 * trace/n.
const JITTER_STEPS: [f64; 8] = [0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Cholesky with escalating diagonal jitter; returns the factorization and
/// the jitter that succeeded.
pub fn cholesky_with_jitter(
    matrix: &DMatrix<f64>,
) -> Result<(nalgebra::Cholesky<f64, Dyn>, f64), RegressError> {
    let scale = matrix.trace() / matrix.nrows() as f64;
    for &step in &JITTER_STEPS {
        let jitter = step * scale;
        let candidate = if jitter == 0.0 {
            matrix.clone()
        } else {
            let mut m = matrix.clone();
            for i in 0..m.nrows() {
                m[(i, i)] += jitter;
            }
            m
        };
        if let Some(chol) = nalgebra::Cholesky::new(candidate) {
            return Ok((chol, jitter));
        }
    }
    let min_eig = matrix
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Err(RegressError::Numerical(format!(
        "Cholesky failed even with jitter up to {:e} (smallest eigenvalue {min_eig:e})",
        1e-6 * scale
    )))
}

/// Draw one zero-mean realization of the process at arbitrary points via a
/// joint Cholesky factor of `process_variance * (R + jitter I)`.
pub fn sample_gp_at_points<R: Rng + ?Sized>(
    spec: &GPSpec,
    pts: &[Vec<f64>],
    rng: &mut R,
) -> Result<DVector<f64>, RegressError> {
    let mut cov = cross_correlation_symmetric(&spec.kernel, pts)?;
    cov *= spec.process_variance;
    let (chol, _jitter) = cholesky_with_jitter(&cov)?;
    let z = DVector::from_iterator(
        pts.len(),
        (0..pts.len()).map(|_| rng.sample::<f64, _>(StandardNormal)),
    );
    Ok(chol.l() * z)
}

/// Draw one realization of the process on a design. Deterministic given the
/// RNG state.
pub fn sample_gp_realization<R: Rng + ?Sized>(
    spec: &GPSpec,
    design: &Design,
    rng: &mut R,
) -> Result<DVector<f64>, RegressError> {
    sample_gp_at_points(spec, &collect_points(design), rng)
}

/// The regularized predictor in dual form: weights `w = (R + mu I)^-1 y`
/// for the imposed kernel's Gram matrix `R`.
///
/// The same object represents the Gaussian-process predictor with nugget
/// `mu` and the kernel ridge regression estimate with `lambda = mu / n`.
#[derive(Debug, Clone)]
pub struct FittedPredictor {
    kernel: Kernel,
    mu: f64,
    design: Design,
    weights: DVector<f64>,
}

impl FittedPredictor {
    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// Predict at one point: `r(x)^T w`.
    pub fn predict(&self, x: &[f64]) -> Result<f64, RegressError> {
        let r = cross_correlation(&self.kernel, std::slice::from_ref(&x.to_vec()), &self.design)?;
        Ok((r * &self.weights)[0])
    }

    /// Predict at many points.
    pub fn predict_many(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>, RegressError> {
        let r = cross_correlation(&self.kernel, xs, &self.design)?;
        Ok((r * &self.weights).iter().copied().collect())
    }
}

const RESIDUAL_TOL: f64 = 1e-8;

/// Solve `(R + mu I) w = y` by Cholesky and wrap the dual weights.
///
/// No jitter is applied here: a singular system at `mu = 0` is reported as
/// an error suggesting either jitter or a positive `mu`.
pub fn fit_regularized(
    obs: &Observations,
    kernel: &Kernel,
    mu: f64,
) -> Result<FittedPredictor, RegressError> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(RegressError::Validation(format!(
            "regularization mu must be nonnegative, got {mu}"
        )));
    }
    let mut a = gram_matrix(kernel, &obs.design)?;
    for i in 0..a.nrows() {
        a[(i, i)] += mu;
    }
    let chol = nalgebra::Cholesky::new(a.clone()).ok_or_else(|| {
        RegressError::Numerical(format!(
            "Gram system is numerically singular at mu = {mu}; \
             add jitter or use a positive regularization"
        ))
    })?;
    let weights = chol.solve(&obs.y);

    let residual = (&a * &weights) - &obs.y;
    let rel = residual.norm() / obs.y.norm().max(f64::MIN_POSITIVE);
    if rel > RESIDUAL_TOL {
        return Err(RegressError::Numerical(format!(
            "solve residual {rel:e} exceeds {RESIDUAL_TOL:e} at mu = {mu}; \
             add jitter or use a positive regularization"
        )));
    }
    Ok(FittedPredictor {
        kernel: *kernel,
        mu,
        design: obs.design.clone(),
        weights,
    })
}

/// Kernel ridge regression minimizer in dual coordinates, computed through
/// the spectral decomposition of the Gram matrix: with `R = Q L Q^T`, the
/// ridge objective `(1/n) |y - R c|^2 + lambda c^T R c` is minimized by
/// `c = Q (L + n lambda I)^-1 Q^T y` (minimal-norm convention on a null
/// space of `R`).
///
/// Algebraically identical to [`fit_regularized`] with `mu = n lambda`, but
/// reached through a different factorization, so the pair serves as a
/// dual-route consistency check of the representer identity.
pub fn fit_krr(
    obs: &Observations,
    kernel: &Kernel,
    lambda: f64,
) -> Result<FittedPredictor, RegressError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(RegressError::Validation(format!(
            "KRR requires lambda > 0, got {lambda}"
        )));
    }
    let n = obs.design.n() as f64;
    let r = gram_matrix(kernel, &obs.design)?;
    let eig = r.symmetric_eigen();
    let mut coords = eig.eigenvectors.transpose() * &obs.y;
    for i in 0..coords.len() {
        let denom = eig.eigenvalues[i] + n * lambda;
        if denom <= 0.0 {
            return Err(RegressError::Numerical(format!(
                "KRR spectral system not positive (eigenvalue {} at ridge {})",
                eig.eigenvalues[i],
                n * lambda
            )));
        }
        coords[i] /= denom;
    }
    let weights = &eig.eigenvectors * coords;
    Ok(FittedPredictor {
        kernel: *kernel,
        mu: n * lambda,
        design: obs.design.clone(),
        weights,
    })
}

/// Negative values within this tolerance of zero are treated as rounding.
const VARIANCE_CLAMP_TOL: f64 = 1e-10;

fn clamp_variance(v: f64) -> Result<f64, RegressError> {
    if v < -VARIANCE_CLAMP_TOL {
        return Err(RegressError::Numerical(format!(
            "conditional variance {v} is negative beyond rounding tolerance"
        )));
    }
    Ok(v.max(0.0))
}

/// Conditional variance of the process at several points given observations
/// on the design with nugget `mu`:
/// `sigma^2 (1 - r(x)^T (R + mu I)^-1 r(x))`.
pub fn conditional_variance_many(
    spec: &GPSpec,
    design: &Design,
    mu: f64,
    xs: &[Vec<f64>],
) -> Result<Vec<f64>, RegressError> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(RegressError::Validation(format!(
            "nugget mu must be nonnegative, got {mu}"
        )));
    }
    let mut a = gram_matrix(&spec.kernel, design)?;
    for i in 0..a.nrows() {
        a[(i, i)] += mu;
    }
    let chol = nalgebra::Cholesky::new(a).ok_or_else(|| {
        RegressError::Numerical("correlation system singular in conditional variance".into())
    })?;
    let r = cross_correlation(&spec.kernel, xs, design)?; // len(xs) x n
    let solved = chol.solve(&r.transpose()); // n x len(xs)
    let mut out = Vec::with_capacity(xs.len());
    for j in 0..xs.len() {
        let quad: f64 = r.row(j).transpose().dot(&solved.column(j).into_owned());
        out.push(spec.process_variance * clamp_variance(1.0 - quad)?);
    }
    Ok(out)
}

/// Conditional variance at a single point.
pub fn conditional_variance(
    spec: &GPSpec,
    design: &Design,
    mu: f64,
    x: &[f64],
) -> Result<f64, RegressError> {
    Ok(conditional_variance_many(spec, design, mu, &[x.to_vec()])?[0])
}

/// Power function at several points: the unit-variance conditional variance
/// `1 - r(x)^T (R + mu1 I)^-1 r(x)` with `mu1 > 0`.
pub fn power_function_many(
    kernel: &Kernel,
    design: &Design,
    mu1: f64,
    xs: &[Vec<f64>],
) -> Result<Vec<f64>, RegressError> {
    if !(mu1 > 0.0 && mu1.is_finite()) {
        return Err(RegressError::Validation(format!(
            "power function requires mu1 > 0, got {mu1}"
        )));
    }
    let spec = GPSpec::new(*kernel, 1.0)?;
    conditional_variance_many(&spec, design, mu1, xs)
}

/// Power function at a single point.
pub fn power_function(
    kernel: &Kernel,
    design: &Design,
    mu1: f64,
    x: &[f64],
) -> Result<f64, RegressError> {
    Ok(power_function_many(kernel, design, mu1, &[x.to_vec()])?[0])
}

/// RKHS norm of a fitted predictor from its dual representation:
/// `sqrt(w^T R w)`.
pub fn rkhs_norm_of_fit(fit: &FittedPredictor) -> Result<f64, RegressError> {
    let r = gram_matrix(fit.kernel(), fit.design())?;
    let quad = fit.weights().dot(&(&r * fit.weights()));
    Ok(quad.max(0.0).sqrt())
}

/// Nugget schedule for the Gaussian-process convergence study:
/// `base * n^(1 - m/m0)` in the oversmoothed/well-specified regime
/// (`m >= m0`), constant `base` when undersmoothed.
pub fn mu_schedule(n: usize, m0: f64, m: f64, base: f64) -> f64 {
    if m >= m0 {
        base * (n as f64).powf(1.0 - m / m0)
    } else {
        base
    }
}

/// Ridge schedule for the deterministic-target study:
/// `base * n^(-2m / (2 m0f + d))`.
pub fn lambda_schedule(n: usize, m0f: f64, m: f64, d: usize, base: f64) -> f64 {
    base * (n as f64).powf(-2.0 * m / (2.0 * m0f + d as f64))
}
