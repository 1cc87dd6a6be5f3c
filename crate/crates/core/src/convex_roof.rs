//! Convex roofs of pure-state measures:
//!
//! f(ρ) = inf Σⱼ pⱼ m(ψⱼ) over decompositions Σⱼ pⱼ|ψⱼ⟩⟨ψⱼ| = ρ,
//!
//! searched by conjugate gradients over K×K unitaries U. With ρ = Σᵢ λᵢ|vᵢ⟩⟨vᵢ|
//! of rank R, the first R columns of U give the subnormalized members
//! |ψ̃ⱼ⟩ = Σᵢ U[j,i] √λᵢ |vᵢ⟩, and every decomposition of cardinality K is
//! reached this way.
//!
//! The search moves along geodesics U·exp(tX) with X skew-Hermitian. The
//! gradient is the skew-Hermitian part of U†D, D holding the partial
//! derivatives of the objective with respect to Re U and Im U, taken by
//! central differences. Each entry of U only touches one decomposition
//! member, so a derivative costs one measure evaluation, not K.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{polar_unitary, vec_norm, ComplexMatrix, HermitianEigen, SkewExp, C64, ZERO};
use crate::measures::PureMeasure;
use crate::state::{DensityMatrix, PureState};

/// Eigenvalues at or below this fraction of the largest count as zero.
pub const RANK_CUTOFF: f64 = 1e-12;
/// Decomposition members lighter than this do not enter the objective.
pub const MIN_WEIGHT: f64 = 1e-14;
/// Drift of U†U from the identity that triggers a polar re-projection.
pub const UNITARITY_DRIFT: f64 = 1e-10;
/// Gradient norm below which a descent counts as stationary.
pub const GRADIENT_FLOOR: f64 = 1e-9;
/// Consecutive small changes required to declare convergence.
const STALL_WINDOW: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerOptions {
    /// K − R.
    pub cardinality_offset: usize,
    pub restarts: usize,
    pub max_iterations: usize,
    /// Finite-difference step for the gradient.
    pub gradient_step: f64,
    pub convergence_tol: f64,
    /// Relative width at which the golden-section line search stops.
    pub line_search_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            cardinality_offset: 4,
            restarts: 16,
            max_iterations: 5000,
            gradient_step: 1e-5,
            convergence_tol: 1e-12,
            line_search_tol: 1e-4,
            seed: 0,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iterations == 0 {
            return Err(Error::Config("restarts and max_iterations must be positive".into()));
        }
        for (name, v) in [
            ("gradient_step", self.gradient_step),
            ("convergence_tol", self.convergence_tol),
            ("line_search_tol", self.line_search_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// A K×K unitary whose first R columns parametrize a decomposition.
#[derive(Clone, Debug)]
pub struct StiefelPoint {
    u: ComplexMatrix,
    rank: usize,
}

impl StiefelPoint {
    pub fn new(u: ComplexMatrix, rank: usize) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::DimensionMismatch("Stiefel point must be a square unitary".into()));
        }
        if rank == 0 || rank > u.rows() {
            return Err(Error::RankMismatch(format!("rank {rank} does not fit a {}x{} unitary", u.rows(), u.cols())));
        }
        let drift = u.unitarity_error();
        if drift > UNITARITY_DRIFT {
            return Err(Error::InvalidState(format!("matrix is not unitary (drift {drift:e})")));
        }
        Ok(Self { u, rank })
    }

    pub fn identity(k: usize, rank: usize) -> Result<Self> {
        Self::new(ComplexMatrix::identity(k), rank)
    }

    pub fn k(&self) -> usize {
        self.u.rows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.u
    }

    /// U·exp(tX), re-projected onto the unitary group if it drifted.
    pub fn step(&self, generator: &SkewExp, t: f64) -> Result<Self> {
        let mut u = self.u.matmul(&generator.at(t));
        if u.unitarity_error() > UNITARITY_DRIFT {
            u = polar_unitary(&u)?;
        }
        Ok(Self { u, rank: self.rank })
    }
}

/// Haar-random K×K unitary: Gram–Schmidt on a complex Ginibre matrix, which
/// leaves the triangular factor with a positive real diagonal.
pub fn random_stiefel(k: usize, rank: usize, rng: &mut ChaCha8Rng) -> Result<StiefelPoint> {
    let mut cols: Vec<Vec<C64>> = (0..k)
        .map(|_| {
            (0..k)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                })
                .collect()
        })
        .collect();
    for j in 0..k {
        // two passes of modified Gram–Schmidt keep orthogonality at ~1e-16
        for _ in 0..2 {
            for i in 0..j {
                let proj: C64 = crate::linalg::vdot(&cols[i], &cols[j]);
                let (head, tail) = cols.split_at_mut(j);
                for (a, b) in tail[0].iter_mut().zip(&head[i]) {
                    *a -= proj * b;
                }
            }
        }
        let n = vec_norm(&cols[j]);
        cols[j].iter_mut().for_each(|z| *z /= n);
    }
    let u = ComplexMatrix::from_fn(k, k, |r, c| cols[c][r]);
    StiefelPoint::new(u, rank)
}

/// ρ written as B†B-style factor: row i of `rows` is √λᵢ vᵢ for the R
/// retained eigenpairs, so that the members are ψ̃ⱼ = Σᵢ U[j,i]·rows[i].
#[derive(Clone, Debug)]
pub struct RhoFactor {
    rows: Vec<Vec<C64>>,
    dim: usize,
}

impl RhoFactor {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        Self::from_eigen(&rho.eigen()?)
    }

    /// From an explicit spectral decomposition of ρ; any orthonormal basis of
    /// a degenerate eigenspace is acceptable.
    pub fn from_eigen(eig: &HermitianEigen) -> Result<Self> {
        let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        if lmax <= 0.0 {
            return Err(Error::InvalidState("density matrix has no positive eigenvalue".into()));
        }
        let mut order: Vec<usize> = (0..eig.dim()).filter(|&i| eig.eigenvalues[i] > RANK_CUTOFF * lmax).collect();
        // largest weights first
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let rows = order
            .iter()
            .map(|&i| {
                let s = eig.eigenvalues[i].sqrt();
                eig.eigenvector(i).into_iter().map(|z| z * s).collect()
            })
            .collect();
        Ok(Self { rows, dim: eig.dim() })
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum()).collect()
    }

    /// Subnormalized member j for the unitary `u`.
    fn member(&self, u: &ComplexMatrix, j: usize, out: &mut [C64]) {
        out.iter_mut().for_each(|z| *z = ZERO);
        for (i, row) in self.rows.iter().enumerate() {
            let c = u[(j, i)];
            for (o, v) in out.iter_mut().zip(row) {
                *o += c * v;
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct PureDecomposition {
    pub weights: Vec<f64>,
    pub states: Vec<PureState>,
}

impl PureDecomposition {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Σⱼ pⱼ|ψⱼ⟩⟨ψⱼ|
    pub fn reconstruct(&self) -> ComplexMatrix {
        let dim = self.states.first().map_or(0, |s| s.dim());
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (p, s) in self.weights.iter().zip(&self.states) {
            if *p > 0.0 {
                m = &m + &s.projector().scale_real(*p);
            }
        }
        m
    }

    /// Σⱼ pⱼ m(ψⱼ), skipping members below [`MIN_WEIGHT`].
    pub fn average<M: PureMeasure + ?Sized>(&self, measure: &M) -> Result<f64> {
        let mut acc = 0.0;
        for (p, s) in self.weights.iter().zip(&self.states) {
            if *p >= MIN_WEIGHT {
                acc += p * measure.evaluate(s.amplitudes())?;
            }
        }
        Ok(acc)
    }
}

pub fn decomposition_from_stiefel(factor: &RhoFactor, point: &StiefelPoint) -> Result<PureDecomposition> {
    if point.rank() != factor.rank() {
        return Err(Error::RankMismatch(format!("point has rank {}, state has rank {}", point.rank(), factor.rank())));
    }
    let mut weights = Vec::with_capacity(point.k());
    let mut states = Vec::with_capacity(point.k());
    let mut buf = vec![ZERO; factor.dim()];
    for j in 0..point.k() {
        factor.member(point.matrix(), j, &mut buf);
        let p: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
        if p > MIN_WEIGHT {
            weights.push(p);
            states.push(PureState::normalized(buf.clone())?);
        } else {
            weights.push(0.0);
            states.push(PureState::basis(factor.dim(), 0));
        }
    }
    Ok(PureDecomposition { weights, states })
}

/// The minimization problem for one state and one measure.
pub struct RoofProblem<'a, M: PureMeasure + ?Sized> {
    factor: RhoFactor,
    measure: &'a M,
}

/// Outcome of a geodesic line search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSearchResult {
    pub t_star: f64,
    pub value: f64,
}

impl<'a, M: PureMeasure + ?Sized> RoofProblem<'a, M> {
    pub fn new(rho: &DensityMatrix, measure: &'a M) -> Result<Self> {
        Self::from_factor(RhoFactor::new(rho)?, measure)
    }

    pub fn from_factor(factor: RhoFactor, measure: &'a M) -> Result<Self> {
        if factor.dim() != measure.dim() {
            return Err(Error::InvalidState(format!(
                "state dimension {} does not match measure {} on dimension {}",
                factor.dim(),
                measure.label(),
                measure.dim()
            )));
        }
        Ok(Self { factor, measure })
    }

    pub fn factor(&self) -> &RhoFactor {
        &self.factor
    }

    pub fn rank(&self) -> usize {
        self.factor.rank()
    }

    /// pⱼ·m(ψ̃ⱼ/√pⱼ) for a subnormalized member.
    fn term(&self, member: &[C64]) -> Result<f64> {
        let p: f64 = member.iter().map(|z| z.norm_sqr()).sum();
        if p < MIN_WEIGHT {
            return Ok(0.0);
        }
        let s = 1.0 / p.sqrt();
        let psi: Vec<C64> = member.iter().map(|z| z * s).collect();
        Ok(p * self.measure.evaluate(&psi)?)
    }

    fn objective_matrix(&self, u: &ComplexMatrix) -> Result<f64> {
        let mut buf = vec![ZERO; self.factor.dim()];
        let mut acc = 0.0;
        for j in 0..u.rows() {
            self.factor.member(u, j, &mut buf);
            acc += self.term(&buf)?;
        }
        Ok(acc)
    }

    /// h(U) = Σⱼ pⱼ m(ψⱼ).
    pub fn objective(&self, point: &StiefelPoint) -> Result<f64> {
        self.check_point(point)?;
        self.objective_matrix(point.matrix())
    }

    fn check_point(&self, point: &StiefelPoint) -> Result<()> {
        if point.rank() != self.rank() {
            return Err(Error::RankMismatch(format!("point has rank {}, state has rank {}", point.rank(), self.rank())));
        }
        Ok(())
    }

    /// Skew-Hermitian gradient G = (A − Aᵀ)/2 + i(S + Sᵀ)/2 with
    /// A_jk = Σᵢ (∂h/∂Re U_ik · Re U_ij + ∂h/∂Im U_ik · Im U_ij) and
    /// S_jk = Σᵢ (∂h/∂Im U_ik · Re U_ij − ∂h/∂Re U_ik · Im U_ij).
    pub fn gradient(&self, point: &StiefelPoint, step: f64) -> Result<ComplexMatrix> {
        self.check_point(point)?;
        let u = point.matrix();
        let k = u.rows();
        let r = self.rank();
        let dim = self.factor.dim();
        // d_re[i][c], d_im[i][c] for c < R; zero for the unused columns
        let mut d_re = vec![0.0; k * k];
        let mut d_im = vec![0.0; k * k];
        let mut base = vec![ZERO; dim];
        let mut trial = vec![ZERO; dim];
        for i in 0..k {
            self.factor.member(u, i, &mut base);
            for c in 0..r {
                let dir = &self.factor.rows[c];
                for (shift, slot) in [(C64::new(step, 0.0), &mut d_re), (C64::new(0.0, step), &mut d_im)] {
                    for (t, (b, v)) in trial.iter_mut().zip(base.iter().zip(dir)) {
                        *t = b + shift * v;
                    }
                    let plus = self.term(&trial)?;
                    for (t, (b, v)) in trial.iter_mut().zip(base.iter().zip(dir)) {
                        *t = b - shift * v;
                    }
                    let minus = self.term(&trial)?;
                    slot[i * k + c] = (plus - minus) / (2.0 * step);
                }
            }
        }
        let mut a = vec![0.0; k * k];
        let mut s = vec![0.0; k * k];
        for j in 0..k {
            for c in 0..r {
                let (mut aj, mut sj) = (0.0, 0.0);
                for i in 0..k {
                    let uij = u[(i, j)];
                    aj += d_re[i * k + c] * uij.re + d_im[i * k + c] * uij.im;
                    sj += d_im[i * k + c] * uij.re - d_re[i * k + c] * uij.im;
                }
                a[j * k + c] = aj;
                s[j * k + c] = sj;
            }
        }
        Ok(ComplexMatrix::from_fn(k, k, |j, c| {
            C64::new((a[j * k + c] - a[c * k + j]) / 2.0, (s[j * k + c] + s[c * k + j]) / 2.0)
        }))
    }

    /// Geodesic line search along U·exp(tX): expanding/shrinking bracket on
    /// [0, π/‖X‖₂], then golden section down to `rel_tol` of the step.
    ///
    /// `h0` is the current value and `t_guess` the first trial step (the
    /// previous accepted step is a good choice). Fails with
    /// [`Error::NoConvergence`] when no decrease is found.
    pub fn line_search(
        &self,
        point: &StiefelPoint,
        direction: &ComplexMatrix,
        h0: f64,
        t_guess: Option<f64>,
        rel_tol: f64,
    ) -> Result<LineSearchResult> {
        self.check_point(point)?;
        let generator = SkewExp::new(direction)?;
        let radius = generator.spectral_radius();
        if radius == 0.0 {
            return Err(Error::NoConvergence("line search: zero direction".into()));
        }
        let t_max = std::f64::consts::PI / radius;
        let u = point.matrix();
        let r = self.rank();
        let eval = |t: f64| -> Result<f64> {
            // only the first R columns of U·exp(tX) matter
            let e = generator.at(t).leading_columns(r);
            self.objective_matrix(&u.matmul(&e))
        };

        let mut t1 = t_guess.filter(|t| *t > 0.0).unwrap_or(0.01 * t_max).min(t_max);
        let mut h1 = eval(t1)?;
        let t_floor = 1e-14 * t_max;
        let (mut a, mut b, c);
        if h1 < h0 {
            // expand while still descending
            a = 0.0;
            b = t1;
            let mut hb = h1;
            loop {
                let t2 = (2.0 * b).min(t_max);
                if t2 <= b {
                    c = b;
                    break;
                }
                let h2 = eval(t2)?;
                if h2 >= hb {
                    c = t2;
                    break;
                }
                a = b;
                b = t2;
                hb = h2;
            }
        } else {
            // shrink until something beats h0
            loop {
                t1 *= 0.25;
                if t1 < t_floor {
                    return Err(Error::NoConvergence("line search: no decrease along direction".into()));
                }
                h1 = eval(t1)?;
                if h1 < h0 {
                    break;
                }
            }
            a = 0.0;
            b = t1;
            c = 4.0 * t1;
        }
        let mut best = (b, eval(b)?);
        let mut err = None;
        let width_tol = rel_tol * b.max(t_floor);
        let (t, v) = crate::optimize::golden_section(
            |t| match eval(t) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    f64::INFINITY
                }
            },
            a,
            c,
            width_tol,
        );
        if let Some(e) = err {
            return Err(e);
        }
        if v < best.1 {
            best = (t, v);
        }
        if best.1 >= h0 {
            return Err(Error::NoConvergence("line search: no decrease along direction".into()));
        }
        Ok(LineSearchResult { t_star: best.0, value: best.1 })
    }

    /// One conjugate-gradient descent from `start`.
    pub fn descend(&self, start: StiefelPoint, opts: &OptimizerOptions) -> Result<Descent> {
        self.check_point(&start)?;
        let k = start.k();
        let reset_period = (k * k).max(1);
        let mut point = start;
        let mut h = self.objective(&point)?;
        let mut history = vec![h];
        let mut g = self.gradient(&point, opts.gradient_step)?;
        let mut x = g.scale_real(-1.0);
        let mut steepest = true;
        let mut t_prev: Option<f64> = None;
        let mut small_steps = 0;
        let mut converged = false;
        let mut iterations = 0;
        let mut since_reset = 0;

        while iterations < opts.max_iterations {
            if g.frobenius_norm() <= GRADIENT_FLOOR {
                converged = true;
                break;
            }
            iterations += 1;
            let ls = match self.line_search(&point, &x, h, t_prev, opts.line_search_tol) {
                Ok(ls) => ls,
                Err(Error::NoConvergence(_)) => {
                    if steepest {
                        // no descent even along −G: stationary up to noise
                        converged = true;
                        break;
                    }
                    x = g.scale_real(-1.0);
                    steepest = true;
                    since_reset = 0;
                    t_prev = None;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let generator = SkewExp::new(&x)?;
            let next = point.step(&generator, ls.t_star)?;
            let h_next = self.objective(&next)?;
            let dh = (h - h_next).abs();
            point = next;
            h = h_next;
            history.push(h);
            t_prev = Some(ls.t_star);

            if dh <= opts.convergence_tol * h.abs().max(1.0) {
                small_steps += 1;
                if small_steps >= STALL_WINDOW {
                    converged = true;
                    break;
                }
            } else {
                small_steps = 0;
            }

            let g_next = self.gradient(&point, opts.gradient_step)?;
            let denom = g.inner_re(&g);
            let beta = if denom > 0.0 { ((g_next.inner_re(&g_next) - g_next.inner_re(&g)) / denom).max(0.0) } else { 0.0 };
            since_reset += 1;
            if beta == 0.0 || since_reset >= reset_period {
                x = g_next.scale_real(-1.0);
                steepest = true;
                since_reset = 0;
            } else {
                x = &g_next.scale_real(-1.0) + &x.scale_real(beta);
                steepest = false;
                if x.inner_re(&g_next) >= 0.0 {
                    x = g_next.scale_real(-1.0);
                    steepest = true;
                    since_reset = 0;
                }
            }
            g = g_next;
        }
        Ok(Descent { point, value: h, iterations, converged, history })
    }
}

/// Result of one descent.
#[derive(Clone, Debug)]
pub struct Descent {
    pub point: StiefelPoint,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after the start and after every accepted step.
    pub history: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ConvexRoofResult {
    /// Upper bound on the convex roof, clamped at zero.
    pub value: f64,
    pub decomposition: PureDecomposition,
    pub restart_values: Vec<f64>,
    pub restart_iterations: Vec<usize>,
    pub restart_converged: Vec<bool>,
    pub histories: Vec<Vec<f64>>,
    /// Index of the restart that produced `value`.
    pub best_restart: usize,
    pub rank: usize,
    pub cardinality: usize,
}

impl ConvexRoofResult {
    pub fn iterations(&self) -> usize {
        self.restart_iterations.iter().sum()
    }

    /// Whether the best restart met its stopping criterion.
    pub fn converged(&self) -> bool {
        self.restart_converged[self.best_restart]
    }

    /// max − min over restart values.
    pub fn spread(&self) -> f64 {
        let max = self.restart_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = self.restart_values.iter().cloned().fold(f64::INFINITY, f64::min);
        (max - min).max(0.0)
    }
}

/// Seeded generator of restart `index`: one ChaCha stream per restart, so the
/// starts do not depend on the order restarts are scheduled in.
pub fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn minimize<M: PureMeasure + ?Sized>(rho: &DensityMatrix, measure: &M, opts: &OptimizerOptions) -> Result<ConvexRoofResult> {
    minimize_factor(RhoFactor::new(rho)?, measure, opts)
}

/// As [`minimize`], with the spectral decomposition supplied by the caller.
pub fn minimize_with_eigen<M: PureMeasure + ?Sized>(eig: &HermitianEigen, measure: &M, opts: &OptimizerOptions) -> Result<ConvexRoofResult> {
    minimize_factor(RhoFactor::from_eigen(eig)?, measure, opts)
}

pub fn minimize_factor<M: PureMeasure + ?Sized>(factor: RhoFactor, measure: &M, opts: &OptimizerOptions) -> Result<ConvexRoofResult> {
    opts.validate()?;
    let problem = RoofProblem::from_factor(factor, measure)?;
    let r = problem.rank();
    let k = r + opts.cardinality_offset;

    let descents: Vec<Result<Descent>> = (0..opts.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = restart_rng(opts.seed, i);
            let start = random_stiefel(k, r, &mut rng)?;
            problem.descend(start, opts)
        })
        .collect();
    let descents: Vec<Descent> = descents.into_iter().collect::<Result<_>>()?;

    let best_restart = (0..descents.len())
        .min_by(|&a, &b| descents[a].value.total_cmp(&descents[b].value).then(a.cmp(&b)))
        .expect("at least one restart");
    let best = &descents[best_restart];
    let decomposition = decomposition_from_stiefel(&problem.factor, &best.point)?;
    let value = decomposition.average(measure)?.max(0.0);
    Ok(ConvexRoofResult {
        value,
        decomposition,
        restart_values: descents.iter().map(|d| d.value).collect(),
        restart_iterations: descents.iter().map(|d| d.iterations).collect(),
        restart_converged: descents.iter().map(|d| d.converged).collect(),
        histories: descents.into_iter().map(|d| d.history).collect(),
        best_restart,
        rank: r,
        cardinality: k,
    })
}
