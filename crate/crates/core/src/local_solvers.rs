//! Riemannian local minimizers: a trust-region method with a truncated
//! conjugate-gradient subproblem solver (RTR), and a conjugate-gradient
//! method with Armijo backtracking (RCG).
//!
//! Both stop when the Riemannian gradient norm drops to `grad_tol`
//! (default 1e-6) or after `max_iters` iterations (default 10000), and both
//! produce a monotone non-increasing sequence of accepted energies.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::manifold::{self, RiemannianHessian};
use crate::matrix::Matrix2xN;
use crate::model::Instance;
use crate::scalar::Real;
use crate::spin::CartesianConfig;

/// Search-direction update rule of the conjugate-gradient solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BetaRule {
    /// Polak–Ribière with automatic restart (β clipped at zero and steepest
    /// descent whenever the direction stops being a descent direction).
    #[default]
    RestartedPolakRibiere,
}

#[derive(Debug, Clone)]
pub struct SolverOptions<T> {
    /// Stop when the Riemannian gradient norm is at most this.
    pub grad_tol: T,
    pub max_iters: usize,
    /// Defaults to `tr_max_radius / 8` when unset.
    pub tr_initial_radius: Option<T>,
    /// Defaults to `sqrt(n_sites)` (the manifold-diameter scale) when unset.
    pub tr_max_radius: Option<T>,
    /// Linear-convergence tolerance of the truncated CG inner solve.
    pub tcg_kappa: T,
    /// Superlinear exponent of the truncated CG inner solve.
    pub tcg_theta: T,
    pub cg_beta_rule: BetaRule,
    /// Armijo sufficient-decrease constant.
    pub armijo_constant: T,
    /// Backtracking factor of the line search.
    pub backtracking_factor: T,
    /// Initial trial step of the line search.
    pub initial_step: T,
    /// Re-validate feasibility and tangency at every iterate.
    pub checked: bool,
    /// Record the accepted-energy trace in the result.
    pub record_trace: bool,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            grad_tol: T::from64(1e-6),
            max_iters: 10_000,
            tr_initial_radius: None,
            tr_max_radius: None,
            tcg_kappa: T::from64(0.1),
            tcg_theta: T::one(),
            cg_beta_rule: BetaRule::RestartedPolakRibiere,
            armijo_constant: T::from64(1e-4),
            backtracking_factor: T::from64(0.5),
            initial_step: T::one(),
            checked: false,
            record_trace: false,
        }
    }
}

impl<T: Real> SolverOptions<T> {
    fn validate(&self) -> Result<()> {
        if !(self.grad_tol > T::zero()) {
            return Err(Error::param("grad_tol", "must be positive"));
        }
        if self.max_iters < 1 {
            return Err(Error::param("max_iters", "must be at least 1"));
        }
        if let (Some(r0), Some(rmax)) = (self.tr_initial_radius, self.tr_max_radius) {
            if !(r0 > T::zero() && r0 <= rmax) {
                return Err(Error::param(
                    "tr_initial_radius",
                    "must satisfy 0 < initial <= max",
                ));
            }
        }
        if !(self.tcg_kappa > T::zero() && self.tcg_kappa < T::one()) {
            return Err(Error::param("tcg_kappa", "must lie in (0, 1)"));
        }
        if !(self.backtracking_factor > T::zero() && self.backtracking_factor < T::one()) {
            return Err(Error::param("backtracking_factor", "must lie in (0, 1)"));
        }
        Ok(())
    }

    fn radii(&self, n_sites: usize) -> (T, T) {
        let rmax = self
            .tr_max_radius
            .unwrap_or_else(|| T::from_count(n_sites).sqrt());
        let r0 = self.tr_initial_radius.unwrap_or(rmax / T::from64(8.0));
        (r0.min(rmax), rmax)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Gradient norm at most `grad_tol`.
    Converged,
    IterationLimit,
    /// No further progress possible (collapsed radius or failed line search).
    Stalled,
    /// A non-finite energy was encountered.
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct LocalResult<T> {
    pub config: CartesianConfig<T>,
    pub energy: T,
    pub grad_norm: T,
    pub iterations: usize,
    pub cost_evals: usize,
    pub grad_evals: usize,
    pub hess_evals: usize,
    /// Truncated-CG exits through a negative-curvature direction.
    pub neg_curvature_hits: usize,
    pub wall_seconds: f64,
    pub status: SolveStatus,
    /// Accepted-energy trace, present when `record_trace` was set.
    pub trace: Option<Vec<T>>,
}

/// A local minimizer usable by the global frameworks. Implemented by [`Rtr`]
/// and [`Rcg`]; test suites inject stubs through the same interface.
pub trait LocalSolve<T: Real>: Sync {
    fn name(&self) -> &'static str;
    fn solve(
        &self,
        inst: &Instance<T>,
        x0: &CartesianConfig<T>,
        opts: &SolverOptions<T>,
    ) -> Result<LocalResult<T>>;
}

/// Riemannian trust-region solver.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rtr;

/// Riemannian conjugate-gradient solver.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rcg;

impl<T: Real> LocalSolve<T> for Rtr {
    fn name(&self) -> &'static str {
        "rtr"
    }
    fn solve(
        &self,
        inst: &Instance<T>,
        x0: &CartesianConfig<T>,
        opts: &SolverOptions<T>,
    ) -> Result<LocalResult<T>> {
        rtr(inst, x0, opts)
    }
}

impl<T: Real> LocalSolve<T> for Rcg {
    fn name(&self) -> &'static str {
        "rcg"
    }
    fn solve(
        &self,
        inst: &Instance<T>,
        x0: &CartesianConfig<T>,
        opts: &SolverOptions<T>,
    ) -> Result<LocalResult<T>> {
        rcg(inst, x0, opts)
    }
}

struct Counters {
    cost: usize,
    grad: usize,
    hess: usize,
    neg_curv: usize,
}

fn validate_start<T: Real>(inst: &Instance<T>, x0: &CartesianConfig<T>) -> Result<()> {
    if x0.n_sites() != inst.n_sites() {
        return Err(Error::DimensionMismatch {
            what: "starting configuration",
            expected: inst.n_sites(),
            got: x0.n_sites(),
        });
    }
    let dev = x0.max_unit_deviation();
    if !dev.is_finite() || dev > T::from64(1e-6) {
        return Err(Error::InvalidConfig(format!(
            "starting point off the manifold: column deviation {dev:e}"
        )));
    }
    Ok(())
}

fn check_iterate<T: Real>(x: &CartesianConfig<T>) -> Result<()> {
    let dev = x.max_unit_deviation();
    if dev > T::from64(1e-10) {
        return Err(Error::InvalidConfig(format!(
            "iterate drifted off the manifold: column deviation {dev:e}"
        )));
    }
    Ok(())
}

/// Riemannian trust-region minimization from `x0`.
///
/// The quadratic subproblem is solved by truncated conjugate gradient with
/// Steihaug–Toint handling of the boundary and of negative curvature (which
/// the indefinite coupling Hessian makes routine). Steps with reduction
/// ratio below 0.1 are rejected; the radius shrinks below 0.25 and doubles
/// above 0.75, capped at the maximum radius.
pub fn rtr<T: Real>(
    inst: &Instance<T>,
    x0: &CartesianConfig<T>,
    opts: &SolverOptions<T>,
) -> Result<LocalResult<T>> {
    opts.validate()?;
    validate_start(inst, x0)?;
    let clock = Instant::now();
    let n = inst.n_sites();
    let (mut radius, radius_max) = opts.radii(n);

    let mut counters = Counters {
        cost: 0,
        grad: 0,
        hess: 0,
        neg_curv: 0,
    };
    let mut trace = opts.record_trace.then(Vec::new);

    let mut x = x0.clone();
    let mut f = inst.energy_mat(x.matrix());
    counters.cost += 1;
    if let Some(t) = trace.as_mut() {
        t.push(f);
    }
    if !f.is_finite() {
        return Ok(finish(x, f, T::nan(), 0, counters, clock, SolveStatus::NumericalFailure, trace));
    }

    let mut egrad = Matrix2xN::zeros(n);
    inst.euclidean_gradient_into(x.matrix(), &mut egrad);
    counters.grad += 1;
    let mut grad = Matrix2xN::zeros(n);
    manifold::project_into(&x, &egrad, &mut grad);
    let mut gnorm = grad.fnorm();
    let mut step_buf = Matrix2xN::zeros(n);

    let mut iterations = 0usize;
    let mut status = loop {
        if gnorm <= opts.grad_tol {
            break SolveStatus::Converged;
        }
        if iterations >= opts.max_iters {
            break SolveStatus::IterationLimit;
        }
        if radius < radius_max * T::from64(1e-15) {
            break SolveStatus::Stalled;
        }
        iterations += 1;

        let hess = RiemannianHessian::with_euclidean_gradient(inst, &x, &egrad);
        let tcg = truncated_cg(&hess, &grad, radius, opts.tcg_kappa, opts.tcg_theta, n);
        counters.hess += tcg.applies;
        if tcg.neg_curvature {
            counters.neg_curv += 1;
        }
        manifold::project_into(&x, &tcg.step, &mut step_buf);
        let x_trial = manifold::retract_unchecked(&x, &step_buf);
        let f_trial = inst.energy_mat(x_trial.matrix());
        counters.cost += 1;
        if !f_trial.is_finite() {
            break SolveStatus::NumericalFailure;
        }

        // Regularized reduction ratio; keeps tiny-step comparisons stable
        // near convergence.
        let reg = T::epsilon() * T::from64(1e4) * (T::one() + f.abs());
        let rho = (f - f_trial + reg) / (tcg.model_decrease + reg);

        let quarter = T::from64(0.25);
        let mut shrunk = false;
        if rho < quarter || !tcg.model_decrease.is_finite() || tcg.model_decrease <= T::zero() {
            radius = radius * quarter;
            shrunk = true;
        } else if rho > T::from64(0.75) && tcg.boundary {
            radius = (radius + radius).min(radius_max);
        }

        if rho > T::from64(0.1) && tcg.model_decrease > T::zero() && f_trial <= f {
            x = x_trial;
            f = f_trial;
            if opts.checked {
                check_iterate(&x)?;
            }
            inst.euclidean_gradient_into(x.matrix(), &mut egrad);
            counters.grad += 1;
            manifold::project_into(&x, &egrad, &mut grad);
            gnorm = grad.fnorm();
            if let Some(t) = trace.as_mut() {
                t.push(f);
            }
        } else if !shrunk {
            // A rejected step must change the state, or the iteration can
            // spin at the energy resolution floor.
            radius = radius * quarter;
        }
    };

    if status == SolveStatus::Converged && gnorm > opts.grad_tol {
        status = SolveStatus::Stalled;
    }
    Ok(finish(x, f, gnorm, iterations, counters, clock, status, trace))
}

struct TcgOutcome<T> {
    step: Matrix2xN<T>,
    boundary: bool,
    neg_curvature: bool,
    applies: usize,
    model_decrease: T,
}

/// Steihaug–Toint truncated conjugate gradient on the trust-region model
/// `m(s) = <g,s> + 1/2 <s, H s>`, ‖s‖ ≤ radius.
///
/// Near outer convergence the residual recurrences reach the rounding floor,
/// where textbook CG can produce noise directions. Two guards keep the step
/// sound: every update must decrease the model value, and a boundary or
/// negative-curvature exit is only taken along a model-descent direction
/// (`<r, d> < 0`).
fn truncated_cg<T: Real>(
    hess: &RiemannianHessian<'_, T>,
    g: &Matrix2xN<T>,
    radius: T,
    kappa: T,
    theta: T,
    max_inner: usize,
) -> TcgOutcome<T> {
    let n = g.n_cols();
    let mut s = Matrix2xN::zeros(n);
    let mut hs = Matrix2xN::zeros(n);
    let mut r = g.clone();
    let mut d = g.clone();
    d.scale(-T::one());
    let mut hd = Matrix2xN::zeros(n);

    let mut rr = r.fdot(&r);
    let r0 = rr.sqrt();
    let target = r0 * kappa.min(r0.powf(theta));

    let mut boundary = false;
    let mut neg_curvature = false;
    let mut applies = 0usize;
    let mut model = T::zero();

    for _ in 0..max_inner {
        hess.apply_raw(&d, &mut hd);
        applies += 1;
        let dhd = d.fdot(&hd);
        let rd = r.fdot(&d);

        let ss = s.fdot(&s);
        let sd = s.fdot(&d);
        let dd = d.fdot(&d);

        if dhd <= T::zero() {
            if rd < T::zero() {
                let tau = boundary_tau(ss, sd, dd, radius);
                s.axpy(tau, &d);
                hs.axpy(tau, &hd);
                boundary = true;
                neg_curvature = true;
            }
            break;
        }

        let alpha = rr / dhd;
        let new_norm2 = ss + (alpha + alpha) * sd + alpha * alpha * dd;
        if new_norm2 >= radius * radius {
            if rd < T::zero() {
                let tau = boundary_tau(ss, sd, dd, radius);
                s.axpy(tau, &d);
                hs.axpy(tau, &hd);
                boundary = true;
            }
            break;
        }

        // Model value after the candidate update; reject noise steps.
        let model_new = model + alpha * rd + T::half() * alpha * alpha * dhd;
        if !(model_new < model) {
            break;
        }

        s.axpy(alpha, &d);
        hs.axpy(alpha, &hd);
        r.axpy(alpha, &hd);
        model = model_new;
        let rr_new = r.fdot(&r);
        if rr_new.sqrt() <= target {
            break;
        }
        let beta = rr_new / rr;
        // d <- -r + beta d
        d.scale(beta);
        d.axpy(-T::one(), &r);
        rr = rr_new;
    }

    let model_decrease = -(g.fdot(&s) + T::half() * s.fdot(&hs));
    TcgOutcome {
        step: s,
        boundary,
        neg_curvature,
        applies,
        model_decrease,
    }
}

/// Positive root of `‖s + τ d‖ = radius`.
fn boundary_tau<T: Real>(ss: T, sd: T, dd: T, radius: T) -> T {
    let disc = (sd * sd + dd * (radius * radius - ss)).max(T::zero());
    (-sd + disc.sqrt()) / dd
}

/// Riemannian conjugate-gradient minimization from `x0`.
///
/// Directions follow the restarted Polak–Ribière rule with projection
/// transport (Powell restart on lost conjugacy, steepest descent whenever a
/// direction stops descending). Steps satisfy the Armijo condition along the
/// retracted ray; trial steps start from the interpolated previous decrease
/// and back-track by safeguarded quadratic interpolation.
pub fn rcg<T: Real>(
    inst: &Instance<T>,
    x0: &CartesianConfig<T>,
    opts: &SolverOptions<T>,
) -> Result<LocalResult<T>> {
    opts.validate()?;
    validate_start(inst, x0)?;
    let clock = Instant::now();
    let n = inst.n_sites();
    let BetaRule::RestartedPolakRibiere = opts.cg_beta_rule;

    let mut counters = Counters {
        cost: 0,
        grad: 0,
        hess: 0,
        neg_curv: 0,
    };
    let mut trace = opts.record_trace.then(Vec::new);

    let mut x = x0.clone();
    let mut f = inst.energy_mat(x.matrix());
    counters.cost += 1;
    if let Some(t) = trace.as_mut() {
        t.push(f);
    }
    if !f.is_finite() {
        return Ok(finish(x, f, T::nan(), 0, counters, clock, SolveStatus::NumericalFailure, trace));
    }

    let mut egrad = Matrix2xN::zeros(n);
    inst.euclidean_gradient_into(x.matrix(), &mut egrad);
    counters.grad += 1;
    let mut grad = Matrix2xN::zeros(n);
    manifold::project_into(&x, &egrad, &mut grad);
    let mut gnorm = grad.fnorm();

    let mut dir = grad.clone();
    dir.scale(-T::one());
    let mut last_decrease: Option<T> = None;
    let mut prev_step: Option<T> = None;
    let mut stagnant = 0usize;
    let mut stagnation_resets = 0usize;
    let mut iterations = 0usize;
    // Steps past a few manifold diameters only waste backtracking.
    let travel_cap = T::from64(4.0) * T::from_count(n).sqrt();

    let status = loop {
        if gnorm <= opts.grad_tol {
            break SolveStatus::Converged;
        }
        if iterations >= opts.max_iters {
            break SolveStatus::IterationLimit;
        }
        iterations += 1;

        let mut slope = grad.fdot(&dir);
        let mut restarted = false;
        if !(slope < T::zero()) {
            dir.copy_from(&grad);
            dir.scale(-T::one());
            slope = -gnorm * gnorm;
            restarted = true;
        }

        // Initial trial step: twice the previous decrease along the new
        // slope (Nocedal–Wright), bracketed by the previous accepted step.
        let dnorm = dir.fnorm();
        let mut t = match (last_decrease, prev_step) {
            (Some(dec), Some(tp)) if dec > T::zero() => {
                let interp = T::from64(2.0) * dec / -slope;
                if interp.is_finite() && interp > T::zero() {
                    interp.max(tp * T::from64(0.1)).min(tp * T::from64(100.0))
                } else {
                    tp + tp
                }
            }
            (_, Some(tp)) => tp + tp,
            _ => opts.initial_step / (T::one() + dnorm),
        };
        t = t.min(travel_cap / dnorm);

        let mut accepted: Option<(CartesianConfig<T>, T)> = None;
        let mut step = Matrix2xN::zeros(n);
        for _ in 0..60 {
            step.copy_from(&dir);
            step.scale(t);
            let cand = manifold::retract_unchecked(&x, &step);
            let fc = inst.energy_mat(cand.matrix());
            counters.cost += 1;
            if !fc.is_finite() {
                return Ok(finish(
                    x,
                    f,
                    gnorm,
                    iterations,
                    counters,
                    clock,
                    SolveStatus::NumericalFailure,
                    trace,
                ));
            }
            if fc <= f + opts.armijo_constant * t * slope {
                accepted = Some((cand, fc));
                break;
            }
            // Safeguarded quadratic-interpolation backtracking.
            let denom = fc - f - slope * t;
            let t_quad = if denom > T::zero() {
                -slope * t * t / (T::from64(2.0) * denom)
            } else {
                t * opts.backtracking_factor
            };
            let lo = t * T::from64(0.1);
            let hi = t * opts.backtracking_factor;
            t = t_quad.max(lo).min(hi);
        }

        let Some((x_new, f_new)) = accepted else {
            if restarted {
                // Even steepest descent cannot improve: the gradient is at
                // the numerical noise floor.
                break SolveStatus::Stalled;
            }
            dir.copy_from(&grad);
            dir.scale(-T::one());
            prev_step = None;
            last_decrease = None;
            continue;
        };

        if opts.checked {
            check_iterate(&x_new)?;
        }

        // Progress below energy resolution cannot continue indefinitely.
        let decrease = f - f_new;
        if decrease <= T::epsilon() * (T::one() + f.abs()) {
            stagnant += 1;
            if stagnant >= 3 {
                if stagnation_resets >= 1 {
                    break SolveStatus::Stalled;
                }
                // Force a clean steepest-descent attempt before giving up.
                stagnation_resets += 1;
                stagnant = 0;
                x = x_new;
                f = f_new;
                inst.euclidean_gradient_into(x.matrix(), &mut egrad);
                counters.grad += 1;
                manifold::project_into(&x, &egrad, &mut grad);
                gnorm = grad.fnorm();
                dir.copy_from(&grad);
                dir.scale(-T::one());
                prev_step = None;
                last_decrease = None;
                continue;
            }
        } else {
            stagnant = 0;
            stagnation_resets = 0;
        }

        let gg_old = gnorm * gnorm;
        inst.euclidean_gradient_into(x_new.matrix(), &mut egrad);
        counters.grad += 1;
        let mut grad_new = Matrix2xN::zeros(n);
        manifold::project_into(&x_new, &egrad, &mut grad_new);

        // Transport the previous gradient and direction by projection.
        let mut grad_old_t = Matrix2xN::zeros(n);
        manifold::project_into(&x_new, &grad, &mut grad_old_t);
        let mut dir_t = Matrix2xN::zeros(n);
        manifold::project_into(&x_new, &dir, &mut dir_t);

        // Polak–Ribière+ with a Powell restart when conjugacy is lost.
        let gg_new = grad_new.fdot(&grad_new);
        let overlap = grad_new.fdot(&grad_old_t);
        let beta = if overlap.abs() >= T::from64(0.2) * gg_new {
            T::zero()
        } else {
            let mut y = grad_new.clone();
            y.axpy(-T::one(), &grad_old_t);
            (grad_new.fdot(&y) / gg_old).max(T::zero())
        };

        dir_t.scale(beta);
        dir_t.axpy(-T::one(), &grad_new);

        x = x_new;
        f = f_new;
        grad = grad_new;
        gnorm = gg_new.sqrt();
        dir = dir_t;
        prev_step = Some(t);
        last_decrease = Some(decrease);
        if let Some(tr) = trace.as_mut() {
            tr.push(f);
        }
    };

    Ok(finish(x, f, gnorm, iterations, counters, clock, status, trace))
}

#[allow(clippy::too_many_arguments)]
fn finish<T: Real>(
    config: CartesianConfig<T>,
    energy: T,
    grad_norm: T,
    iterations: usize,
    counters: Counters,
    clock: Instant,
    status: SolveStatus,
    trace: Option<Vec<T>>,
) -> LocalResult<T> {
    LocalResult {
        config,
        energy,
        grad_norm,
        iterations,
        cost_evals: counters.cost,
        grad_evals: counters.grad,
        hess_evals: counters.hess,
        neg_curvature_hits: counters.neg_curv,
        wall_seconds: clock.elapsed().as_secs_f64(),
        status,
        trace,
    }
}
