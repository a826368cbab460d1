//! Time-stepping kernels.
//!
//! Both kernels discretize
//!
//! ```text
//! i U_t + i sigma U_x + k U_xx + (a|U|^2 + b|V|^2) U = 0
//! i V_t - i sigma V_x + k V_xx + (c|V|^2 + d|U|^2) V = 0
//! ```
//!
//! with centered differences in space and zero ghost nodes at both ends of
//! the domain. The explicit kernel is forward Euler in time. The implicit
//! kernel is the six-point Crank–Nicolson scheme whose nonlinearity is
//! evaluated at the half step `(U^{n+1} + U^n) / 2` and resolved by
//! fixed-point iteration.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{all_finite, FieldState, Grid, Physics};
use crate::tridiag::solve_tridiagonal_into;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Explicit,
    Implicit,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Explicit => "explicit",
            Scheme::Implicit => "implicit",
        })
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "explicit" => Ok(Scheme::Explicit),
            "implicit" => Ok(Scheme::Implicit),
            other => Err(format!("unknown scheme '{other}' (expected explicit or implicit)")),
        }
    }
}

/// Controls the fixed-point iteration of the implicit scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationPolicy {
    /// Relative change of the half-step moduli below which iteration stops.
    pub tol: f64,
    pub max_iters: u32,
    /// Abort when the residual exceeds the smallest residual seen by this factor.
    pub divergence_factor: f64,
}

impl Default for IterationPolicy {
    fn default() -> Self {
        IterationPolicy {
            tol: 1e-12,
            max_iters: 25,
            divergence_factor: 10.0,
        }
    }
}

impl IterationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Validation(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::Validation("max_iters must be at least 1".into()));
        }
        if !(self.divergence_factor.is_finite() && self.divergence_factor > 1.0) {
            return Err(Error::Validation(format!(
                "divergence_factor must be > 1, got {}",
                self.divergence_factor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    /// Linear solves performed; zero for the explicit scheme.
    pub iterations_used: u32,
    pub residual: f64,
}

fn step_index(state: &FieldState, grid: &Grid) -> u64 {
    (state.time / grid.tau).round().max(0.0) as u64 + 1
}

fn check_inputs(state: &FieldState, phys: &Physics, grid: &Grid) -> Result<()> {
    state.ensure_matches(grid)?;
    state.ensure_finite()?;
    phys.validate()?;
    grid.validate()
}

/// Which equation of the pair a stencil belongs to; the V equation carries
/// the opposite convection sign.
#[derive(Clone, Copy)]
enum Mode {
    U,
    V,
}

impl Mode {
    fn convection(self, phys: &Physics) -> f64 {
        match self {
            Mode::U => phys.sigma,
            Mode::V => -phys.sigma,
        }
    }
}

/// Forward-Euler update of one mode into `out`.
///
/// `U^{j+1} = U^j - tau s D1 U + i tau (k D2 U + n U)` with `s` the signed
/// convection coefficient and `n` the nodal nonlinear coefficient.
fn euler_mode(
    field: &[Complex64],
    nonlinear: impl Fn(usize) -> f64,
    s: f64,
    k: f64,
    grid: &Grid,
    out: &mut [Complex64],
) {
    let h = grid.h();
    let tau = grid.tau;
    let c1 = tau * s / (2.0 * h);
    let c2 = tau * k / (h * h);
    let n = field.len();
    for i in 0..n {
        let left = if i > 0 { field[i - 1] } else { ZERO };
        let right = if i + 1 < n { field[i + 1] } else { ZERO };
        let centre = field[i];
        let convection = (right - left) * c1;
        let dispersion = (right - centre * 2.0 + left) * c2;
        let nonlin = centre * (tau * nonlinear(i));
        out[i] = centre - convection + I * (dispersion + nonlin);
    }
}

/// One explicit step into preallocated output buffers.
pub fn explicit_step_into(state: &FieldState, phys: &Physics, grid: &Grid, out: &mut FieldState) -> Result<()> {
    let n = state.len();
    out.u.resize(n, ZERO);
    out.v.resize(n, ZERO);
    let (u, v) = (&state.u, &state.v);
    euler_mode(
        u,
        |i| phys.a * u[i].norm_sqr() + phys.b * v[i].norm_sqr(),
        Mode::U.convection(phys),
        phys.k,
        grid,
        &mut out.u,
    );
    euler_mode(
        v,
        |i| phys.c * v[i].norm_sqr() + phys.d * u[i].norm_sqr(),
        Mode::V.convection(phys),
        phys.k,
        grid,
        &mut out.v,
    );
    out.time = state.time + grid.tau;
    if !(all_finite(&out.u) && all_finite(&out.v)) {
        return Err(Error::BlowUp {
            step: step_index(state, grid),
        });
    }
    Ok(())
}

/// Advances `state` by one forward-Euler step of length `grid.tau`.
pub fn explicit_step(state: &FieldState, phys: &Physics, grid: &Grid) -> Result<FieldState> {
    check_inputs(state, phys, grid)?;
    let mut out = FieldState::zeros(state.len());
    explicit_step_into(state, phys, grid, &mut out)?;
    Ok(out)
}

/// Reusable buffers for the Crank–Nicolson fixed-point loop.
#[derive(Debug, Clone, Default)]
pub struct ImplicitWorkspace {
    lower: Vec<Complex64>,
    diag: Vec<Complex64>,
    upper: Vec<Complex64>,
    rhs: Vec<Complex64>,
    scratch: Vec<Complex64>,
    mod_u: Vec<f64>,
    mod_v: Vec<f64>,
    next_mod_u: Vec<f64>,
    next_mod_v: Vec<f64>,
}

impl ImplicitWorkspace {
    pub fn new(n: usize) -> Self {
        let mut ws = ImplicitWorkspace::default();
        ws.resize(n);
        ws
    }

    fn resize(&mut self, n: usize) {
        let m = n.saturating_sub(1);
        self.lower.resize(m, ZERO);
        self.upper.resize(m, ZERO);
        self.diag.resize(n, ZERO);
        self.rhs.resize(n, ZERO);
        self.scratch.resize(n, ZERO);
        for buf in [
            &mut self.mod_u,
            &mut self.mod_v,
            &mut self.next_mod_u,
            &mut self.next_mod_v,
        ] {
            buf.resize(n, 0.0);
        }
    }
}

/// Half-step moduli `|(new + old)/2|^2` for one mode.
fn half_step_moduli(new: &[Complex64], old: &[Complex64], out: &mut [f64]) {
    for ((m, a), b) in out.iter_mut().zip(new).zip(old) {
        *m = ((a + b) * 0.5).norm_sqr();
    }
}

/// Solves `(I - i tau/2 L) W^{n+1} = (I + i tau/2 L) W^n` for one mode with
/// the nodal nonlinear coefficients frozen, where
/// `L = i s D1 + k D2 + diag(nonlinear)`.
#[allow(clippy::too_many_arguments)]
fn crank_nicolson_mode(
    old: &[Complex64],
    nonlinear: impl Fn(usize) -> f64,
    s: f64,
    k: f64,
    grid: &Grid,
    ws_lower: &mut [Complex64],
    ws_diag: &mut [Complex64],
    ws_upper: &mut [Complex64],
    ws_rhs: &mut [Complex64],
    ws_scratch: &mut [Complex64],
    out: &mut [Complex64],
) -> Result<()> {
    let h = grid.h();
    let half_tau = 0.5 * grid.tau;
    // Off-diagonal entries of L.
    let l_left = Complex64::new(k / (h * h), -s / (2.0 * h));
    let l_right = Complex64::new(k / (h * h), s / (2.0 * h));
    let l_centre = -2.0 * k / (h * h);

    let a_left = -I * half_tau * l_left;
    let a_right = -I * half_tau * l_right;
    ws_lower.iter_mut().for_each(|z| *z = a_left);
    ws_upper.iter_mut().for_each(|z| *z = a_right);

    let n = old.len();
    for i in 0..n {
        let centre = l_centre + nonlinear(i);
        ws_diag[i] = Complex64::new(1.0, 0.0) - I * (half_tau * centre);
        let left = if i > 0 { old[i - 1] } else { ZERO };
        let right = if i + 1 < n { old[i + 1] } else { ZERO };
        let applied = l_left * left + l_right * right + old[i] * centre;
        ws_rhs[i] = old[i] + I * half_tau * applied;
    }
    solve_tridiagonal_into(ws_lower, ws_diag, ws_upper, ws_rhs, ws_scratch, out)
}

fn relative_change(prev_u: &[f64], prev_v: &[f64], next_u: &[f64], next_v: &[f64]) -> f64 {
    let mut diff = 0.0;
    let mut size = 0.0;
    for (p, q) in prev_u.iter().zip(next_u).chain(prev_v.iter().zip(next_v)) {
        diff += (q - p) * (q - p);
        size += q * q;
    }
    if size > 0.0 {
        (diff / size).sqrt()
    } else {
        diff.sqrt()
    }
}

/// One Crank–Nicolson step using caller-owned buffers.
pub fn implicit_step_into(
    state: &FieldState,
    phys: &Physics,
    grid: &Grid,
    policy: &IterationPolicy,
    ws: &mut ImplicitWorkspace,
    out: &mut FieldState,
) -> Result<StepReport> {
    let n = state.len();
    ws.resize(n);
    out.u.clear();
    out.u.extend_from_slice(&state.u);
    out.v.clear();
    out.v.extend_from_slice(&state.v);
    out.time = state.time + grid.tau;

    let step = step_index(state, grid);
    let linear = phys.is_linear();

    half_step_moduli(&out.u, &state.u, &mut ws.mod_u);
    half_step_moduli(&out.v, &state.v, &mut ws.mod_v);

    let mut best = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for iteration in 1..=policy.max_iters {
        {
            let (mu, mv) = (&ws.mod_u, &ws.mod_v);
            crank_nicolson_mode(
                &state.u,
                |i| phys.a * mu[i] + phys.b * mv[i],
                Mode::U.convection(phys),
                phys.k,
                grid,
                &mut ws.lower,
                &mut ws.diag,
                &mut ws.upper,
                &mut ws.rhs,
                &mut ws.scratch,
                &mut out.u,
            )?;
            crank_nicolson_mode(
                &state.v,
                |i| phys.c * mv[i] + phys.d * mu[i],
                Mode::V.convection(phys),
                phys.k,
                grid,
                &mut ws.lower,
                &mut ws.diag,
                &mut ws.upper,
                &mut ws.rhs,
                &mut ws.scratch,
                &mut out.v,
            )?;
        }
        if !(all_finite(&out.u) && all_finite(&out.v)) {
            return Err(Error::BlowUp { step });
        }
        if linear {
            // The operator does not depend on the iterate: one solve is exact.
            return Ok(StepReport {
                iterations_used: iteration,
                residual: 0.0,
            });
        }

        half_step_moduli(&out.u, &state.u, &mut ws.next_mod_u);
        half_step_moduli(&out.v, &state.v, &mut ws.next_mod_v);
        residual = relative_change(&ws.mod_u, &ws.mod_v, &ws.next_mod_u, &ws.next_mod_v);
        std::mem::swap(&mut ws.mod_u, &mut ws.next_mod_u);
        std::mem::swap(&mut ws.mod_v, &mut ws.next_mod_v);

        if residual <= policy.tol {
            return Ok(StepReport {
                iterations_used: iteration,
                residual,
            });
        }
        if !residual.is_finite() || residual > policy.divergence_factor * best {
            return Err(Error::IterationFailure {
                step,
                iterations: iteration,
                residual,
                reason: "fixed-point residual diverged".into(),
            });
        }
        best = best.min(residual);
    }
    Err(Error::IterationFailure {
        step,
        iterations: policy.max_iters,
        residual,
        reason: "max_iters exceeded".into(),
    })
}

/// Advances `state` by one Crank–Nicolson step of length `grid.tau`.
pub fn implicit_step(
    state: &FieldState,
    phys: &Physics,
    grid: &Grid,
    policy: &IterationPolicy,
) -> Result<(FieldState, StepReport)> {
    check_inputs(state, phys, grid)?;
    policy.validate()?;
    let mut ws = ImplicitWorkspace::new(state.len());
    let mut out = FieldState::zeros(state.len());
    let report = implicit_step_into(state, phys, grid, policy, &mut ws, &mut out)?;
    Ok((out, report))
}

/// A scheme together with its reusable buffers.
#[derive(Debug, Clone)]
pub struct Stepper {
    scheme: Scheme,
    policy: IterationPolicy,
    ws: ImplicitWorkspace,
}

impl Stepper {
    pub fn new(scheme: Scheme, policy: IterationPolicy, n: usize) -> Self {
        let ws = match scheme {
            Scheme::Implicit => ImplicitWorkspace::new(n),
            Scheme::Explicit => ImplicitWorkspace::default(),
        };
        Stepper { scheme, policy, ws }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn step_into(
        &mut self,
        state: &FieldState,
        phys: &Physics,
        grid: &Grid,
        out: &mut FieldState,
    ) -> Result<StepReport> {
        match self.scheme {
            Scheme::Explicit => {
                explicit_step_into(state, phys, grid, out)?;
                Ok(StepReport::default())
            }
            Scheme::Implicit => implicit_step_into(state, phys, grid, &self.policy, &mut self.ws, out),
        }
    }
}
