//! Grid, coefficients and field state shared by every solver and diagnostic.
//!
//! The computational domain holds `n_space` interior nodes strictly between
//! `x_min` and `x_max`. The two boundary nodes are ghosts that always carry a
//! zero field (homogeneous Dirichlet conditions), so they are never stored.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform space-time discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    /// Number of interior nodes.
    pub n_space: usize,
    pub tau: f64,
    pub n_time: u64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_space: usize, tau: f64, n_time: u64) -> Result<Self> {
        let grid = Grid {
            x_min,
            x_max,
            n_space,
            tau,
            n_time,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite()) {
            return Err(Error::InvalidGrid("domain bounds must be finite".into()));
        }
        if self.x_max <= self.x_min {
            return Err(Error::InvalidGrid(format!(
                "x_max ({}) must exceed x_min ({}), giving h > 0",
                self.x_max, self.x_min
            )));
        }
        if self.n_space == 0 {
            return Err(Error::InvalidGrid("n_space must be positive".into()));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::InvalidGrid(format!("tau must be > 0, got {}", self.tau)));
        }
        if self.n_time == 0 {
            return Err(Error::InvalidGrid("n_time must be positive".into()));
        }
        Ok(())
    }

    /// Spatial step; the interior nodes split the domain into `n_space + 1` cells.
    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_space as f64 + 1.0)
    }

    /// Position of interior node `i` (zero based).
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 1.0) * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_space).map(|i| self.x(i)).collect()
    }

    pub fn final_time(&self) -> f64 {
        self.tau * self.n_time as f64
    }

    /// Same spatial layout with a new time step and step count.
    pub fn with_time_steps(&self, tau: f64, n_time: u64) -> Grid {
        Grid { tau, n_time, ..*self }
    }
}

/// Coefficients of the coupled system
///
/// ```text
/// i U_t + i sigma U_x + k U_xx + (a|U|^2 + b|V|^2) U = 0
/// i V_t - i sigma V_x + k V_xx + (c|V|^2 + d|U|^2) V = 0
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Physics {
    pub sigma: f64,
    pub k: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Physics {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.named() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidPhysics(format!(
                    "{name} must be finite and non-negative, got {value}"
                )));
            }
        }
        Ok(())
    }

    pub fn named(&self) -> [(&'static str, f64); 6] {
        [
            ("sigma", self.sigma),
            ("k", self.k),
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
        ]
    }

    pub fn max_nonlinearity(&self) -> f64 {
        self.a.max(self.b).max(self.c).max(self.d)
    }

    pub fn is_linear(&self) -> bool {
        self.a == 0.0 && self.b == 0.0 && self.c == 0.0 && self.d == 0.0
    }
}

/// The two complex modes on the interior nodes at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub time: f64,
}

impl FieldState {
    pub fn new(u: Vec<Complex64>, v: Vec<Complex64>, time: f64) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::InvalidState(format!(
                "mode lengths differ: u has {}, v has {}",
                u.len(),
                v.len()
            )));
        }
        Ok(FieldState { u, v, time })
    }

    pub fn zeros(n: usize) -> Self {
        FieldState {
            u: vec![Complex64::new(0.0, 0.0); n],
            v: vec![Complex64::new(0.0, 0.0); n],
            time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.u) && all_finite(&self.v)
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidState("field contains non-finite entries".into()))
        }
    }

    pub fn ensure_matches(&self, grid: &Grid) -> Result<()> {
        if self.u.len() != self.v.len() || self.u.len() != grid.n_space {
            return Err(Error::InvalidState(format!(
                "state has {}/{} nodes but grid has {}",
                self.u.len(),
                self.v.len(),
                grid.n_space
            )));
        }
        Ok(())
    }

    /// Multiplies both modes by `exp(i theta)`.
    pub fn rotated(&self, theta: f64) -> FieldState {
        let phase = Complex64::from_polar(1.0, theta);
        FieldState {
            u: self.u.iter().map(|z| z * phase).collect(),
            v: self.v.iter().map(|z| z * phase).collect(),
            time: self.time,
        }
    }
}

/// Unweighted discrete energies `sum |U_i|^2` and `sum |V_i|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantPair {
    pub i_u: f64,
    pub i_v: f64,
}

impl InvariantPair {
    pub fn total(&self) -> f64 {
        self.i_u + self.i_v
    }

    /// Largest relative change of either component against `reference`.
    /// Components that are zero in the reference are compared absolutely.
    pub fn relative_drift(&self, reference: &InvariantPair) -> f64 {
        let rel = |now: f64, then: f64| {
            if then > 0.0 {
                (now - then).abs() / then
            } else {
                now.abs()
            }
        };
        rel(self.i_u, reference.i_u).max(rel(self.i_v, reference.i_v))
    }
}

pub(crate) fn all_finite(field: &[Complex64]) -> bool {
    field.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn energy(field: &[Complex64]) -> f64 {
    field.iter().map(|z| z.norm_sqr()).sum()
}

/// `h * sqrt(sum |f_i|^2)`, the norm used for error reporting.
pub fn discrete_l2_norm(field: &[Complex64], h: f64) -> Result<f64> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidGrid(format!("h must be > 0, got {h}")));
    }
    if !all_finite(field) {
        return Err(Error::InvalidState("field contains non-finite entries".into()));
    }
    Ok(h * energy(field).sqrt())
}

pub fn invariants(state: &FieldState) -> Result<InvariantPair> {
    state.ensure_finite()?;
    Ok(InvariantPair {
        i_u: energy(&state.u),
        i_v: energy(&state.v),
    })
}

/// `(max_i |U_i|, max_i |V_i|)`.
pub fn max_amplitude(state: &FieldState) -> Result<(f64, f64)> {
    state.ensure_finite()?;
    let peak = |f: &[Complex64]| f.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    Ok((peak(&state.u), peak(&state.v)))
}
