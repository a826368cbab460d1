//! Initial conditions and complete run descriptions.

use std::fmt;

use num_complex::Complex64;

use crate::analysis::{Oracle, OracleKind};
use crate::error::{Error, Result};
use crate::field::{FieldState, Grid, Physics};
use crate::run::{evolve, EvolveOptions, Observer, RunRecord};
use crate::schemes::{IterationPolicy, Scheme};

/// Boundary-adjacent amplitude, relative to the peak, above which a scenario
/// is considered too narrow for its pulses.
pub const BOUNDARY_DECAY_RATIO: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseShape {
    Sech,
    Rectangular { width: f64 },
    Zero,
}

impl PulseShape {
    pub fn name(&self) -> &'static str {
        match self {
            PulseShape::Sech => "sech",
            PulseShape::Rectangular { .. } => "rectangular",
            PulseShape::Zero => "zero",
        }
    }
}

/// `amplitude * shape(x + offset) * exp(i velocity x)`.
///
/// Both shapes are centred on `x = -offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialCondition {
    pub shape: PulseShape,
    pub amplitude: f64,
    pub offset: f64,
    pub velocity: f64,
}

impl InitialCondition {
    pub fn sech(amplitude: f64, offset: f64, velocity: f64) -> Self {
        InitialCondition {
            shape: PulseShape::Sech,
            amplitude,
            offset,
            velocity,
        }
    }

    pub fn rectangular(amplitude: f64, width: f64) -> Self {
        InitialCondition {
            shape: PulseShape::Rectangular { width },
            amplitude,
            offset: 0.0,
            velocity: 0.0,
        }
    }

    pub fn zero() -> Self {
        InitialCondition {
            shape: PulseShape::Zero,
            amplitude: 0.0,
            offset: 0.0,
            velocity: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::Validation(format!(
                "amplitude must be finite and >= 0, got {}",
                self.amplitude
            )));
        }
        if !(self.offset.is_finite() && self.velocity.is_finite()) {
            return Err(Error::Validation("offset and velocity must be finite".into()));
        }
        if let PulseShape::Rectangular { width } = self.shape {
            if !(width.is_finite() && width > 0.0) {
                return Err(Error::Validation(format!("rectangular width must be > 0, got {width}")));
            }
        }
        Ok(())
    }

    fn envelope(&self, x: f64, h: f64) -> f64 {
        let r = x + self.offset;
        match self.shape {
            PulseShape::Sech => self.amplitude / r.cosh(),
            PulseShape::Rectangular { width } => {
                let edge = (r.abs() - 0.5 * width) / h;
                // A node sitting on the edge takes the midpoint value.
                if edge.abs() < 1e-9 {
                    0.5 * self.amplitude
                } else if edge < 0.0 {
                    self.amplitude
                } else {
                    0.0
                }
            }
            PulseShape::Zero => 0.0,
        }
    }
}

/// Nodewise evaluation of an initial condition.
pub fn sample_ic(ic: &InitialCondition, grid: &Grid) -> Vec<Complex64> {
    let h = grid.h();
    grid.nodes()
        .into_iter()
        .map(|x| match ic.shape {
            PulseShape::Zero => Complex64::new(0.0, 0.0),
            _ => Complex64::from_polar(ic.envelope(x, h), ic.velocity * x),
        })
        .collect()
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub grid: Grid,
    pub phys: Physics,
    pub ic_u: InitialCondition,
    pub ic_v: InitialCondition,
    pub scheme: Scheme,
    pub policy: IterationPolicy,
    pub observe_every: u64,
    pub oracle: Option<OracleKind>,
}

/// Non-fatal findings from [`Scenario::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Warning(pub String);

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Scenario {
    /// The analytic reference selected by `oracle`, with its parameters
    /// taken from the initial condition.
    pub fn oracle(&self) -> Option<Oracle> {
        self.oracle.map(|kind| match kind {
            OracleKind::NlsFundamental => Oracle::NlsFundamental,
            OracleKind::NlsA2 => Oracle::NlsBreatherA2,
            OracleKind::Manakov => Oracle::Manakov {
                amplitude: self.ic_u.amplitude,
            },
        })
    }

    /// Checks every invariant; returns warnings for soft violations.
    pub fn validate(&self) -> Result<Vec<Warning>> {
        self.grid.validate()?;
        self.phys.validate()?;
        self.ic_u.validate()?;
        self.ic_v.validate()?;
        self.policy.validate()?;
        if self.observe_every == 0 {
            return Err(Error::Validation("observe_every must be positive".into()));
        }
        if let Some(kind) = self.oracle {
            self.check_oracle_initial_data(kind)?;
            self.oracle().unwrap().check_admissible(&self.phys)?;
        }

        let mut warnings = Vec::new();
        let state = self.initial_state();
        for (name, field) in [("u", &state.u), ("v", &state.v)] {
            let peak = field.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let (first, last) = (field[0].norm(), field[field.len() - 1].norm());
            if peak > 0.0 && first.max(last) > BOUNDARY_DECAY_RATIO * peak {
                warnings.push(Warning(format!(
                    "mode {name}: boundary-adjacent amplitude {:.3e} exceeds {BOUNDARY_DECAY_RATIO:e} of the peak {peak:.3e}; widen the domain",
                    first.max(last)
                )));
            }
        }
        Ok(warnings)
    }

    fn check_oracle_initial_data(&self, kind: OracleKind) -> Result<()> {
        let centred_sech = |ic: &InitialCondition, amplitude: f64| {
            ic.shape == PulseShape::Sech && ic.amplitude == amplitude && ic.offset == 0.0 && ic.velocity == 0.0
        };
        let ok = match kind {
            OracleKind::NlsFundamental => centred_sech(&self.ic_u, 1.0) && self.ic_v.shape == PulseShape::Zero,
            OracleKind::NlsA2 => centred_sech(&self.ic_u, 2.0) && self.ic_v.shape == PulseShape::Zero,
            OracleKind::Manakov => {
                centred_sech(&self.ic_u, self.ic_u.amplitude) && centred_sech(&self.ic_v, self.ic_u.amplitude)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnsupportedParameters(format!(
                "oracle {kind} does not match the initial conditions"
            )))
        }
    }

    pub fn initial_state(&self) -> FieldState {
        FieldState {
            u: sample_ic(&self.ic_u, &self.grid),
            v: sample_ic(&self.ic_v, &self.grid),
            time: 0.0,
        }
    }

    /// Copy with a different time step, keeping the final time fixed when
    /// `keep_final_time` is set.
    pub fn with_tau(&self, tau: f64, keep_final_time: bool) -> Scenario {
        let n_time = if keep_final_time {
            (self.grid.final_time() / tau).round().max(1.0) as u64
        } else {
            self.grid.n_time
        };
        Scenario {
            grid: self.grid.with_time_steps(tau, n_time),
            ..self.clone()
        }
    }

    /// Copy with `n_time` steps over the same final time.
    pub fn with_steps(&self, n_time: u64) -> Scenario {
        let tau = self.grid.final_time() / n_time as f64;
        Scenario {
            grid: self.grid.with_time_steps(tau, n_time),
            ..self.clone()
        }
    }

    pub fn evolve_options(&self, snapshot_every: u64) -> EvolveOptions {
        EvolveOptions {
            observe_every: self.observe_every,
            snapshot_every,
            oracle: self.oracle(),
            ..EvolveOptions::default()
        }
    }

    /// Runs the scenario for `grid.n_time` steps.
    pub fn run(&self, options: &EvolveOptions, observers: &mut [&mut dyn Observer]) -> Result<RunRecord> {
        self.validate()?;
        evolve(
            &self.initial_state(),
            &self.phys,
            &self.grid,
            self.scheme,
            &self.policy,
            self.grid.n_time,
            options,
            observers,
        )
    }
}
