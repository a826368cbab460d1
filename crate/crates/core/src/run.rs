//! Evolution driver: repeated stepping with observation, snapshots and
//! instability detection.

use std::fmt;
use std::time::{Duration, Instant};

use crate::analysis::{error_vs_oracle, Oracle, OracleError};
use crate::error::{Error, Result};
use crate::field::{invariants, max_amplitude, FieldState, Grid, InvariantPair, Physics};
use crate::schemes::{IterationPolicy, Scheme, Stepper};

/// Relative invariant drift that marks a run as unstable.
pub const DEFAULT_DRIFT_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub enum BlowUpCause {
    NonFinite,
    /// Relative drift of `I_u` or `I_v` beyond the configured limit.
    InvariantDrift(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    BlewUp { step: u64, cause: BlowUpCause },
    IterationFailure { step: u64, message: String },
}

impl Termination {
    pub fn is_completed(&self) -> bool {
        matches!(self, Termination::Completed)
    }

    pub fn failing_step(&self) -> Option<u64> {
        match self {
            Termination::Completed => None,
            Termination::BlewUp { step, .. } | Termination::IterationFailure { step, .. } => Some(*step),
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Completed => f.write_str("completed"),
            Termination::BlewUp {
                step,
                cause: BlowUpCause::NonFinite,
            } => {
                write!(f, "blew-up-at-step {step} (non-finite field)")
            }
            Termination::BlewUp {
                step,
                cause: BlowUpCause::InvariantDrift(d),
            } => {
                write!(f, "blew-up-at-step {step} (invariant drift {d:.3e})")
            }
            Termination::IterationFailure { step, message } => {
                write!(f, "iteration-failure-at-step {step} ({message})")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Steps between observations.
    pub observe_every: u64,
    /// Observations between stored snapshots.
    pub snapshot_every: u64,
    pub oracle: Option<Oracle>,
    pub drift_limit: Option<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            observe_every: 1,
            snapshot_every: 1,
            oracle: None,
            drift_limit: Some(DEFAULT_DRIFT_LIMIT),
        }
    }
}

/// Data passed to observers at every observation.
#[derive(Debug)]
pub struct Observation<'a> {
    pub step: u64,
    pub state: &'a FieldState,
    pub invariants: InvariantPair,
    pub max_amplitude: (f64, f64),
    pub error: Option<OracleError>,
    /// Iterations of the step that produced this state.
    pub iterations: u32,
}

pub trait Observer {
    fn observe(&mut self, obs: &Observation<'_>);
}

/// Time series and snapshots collected during one run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub scheme: Scheme,
    pub steps: Vec<u64>,
    pub times: Vec<f64>,
    pub invariants: Vec<InvariantPair>,
    pub max_amplitudes: Vec<(f64, f64)>,
    /// Empty unless an oracle was configured.
    pub errors: Vec<OracleError>,
    /// Per observation; zero for the explicit scheme.
    pub iterations: Vec<u32>,
    /// Iterations of every implicit step; empty for the explicit scheme.
    pub step_iterations: Vec<u32>,
    pub snapshots: Vec<FieldState>,
    pub final_state: FieldState,
    pub termination: Termination,
    pub wall_time: Duration,
}

impl RunRecord {
    pub fn initial_invariants(&self) -> InvariantPair {
        self.invariants[0]
    }

    /// Largest relative drift of either invariant over all observations.
    pub fn max_invariant_drift(&self) -> f64 {
        let first = self.initial_invariants();
        self.invariants
            .iter()
            .map(|inv| inv.relative_drift(&first))
            .fold(0.0, f64::max)
    }

    pub fn max_error(&self) -> Option<f64> {
        if self.errors.is_empty() {
            None
        } else {
            Some(self.errors.iter().map(|e| e.max).fold(0.0, f64::max))
        }
    }

    pub fn median_step_iterations(&self) -> Option<f64> {
        if self.step_iterations.is_empty() {
            return None;
        }
        let mut sorted = self.step_iterations.clone();
        sorted.sort_unstable();
        let n = sorted.len();
        Some(if n % 2 == 1 {
            sorted[n / 2] as f64
        } else {
            0.5 * (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64)
        })
    }
}

struct Recorder {
    record: RunRecord,
    options: EvolveOptions,
    observations: u64,
}

impl Recorder {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        step: u64,
        state: &FieldState,
        phys: &Physics,
        grid: &Grid,
        iterations: u32,
        force_snapshot: bool,
        observers: &mut [&mut dyn Observer],
    ) -> Result<InvariantPair> {
        let inv = invariants(state)?;
        let amp = max_amplitude(state)?;
        let error = match &self.options.oracle {
            Some(oracle) => Some(error_vs_oracle(state, oracle, grid, phys)?),
            None => None,
        };
        let r = &mut self.record;
        r.steps.push(step);
        r.times.push(state.time);
        r.invariants.push(inv);
        r.max_amplitudes.push(amp);
        if let Some(e) = error {
            r.errors.push(e);
        }
        r.iterations.push(iterations);
        if force_snapshot || self.observations.is_multiple_of(self.options.snapshot_every.max(1)) {
            r.snapshots.push(state.clone());
        }
        self.observations += 1;
        let obs = Observation {
            step,
            state,
            invariants: inv,
            max_amplitude: amp,
            error,
            iterations,
        };
        for o in observers.iter_mut() {
            o.observe(&obs);
        }
        Ok(inv)
    }
}

/// Applies `steps` steps of `scheme` starting from `initial`.
///
/// Step failures do not produce an `Err`: they end the run and are recorded
/// in [`RunRecord::termination`]. Errors are returned only for inconsistent
/// inputs.
#[allow(clippy::too_many_arguments)]
pub fn evolve(
    initial: &FieldState,
    phys: &Physics,
    grid: &Grid,
    scheme: Scheme,
    policy: &IterationPolicy,
    steps: u64,
    options: &EvolveOptions,
    observers: &mut [&mut dyn Observer],
) -> Result<RunRecord> {
    initial.ensure_matches(grid)?;
    initial.ensure_finite()?;
    phys.validate()?;
    grid.validate()?;
    policy.validate()?;
    if options.observe_every == 0 || options.snapshot_every == 0 {
        return Err(Error::Validation(
            "observation and snapshot cadences must be positive".into(),
        ));
    }
    if let Some(oracle) = &options.oracle {
        oracle.check_admissible(phys)?;
    }

    let start = Instant::now();
    let mut recorder = Recorder {
        record: RunRecord {
            scheme,
            steps: Vec::new(),
            times: Vec::new(),
            invariants: Vec::new(),
            max_amplitudes: Vec::new(),
            errors: Vec::new(),
            iterations: Vec::new(),
            step_iterations: Vec::new(),
            snapshots: Vec::new(),
            final_state: initial.clone(),
            termination: Termination::Completed,
            wall_time: Duration::ZERO,
        },
        options: *options,
        observations: 0,
    };
    let reference = recorder.push(0, initial, phys, grid, 0, steps == 0, observers)?;

    let mut stepper = Stepper::new(scheme, *policy, initial.len());
    let mut current = initial.clone();
    let mut next = FieldState::zeros(initial.len());
    let t0 = initial.time;

    for step in 1..=steps {
        let report = match stepper.step_into(&current, phys, grid, &mut next) {
            Ok(report) => report,
            Err(err) => {
                recorder.record.termination = match err {
                    Error::BlowUp { .. } => Termination::BlewUp {
                        step,
                        cause: BlowUpCause::NonFinite,
                    },
                    Error::IterationFailure { .. } | Error::SingularPivot { .. } => Termination::IterationFailure {
                        step,
                        message: err.to_string(),
                    },
                    other => return Err(other),
                };
                break;
            }
        };
        // Avoid accumulating round-off in the clock.
        next.time = t0 + step as f64 * grid.tau;
        std::mem::swap(&mut current, &mut next);
        if scheme == Scheme::Implicit {
            recorder.record.step_iterations.push(report.iterations_used);
        }

        let last = step == steps;
        if step % options.observe_every == 0 || last {
            let inv = recorder.push(step, &current, phys, grid, report.iterations_used, last, observers)?;
            if let Some(limit) = options.drift_limit {
                let drift = inv.relative_drift(&reference);
                if drift > limit {
                    recorder.record.termination = Termination::BlewUp {
                        step,
                        cause: BlowUpCause::InvariantDrift(drift),
                    };
                    break;
                }
            }
        }
    }

    let mut record = recorder.record;
    record.final_state = current;
    record.wall_time = start.elapsed();
    Ok(record)
}
