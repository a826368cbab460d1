//! Ready-made scenarios for the standard numerical experiments.
//!
//! "N space steps" in the experiment tables is read as N cells, i.e.
//! `N - 1` interior nodes, so that 1000 steps over [-50, 50] give h = 0.1.

use crate::analysis::OracleKind;
use crate::error::{Error, Result};
use crate::field::{Grid, Physics};
use crate::scenario::{InitialCondition, Scenario};
use crate::schemes::{IterationPolicy, Scheme};

pub const PRESET_NAMES: [&str; 9] = [
    "nls-a1",
    "nls-a2",
    "manakov",
    "manakov-stability-sweep",
    "collision",
    "group-velocity-a",
    "group-velocity-b",
    "explicit-vs-implicit",
    "rectangular-decay",
];

/// Time-step counts of the explicit stability sweep: six values spaced
/// log-uniformly over 10^4 ..= 10^6.
pub fn stability_sweep_steps() -> [u64; 6] {
    let mut out = [0u64; 6];
    for (i, n) in out.iter_mut().enumerate() {
        *n = 10f64.powf(4.0 + 2.0 * i as f64 / 5.0).round() as u64;
    }
    out
}

/// Pulse widths of the rectangular-decay sweep.
pub const RECTANGULAR_WIDTHS: [f64; 4] = [1.0, 2.0, 3.0, 4.0];

/// Time steps compared in the rectangular-decay experiment.
pub const RECTANGULAR_TAUS: [f64; 2] = [2e-4, 2e-5];

fn grid(x_min: f64, x_max: f64, space_steps: usize, final_time: f64, n_time: u64) -> Grid {
    Grid {
        x_min,
        x_max,
        n_space: space_steps - 1,
        tau: final_time / n_time as f64,
        n_time,
    }
}

fn nls_physics() -> Physics {
    Physics {
        sigma: 0.0,
        k: 0.5,
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 0.0,
    }
}

fn base(grid: Grid, phys: Physics, ic_u: InitialCondition, ic_v: InitialCondition, scheme: Scheme) -> Scenario {
    Scenario {
        grid,
        phys,
        ic_u,
        ic_v,
        scheme,
        policy: IterationPolicy::default(),
        observe_every: (grid.n_time / 200).max(1),
        oracle: None,
    }
}

fn manakov() -> Scenario {
    // k is fixed by the soliton constraint A^2 (a + b) = 2k with A = 1.
    let phys = Physics {
        sigma: 0.0,
        k: 1.0,
        a: 1.0,
        b: 1.0,
        c: 1.0,
        d: 1.0,
    };
    let pulse = InitialCondition::sech(1.0, 0.0, 0.0);
    Scenario {
        oracle: Some(OracleKind::Manakov),
        ..base(
            grid(-50.0, 50.0, 1000, 15.0, 1_000_000),
            phys,
            pulse,
            pulse,
            Scheme::Explicit,
        )
    }
}

fn group_velocity(v1: f64) -> Scenario {
    let phys = Physics {
        sigma: 0.0,
        k: 0.5,
        a: 1.0,
        b: 1.0 / 3.0,
        c: 1.0,
        d: 1.0 / 3.0,
    };
    base(
        grid(-30.0, 30.0, 300, 40.0, 2000),
        phys,
        InitialCondition::sech(1.2, 0.0, v1),
        InitialCondition::sech(1.4, 0.0, 0.0),
        Scheme::Implicit,
    )
}

fn explicit_vs_implicit(scheme: Scheme) -> Scenario {
    let phys = Physics {
        sigma: 0.3,
        k: 0.5,
        a: 1.0,
        b: 0.2,
        c: 1.0,
        d: 1.6,
    };
    let n_time = match scheme {
        Scheme::Explicit => 1_000_000,
        Scheme::Implicit => 2000,
    };
    let pulse = InitialCondition::sech(1.5, 0.0, 0.0);
    base(grid(-30.0, 30.0, 300, 40.0, n_time), phys, pulse, pulse, scheme)
}

/// Rectangular NLS pulse of the given width at `tau`, run to t = 4.
///
/// Uses the implicit scheme: the pulse edges feed the highest grid modes,
/// which the explicit scheme amplifies past the drift limit for narrow
/// pulses at the larger time step.
pub fn rectangular_decay(width: f64, tau: f64) -> Scenario {
    let n_time = (4.0 / tau).round() as u64;
    base(
        grid(-50.0, 50.0, 500, 4.0, n_time),
        nls_physics(),
        InitialCondition::rectangular(1.0, width),
        InitialCondition::zero(),
        Scheme::Implicit,
    )
}

fn unknown(name: &str) -> Error {
    Error::UnknownPreset {
        name: name.to_string(),
        valid: PRESET_NAMES.join(", "),
    }
}

/// The named experiment with its default scheme.
pub fn preset(name: &str) -> Result<Scenario> {
    let scenario = match name {
        "nls-a1" => Scenario {
            oracle: Some(OracleKind::NlsFundamental),
            ..base(
                grid(-50.0, 50.0, 1000, 15.0, 3000),
                nls_physics(),
                InitialCondition::sech(1.0, 0.0, 0.0),
                InitialCondition::zero(),
                Scheme::Implicit,
            )
        },
        // The breather doubles its peak amplitude mid-period and needs a
        // much finer mesh; tau divides its period pi/2 into 1600 steps.
        "nls-a2" => Scenario {
            oracle: Some(OracleKind::NlsA2),
            ..base(
                grid(-25.0, 25.0, 4000, 5.0 * std::f64::consts::PI, 16_000),
                nls_physics(),
                InitialCondition::sech(2.0, 0.0, 0.0),
                InitialCondition::zero(),
                Scheme::Implicit,
            )
        },
        "manakov" => manakov(),
        "manakov-stability-sweep" => manakov().with_steps(stability_sweep_steps()[0]),
        "collision" => {
            let phys = Physics {
                sigma: 0.0,
                k: 0.5,
                a: 1.0,
                b: 2.0 / 3.0,
                c: 1.0,
                d: 2.0 / 3.0,
            };
            base(
                grid(-50.0, 50.0, 1000, 20.0, 2000),
                phys,
                InitialCondition::sech(1.0, 10.0, 1.0),
                InitialCondition::sech(1.0, -10.0, -1.0),
                Scheme::Implicit,
            )
        }
        "group-velocity-a" => group_velocity(0.7),
        "group-velocity-b" => group_velocity(0.95),
        "explicit-vs-implicit" => explicit_vs_implicit(Scheme::Implicit),
        "rectangular-decay" => rectangular_decay(2.0, RECTANGULAR_TAUS[0]),
        other => return Err(unknown(other)),
    };
    Ok(scenario)
}

/// The named experiment configured for `scheme`.
///
/// Only the explicit-vs-implicit comparison uses different resolutions per
/// scheme; other presets just switch the scheme.
pub fn preset_for_scheme(name: &str, scheme: Scheme) -> Result<Scenario> {
    if name == "explicit-vs-implicit" {
        return Ok(explicit_vs_implicit(scheme));
    }
    let mut s = preset(name)?;
    s.scheme = scheme;
    Ok(s)
}

/// The family of runs an experiment consists of, labelled for output.
/// Single-run presets yield themselves.
pub fn preset_sweep(name: &str) -> Result<Vec<(String, Scenario)>> {
    let base = preset(name)?;
    Ok(match name {
        "manakov-stability-sweep" => stability_sweep_steps()
            .iter()
            .map(|&n| (format!("steps_{n}"), base.with_steps(n)))
            .collect(),
        "rectangular-decay" => RECTANGULAR_WIDTHS
            .iter()
            .map(|&w| (format!("width_{w}"), rectangular_decay(w, base.grid.tau)))
            .collect(),
        _ => vec![(name.to_string(), base)],
    })
}
