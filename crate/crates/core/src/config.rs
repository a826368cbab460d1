//! Flat `key = value` scenario files.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Recognised keys:
//!
//! | key | required | meaning |
//! |-----|----------|---------|
//! | `x_min`, `x_max` | yes | domain bounds |
//! | `n_space` | yes | interior nodes |
//! | `tau`, `n_time` | yes | time step and step count |
//! | `sigma`, `k`, `a`, `b`, `c`, `d` | yes | coefficients |
//! | `ic_u.kind`, `ic_v.kind` | yes | `sech`, `rectangular` or `zero` |
//! | `ic_*.amplitude`, `ic_*.offset`, `ic_*.velocity` | yes | pulse parameters |
//! | `ic_*.width` | rectangular only | pulse width |
//! | `scheme` | yes | `explicit` or `implicit` |
//! | `tol`, `max_iters`, `divergence_factor` | no | fixed-point policy |
//! | `observe_every` | no | steps between observations (default `n_time / 200`) |
//! | `oracle` | no | `none`, `nls-fundamental`, `nls-a2` or `manakov` |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::analysis::OracleKind;
use crate::error::{Error, Result};
use crate::field::{Grid, Physics};
use crate::scenario::{InitialCondition, PulseShape, Scenario};
use crate::schemes::IterationPolicy;

const KEYS: [&str; 26] = [
    "x_min",
    "x_max",
    "n_space",
    "tau",
    "n_time",
    "sigma",
    "k",
    "a",
    "b",
    "c",
    "d",
    "ic_u.kind",
    "ic_u.amplitude",
    "ic_u.offset",
    "ic_u.velocity",
    "ic_u.width",
    "ic_v.kind",
    "ic_v.amplitude",
    "ic_v.offset",
    "ic_v.velocity",
    "ic_v.width",
    "scheme",
    "tol",
    "max_iters",
    "divergence_factor",
    "observe_every",
];

const EXTRA_KEYS: [&str; 1] = ["oracle"];

struct Entries {
    values: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.values.get(key).map(|(line, v)| (*line, v.as_str()))
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some((line, text)) => text.parse::<T>().map(Some).map_err(|e| Error::Parse {
                line,
                message: format!("invalid value '{text}' for {key}: {e}"),
            }),
        }
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?
            .ok_or_else(|| Error::Validation(format!("missing required key '{key}'")))
    }
}

fn tokenize(document: &str) -> Result<Entries> {
    let mut values = BTreeMap::new();
    for (idx, raw_line) in document.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected 'key = value', found '{line}'"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) && !EXTRA_KEYS.contains(&key) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("unknown key '{key}'"),
            });
        }
        if value.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("empty value for '{key}'"),
            });
        }
        if let Some((first, _)) = values.insert(key.to_string(), (line_no, value.to_string())) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate key '{key}' (first set on line {first})"),
            });
        }
    }
    Ok(Entries { values })
}

fn initial_condition(entries: &Entries, prefix: &str) -> Result<InitialCondition> {
    let key = |field: &str| format!("{prefix}.{field}");
    let kind: String = entries.require(&key("kind"))?;
    let width: Option<f64> = entries.parse(&key("width"))?;
    let shape = match kind.as_str() {
        "sech" => PulseShape::Sech,
        "zero" => PulseShape::Zero,
        "rectangular" => PulseShape::Rectangular {
            width: width.ok_or_else(|| Error::Validation(format!("rectangular pulse needs '{}'", key("width"))))?,
        },
        other => {
            let (line, _) = entries.raw(&key("kind")).unwrap();
            return Err(Error::Parse {
                line,
                message: format!("unknown pulse kind '{other}' (expected sech, rectangular or zero)"),
            });
        }
    };
    if width.is_some() && !matches!(shape, PulseShape::Rectangular { .. }) {
        let (line, _) = entries.raw(&key("width")).unwrap();
        return Err(Error::Parse {
            line,
            message: format!("'{}' only applies to rectangular pulses", key("width")),
        });
    }
    Ok(InitialCondition {
        shape,
        amplitude: entries.require(&key("amplitude"))?,
        offset: entries.require(&key("offset"))?,
        velocity: entries.require(&key("velocity"))?,
    })
}

/// Parses and validates a scenario document.
pub fn load_scenario(document: &str) -> Result<Scenario> {
    let e = tokenize(document)?;
    let grid = Grid {
        x_min: e.require("x_min")?,
        x_max: e.require("x_max")?,
        n_space: e.require("n_space")?,
        tau: e.require("tau")?,
        n_time: e.require("n_time")?,
    };
    let phys = Physics {
        sigma: e.require("sigma")?,
        k: e.require("k")?,
        a: e.require("a")?,
        b: e.require("b")?,
        c: e.require("c")?,
        d: e.require("d")?,
    };
    let defaults = IterationPolicy::default();
    let policy = IterationPolicy {
        tol: e.parse("tol")?.unwrap_or(defaults.tol),
        max_iters: e.parse("max_iters")?.unwrap_or(defaults.max_iters),
        divergence_factor: e.parse("divergence_factor")?.unwrap_or(defaults.divergence_factor),
    };
    let oracle = match e.raw("oracle") {
        None | Some((_, "none")) => None,
        Some((line, text)) => Some(
            text.parse::<OracleKind>()
                .map_err(|message| Error::Parse { line, message })?,
        ),
    };
    let scenario = Scenario {
        grid,
        phys,
        ic_u: initial_condition(&e, "ic_u")?,
        ic_v: initial_condition(&e, "ic_v")?,
        scheme: e.require("scheme")?,
        policy,
        observe_every: e.parse("observe_every")?.unwrap_or((grid.n_time / 200).max(1)),
        oracle,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Shortest round-tripping form; switches to exponent notation for very
/// small or large magnitudes.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn write_ic(out: &mut String, prefix: &str, ic: &InitialCondition) {
    let _ = writeln!(out, "{prefix}.kind = {}", ic.shape.name());
    let _ = writeln!(out, "{prefix}.amplitude = {}", num(ic.amplitude));
    let _ = writeln!(out, "{prefix}.offset = {}", num(ic.offset));
    let _ = writeln!(out, "{prefix}.velocity = {}", num(ic.velocity));
    if let PulseShape::Rectangular { width } = ic.shape {
        let _ = writeln!(out, "{prefix}.width = {}", num(width));
    }
}

/// Writes every field; floats use the shortest representation that parses
/// back to the same value.
pub fn serialize_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let g = &s.grid;
    let p = &s.phys;
    out.push_str("# grid\n");
    let _ = writeln!(
        out,
        "x_min = {}\nx_max = {}\nn_space = {}",
        num(g.x_min),
        num(g.x_max),
        g.n_space
    );
    let _ = writeln!(out, "tau = {}\nn_time = {}", num(g.tau), g.n_time);
    out.push_str("# coefficients\n");
    for (name, value) in p.named() {
        let _ = writeln!(out, "{name} = {}", num(value));
    }
    out.push_str("# initial conditions\n");
    write_ic(&mut out, "ic_u", &s.ic_u);
    write_ic(&mut out, "ic_v", &s.ic_v);
    out.push_str("# integration\n");
    let _ = writeln!(out, "scheme = {}", s.scheme);
    let _ = writeln!(
        out,
        "tol = {}\nmax_iters = {}\ndivergence_factor = {}",
        num(s.policy.tol),
        s.policy.max_iters,
        num(s.policy.divergence_factor)
    );
    let _ = writeln!(out, "observe_every = {}", s.observe_every);
    match s.oracle {
        Some(kind) => {
            let _ = writeln!(out, "oracle = {kind}");
        }
        None => out.push_str("oracle = none\n"),
    }
    out
}
