//! Stability and convergence diagnostics for the explicit scheme, plus the
//! analytic reference solutions and error metrics used to validate runs.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{discrete_l2_norm, FieldState, Grid, InvariantPair, Physics};

/// Default bound on `rho * tau` beyond which explicit runs are unstable.
pub const DEFAULT_RHO_TAU_THRESHOLD: f64 = 0.1;

/// Growth-rate bound of the explicit evolution operator:
///
/// `rho = 4 sigma/h + 16 k/h^2 + 4 max(a,d) I_u + 4 max(b,c) I_v`
///
/// with the unweighted discrete energies `I_u`, `I_v`.
pub fn stability_rho(phys: &Physics, grid: &Grid, inv: &InvariantPair) -> f64 {
    let h = grid.h();
    4.0 * phys.sigma / h
        + 16.0 * phys.k / (h * h)
        + 4.0 * phys.a.max(phys.d) * inv.i_u
        + 4.0 * phys.b.max(phys.c) * inv.i_v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// `rho tau` at most half the threshold.
    Stable,
    /// Between half the threshold and the threshold.
    Marginal,
    Unstable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "stable-regime",
            Verdict::Marginal => "marginal",
            Verdict::Unstable => "unstable-regime",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityBudget {
    pub rho: f64,
    pub rho_tau: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    /// Largest time step with `rho * tau <= threshold`; infinite when `rho = 0`.
    pub recommended_tau: f64,
}

impl StabilityBudget {
    pub fn new(rho: f64, tau: f64, threshold: f64) -> Result<Self> {
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(Error::Validation(format!("threshold must be > 0, got {threshold}")));
        }
        let rho_tau = rho * tau;
        let verdict = if rho_tau > threshold {
            Verdict::Unstable
        } else if rho_tau > 0.5 * threshold {
            Verdict::Marginal
        } else {
            Verdict::Stable
        };
        let recommended_tau = if rho > 0.0 { threshold / rho } else { f64::INFINITY };
        Ok(StabilityBudget {
            rho,
            rho_tau,
            threshold,
            verdict,
            recommended_tau,
        })
    }

    /// Budget for the given state at the grid's time step.
    pub fn assess(phys: &Physics, grid: &Grid, state: &FieldState, threshold: f64) -> Result<Self> {
        let inv = crate::field::invariants(state)?;
        Self::new(stability_rho(phys, grid, &inv), grid.tau, threshold)
    }
}

/// Per-block upper bounds of the real-split explicit evolution operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementBounds {
    pub t11: f64,
    pub t12: f64,
    pub t21: f64,
    pub t22: f64,
    pub t33: f64,
    pub t34: f64,
    pub t43: f64,
    pub t44: f64,
}

impl ElementBounds {
    pub fn named(&self) -> [(&'static str, f64); 8] {
        [
            ("T11", self.t11),
            ("T12", self.t12),
            ("T21", self.t21),
            ("T22", self.t22),
            ("T33", self.t33),
            ("T34", self.t34),
            ("T43", self.t43),
            ("T44", self.t44),
        ]
    }
}

pub fn element_bounds(phys: &Physics, grid: &Grid, state: &FieldState) -> Result<ElementBounds> {
    state.ensure_finite()?;
    let h = grid.h();
    let tau = grid.tau;
    let peak = |f: &[Complex64]| f.iter().map(|z| z.norm_sqr()).fold(0.0_f64, f64::max);
    let max_u2 = peak(&state.u);
    let max_v2 = peak(&state.v);

    let diagonal = 1.0 + tau * phys.sigma / h;
    let dispersion = 4.0 * tau * phys.k / (h * h);
    let upper = dispersion + tau * phys.a * max_u2 + tau * phys.b * max_v2;
    let lower = dispersion + tau * phys.c * max_v2 + tau * phys.d * max_u2;
    Ok(ElementBounds {
        t11: diagonal,
        t12: upper,
        t21: upper,
        t22: diagonal,
        t33: diagonal,
        t34: lower,
        t43: lower,
        t44: diagonal,
    })
}

/// Bound on the whole evolution operator after replacing the nodal maxima
/// by the conserved energies:
///
/// `4 + 4 tau sigma/h + 16 tau k/h^2 + 2 tau (a I_u + b I_v + d I_u + c I_v)`.
pub fn matrix_norm_bound(phys: &Physics, grid: &Grid, inv: &InvariantPair) -> f64 {
    let h = grid.h();
    let tau = grid.tau;
    4.0 + 4.0 * tau * phys.sigma / h
        + 16.0 * tau * phys.k / (h * h)
        + 2.0 * tau * (phys.a * inv.i_u + phys.b * inv.i_v + phys.d * inv.i_u + phys.c * inv.i_v)
}

/// Convergence residual comparing numeric and exact energies:
///
/// `Q = 4 |m (I_u + I_v)^{3/2} - m (I_ue + I_ve)^{3/2}|`, `m = max(a, b, c, d)`.
pub fn convergence_q(phys: &Physics, numeric: &InvariantPair, exact: &InvariantPair) -> f64 {
    let m = phys.max_nonlinearity();
    4.0 * (m * numeric.total().powf(1.5) - m * exact.total().powf(1.5)).abs()
}

/// Fundamental NLS soliton `sech(x) exp(i t / 2)` of
/// `i U_t + U_xx / 2 + |U|^2 U = 0`.
pub fn nls_fundamental_soliton(x: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0 / x.cosh(), 0.5 * t)
}

/// Second-order bound state of the same equation with `U(x, 0) = 2 sech(x)`:
///
/// ```text
/// U = 4 exp(i t/2) [cosh 3x + 3 exp(4 i t) cosh x] / [cosh 4x + 4 cosh 2x + 3 cos 4t]
/// ```
///
/// The frequently quoted form without the factors 4 and 3 in the numerator
/// does not reproduce the initial condition (it gives 1/4 at the origin).
/// Numerator and denominator are scaled by `exp(-4|x|)` so that large `|x|`
/// does not overflow.
pub fn nls_breather_a2(x: f64, t: f64) -> Complex64 {
    let s = x.abs();
    let e = |m: f64| (-m * s).exp();
    let cosh3 = 0.5 * (e(1.0) + e(7.0));
    let cosh1 = 0.5 * (e(3.0) + e(5.0));
    let cosh4 = 0.5 * (1.0 + e(8.0));
    let cosh2 = 0.5 * (e(2.0) + e(6.0));
    let numerator = Complex64::new(cosh3, 0.0) + Complex64::from_polar(3.0 * cosh1, 4.0 * t);
    let denominator = cosh4 + 4.0 * cosh2 + 3.0 * (4.0 * t).cos() * e(4.0);
    numerator * Complex64::from_polar(4.0, 0.5 * t) / denominator
}

fn manakov_constraint(amplitude: f64, phys: &Physics) -> Result<()> {
    let symmetric = phys.a == phys.b && phys.b == phys.c && phys.c == phys.d;
    if !symmetric || phys.sigma != 0.0 {
        return Err(Error::UnsupportedParameters(format!(
            "Manakov soliton needs a = b = c = d and sigma = 0 (got sigma={}, a={}, b={}, c={}, d={})",
            phys.sigma, phys.a, phys.b, phys.c, phys.d
        )));
    }
    let required_k = 0.5 * amplitude * amplitude * (phys.a + phys.b);
    if (required_k - phys.k).abs() > 1e-12 * required_k.max(1.0) {
        return Err(Error::UnsupportedParameters(format!(
            "Manakov soliton of amplitude {amplitude} requires k = {required_k} (got k = {})",
            phys.k
        )));
    }
    Ok(())
}

/// Stationary vector soliton `U = V = A sech(x) exp(i k t)` of the symmetric
/// system, valid when `A^2 (a + b) = 2k`.
pub fn manakov_soliton(x: f64, t: f64, amplitude: f64, phys: &Physics) -> Result<(Complex64, Complex64)> {
    manakov_constraint(amplitude, phys)?;
    let value = Complex64::from_polar(amplitude / x.cosh(), phys.k * t);
    Ok((value, value))
}

/// Analytic reference solutions a scenario can be checked against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Oracle {
    NlsFundamental,
    NlsBreatherA2,
    Manakov { amplitude: f64 },
}

impl Oracle {
    pub fn evaluate(&self, x: f64, t: f64, phys: &Physics) -> Result<(Complex64, Complex64)> {
        let zero = Complex64::new(0.0, 0.0);
        match *self {
            Oracle::NlsFundamental => Ok((nls_fundamental_soliton(x, t), zero)),
            Oracle::NlsBreatherA2 => Ok((nls_breather_a2(x, t), zero)),
            Oracle::Manakov { amplitude } => manakov_soliton(x, t, amplitude, phys),
        }
    }

    /// Checks that the oracle solves the system with these coefficients.
    pub fn check_admissible(&self, phys: &Physics) -> Result<()> {
        match *self {
            Oracle::NlsFundamental | Oracle::NlsBreatherA2 => {
                // V stays zero, so b never acts; the U equation must be
                // i U_t + U_xx/2 + |U|^2 U = 0.
                if phys.sigma != 0.0 || phys.k != 0.5 || phys.a != 1.0 || phys.c != 0.0 || phys.d != 0.0 {
                    return Err(Error::UnsupportedParameters(format!(
                        "NLS oracles need sigma = 0, k = 0.5, a = 1, c = d = 0 (got sigma={}, k={}, a={}, c={}, d={})",
                        phys.sigma, phys.k, phys.a, phys.c, phys.d
                    )));
                }
                Ok(())
            }
            Oracle::Manakov { amplitude } => manakov_constraint(amplitude, phys),
        }
    }

    /// The oracle sampled on the grid nodes at time `t`.
    pub fn sample(&self, grid: &Grid, t: f64, phys: &Physics) -> Result<FieldState> {
        let mut u = Vec::with_capacity(grid.n_space);
        let mut v = Vec::with_capacity(grid.n_space);
        for x in grid.nodes() {
            let (a, b) = self.evaluate(x, t, phys)?;
            u.push(a);
            v.push(b);
        }
        FieldState::new(u, v, t)
    }
}

/// Names used in configuration files and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    NlsFundamental,
    NlsA2,
    Manakov,
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleKind::NlsFundamental => "nls-fundamental",
            OracleKind::NlsA2 => "nls-a2",
            OracleKind::Manakov => "manakov",
        })
    }
}

impl FromStr for OracleKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "nls-fundamental" => Ok(OracleKind::NlsFundamental),
            "nls-a2" => Ok(OracleKind::NlsA2),
            "manakov" => Ok(OracleKind::Manakov),
            other => Err(format!(
                "unknown oracle '{other}' (expected none, nls-fundamental, nls-a2 or manakov)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OracleError {
    /// `h * sqrt(sum |U - U_e|^2 + |V - V_e|^2)`.
    pub l2: f64,
    /// Largest nodal modulus of the difference over both modes.
    pub max: f64,
}

/// Difference between a numerical state and the oracle at `state.time`.
pub fn error_vs_oracle(state: &FieldState, oracle: &Oracle, grid: &Grid, phys: &Physics) -> Result<OracleError> {
    state.ensure_matches(grid)?;
    let exact = oracle.sample(grid, state.time, phys)?;
    let diff: Vec<Complex64> = state
        .u
        .iter()
        .zip(&exact.u)
        .chain(state.v.iter().zip(&exact.v))
        .map(|(a, b)| a - b)
        .collect();
    let l2 = discrete_l2_norm(&diff, grid.h())?;
    let max = diff.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    Ok(OracleError { l2, max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::invariants;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid_h(h: f64) -> Grid {
        Grid::new(0.0, 10.0 * h, 9, 0.01, 1).unwrap()
    }

    #[test]
    fn rho_substitution_cases() {
        let phys = Physics {
            a: 1.0,
            d: 1.0,
            ..Default::default()
        };
        let inv = InvariantPair { i_u: 1.0, i_v: 0.0 };
        assert_relative_eq!(stability_rho(&phys, &grid_h(0.1), &inv), 4.0, max_relative = 1e-15);

        let phys = Physics {
            sigma: 1.0,
            ..Default::default()
        };
        assert_relative_eq!(
            stability_rho(&phys, &grid_h(0.5), &InvariantPair::default()),
            8.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn rho_for_unit_manakov_data() {
        let grid = Grid::new(-50.0, 50.0, 999, 15.0 / 10_000.0, 10_000).unwrap();
        let phys = Physics {
            k: 1.0,
            a: 1.0,
            b: 1.0,
            c: 1.0,
            d: 1.0,
            sigma: 0.0,
        };
        let nodes = grid.nodes();
        let u: Vec<_> = nodes.iter().map(|&x| c(1.0 / x.cosh(), 0.0)).collect();
        let s = FieldState::new(u.clone(), u, 0.0).unwrap();
        let inv = invariants(&s).unwrap();
        // Quadrature oracle: int sech^2 = 2, so I = 2/h = 20.
        assert!((inv.i_u - 20.0).abs() < 1e-6);
        let rho = stability_rho(&phys, &grid, &inv);
        assert!((rho - (1600.0 + 160.0)).abs() < 1e-4, "{rho}");
        let coarse = StabilityBudget::new(rho, 15.0 / 10_000.0, 0.1).unwrap();
        let fine = StabilityBudget::new(rho, 15.0 / 1_000_000.0, 0.1).unwrap();
        assert_eq!(coarse.verdict, Verdict::Unstable);
        assert_eq!(fine.verdict, Verdict::Stable);
    }

    #[test]
    fn budget_verdicts_and_recommendation() {
        let b = StabilityBudget::new(8.0, 0.1, 0.1).unwrap();
        assert_relative_eq!(b.rho_tau, 0.8, max_relative = 1e-15);
        assert_eq!(b.verdict, Verdict::Unstable);
        assert_relative_eq!(b.recommended_tau * b.rho, 0.1, max_relative = 1e-12);

        let zero = StabilityBudget::new(0.0, 0.1, 0.1).unwrap();
        assert_eq!(zero.verdict, Verdict::Stable);
        assert!(zero.recommended_tau.is_infinite());

        assert_eq!(StabilityBudget::new(1.0, 0.07, 0.1).unwrap().verdict, Verdict::Marginal);
        assert_eq!(StabilityBudget::new(1.0, 0.1, 0.1).unwrap().verdict, Verdict::Marginal);
        assert!(StabilityBudget::new(1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn element_bounds_substitution() {
        let grid = Grid::new(0.0, 1.0, 9, 0.01, 1).unwrap();
        let zero = element_bounds(&Physics::default(), &grid, &FieldState::zeros(9)).unwrap();
        for (name, value) in zero.named() {
            let expected = if name.as_bytes()[1] == name.as_bytes()[2] {
                1.0
            } else {
                0.0
            };
            assert_eq!(value, expected, "{name}");
        }
        let phys = Physics {
            sigma: 1.0,
            ..Default::default()
        };
        let b = element_bounds(&phys, &grid, &FieldState::zeros(9)).unwrap();
        assert_relative_eq!(b.t11, 1.1, max_relative = 1e-14);
        assert_relative_eq!(b.t44, 1.1, max_relative = 1e-14);
        assert_eq!(b.t12, 0.0);
    }

    #[test]
    fn element_bounds_group_velocity_coefficients() {
        // Table of coefficients a = c = 1, b = d = 1/3 with pulses of
        // amplitude 1.2 and 1.4; reference values evaluated independently.
        let grid = Grid::new(-30.0, 30.0, 299, 0.02, 2000).unwrap();
        let phys = Physics {
            sigma: 0.0,
            k: 0.5,
            a: 1.0,
            b: 1.0 / 3.0,
            c: 1.0,
            d: 1.0 / 3.0,
        };
        let nodes = grid.nodes();
        let u: Vec<_> = nodes
            .iter()
            .map(|&x| Complex64::from_polar(1.2 / x.cosh(), 0.7 * x))
            .collect();
        let v: Vec<_> = nodes.iter().map(|&x| c(1.4 / x.cosh(), 0.0)).collect();
        let s = FieldState::new(u, v, 0.0).unwrap();
        let b = element_bounds(&phys, &grid, &s).unwrap();
        // 4*0.02*0.5/0.04 + 0.02*1.44 + 0.02*1.96/3 ; peaks sit on the node x = 0.
        assert_relative_eq!(b.t12, 1.0 + 0.0288 + 0.02 * 1.96 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(b.t34, 1.0 + 0.0392 + 0.02 * 1.44 / 3.0, max_relative = 1e-12);
        assert_eq!(b.t11, 1.0);
        assert!(b.t21 >= 4.0 * grid.tau * phys.k / (grid.h() * grid.h()));
    }

    #[test]
    fn matrix_norm_bound_substitution() {
        let grid = grid_h(0.1);
        assert_eq!(
            matrix_norm_bound(&Physics::default(), &grid, &InvariantPair::default()),
            4.0
        );
        let phys = Physics {
            a: 1.0,
            b: 1.0,
            c: 1.0,
            d: 1.0,
            ..Default::default()
        };
        let g = Grid { tau: 0.1, ..grid };
        let inv = InvariantPair { i_u: 1.0, i_v: 1.0 };
        assert_relative_eq!(matrix_norm_bound(&phys, &g, &inv), 4.8, max_relative = 1e-15);
    }

    #[test]
    fn matrix_norm_bound_mixed_coefficients() {
        // 300 space steps on [-30, 30], tau = 0.02, sigma = 0.3, k = 0.5,
        // a = 1, b = 0.2, c = 1, d = 1.6, I_u = I_v = 22.5.
        let grid = Grid::new(-30.0, 30.0, 299, 0.02, 2000).unwrap();
        let phys = Physics {
            sigma: 0.3,
            k: 0.5,
            a: 1.0,
            b: 0.2,
            c: 1.0,
            d: 1.6,
        };
        let inv = InvariantPair { i_u: 22.5, i_v: 22.5 };
        let expected = 4.0 + 4.0 * 0.02 * 0.3 / 0.2 + 16.0 * 0.02 * 0.5 / 0.04 + 2.0 * 0.02 * (22.5 * 3.8);
        assert_relative_eq!(matrix_norm_bound(&phys, &grid, &inv), expected, max_relative = 1e-12);
        assert_relative_eq!(expected, 11.54, max_relative = 1e-12);
    }

    #[test]
    fn q_cases() {
        let phys = Physics {
            a: 1.0,
            b: 1.0,
            c: 1.0,
            d: 1.0,
            ..Default::default()
        };
        let s = InvariantPair { i_u: 3.0, i_v: 1.0 };
        assert_eq!(convergence_q(&phys, &s, &s), 0.0);
        let exact = InvariantPair { i_u: 0.5, i_v: 0.5 };
        assert_relative_eq!(convergence_q(&phys, &s, &exact), 28.0, max_relative = 1e-14);
    }

    #[test]
    fn fundamental_soliton_values() {
        assert_eq!(nls_fundamental_soliton(0.0, 0.0), c(1.0, 0.0));
        let z = nls_fundamental_soliton(0.0, PI);
        assert!((z - c(0.0, 1.0)).norm() < 1e-15);
        for &x in &[-3.0, -0.4, 0.0, 1.3, 7.0] {
            for &t in &[0.0, 0.7, 5.0, 14.9] {
                assert_relative_eq!(
                    nls_fundamental_soliton(x, t).norm(),
                    1.0 / f64::cosh(x),
                    max_relative = 1e-14
                );
            }
        }
    }

    #[test]
    fn breather_initial_condition() {
        assert!((nls_breather_a2(0.0, 0.0) - c(2.0, 0.0)).norm() < 1e-15);
        for i in -80..=80 {
            let x = i as f64 * 0.25;
            let z = nls_breather_a2(x, 0.0);
            assert!((z.norm() - 2.0 / x.cosh()).abs() < 1e-12, "x={x}");
            assert!((z - c(2.0 / x.cosh(), 0.0)).norm() < 1e-12);
        }
        // Far tails stay finite.
        assert!(nls_breather_a2(400.0, 1.0).norm() < 1e-100);
    }

    #[test]
    fn breather_is_quarter_period_periodic_in_modulus() {
        for &x in &[-2.0, -0.5, 0.0, 0.3, 1.7] {
            for &t in &[0.0, 0.2, 1.1, 3.9] {
                let a = nls_breather_a2(x, t).norm();
                let b = nls_breather_a2(x, t + PI / 2.0).norm();
                assert!((a - b).abs() < 1e-12, "x={x} t={t}");
            }
        }
    }

    #[test]
    fn manakov_values_and_constraint() {
        let phys = Physics {
            k: 1.0,
            a: 1.0,
            b: 1.0,
            c: 1.0,
            d: 1.0,
            sigma: 0.0,
        };
        let (u, v) = manakov_soliton(0.0, 0.0, 1.0, &phys).unwrap();
        assert_eq!((u, v), (c(1.0, 0.0), c(1.0, 0.0)));
        for &t in &[0.0, 1.0, 9.5] {
            let (u, _) = manakov_soliton(0.8, t, 1.0, &phys).unwrap();
            assert_relative_eq!(u.norm(), 1.0 / 0.8f64.cosh(), max_relative = 1e-15);
        }
        let bad = Physics { k: 0.5, ..phys };
        match manakov_soliton(0.0, 0.0, 1.0, &bad) {
            Err(Error::UnsupportedParameters(msg)) => assert!(msg.contains("requires k = 1")),
            other => panic!("{other:?}"),
        }
        let asym = Physics { b: 0.5, ..phys };
        assert!(manakov_soliton(0.0, 0.0, 1.0, &asym).is_err());
    }

    #[test]
    fn oracle_admissibility() {
        let nls = Physics {
            k: 0.5,
            a: 1.0,
            ..Default::default()
        };
        assert!(Oracle::NlsFundamental.check_admissible(&nls).is_ok());
        assert!(Oracle::NlsBreatherA2
            .check_admissible(&Physics { c: 1.0, ..nls })
            .is_err());
        assert!(Oracle::Manakov { amplitude: 1.0 }.check_admissible(&nls).is_err());
    }

    #[test]
    fn error_against_oracle() {
        let grid = Grid::new(-10.0, 10.0, 99, 0.01, 1).unwrap();
        let phys = Physics {
            k: 0.5,
            a: 1.0,
            ..Default::default()
        };
        let exact = Oracle::NlsFundamental.sample(&grid, 2.5, &phys).unwrap();
        let e = error_vs_oracle(&exact, &Oracle::NlsFundamental, &grid, &phys).unwrap();
        assert_eq!((e.l2, e.max), (0.0, 0.0));

        let eps = 1e-3;
        let mut shifted = exact.clone();
        shifted.u.iter_mut().for_each(|z| *z += eps);
        let e = error_vs_oracle(&shifted, &Oracle::NlsFundamental, &grid, &phys).unwrap();
        assert_relative_eq!(e.l2, grid.h() * eps * (99f64).sqrt(), max_relative = 1e-9);
        assert_relative_eq!(e.max, eps, max_relative = 1e-9);

        let bad = Physics {
            k: 0.3,
            ..Default::default()
        };
        assert!(error_vs_oracle(&exact, &Oracle::Manakov { amplitude: 1.0 }, &grid, &bad).is_err());
    }

    proptest! {
        #[test]
        fn rho_monotone(
            base in prop::array::uniform8(0.0..3.0f64),
            bump in 0.0..1.0f64,
            which in 0usize..9,
            h in 0.05..1.0f64,
        ) {
            let phys = Physics { sigma: base[0], k: base[1], a: base[2], b: base[3], c: base[4], d: base[5] };
            let inv = InvariantPair { i_u: base[6] * 10.0, i_v: base[7] * 10.0 };
            let grid = Grid::new(0.0, 10.0 * h, 9, 0.01, 1).unwrap();
            let rho = stability_rho(&phys, &grid, &inv);
            let (mut p2, mut i2, mut g2) = (phys, inv, grid);
            match which {
                0 => p2.sigma += bump,
                1 => p2.k += bump,
                2 => p2.a += bump,
                3 => p2.b += bump,
                4 => p2.c += bump,
                5 => p2.d += bump,
                6 => i2.i_u += bump,
                7 => i2.i_v += bump,
                _ => g2.x_max += bump,
            }
            let rho2 = stability_rho(&p2, &g2, &i2);
            if which == 8 {
                prop_assert!(rho2 <= rho);
            } else {
                prop_assert!(rho2 >= rho);
            }
        }

        #[test]
        fn recommended_tau_saturates_threshold(rho in 1e-3..1e6f64, tau in 1e-7..1.0f64, thr in 1e-3..1.0f64) {
            let b = StabilityBudget::new(rho, tau, thr).unwrap();
            prop_assert!((rho * b.recommended_tau - thr).abs() <= 1e-12 * thr);
            prop_assert!((b.rho_tau - rho * tau).abs() <= 1e-14 * b.rho_tau);
            prop_assert_eq!(b.verdict == Verdict::Unstable, b.rho_tau > thr);
        }

        #[test]
        fn q_vanishes_on_equal_pairs(i_u in 0.0..100.0f64, i_v in 0.0..100.0f64, m in 0.0..3.0f64) {
            let phys = Physics { a: m, ..Default::default() };
            let s = InvariantPair { i_u, i_v };
            prop_assert_eq!(convergence_q(&phys, &s, &s), 0.0);
        }
    }
}
