//! Fixtures shared by the kernel benchmarks.

use cnlse_core::{preset, Complex64, FieldState, Grid, Physics, Scenario};

/// A preset's physics and grid, resampled to `n_space` interior nodes.
pub fn fixture(name: &str, n_space: usize) -> (Scenario, FieldState) {
    let mut s = preset(name).expect("known preset");
    s.grid = Grid::new(s.grid.x_min, s.grid.x_max, n_space, s.grid.tau, s.grid.n_time).expect("valid grid");
    let state = s.initial_state();
    (s, state)
}

/// A diagonally dominant system of size `n`, shaped like the implicit scheme's.
pub fn tridiagonal_system(n: usize, phys: &Physics) -> [Vec<Complex64>; 4] {
    let off = Complex64::new(0.1, -0.5 * phys.k);
    let diag = Complex64::new(1.0, phys.k);
    let rhs = (0..n).map(|i| Complex64::new((i as f64 * 0.01).sin(), 0.3)).collect();
    [vec![off; n - 1], vec![diag; n], vec![off.conj(); n - 1], rhs]
}
