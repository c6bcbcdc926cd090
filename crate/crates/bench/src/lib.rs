//! Shared fixtures for the benchmarks.

use std::f64::consts::PI;
use std::sync::Arc;

use ipm_core::dynamics::BoussinesqState;
use ipm_core::harness::random_band_field;
use ipm_core::{make_grid, Grid, SpectralField, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn grid(n: usize) -> Arc<Grid> {
    make_grid(n, n, 2.0 * PI, 2.0 * PI).expect("valid grid")
}

/// Seeded zero-mean field with energy in the shell `1 ≤ |ξ| ≤ n/4`.
pub fn field(g: &Arc<Grid>, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = random_band_field(g, &mut rng, [1.0, g.nx() as f64 / 4.0]);
    f.coeffs_mut()[[0, 0]] = C64::new(0.0, 0.0);
    f
}

pub fn state(g: &Arc<Grid>, eps: f64) -> BoussinesqState {
    BoussinesqState::new(field(g, 1).scale(0.1), field(g, 2).scale(0.1), eps).expect("valid state")
}
