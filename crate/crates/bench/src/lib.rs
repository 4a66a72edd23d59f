//! Benchmark fixtures shared by the criterion targets.

use prandtl4_core::datum::bump;
use prandtl4_core::{Grid, Profile};

/// The default bump on `[0, length]` with `points` nodes.
pub fn bump_datum(length: f64, points: usize) -> Profile {
    let grid = Grid::new(length, points).expect("valid benchmark grid");
    bump(&grid, 10.0, 20.0, 10.0)
}
