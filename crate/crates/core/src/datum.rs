//! Compactly supported initial data satisfying every boundary condition.

use crate::grid::{Grid, Profile};

/// `amplitude · exp(-1/(1 - s²))` with `s = (y - center)/half_width`, zero outside `|s| < 1`.
pub fn bump_value(y: f64, amplitude: f64, center: f64, half_width: f64) -> f64 {
    let s = (y - center) / half_width;
    if s.abs() >= 1.0 {
        0.0
    } else {
        amplitude * (-1.0 / (1.0 - s * s)).exp()
    }
}

pub fn bump(grid: &Grid, amplitude: f64, center: f64, half_width: f64) -> Profile {
    grid.sample(|y| bump_value(y, amplitude, center, half_width))
}

/// Bump rescaled to unit integral.
pub fn unit_mass_bump(grid: &Grid, center: f64, half_width: f64) -> Profile {
    let raw = bump(grid, 1.0, center, half_width);
    let mass = raw.integral();
    raw.scaled(1.0 / mass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_and_peak() {
        assert_eq!(bump_value(2.0, 3.0, 5.0, 3.0), 0.0);
        assert!((bump_value(5.0, 3.0, 5.0, 3.0) - 3.0 * (-1.0f64).exp()).abs() < 1e-15);
        let g = Grid::new(10.0, 501).unwrap();
        let p = unit_mass_bump(&g, 5.0, 1.0);
        assert!((p.integral() - 1.0).abs() < 1e-14);
        assert_eq!(p.values()[0], 0.0);
    }
}
