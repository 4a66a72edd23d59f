//! The clamped biharmonic heat kernel and its modified companions.
//!
//! Every kernel is a wavenumber integral
//!
//! ```text
//! ∂_x^m K(t,x,y) = (1/π) ∫_0^∞ k^m e^{-k^4 t} Φ_x^{(m)}(kx) Φ_y(ky) dk
//!                = t^{-(m+1)/4} g_m(x t^{-1/4}, y t^{-1/4})
//! ```
//!
//! so all evaluation goes through the self-similar profile `g_m(X, Z)` in
//! the scaled wavenumber `s = k t^{1/4}`. Single entries use adaptive panel
//! quadrature ([`kernel_profile`]); whole rows and blocks share one
//! composite Gauss rule and reduce to a matrix product ([`kernel_block`]).

mod phi;
pub mod quadrature;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use phi::{phi_eval, PhiCoeffs, PhiKind};
pub use quadrature::{QuadratureSpec, TensorRule};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Highest x-derivative order the kernels are evaluated at.
pub const MAX_DERIVATIVE: usize = 7;

/// The kernel `K` and the modified kernels used for derivative transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    K,
    Ka,
    Kb,
    Kc,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [KernelKind::K, KernelKind::Ka, KernelKind::Kb, KernelKind::Kc];

    pub fn x_factor(self) -> PhiKind {
        match self {
            KernelKind::K => PhiKind::Main,
            KernelKind::Ka => PhiKind::Mod3,
            KernelKind::Kb => PhiKind::Mod2,
            KernelKind::Kc => PhiKind::Mod1,
        }
    }

    pub fn y_factor(self) -> PhiKind {
        match self {
            KernelKind::K => PhiKind::Main,
            KernelKind::Ka => PhiKind::Mod1,
            KernelKind::Kb => PhiKind::Mod2,
            KernelKind::Kc => PhiKind::Mod3,
        }
    }

    /// Kernel whose x-derivatives reproduce the `order`-th y-derivative of
    /// `K`: `∂_y^n K = ∂_x^n K_{n mod 4}` with `K_1 = Ka`, `K_2 = Kb`, `K_3 = Kc`.
    pub fn y_transfer(order: usize) -> Self {
        match order % 4 {
            0 => KernelKind::K,
            1 => KernelKind::Ka,
            2 => KernelKind::Kb,
            _ => KernelKind::Kc,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::K => "K",
            KernelKind::Ka => "Ka",
            KernelKind::Kb => "Kb",
            KernelKind::Kc => "Kc",
        }
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "K" | "k" => Ok(KernelKind::K),
            "Ka" | "ka" => Ok(KernelKind::Ka),
            "Kb" | "kb" => Ok(KernelKind::Kb),
            "Kc" | "kc" => Ok(KernelKind::Kc),
            other => Err(Error::InvalidArgument(format!("unknown kernel kind {other:?}"))),
        }
    }
}

/// One evaluated kernel entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub m: usize,
    pub kind: KernelKind,
    pub value: f64,
}

impl KernelSample {
    pub fn evaluate(t: f64, x: f64, y: f64, m: usize, kind: KernelKind, quad: &QuadratureSpec) -> Result<Self> {
        let value = kernel_value(t, x, y, m, kind, quad)?;
        Ok(Self {
            t,
            x,
            y,
            m,
            kind,
            value,
        })
    }
}

fn check_order(m: usize) -> Result<()> {
    if m > MAX_DERIVATIVE {
        Err(Error::InvalidArgument(format!(
            "derivative order {m} exceeds the supported maximum {MAX_DERIVATIVE}"
        )))
    } else {
        Ok(())
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time must be positive, got {t}")))
    }
}

/// Self-similar profile `g_m(X, Z) = (1/π)∫ s^m e^{-s^4} Φ_x^{(m)}(sX) Φ_y(sZ) ds`.
pub fn kernel_profile(x: f64, z: f64, m: usize, kind: KernelKind, quad: &QuadratureSpec) -> Result<f64> {
    check_order(m)?;
    if !(x >= 0.0 && z >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "profile arguments must be nonnegative, got ({x}, {z})"
        )));
    }
    let fx = kind.x_factor().coeffs().derivative(m);
    let fy = kind.y_factor().coeffs();
    let integrand = |s: f64| s.powi(m as i32) * (-s.powi(4)).exp() * fx.eval(s * x) * fy.eval(s * z);
    let omega = x.max(z).max(1.0);
    match quadrature::integrate_adaptive(quad, omega, integrand) {
        Ok(r) => Ok(r.value / PI),
        Err(_) => Err(Error::QuadratureNotConverged {
            abs_tol: quad.abs_tol(),
            max_subdivisions: quad.max_subdivisions(),
            x,
            z,
            m,
        }),
    }
}

/// `∂_x^m` of the selected kernel at `(t, x, y)`.
pub fn kernel_value(t: f64, x: f64, y: f64, m: usize, kind: KernelKind, quad: &QuadratureSpec) -> Result<f64> {
    check_time(t)?;
    let q = t.powf(-0.25);
    Ok(q.powi(m as i32 + 1) * kernel_profile(x * q, y * q, m, kind, quad)?)
}

/// Dense block `∂_x^m kernel(t, x_i, y_j)`, row-major `xs.len() × ys.len()`.
///
/// All entries share one composite Gauss rule sized for the largest scaled
/// coordinate, so the block factors as `A · B` with
/// `A[i,k] = w_k s_k^m e^{-s_k^4} Φ_x^{(m)}(s_k X_i) / π` and `B[k,j] = Φ_y(s_k Z_j)`.
pub fn kernel_block(
    t: f64,
    xs: &[f64],
    ys: &[f64],
    m: usize,
    kind: KernelKind,
    quad: &QuadratureSpec,
) -> Result<Vec<f64>> {
    check_time(t)?;
    check_order(m)?;
    let q = t.powf(-0.25);
    let sx: Vec<f64> = xs.iter().map(|x| x * q).collect();
    let sz: Vec<f64> = ys.iter().map(|y| y * q).collect();
    let omega = sx.iter().chain(&sz).fold(1.0f64, |a, &b| a.max(b));
    let mut out = profile_block(&sx, &sz, m, kind, quad, omega)?;
    let scale = q.powi(m as i32 + 1);
    out.par_iter_mut().for_each(|v| *v *= scale);
    Ok(out)
}

// Wavenumber nodes per chunk; bounds the size of the factor matrices.
const CHUNK: usize = 1024;

fn profile_block(
    sx: &[f64],
    sz: &[f64],
    m: usize,
    kind: KernelKind,
    quad: &QuadratureSpec,
    omega: f64,
) -> Result<Vec<f64>> {
    let panels = quad.panel_count(omega);
    // the fixed rule is held to the same work cap as the adaptive one,
    // scaled by the number of nodes per panel
    if panels > quad.max_subdivisions() * 8 {
        return Err(Error::QuadratureNotConverged {
            abs_tol: quad.abs_tol(),
            max_subdivisions: quad.max_subdivisions(),
            x: sx.iter().fold(0.0f64, |a, &b| a.max(b)),
            z: sz.iter().fold(0.0f64, |a, &b| a.max(b)),
            m,
        });
    }
    let rule = TensorRule::for_frequency(quad, omega);
    let fx = kind.x_factor().coeffs().derivative(m);
    let fy = kind.y_factor().coeffs();
    let (nx, nz) = (sx.len(), sz.len());
    let mut out = vec![0.0; nx * nz];

    for (nodes, weights) in rule.nodes.chunks(CHUNK).zip(rule.weights.chunks(CHUNK)) {
        let nk = nodes.len();
        let amp: Vec<f64> = nodes
            .iter()
            .zip(weights)
            .map(|(&s, &w)| w * s.powi(m as i32) * (-s.powi(4)).exp() / PI)
            .collect();
        // A: nx × nk
        let mut a = vec![0.0; nx * nk];
        a.par_chunks_mut(nk).zip(sx.par_iter()).for_each(|(row, &x)| {
            for ((r, &s), &c) in row.iter_mut().zip(nodes).zip(&amp) {
                *r = c * fx.eval(s * x);
            }
        });
        // B: nk × nz
        let mut b = vec![0.0; nk * nz];
        b.par_chunks_mut(nz).zip(nodes.par_iter()).for_each(|(row, &s)| {
            for (r, &z) in row.iter_mut().zip(sz) {
                *r = fy.eval(s * z);
            }
        });
        // out += A B
        unsafe {
            matrixmultiply::dgemm(
                nx,
                nk,
                nz,
                1.0,
                a.as_ptr(),
                nk as isize,
                1,
                b.as_ptr(),
                nz as isize,
                1,
                1.0,
                out.as_mut_ptr(),
                nz as isize,
                1,
            );
        }
    }
    Ok(out)
}

/// One row `y ↦ ∂_x^m kernel(t, x, y)` sampled on the grid nodes.
pub fn kernel_row(t: f64, x: f64, m: usize, kind: KernelKind, grid: &Grid, quad: &QuadratureSpec) -> Result<Vec<f64>> {
    kernel_block(t, &[x], &grid.nodes(), m, kind, quad)
}

fn row_integral(row: &[f64], grid: &Grid, quad: &QuadratureSpec, g: impl Fn(f64) -> f64) -> Result<f64> {
    let h = grid.spacing();
    let n = row.len();
    let tail = 0.5 * h * (row[n - 2].abs() + row[n - 1].abs());
    let limit = 10.0 * quad.abs_tol();
    if tail > limit {
        return Err(Error::TailNotNegligible {
            contribution: tail,
            limit,
        });
    }
    let inner: f64 = row[1..n - 1].iter().map(|&v| g(v)).sum();
    Ok(h * (inner + 0.5 * (g(row[0]) + g(row[n - 1]))))
}

/// Trapezoid approximation of `∫_0^L |∂_x^m kernel(t, x, y)| dy`.
pub fn kernel_row_l1(t: f64, x: f64, m: usize, kind: KernelKind, grid: &Grid, quad: &QuadratureSpec) -> Result<f64> {
    let row = kernel_row(t, x, m, kind, grid, quad)?;
    row_integral(&row, grid, quad, f64::abs)
}

/// Signed mass `∫_0^L K(t, x, y) dy`.
pub fn kernel_mass(t: f64, x: f64, grid: &Grid, quad: &QuadratureSpec) -> Result<f64> {
    let row = kernel_row(t, x, 0, KernelKind::K, grid, quad)?;
    row_integral(&row, grid, quad, |v| v)
}

/// `∫ |K(t, x, y)| dy` restricted to `|y - x| > delta`.
pub fn kernel_mass_outside(t: f64, x: f64, delta: f64, grid: &Grid, quad: &QuadratureSpec) -> Result<f64> {
    let row = kernel_row(t, x, 0, KernelKind::K, grid, quad)?;
    let masked: Vec<f64> = row
        .iter()
        .enumerate()
        .map(|(j, v)| if (grid.node(j) - x).abs() > delta { *v } else { 0.0 })
        .collect();
    row_integral(&masked, grid, quad, f64::abs)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Fixed-step trapezoid on `[0, s_end]`: independent of the panel code.
    pub(crate) fn trapezoid_oracle(x: f64, z: f64, m: usize, kind: KernelKind, s_end: f64, n: usize) -> f64 {
        let fx = kind.x_factor().coeffs().derivative(m);
        let fy = kind.y_factor().coeffs();
        let h = s_end / n as f64;
        let f = |s: f64| s.powi(m as i32) * (-s.powi(4)).exp() * fx.eval(s * x) * fy.eval(s * z);
        let mut acc = 0.5 * (f(0.0) + f(s_end));
        for i in 1..n {
            acc += f(i as f64 * h);
        }
        acc * h / PI
    }

    #[test]
    fn vanishes_on_the_boundary_row() {
        let q = QuadratureSpec::default();
        for z in [0.0, 0.3, 2.0, 9.0] {
            assert_eq!(kernel_profile(0.0, z, 0, KernelKind::K, &q).unwrap(), 0.0);
        }
        for t in [1e-3, 0.1, 2.0] {
            for y in [0.1, 1.0, 5.0] {
                assert_eq!(kernel_value(t, 0.0, y, 0, KernelKind::K, &q).unwrap(), 0.0);
                assert!(kernel_value(t, 0.0, y, 1, KernelKind::K, &q).unwrap().abs() < 1e-15);
            }
        }
    }

    #[test]
    fn profile_matches_fixed_step_oracle() {
        let q = QuadratureSpec::default();
        let oracle = trapezoid_oracle(1.0, 1.0, 0, KernelKind::K, 6.0, 1_000_000);
        let v = kernel_profile(1.0, 1.0, 0, KernelKind::K, &q).unwrap();
        assert!((v - oracle).abs() < 1e-8, "{v} vs {oracle}");
    }

    #[test]
    fn profile_is_symmetric_for_k() {
        let q = QuadratureSpec::default();
        for (x, z) in [(0.5, 2.0), (3.0, 0.1), (7.5, 6.0), (12.0, 30.0)] {
            let a = kernel_profile(x, z, 0, KernelKind::K, &q).unwrap();
            let b = kernel_profile(z, x, 0, KernelKind::K, &q).unwrap();
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn block_agrees_with_adaptive_entries() {
        let q = QuadratureSpec::default();
        let xs = [0.0, 0.05, 0.4, 1.0, 3.0];
        let ys = [0.0, 0.2, 0.9, 1.1, 2.5, 4.0];
        for kind in KernelKind::ALL {
            for m in [0, 1, 3, 7] {
                for t in [1e-3, 0.5] {
                    let block = kernel_block(t, &xs, &ys, m, kind, &q).unwrap();
                    let scale = t.powf(-(m as f64 + 1.0) / 4.0);
                    for (i, &x) in xs.iter().enumerate() {
                        for (j, &y) in ys.iter().enumerate() {
                            let v = kernel_value(t, x, y, m, kind, &q).unwrap();
                            let d = (block[i * ys.len() + j] - v).abs();
                            assert!(d < 1e-11 * scale, "{kind:?} m={m} t={t} ({x},{y}): {d:e}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn scaling_law_holds_to_rounding() {
        let q = QuadratureSpec::default();
        let lam: f64 = 1.7;
        for m in [0, 2, 5] {
            let a = kernel_value(lam.powi(4) * 0.2, lam * 0.8, lam * 1.3, m, KernelKind::Kb, &q).unwrap();
            let b = kernel_value(0.2, 0.8, 1.3, m, KernelKind::Kb, &q).unwrap();
            assert!((a - lam.powi(-(m as i32 + 1)) * b).abs() < 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn large_arguments_hit_the_work_cap() {
        let q = QuadratureSpec::new(1e-12, 4, 50).unwrap();
        let r = kernel_profile(500.0, 480.0, 0, KernelKind::K, &q);
        assert!(matches!(r, Err(Error::QuadratureNotConverged { .. })));
    }

    #[test]
    fn rejects_excessive_order() {
        let q = QuadratureSpec::default();
        assert!(kernel_profile(1.0, 1.0, 8, KernelKind::K, &q).is_err());
        assert!(kernel_value(0.0, 1.0, 1.0, 0, KernelKind::K, &q).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in KernelKind::ALL {
            assert_eq!(k.name().parse::<KernelKind>().unwrap(), k);
        }
    }
}
