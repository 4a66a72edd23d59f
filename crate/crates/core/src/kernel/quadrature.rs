//! Gauss–Legendre rules and the adaptive panel integrator used for the
//! wavenumber integrals.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation, panel sizing and error control for the scaled-wavenumber
/// integral `∫_0^∞ s^m e^{-s^4} (...) ds`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    s_max: f64,
    panels_per_wavelength: usize,
    abs_tol: f64,
    max_subdivisions: usize,
}

impl QuadratureSpec {
    /// `s_max` chosen as `ln(1/abs_tol)^{1/4} + 1`.
    pub fn new(abs_tol: f64, panels_per_wavelength: usize, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0 && abs_tol < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "abs_tol must lie in (0, 1), got {abs_tol}"
            )));
        }
        let s_max = (1.0 / abs_tol).ln().powf(0.25) + 1.0;
        Self::with_truncation(s_max, panels_per_wavelength, abs_tol, max_subdivisions)
    }

    pub fn with_truncation(
        s_max: f64,
        panels_per_wavelength: usize,
        abs_tol: f64,
        max_subdivisions: usize,
    ) -> Result<Self> {
        if !(abs_tol > 0.0 && abs_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "abs_tol must be positive, got {abs_tol}"
            )));
        }
        if !(s_max > 0.0 && s_max.is_finite()) || (-s_max.powi(4)).exp() > abs_tol {
            return Err(Error::InvalidArgument(format!(
                "s_max={s_max} leaves a truncated tail e^(-s_max^4) above abs_tol={abs_tol:e}"
            )));
        }
        if panels_per_wavelength < 4 {
            return Err(Error::InvalidArgument(format!(
                "panels_per_wavelength must be at least 4, got {panels_per_wavelength}"
            )));
        }
        if max_subdivisions == 0 {
            return Err(Error::InvalidArgument("max_subdivisions must be positive".into()));
        }
        Ok(Self {
            s_max,
            panels_per_wavelength,
            abs_tol,
            max_subdivisions,
        })
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn panels_per_wavelength(&self) -> usize {
        self.panels_per_wavelength
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn max_subdivisions(&self) -> usize {
        self.max_subdivisions
    }

    /// Number of equal panels on `[0, s_max]` for oscillation frequency `omega`.
    pub fn panel_count(&self, omega: f64) -> usize {
        let period = 2.0 * PI / omega.max(1.0);
        let width = period / self.panels_per_wavelength as f64;
        (self.s_max / width).ceil().max(1.0) as usize
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::new(1e-12, 4, 20_000).expect("default quadrature spec is valid")
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// `∫_a^b f` with this rule.
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        r * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(c + r * x))
            .sum::<f64>()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub(crate) const COARSE_ORDER: usize = 10;
pub(crate) const FINE_ORDER: usize = 20;
pub(crate) const TENSOR_ORDER: usize = 6;
const MIN_TENSOR_FREQUENCY: f64 = 8.0;

pub(crate) fn gauss(order: usize) -> &'static GaussLegendre {
    static COARSE: OnceLock<GaussLegendre> = OnceLock::new();
    static FINE: OnceLock<GaussLegendre> = OnceLock::new();
    static TENSOR: OnceLock<GaussLegendre> = OnceLock::new();
    match order {
        COARSE_ORDER => COARSE.get_or_init(|| GaussLegendre::new(COARSE_ORDER)),
        FINE_ORDER => FINE.get_or_init(|| GaussLegendre::new(FINE_ORDER)),
        TENSOR_ORDER => TENSOR.get_or_init(|| GaussLegendre::new(TENSOR_ORDER)),
        _ => unreachable!("no cached Gauss rule of order {order}"),
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

/// Adaptive panel quadrature on `[0, s_max]`.
///
/// The interval is first cut into equal panels sized for `omega`; each panel
/// is accepted when the 10- and 20-point Gauss–Legendre values agree within
/// its share of `abs_tol`, and bisected otherwise. `Err(subdivisions)` is
/// returned when the subdivision budget runs out.
pub fn integrate_adaptive(
    quad: &QuadratureSpec,
    omega: f64,
    f: impl Fn(f64) -> f64,
) -> std::result::Result<AdaptiveResult, usize> {
    let coarse = gauss(COARSE_ORDER);
    let fine = gauss(FINE_ORDER);
    let n0 = quad.panel_count(omega);
    if n0 > quad.max_subdivisions {
        return Err(n0);
    }
    let width = quad.s_max / n0 as f64;
    let budget_density = quad.abs_tol / quad.s_max;

    let mut value = 0.0;
    let mut error_estimate = 0.0;
    let mut subdivisions = 0usize;
    let mut stack: Vec<(f64, f64)> = (0..n0)
        .rev()
        .map(|i| (i as f64 * width, (i + 1) as f64 * width))
        .collect();
    while let Some((a, b)) = stack.pop() {
        let lo = coarse.integrate(a, b, &f);
        let hi = fine.integrate(a, b, &f);
        let err = (hi - lo).abs();
        if err <= budget_density * (b - a) || b - a < 1e-14 * quad.s_max {
            value += hi;
            error_estimate += err;
        } else {
            subdivisions += 1;
            if subdivisions > quad.max_subdivisions {
                return Err(subdivisions);
            }
            let mid = 0.5 * (a + b);
            stack.push((mid, b));
            stack.push((a, mid));
        }
    }
    Ok(AdaptiveResult {
        value,
        error_estimate,
        subdivisions,
    })
}

/// Fixed composite Gauss–Legendre rule on `[0, s_max]`, used when one set of
/// wavenumber nodes serves a whole block of kernel entries.
#[derive(Debug, Clone)]
pub struct TensorRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TensorRule {
    pub fn for_frequency(quad: &QuadratureSpec, omega: f64) -> Self {
        let gl = gauss(TENSOR_ORDER);
        // the e^{-s^4} envelope alone needs a few panels per unit of s
        let panels = quad.panel_count(omega.max(MIN_TENSOR_FREQUENCY));
        let width = quad.s_max / panels as f64;
        let mut nodes = Vec::with_capacity(panels * TENSOR_ORDER);
        let mut weights = Vec::with_capacity(panels * TENSOR_ORDER);
        for p in 0..panels {
            let c = (p as f64 + 0.5) * width;
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                nodes.push(c + 0.5 * width * x);
                weights.push(0.5 * width * w);
            }
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
