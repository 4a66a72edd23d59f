//! Blow-up functionals, the dissipation identity, norms, boundary
//! compatibility and the 2-D ansatz fields.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Profile;

/// Default exponent of `G = -E / F^β`.
pub const DEFAULT_BETA: f64 = 1.2;

/// Upper end of the admissible `β` interval.
pub const BETA_MAX: f64 = 93.0 / 64.0;

/// `F` at or below this is treated as zero when forming `G`.
pub const F_FLOOR: f64 = 1e-300;

/// Trace orders that must vanish for admissible data.
pub const COMPATIBILITY_ORDERS: [usize; 4] = [0, 1, 4, 5];

/// Functionals and rates evaluated at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    pub f: f64,
    pub e: f64,
    pub beta: f64,
    /// `-E/F^β`, absent when `F` is degenerate.
    pub g: Option<f64>,
    pub dissipation: f64,
    /// Riccati bound on the remaining existence time, present only when `E < 0`.
    pub riccati_bound: Option<f64>,
    pub sup: f64,
}

impl EnergyReport {
    pub fn evaluate(t: f64, a: &Profile, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let f = functional_f(a);
        let e = functional_e(a);
        let g = (f > F_FLOOR).then(|| -e / f.powf(beta));
        let riccati_bound = match g {
            Some(g) if g > 0.0 => Some(riccati_blowup_bound(f, g, beta)?),
            _ => None,
        };
        Ok(Self {
            t,
            f,
            e,
            beta,
            g,
            dissipation: dissipation_rate(a),
            riccati_bound,
            sup: a.sup_norm(),
        })
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 1.0 && beta < BETA_MAX {
        Ok(())
    } else {
        Err(Error::InvalidBeta(beta))
    }
}

/// `∫ a²`.
pub fn functional_f(a: &Profile) -> f64 {
    a.integrate_with(|v| v * v)
}

/// `∫ (½ a_yy² - a³/12)`.
pub fn functional_e(a: &Profile) -> f64 {
    let ayy = a.derivative(2);
    let dens: Vec<f64> = ayy
        .values()
        .iter()
        .zip(a.values())
        .map(|(d, v)| 0.5 * d * d - v * v * v / 12.0)
        .collect();
    trapezoid(a, &dens)
}

/// `-E(a) / F(a)^β`.
pub fn functional_g(a: &Profile, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let f = functional_f(a);
    if f <= F_FLOOR {
        return Err(Error::DegenerateF {
            value: f,
            floor: F_FLOOR,
        });
    }
    Ok(-functional_e(a) / f.powf(beta))
}

/// `-∫ ((a_yyyy - a²/4)² + 13/48 a⁴)`, the rate of change of `E` along the flow.
pub fn dissipation_rate(a: &Profile) -> f64 {
    let a4 = a.derivative(4);
    let dens: Vec<f64> = a4
        .values()
        .iter()
        .zip(a.values())
        .map(|(d, v)| {
            let r = d - 0.25 * v * v;
            r * r + 13.0 / 48.0 * v.powi(4)
        })
        .collect();
    -trapezoid(a, &dens)
}

/// Time by which `F` must diverge under `dF/dt ≥ 6 G0 F^β`.
pub fn riccati_blowup_bound(f0: f64, g0: f64, beta: f64) -> Result<f64> {
    if beta.is_nan() || beta <= 1.0 || !beta.is_finite() {
        return Err(Error::InvalidBeta(beta));
    }
    if !(f0 > 0.0 && g0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Riccati bound needs F0 > 0 and G0 > 0, got F0={f0:e}, G0={g0:e}"
        )));
    }
    Ok(f0.powf(1.0 - beta) / (6.0 * g0 * (beta - 1.0)))
}

/// `‖a‖_∞ + ‖a_y‖_∞ + Σ_{k≤4} ‖∂^k a‖_1`.
pub fn xt_norm(a: &Profile) -> f64 {
    let ay = a.derivative(1);
    let mut total = a.sup_norm() + ay.sup_norm() + a.l1_norm() + ay.l1_norm();
    for k in 2..=4 {
        total += a.derivative(k).l1_norm();
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub passed: bool,
    pub tol: f64,
    /// `(order, trace)` for each checked order.
    pub residuals: Vec<(usize, f64)>,
}

impl CompatibilityReport {
    pub fn first_violation(&self) -> Option<(usize, f64)> {
        self.residuals.iter().copied().find(|(_, r)| r.abs() > self.tol)
    }

    pub fn into_result(self) -> Result<Self> {
        match self.first_violation() {
            Some((order, trace)) => Err(Error::CompatibilityViolated {
                order,
                trace,
                tol: self.tol,
            }),
            None => Ok(self),
        }
    }
}

/// One-sided boundary traces of orders 0, 1, 4, 5 against `tol`.
pub fn compatibility_check(a0: &Profile, tol: f64) -> CompatibilityReport {
    let residuals: Vec<(usize, f64)> = COMPATIBILITY_ORDERS.iter().map(|&q| (q, a0.trace(q))).collect();
    let passed = residuals.iter().all(|(_, r)| r.abs() <= tol);
    CompatibilityReport { passed, tol, residuals }
}

/// `u = -x a(y)` and `v = ∫_0^y a`, sampled on `xs × grid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field2d {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `u[i][j]` at `(x_i, y_j)`.
    pub u: Vec<Vec<f64>>,
    /// `v[j]`, independent of `x`.
    pub v: Vec<f64>,
}

pub fn reconstruct_2d(a: &Profile, xs: &[f64]) -> Field2d {
    let u = xs
        .iter()
        .map(|&x| a.values().iter().map(|v| -x * v).collect())
        .collect();
    Field2d {
        x: xs.to_vec(),
        y: a.grid().nodes(),
        u,
        v: cumulative_trapezoid(a),
    }
}

/// Running trapezoid integral from node 0.
pub(crate) fn cumulative_trapezoid(a: &Profile) -> Vec<f64> {
    let h = a.grid().spacing();
    let v = a.values();
    let mut out = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in v.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

fn trapezoid(grid_of: &Profile, dens: &[f64]) -> f64 {
    let n = dens.len();
    let inner: f64 = dens[1..n - 1].iter().sum();
    grid_of.grid().spacing() * (inner + 0.5 * (dens[0] + dens[n - 1]))
}
