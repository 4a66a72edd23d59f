//! Dense grid realizations of `∂_x^m S(t)` and checks of the semigroup's
//! defining properties.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, Profile};
use crate::kernel::{kernel_block, KernelKind, QuadratureSpec, MAX_DERIVATIVE};

/// Below this time the kernel is too concentrated for practical grids.
pub const T_MIN: f64 = 1e-6;

/// `matrix[i*N + j] = ∂_x^m kernel(t, y_i, y_j) · w_j` with trapezoid weights `w_j`.
#[derive(Debug, Clone)]
pub struct KernelOperator {
    grid: Grid,
    t: f64,
    m: usize,
    kind: KernelKind,
    matrix: Vec<f64>,
}

impl KernelOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.grid.points() + j]
    }

    /// Kernel value at the node pair, with the quadrature weight divided out.
    pub fn kernel_entry(&self, i: usize, j: usize) -> f64 {
        let n = self.grid.points();
        let h = self.grid.spacing();
        let w = if j == 0 || j == n - 1 { 0.5 * h } else { h };
        self.entry(i, j) / w
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.grid.points();
        &self.matrix[i * n..(i + 1) * n]
    }

    pub fn apply(&self, f: &Profile) -> Result<Profile> {
        self.grid.ensure_same(f.grid())?;
        let n = self.grid.points();
        let fv = f.values();
        let out: Vec<f64> = self
            .matrix
            .par_chunks(n)
            .map(|row| row.iter().zip(fv).map(|(a, b)| a * b).sum())
            .collect();
        Ok(Profile::from_parts(self.grid, out))
    }
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < T_MIN {
        return Err(Error::TimeTooSmall { t, t_min: T_MIN });
    }
    Ok(())
}

/// Assemble the dense operator for `∂_x^m` of the selected kernel at time `t`.
pub fn build_operator(
    grid: &Grid,
    t: f64,
    m: usize,
    kind: KernelKind,
    quad: &QuadratureSpec,
) -> Result<KernelOperator> {
    check_time(t)?;
    if m > MAX_DERIVATIVE {
        return Err(Error::InvalidArgument(format!(
            "derivative order {m} exceeds {MAX_DERIVATIVE}"
        )));
    }
    let nodes = grid.nodes();
    let mut matrix = kernel_block(t, &nodes, &nodes, m, kind, quad)?;
    let w = grid.trapezoid_weights();
    let n = grid.points();
    matrix.par_chunks_mut(n).for_each(|row| {
        for (v, wj) in row.iter_mut().zip(&w) {
            *v *= wj;
        }
    });
    Ok(KernelOperator {
        grid: *grid,
        t,
        m,
        kind,
        matrix,
    })
}

/// `op · f`.
pub fn apply(op: &KernelOperator, f: &Profile) -> Result<Profile> {
    op.apply(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct OperatorKey {
    points: usize,
    length: u64,
    t: u64,
    m: usize,
    kind: KernelKind,
}

/// Operators keyed by `(N, L, t, m, kind)`, built once and shared.
#[derive(Debug, Default)]
pub struct OperatorCache {
    quad: QuadratureSpec,
    map: HashMap<OperatorKey, Arc<KernelOperator>>,
}

impl OperatorCache {
    pub fn new(quad: QuadratureSpec) -> Self {
        Self {
            quad,
            map: HashMap::new(),
        }
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quad
    }

    pub fn get(&mut self, grid: &Grid, t: f64, m: usize, kind: KernelKind) -> Result<Arc<KernelOperator>> {
        let key = OperatorKey {
            points: grid.points(),
            length: grid.length().to_bits(),
            t: t.to_bits(),
            m,
            kind,
        };
        if let Some(op) = self.map.get(&key) {
            return Ok(Arc::clone(op));
        }
        let op = Arc::new(build_operator(grid, t, m, kind, &self.quad)?);
        self.map.insert(key, Arc::clone(&op));
        Ok(op)
    }

    pub fn semigroup(&mut self, grid: &Grid, t: f64) -> Result<Arc<KernelOperator>> {
        self.get(grid, t, 0, KernelKind::K)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Boundary derivative orders that must vanish for the integration-by-parts
/// representation of `∂_x^n S(t) f`: `∂^{4j} f(0)` for `4j < n` and
/// `∂^{4j+1} f(0)` for `4j + 1 < n`.
pub fn ibp_required_traces(total_order: usize) -> Vec<usize> {
    (0..total_order).filter(|q| q % 4 == 0 || q % 4 == 1).collect()
}

/// Kernel that carries `∂_x^n S(t)` after moving all derivatives onto `f`.
///
/// `∂_x K(t,x,y) = ∂_y K_c(t,x,y)` and `∂_x^3 K = ∂_y^3 K_a`, so odd orders
/// `≡ 1` pair with `Kc` and `≡ 3` with `Ka`.
pub fn ibp_kernel(total_order: usize) -> KernelKind {
    match total_order % 4 {
        0 => KernelKind::K,
        1 => KernelKind::Kc,
        2 => KernelKind::Kb,
        _ => KernelKind::Ka,
    }
}

/// `∂_x^n S(t) f = (-1)^n ∫ K_*(t,x,y) ∂_y^n f(y) dy`.
///
/// `f_derivs[q]` holds `∂^q f` on the grid for `q = 0..=n`; the boundary
/// traces listed by [`ibp_required_traces`] are read from node 0 of those
/// profiles and must not exceed `compat_tol`.
pub fn apply_ibp(
    grid: &Grid,
    t: f64,
    total_order: usize,
    f_derivs: &[Profile],
    quad: &QuadratureSpec,
    compat_tol: f64,
) -> Result<Profile> {
    if f_derivs.len() <= total_order {
        return Err(Error::InvalidArgument(format!(
            "need derivatives up to order {total_order}, got {}",
            f_derivs.len()
        )));
    }
    for p in f_derivs {
        grid.ensure_same(p.grid())?;
    }
    for q in ibp_required_traces(total_order) {
        let trace = f_derivs[q].values()[0];
        if trace.abs() > compat_tol {
            return Err(Error::CompatibilityViolated {
                order: q,
                trace,
                tol: compat_tol,
            });
        }
    }
    let op = build_operator(grid, t, 0, ibp_kernel(total_order), quad)?;
    let out = op.apply(&f_derivs[total_order])?;
    Ok(if total_order % 2 == 1 { out.scaled(-1.0) } else { out })
}

/// `‖S(τ)(S(s)f) − S(τ+s)f‖_sup` on the profile's grid.
///
/// For `s < T_MIN` the inner operator is the identity (the `s → 0⁺` limit)
/// and the discrepancy is zero by construction.
pub fn verify_semigroup(f: &Profile, tau: f64, s: f64, quad: &QuadratureSpec) -> Result<f64> {
    if s < T_MIN {
        return Ok(0.0);
    }
    let grid = f.grid();
    let s_tau = build_operator(grid, tau, 0, KernelKind::K, quad)?;
    let s_s = build_operator(grid, s, 0, KernelKind::K, quad)?;
    let s_sum = build_operator(grid, tau + s, 0, KernelKind::K, quad)?;
    let composed = s_tau.apply(&s_s.apply(f)?)?;
    let direct = s_sum.apply(f)?;
    composed.sup_distance(&direct)
}

/// Least-squares slope of `log ‖∂_x^m S(t) f‖_sup` against `log t`.
pub fn smoothing_rate_fit(f: &Profile, m: usize, t_range: &[f64], quad: &QuadratureSpec) -> Result<f64> {
    if t_range.len() < 2 {
        return Err(Error::InvalidArgument("need at least two times to fit a slope".into()));
    }
    let mut xs = Vec::with_capacity(t_range.len());
    let mut ys = Vec::with_capacity(t_range.len());
    for &t in t_range {
        let op = build_operator(f.grid(), t, m, KernelKind::K, quad)?;
        let sup = op.apply(f)?.sup_norm();
        xs.push(t.ln());
        ys.push(sup.ln());
    }
    Ok(least_squares_slope(&xs, &ys))
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Log-spaced times from `t0` to `t1` inclusive.
pub fn log_spaced(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2);
    let (a, b) = (t0.ln(), t1.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datum::bump;

    fn small_grid() -> Grid {
        Grid::new(20.0, 256).unwrap()
    }

    #[test]
    fn linearity() {
        let g = small_grid();
        let q = QuadratureSpec::default();
        let op = build_operator(&g, 0.05, 0, KernelKind::K, &q).unwrap();
        let f = bump(&g, 1.0, 10.0, 3.0);
        let h = g.sample(|y| (-(y - 8.0).powi(2)).exp() * y * y);
        let zero = op.apply(&g.zeros()).unwrap();
        assert!(zero.values().iter().all(|v| *v == 0.0));
        let lhs = op.apply(&f.combine(2.0, &h, -0.5).unwrap()).unwrap();
        let rhs = op
            .apply(&f)
            .unwrap()
            .combine(2.0, &op.apply(&h).unwrap(), -0.5)
            .unwrap();
        assert!(lhs.sup_distance(&rhs).unwrap() < 1e-13);
    }

    #[test]
    fn boundary_row_is_zero_and_matrix_symmetric() {
        let g = small_grid();
        let q = QuadratureSpec::default();
        let op = build_operator(&g, 0.1, 0, KernelKind::K, &q).unwrap();
        assert!(op.row(0).iter().all(|v| *v == 0.0));
        let d1 = build_operator(&g, 0.1, 1, KernelKind::K, &q).unwrap();
        assert!(d1.row(0).iter().all(|v| v.abs() < 1e-14));
        let n = g.points();
        let mut asym: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                asym = asym.max((op.kernel_entry(i, j) - op.kernel_entry(j, i)).abs());
            }
        }
        assert!(asym < 1e-12, "asymmetry {asym:e}");
    }

    #[test]
    fn rejects_small_times_and_mismatched_grids() {
        let g = small_grid();
        let q = QuadratureSpec::default();
        assert!(matches!(
            build_operator(&g, 1e-7, 0, KernelKind::K, &q),
            Err(Error::TimeTooSmall { .. })
        ));
        let op = build_operator(&g, 0.1, 0, KernelKind::K, &q).unwrap();
        let other = Grid::new(20.0, 300).unwrap().zeros();
        assert!(matches!(op.apply(&other), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn degenerate_semigroup_step_is_zero() {
        let g = small_grid();
        let f = bump(&g, 1.0, 10.0, 3.0);
        let d = verify_semigroup(&f, 0.1, 0.0, &QuadratureSpec::default()).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn ibp_trace_ladder() {
        assert_eq!(ibp_required_traces(1), vec![0]);
        assert_eq!(ibp_required_traces(2), vec![0, 1]);
        assert_eq!(ibp_required_traces(4), vec![0, 1]);
        assert_eq!(ibp_required_traces(6), vec![0, 1, 4, 5]);
    }

    #[test]
    fn ibp_of_zero_is_zero_and_checks_traces() {
        let g = small_grid();
        let q = QuadratureSpec::default();
        let zeros = vec![g.zeros(); 3];
        let out = apply_ibp(&g, 0.1, 2, &zeros, &q, 1e-10).unwrap();
        assert!(out.values().iter().all(|v| *v == 0.0));
        let mut bad = zeros.clone();
        bad[1] = g.sample(|_| 1.0);
        assert!(matches!(
            apply_ibp(&g, 0.1, 2, &bad, &q, 1e-10),
            Err(Error::CompatibilityViolated { order: 1, .. })
        ));
    }

    #[test]
    fn slope_of_exact_power_law() {
        let xs: Vec<f64> = (1..6).map(|i| (i as f64).ln()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| -0.25 * x + 3.0).collect();
        assert!((least_squares_slope(&xs, &ys) + 0.25).abs() < 1e-14);
    }
}
