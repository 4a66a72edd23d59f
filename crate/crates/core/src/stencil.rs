//! Finite-difference weights on uniform grids.
//!
//! Weights come from Fornberg's recursion, so any derivative order and any
//! node layout (centered, shifted, fully one-sided) is available from the
//! same routine.

/// Weights `w` such that `f^(order)(z) ≈ Σ w_j f(x_j)`.
///
/// Fornberg, "Generation of finite difference formulas on arbitrarily spaced
/// grids", Math. Comp. 51 (1988).
pub fn fornberg_weights(z: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    assert!(n > order, "need more than `order` nodes");
    // c[j][k]: weight of node j for the k-th derivative
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Derivative operator of a fixed order on a uniform grid with `n` nodes.
///
/// Interior nodes use a centered stencil of formal order `accuracy`; nodes
/// whose centered stencil would leave the grid use a shifted (one-sided)
/// stencil with one extra point.
#[derive(Debug, Clone)]
pub struct DerivativeStencil {
    order: usize,
    n: usize,
    inv_h_pow: f64,
    half: usize,
    interior: Vec<f64>,
    // per boundary node: (first node index, weights)
    left: Vec<(usize, Vec<f64>)>,
    right: Vec<(usize, Vec<f64>)>,
}

impl DerivativeStencil {
    pub fn new(order: usize, accuracy: usize, n: usize, h: f64) -> Self {
        assert!(order >= 1 && accuracy >= 2 && accuracy % 2 == 0);
        let centered = 2 * order.div_ceil(2) - 1 + accuracy;
        let half = centered / 2;
        let one_sided = order + accuracy;
        assert!(n >= one_sided.max(centered), "grid too small for stencil");

        let offsets: Vec<f64> = (0..centered).map(|j| j as f64 - half as f64).collect();
        let interior = fornberg_weights(0.0, &offsets, order);

        let mut left = Vec::with_capacity(half);
        let mut right = Vec::with_capacity(half);
        for i in 0..half {
            let nodes: Vec<f64> = (0..one_sided).map(|j| j as f64).collect();
            left.push((0, fornberg_weights(i as f64, &nodes, order)));
            let start = n - one_sided;
            let z = (n - 1 - i - start) as f64;
            right.push((start, fornberg_weights(z, &nodes, order)));
        }

        Self {
            order,
            n,
            inv_h_pow: h.powi(-(order as i32)),
            half,
            interior,
            left,
            right,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Derivative at a single node.
    pub fn at(&self, values: &[f64], i: usize) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        let (start, w): (usize, &[f64]) = if i < self.half {
            (self.left[i].0, &self.left[i].1)
        } else if i + self.half >= self.n {
            let k = self.n - 1 - i;
            (self.right[k].0, &self.right[k].1)
        } else {
            (i - self.half, &self.interior)
        };
        let s: f64 = w.iter().zip(&values[start..start + w.len()]).map(|(w, v)| w * v).sum();
        s * self.inv_h_pow
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.at(values, i)).collect()
    }

    /// Number of nodes at each end that use a one-sided stencil.
    pub fn boundary_width(&self) -> usize {
        self.half
    }
}

/// One-sided derivative at node 0 using `order + accuracy` nodes.
pub fn one_sided_at_origin(values: &[f64], h: f64, order: usize, accuracy: usize) -> f64 {
    let npts = order + accuracy;
    assert!(values.len() >= npts);
    let nodes: Vec<f64> = (0..npts).map(|j| j as f64).collect();
    let w = fornberg_weights(0.0, &nodes, order);
    let s: f64 = w.iter().zip(values).map(|(w, v)| w * v).sum();
    s * h.powi(-(order as i32))
}
