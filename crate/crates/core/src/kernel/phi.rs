use serde::{Deserialize, Serialize};

/// The four boundary-adapted eigenfunction profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhiKind {
    /// `e^{-r} + sin r - cos r`
    Main,
    /// `e^{-r} - sin r - cos r`
    Mod1,
    /// `e^{-r} - sin r + cos r`
    Mod2,
    /// `e^{-r} + sin r + cos r`
    Mod3,
}

impl PhiKind {
    pub const ALL: [PhiKind; 4] = [PhiKind::Main, PhiKind::Mod1, PhiKind::Mod2, PhiKind::Mod3];

    pub fn coeffs(self) -> PhiCoeffs {
        let (sin, cos) = match self {
            PhiKind::Main => (1.0, -1.0),
            PhiKind::Mod1 => (-1.0, -1.0),
            PhiKind::Mod2 => (-1.0, 1.0),
            PhiKind::Mod3 => (1.0, 1.0),
        };
        PhiCoeffs { exp: 1.0, sin, cos }
    }
}

/// `exp·e^{-r} + sin·sin r + cos·cos r`; closed under differentiation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiCoeffs {
    pub exp: f64,
    pub sin: f64,
    pub cos: f64,
}

impl PhiCoeffs {
    pub fn derivative(self, order: usize) -> Self {
        let mut c = self;
        for _ in 0..order {
            c = PhiCoeffs {
                exp: -c.exp,
                sin: -c.cos,
                cos: c.sin,
            };
        }
        c
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        let (s, c) = r.sin_cos();
        self.exp * (-r).exp() + self.sin * s + self.cos * c
    }
}

/// `derivOrder`-th derivative of the selected profile at `r ≥ 0`.
pub fn phi_eval(kind: PhiKind, deriv_order: usize, r: f64) -> f64 {
    debug_assert!(deriv_order <= 8);
    kind.coeffs().derivative(deriv_order).eval(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_values() {
        assert_eq!(phi_eval(PhiKind::Main, 0, 0.0), 0.0);
        assert_eq!(phi_eval(PhiKind::Main, 1, 0.0), 0.0);
        assert_eq!(phi_eval(PhiKind::Mod2, 0, 0.0), 2.0);
    }

    #[test]
    fn derivative_chain_closes_on_the_family() {
        // Φ' = -Φ1, Φ1' = -Φ2, Φ2' = -Φ3, Φ3' = -Φ
        for r in [0.5, 1.0, 2.0, 7.3] {
            assert!((phi_eval(PhiKind::Main, 1, r) + phi_eval(PhiKind::Mod1, 0, r)).abs() < 1e-15);
            assert!((phi_eval(PhiKind::Mod1, 1, r) + phi_eval(PhiKind::Mod2, 0, r)).abs() < 1e-15);
            assert!((phi_eval(PhiKind::Mod2, 1, r) + phi_eval(PhiKind::Mod3, 0, r)).abs() < 1e-15);
            assert!((phi_eval(PhiKind::Mod3, 1, r) + phi_eval(PhiKind::Main, 0, r)).abs() < 1e-15);
            assert!((phi_eval(PhiKind::Main, 4, r) - phi_eval(PhiKind::Main, 0, r)).abs() < 1e-15);
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        let h = 1e-4;
        for kind in PhiKind::ALL {
            for d in 0..8 {
                for r in [0.3, 1.7, 4.0] {
                    let fd = (phi_eval(kind, d, r + h) - phi_eval(kind, d, r - h)) / (2.0 * h);
                    assert!((fd - phi_eval(kind, d + 1, r)).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn bounded_by_three() {
        for kind in PhiKind::ALL {
            for i in 0..20_000 {
                let r = i as f64 * 1e-3;
                assert!(phi_eval(kind, 0, r).abs() <= 3.0);
            }
        }
    }
}
