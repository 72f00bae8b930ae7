/// Half-width of the cube on which the cutoff equals one.
pub const CUTOFF_PLATEAU: f64 = 0.01;
/// Half-width of the cube outside which the cutoff vanishes.
pub const CUTOFF_SUPPORT: f64 = 0.02;

fn bump(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth step from 0 at `x ≤ 0` to 1 at `x ≥ 1`.
fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = bump(x);
        a / (a + bump(1.0 - x))
    }
}

/// One-dimensional profile: 1 on `|u| ≤ 1/100`, 0 on `|u| ≥ 1/50`, smooth
/// and monotone in between.
pub fn cutoff_profile(u: f64) -> f64 {
    let r = u.abs();
    1.0 - smooth_step((r - CUTOFF_PLATEAU) / (CUTOFF_SUPPORT - CUTOFF_PLATEAU))
}

/// The tensor-product cutoff dilated by `t`, evaluated at `ξ`: `χ̂(tξ)`.
pub fn cutoff_ft(xi: &[f64], t: f64) -> f64 {
    debug_assert!(t > 0.0);
    xi.iter().map(|&x| cutoff_profile(t * x)).product()
}

/// The cutoff as a value with its dilation attached.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cutoff {
    pub dilation: f64,
}

impl Cutoff {
    pub fn new(dilation: f64) -> Self {
        assert!(dilation > 0.0, "dilation must be positive");
        Self { dilation }
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        cutoff_ft(xi, self.dilation)
    }

    /// Half-width of the support cube.
    pub fn radius(&self) -> f64 {
        CUTOFF_SUPPORT / self.dilation
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn plateau_and_support() {
        assert_eq!(cutoff_ft(&[0.0, 0.0], 1.0), 1.0);
        assert_eq!(cutoff_ft(&[0.01, -0.01], 1.0), 1.0);
        assert_eq!(cutoff_ft(&[1.0 / 40.0], 1.0), 0.0);
        assert_eq!(cutoff_ft(&[0.0, 0.02], 1.0), 0.0);
        let mid = cutoff_profile(0.015);
        assert!((mid - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn range_and_monotone(u in 0.0f64..0.05, v in 0.0f64..0.05) {
            let (a, b) = (cutoff_profile(u), cutoff_profile(v));
            prop_assert!((0.0..=1.0).contains(&a));
            if u <= v {
                prop_assert!(a >= b);
            }
            prop_assert_eq!(cutoff_profile(-u), a);
        }

        #[test]
        fn dilation_identity(x in -0.1f64..0.1, y in -0.1f64..0.1, t in 0.1f64..100.0) {
            prop_assert_eq!(cutoff_ft(&[x, y], t), cutoff_ft(&[t * x, t * y], 1.0));
        }
    }
}
