//! Smooth start-up ramp used to switch on body forces.

/// Coefficients of `R(t) = 35 t^4 - 84 t^5 + 70 t^6 - 20 t^7` on `[0, 1]`.
const COEFFS: [(i32, f64); 4] = [(4, 35.0), (5, -84.0), (6, 70.0), (7, -20.0)];

/// `R(t)`: 0 for `t <= 0`, 1 for `t >= 1`, with three continuous
/// derivatives at both ends.
pub fn ramp(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        (35.0 + (-84.0 + (70.0 - 20.0 * t) * t) * t) * t.powi(4)
    }
}

/// `d^k R / dt^k` for `k <= 7`.
pub fn ramp_derivative(t: f64, k: u32) -> f64 {
    if k == 0 {
        return ramp(t);
    }
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    COEFFS
        .iter()
        .map(|&(p, c)| {
            if k as i32 > p {
                return 0.0;
            }
            let falling: f64 = (0..k as i32).map(|i| (p - i) as f64).product();
            c * falling * t.powi(p - k as i32)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_midpoint() {
        assert_eq!(ramp(0.0), 0.0);
        assert_eq!(ramp(1.0), 1.0);
        assert_eq!(ramp(2.0), 1.0);
        assert!((ramp(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn derivatives_vanish_at_ends() {
        for k in 1..=3 {
            for t in [1e-9, 1.0 - 1e-9] {
                assert!(ramp_derivative(t, k).abs() < 1e-6, "k={k} t={t}");
            }
        }
    }

    #[test]
    fn derivative_matches_closed_form() {
        // R'(t) = 140 t^3 (1 - t)^3
        for t in [0.1_f64, 0.37, 0.8] {
            let d = 140.0 * t * t * t * (1.0 - t).powi(3);
            assert!((ramp_derivative(t, 1) - d).abs() < 1e-12);
        }
    }
}
