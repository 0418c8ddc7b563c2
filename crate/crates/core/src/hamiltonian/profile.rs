//! One-dimensional profiles: the compact bump `f_B` and a C^inf smoothstep.

use crate::error::{domain, Result};

/// Exponents below this are treated as an exact zero.
pub const EXP_FLOOR: f64 = -700.0;

/// `f_B(x) = exp(-B^2 / (x^2 - B)^2)` for `|x| < sqrt(B)`, zero otherwise.
pub fn eval_bump_profile(b: f64, x: f64) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() {
        return domain(format!("bump parameter B must be positive, got {b}"));
    }
    Ok(phi(b, x * x).0)
}

/// `phi(s) = exp(-B^2 / (s - B)^2)` and its first two derivatives in `s`.
///
/// Used with `s = |p|^2`, so that `f_B(|p|) = phi(|p|^2)`.
pub fn phi(b: f64, s: f64) -> (f64, f64, f64) {
    let d = s - b;
    if d >= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let b2 = b * b;
    let expo = -b2 / (d * d);
    if expo < EXP_FLOOR {
        return (0.0, 0.0, 0.0);
    }
    let v = expo.exp();
    let d3 = d * d * d;
    let k = 2.0 * b2 / d3;
    let d1 = v * k;
    let d2 = v * (k * k - 6.0 * b2 / (d3 * d));
    (v, d1, d2)
}

fn f_exp(u: f64) -> (f64, f64, f64) {
    if u <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let v = (-1.0 / u).exp();
    let u2 = u * u;
    (v, v / u2, v * (1.0 - 2.0 * u) / (u2 * u2))
}

/// `S(u) = f(u) / (f(u) + f(1 - u))` with `f(u) = exp(-1/u)`, plus `S'` and `S''`.
///
/// Exactly 0 on `u <= 0` and exactly 1 on `u >= 1`, with vanishing derivatives.
pub fn smoothstep(u: f64) -> (f64, f64, f64) {
    if u <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if u >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let (a, a1, a2) = f_exp(u);
    let (b, fb1, fb2) = f_exp(1.0 - u);
    // derivatives of b(u) = f(1-u)
    let b1 = -fb1;
    let b2 = fb2;
    let den = a + b;
    let num = a1 * b - a * b1;
    let num1 = a2 * b - a * b2;
    let s = a / den;
    let s1 = num / (den * den);
    let s2 = (num1 * den - 2.0 * num * (a1 + b1)) / (den * den * den);
    (s, s1, s2)
}

/// Cutoff `chi(r) = 1 - S((r - r0) / w)`: 1 on `r <= r0`, 0 on `r >= r0 + w`.
pub fn cutoff(r: f64, r0: f64, w: f64) -> (f64, f64, f64) {
    let (s, s1, s2) = smoothstep((r - r0) / w);
    (1.0 - s, -s1 / w, -s2 / (w * w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
        (
            (f(x + h) - f(x - h)) / (2.0 * h),
            (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
        )
    }

    #[test]
    fn bump_values() {
        assert!((eval_bump_profile(4.0, 0.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(eval_bump_profile(4.0, 2.0).unwrap(), 0.0);
        assert_eq!(eval_bump_profile(4.0, -3.0).unwrap(), 0.0);
        // exp(-16/9)
        assert!((eval_bump_profile(1.0, 0.5).unwrap() - 0.169_013_315_4).abs() < 1e-9);
        assert!(eval_bump_profile(0.0, 0.0).is_err());
        assert!(eval_bump_profile(-1.0, 0.0).is_err());
    }

    #[test]
    fn bump_is_continuous_at_edge() {
        let b: f64 = 4.0;
        let edge = b.sqrt();
        assert!(eval_bump_profile(b, edge - 1e-3).unwrap() < 1e-300);
        assert_eq!(eval_bump_profile(b, edge - 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn phi_derivatives_match_fd() {
        for &(b, s) in &[(4.0, 0.0), (4.0, 1.3), (1.0, 0.5), (5.77, 2.9)] {
            let (_, d1, d2) = phi(b, s);
            let (f1, f2) = fd(|x| phi(b, x).0, s, 1e-4);
            assert!((d1 - f1).abs() < 1e-6 * (1.0 + d1.abs()), "{b} {s}");
            assert!((d2 - f2).abs() < 1e-5 * (1.0 + d2.abs()), "{b} {s}");
        }
    }

    #[test]
    fn smoothstep_derivatives_match_fd() {
        for &u in &[0.05, 0.2, 0.5, 0.71, 0.93] {
            let (s, s1, s2) = smoothstep(u);
            let (f1, f2) = fd(|x| smoothstep(x).0, u, 1e-4);
            assert!((0.0..=1.0).contains(&s));
            assert!((s1 - f1).abs() < 1e-6, "{u}: {s1} vs {f1}");
            assert!((s2 - f2).abs() < 1e-4, "{u}: {s2} vs {f2}");
        }
        assert_eq!(smoothstep(0.5).0, 0.5);
        assert_eq!(smoothstep(-1.0), (0.0, 0.0, 0.0));
        assert_eq!(smoothstep(1.0), (1.0, 0.0, 0.0));
    }

    #[test]
    fn cutoff_plateaus() {
        assert_eq!(cutoff(0.3, 1.0, 2.0), (1.0, 0.0, 0.0));
        assert_eq!(cutoff(3.0, 1.0, 2.0), (0.0, 0.0, 0.0));
        let (c, c1, _) = cutoff(2.0, 1.0, 2.0);
        assert!((c - 0.5).abs() < 1e-15 && c1 < 0.0);
    }
}
