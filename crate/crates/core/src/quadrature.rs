//! Composite Simpson quadrature on uniform samples.

use crate::error::{domain, Result};

/// Composite Simpson rule over `samples` taken at uniform spacing `h`.
///
/// Requires an odd number of samples (an even number of panels). Two samples
/// fall back to the trapezoid rule so that single-step grids still integrate.
pub fn simpson_uniform(samples: &[f64], h: f64) -> Result<f64> {
    match samples.len() {
        0 => domain("simpson: no samples"),
        1 => Ok(0.0),
        2 => Ok(0.5 * h * (samples[0] + samples[1])),
        n if n % 2 == 0 => domain(format!("simpson: need an odd sample count, got {n}")),
        n => {
            let mut odd = 0.0;
            let mut even = 0.0;
            for (i, v) in samples.iter().enumerate().take(n - 1).skip(1) {
                if i % 2 == 1 {
                    odd += v;
                } else {
                    even += v;
                }
            }
            Ok(h / 3.0 * (samples[0] + samples[n - 1] + 4.0 * odd + 2.0 * even))
        }
    }
}

/// Integrate `f` on `[a, b]` with composite Simpson on `nodes` points.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, nodes: usize) -> Result<f64> {
    if nodes < 3 || nodes % 2 == 0 {
        return domain(format!("simpson: node count must be odd and >= 3, got {nodes}"));
    }
    let h = (b - a) / (nodes - 1) as f64;
    let samples: Vec<f64> = (0..nodes).map(|i| f(a + h * i as f64)).collect();
    simpson_uniform(&samples, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_is_exact() {
        let v = simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 5).unwrap();
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-14);
    }

    #[test]
    fn sine_converges() {
        let v = simpson(f64::sin, 0.0, std::f64::consts::PI, 101).unwrap();
        assert!((v - 2.0).abs() < 1e-7);
    }

    #[test]
    fn rejects_even_count() {
        assert!(simpson_uniform(&[1.0, 2.0, 3.0, 4.0], 0.1).is_err());
        assert!(simpson(|x| x, 0.0, 1.0, 4).is_err());
    }
}
