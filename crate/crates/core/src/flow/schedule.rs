//! Time reparametrizations `a: [0,1] -> R` with `a(0) = 0`, `a(1) = 1`.
//!
//! A path `t -> phi_H^{a(t)}` is generated by `a'(t) H`, so every schedule
//! gives another representative of the same time-one map.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    Identity,
    /// `a(t) = t^p`, `p >= 1`.
    Power { p: f64 },
    /// `a(t) = t + beta sin(pi f t) / (pi f)`, integer `f >= 1`; monotone iff `|beta| <= 1`.
    BackAndForth { beta: f64, freq: u32 },
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Schedule::Identity => Ok(()),
            Schedule::Power { p } if p >= 1.0 && p.is_finite() => Ok(()),
            Schedule::Power { p } => domain(format!("power schedule needs p >= 1, got {p}")),
            Schedule::BackAndForth { beta, freq } if freq >= 1 && beta.is_finite() => Ok(()),
            Schedule::BackAndForth { .. } => domain("back-and-forth schedule needs freq >= 1 and finite beta"),
        }
    }

    pub fn a(&self, t: f64) -> f64 {
        match *self {
            Schedule::Identity => t,
            Schedule::Power { p } => t.powf(p),
            Schedule::BackAndForth { beta, freq } => {
                let w = PI * freq as f64;
                t + beta * (w * t).sin() / w
            }
        }
    }

    pub fn rate(&self, t: f64) -> f64 {
        match *self {
            Schedule::Identity => 1.0,
            Schedule::Power { p } => {
                if t <= 0.0 {
                    if p == 1.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    p * t.powf(p - 1.0)
                }
            }
            Schedule::BackAndForth { beta, freq } => 1.0 + beta * (PI * freq as f64 * t).cos(),
        }
    }

    pub fn is_monotone(&self) -> bool {
        match *self {
            Schedule::BackAndForth { beta, .. } => beta.abs() <= 1.0,
            _ => true,
        }
    }

    /// Times in `(0, 1)` where `a'` changes sign.
    pub fn breakpoints(&self) -> Vec<f64> {
        let Schedule::BackAndForth { beta, freq } = *self else { return vec![] };
        if beta.abs() <= 1.0 {
            return vec![];
        }
        // zeros of cos(theta) = -1/beta for theta = pi f t in (0, pi f)
        let theta0 = (-1.0 / beta).acos();
        let f = freq as f64;
        let mut out = Vec::new();
        for k in 0..freq {
            let base = 2.0 * PI * (k / 2) as f64;
            for th in [base + theta0, base + 2.0 * PI - theta0] {
                let t = th / (PI * f);
                if t > 0.0 && t < 1.0 {
                    out.push(t);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// `int_0^1 |a'(t)| dt` in closed form.
    pub fn total_variation(&self) -> f64 {
        match *self {
            Schedule::BackAndForth { beta, .. } if beta.abs() > 1.0 => {
                let b = beta.abs();
                let th = (-1.0 / b).acos();
                (2.0 * th - PI + 2.0 * b * th.sin()) / PI
            }
            _ => 1.0,
        }
    }

    /// `int_0^1 max(a'(t), 0) dt` in closed form.
    pub fn positive_variation(&self) -> f64 {
        0.5 * (self.total_variation() + 1.0)
    }

    /// `int_0^1 max(-a'(t), 0) dt` in closed form.
    pub fn negative_variation(&self) -> f64 {
        0.5 * (self.total_variation() - 1.0)
    }
}

/// Solve `total_variation(beta) = target` for a back-and-forth schedule (target >= 1).
pub fn back_and_forth_with_variation(target: f64, freq: u32) -> Result<Schedule> {
    if !(target >= 1.0) || freq == 0 {
        return domain(format!("total variation must be >= 1, got {target}"));
    }
    if target == 1.0 {
        return Ok(Schedule::BackAndForth { beta: 0.5, freq });
    }
    let tv = |b: f64| Schedule::BackAndForth { beta: b, freq }.total_variation();
    let (mut lo, mut hi) = (1.0, 2.0);
    while tv(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tv(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Schedule::BackAndForth { beta: 0.5 * (lo + hi), freq })
}
