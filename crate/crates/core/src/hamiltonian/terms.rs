//! Building blocks of compactly supported Hamiltonians.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::profile::{cutoff, phi};
use crate::error::{domain, Result};
use crate::geometry::SupportBox;

/// A single compactly supported term with analytic derivatives.
///
/// Every term factors as `envelope(p) * shape(p)` with `envelope > 0` on the
/// term's open support. The shape is what decides whether zeros are regular.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    /// `A e phi_B(|p - c|^2)`, peak value `A` at the centre.
    RadialBump { b: f64, a: f64, center: Vec<f64> },
    /// `(a/2) |p - c|^2 chi(|p - c|)` with chi = 1 up to `radius`, 0 past `radius + width`.
    QuadraticCore { a: f64, radius: f64, width: f64, center: Vec<f64> },
    /// `c (y_1 - c_{y_1}) prod_i chi_i(p_i)` with per-axis plateau and width.
    Shear { c: f64, plateau: Vec<f64>, width: Vec<f64>, center: Vec<f64> },
}

/// Value, gradient and Hessian of a term's shape factor.
pub struct ShapeJet {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: DMatrix<f64>,
}

fn sq_dist(p: &[f64], c: &[f64]) -> f64 {
    p.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

impl Term {
    pub fn radial_bump(b: f64, a: f64, center: Vec<f64>) -> Result<Self> {
        if !(b > 0.0 && a > 0.0) || !b.is_finite() || !a.is_finite() {
            return domain(format!("bump needs B > 0 and A > 0, got B = {b}, A = {a}"));
        }
        check_center(&center)?;
        Ok(Term::RadialBump { b, a, center })
    }

    pub fn quadratic_core(a: f64, radius: f64, width: f64, center: Vec<f64>) -> Result<Self> {
        if !a.is_finite() || !(radius > 0.0) || !(width > 0.0) {
            return domain("quadratic core needs finite a, radius > 0 and width > 0");
        }
        check_center(&center)?;
        Ok(Term::QuadraticCore { a, radius, width, center })
    }

    pub fn shear(c: f64, plateau: Vec<f64>, width: Vec<f64>, center: Vec<f64>) -> Result<Self> {
        check_center(&center)?;
        let d = center.len();
        if plateau.len() != d || width.len() != d {
            return domain("shear plateau/width must have one entry per coordinate");
        }
        if !c.is_finite() || plateau.iter().any(|l| !(*l > 0.0)) || width.iter().any(|w| !(*w > 0.0)) {
            return domain("shear needs finite c and positive plateau/width entries");
        }
        Ok(Term::Shear { c, plateau, width, center })
    }

    pub fn dim(&self) -> usize {
        self.center().len()
    }

    pub fn center(&self) -> &[f64] {
        match self {
            Term::RadialBump { center, .. }
            | Term::QuadraticCore { center, .. }
            | Term::Shear { center, .. } => center,
        }
    }

    pub fn support_box(&self) -> SupportBox {
        let c = self.center();
        let bx = match self {
            Term::RadialBump { b, .. } => SupportBox::cube(c, b.sqrt()),
            Term::QuadraticCore { radius, width, .. } => SupportBox::cube(c, radius + width),
            Term::Shear { plateau, width, .. } => SupportBox::new(
                c.iter().zip(plateau.iter().zip(width)).map(|(c, (l, w))| c - l - w).collect(),
                c.iter().zip(plateau.iter().zip(width)).map(|(c, (l, w))| c + l + w).collect(),
            ),
        };
        bx.expect("term parameters were validated at construction")
    }

    /// Whether `p` lies in the open set where the envelope is positive.
    pub fn open_support_contains(&self, p: &[f64]) -> bool {
        let c = self.center();
        match self {
            Term::RadialBump { b, .. } => sq_dist(p, c) < *b,
            Term::QuadraticCore { radius, width, .. } => sq_dist(p, c).sqrt() < radius + width,
            Term::Shear { plateau, width, .. } => p
                .iter()
                .zip(c)
                .zip(plateau.iter().zip(width))
                .all(|((x, c), (l, w))| (x - c).abs() < l + w),
        }
    }

    pub fn value(&self, p: &[f64]) -> f64 {
        let c = self.center();
        match self {
            Term::RadialBump { b, a, .. } => a * std::f64::consts::E * phi(*b, sq_dist(p, c)).0,
            Term::QuadraticCore { a, radius, width, .. } => {
                let r2 = sq_dist(p, c);
                0.5 * a * r2 * cutoff(r2.sqrt(), *radius, *width).0
            }
            Term::Shear { c: k, plateau, width, .. } => {
                let n = p.len() / 2;
                let mut prod = 1.0;
                for i in 0..p.len() {
                    prod *= cutoff((p[i] - c[i]).abs(), plateau[i], width[i]).0;
                    if prod == 0.0 {
                        return 0.0;
                    }
                }
                k * (p[n] - c[n]) * prod
            }
        }
    }

    /// Adds `weight * grad` into `out`.
    pub fn add_gradient(&self, p: &[f64], weight: f64, out: &mut [f64]) {
        let c = self.center();
        match self {
            Term::RadialBump { b, a, .. } => {
                let (_, d1, _) = phi(*b, sq_dist(p, c));
                if d1 == 0.0 {
                    return;
                }
                let k = weight * a * std::f64::consts::E * d1 * 2.0;
                for i in 0..p.len() {
                    out[i] += k * (p[i] - c[i]);
                }
            }
            Term::QuadraticCore { a, radius, width, .. } => {
                let r = sq_dist(p, c).sqrt();
                let (g1, _) = radial_core_derivs(*a, *radius, *width, r);
                // grad = g'(r) (p - c) / r; g'/r is smooth and equals a inside the core.
                let k = weight * g1;
                for i in 0..p.len() {
                    out[i] += k * (p[i] - c[i]);
                }
            }
            Term::Shear { c: k, plateau, width, .. } => {
                let n = p.len() / 2;
                let chis = shear_factors(p, c, plateau, width);
                let u = p[n] - c[n];
                for j in 0..p.len() {
                    let mut dj = chis[j].1;
                    for (m, ch) in chis.iter().enumerate() {
                        if m != j {
                            dj *= ch.0;
                        }
                    }
                    let mut g = u * dj;
                    if j == n {
                        g += product_except(&chis, &[]);
                    }
                    out[j] += weight * k * g;
                }
            }
        }
    }

    /// Adds `weight * Hess` into `out`.
    pub fn add_hessian(&self, p: &[f64], weight: f64, out: &mut DMatrix<f64>) {
        let c = self.center();
        let d = p.len();
        match self {
            Term::RadialBump { b, a, .. } => {
                let (_, d1, d2) = phi(*b, sq_dist(p, c));
                if d1 == 0.0 && d2 == 0.0 {
                    return;
                }
                let k = weight * a * std::f64::consts::E;
                for i in 0..d {
                    for j in 0..d {
                        let mut h = 4.0 * d2 * (p[i] - c[i]) * (p[j] - c[j]);
                        if i == j {
                            h += 2.0 * d1;
                        }
                        out[(i, j)] += k * h;
                    }
                }
            }
            Term::QuadraticCore { a, radius, width, .. } => {
                let r = sq_dist(p, c).sqrt();
                let (g1_over_r, g2) = radial_core_derivs(*a, *radius, *width, r);
                for i in 0..d {
                    out[(i, i)] += weight * g1_over_r;
                }
                if r > *radius {
                    // radial direction carries g'' instead of g'/r
                    let extra = weight * (g2 - g1_over_r) / (r * r);
                    for i in 0..d {
                        for j in 0..d {
                            out[(i, j)] += extra * (p[i] - c[i]) * (p[j] - c[j]);
                        }
                    }
                }
            }
            Term::Shear { c: k, plateau, width, .. } => {
                let n = d / 2;
                let chis = shear_factors(p, c, plateau, width);
                let u = p[n] - c[n];
                let dp = |j: usize| -> f64 {
                    let mut v = chis[j].1;
                    for (m, ch) in chis.iter().enumerate() {
                        if m != j {
                            v *= ch.0;
                        }
                    }
                    v
                };
                for i in 0..d {
                    for j in 0..d {
                        let pij = if i == j {
                            chis[i].2 * product_except(&chis, &[i])
                        } else {
                            chis[i].1 * chis[j].1 * product_except(&chis, &[i, j])
                        };
                        let mut h = u * pij;
                        if i == n {
                            h += dp(j);
                        }
                        if j == n {
                            h += dp(i);
                        }
                        out[(i, j)] += weight * k * h;
                    }
                }
            }
        }
    }

    /// Jet of the shape factor, which carries the sign and the zero set of the term.
    pub fn shape_jet(&self, p: &[f64]) -> ShapeJet {
        let d = p.len();
        let c = self.center();
        match self {
            Term::RadialBump { a, .. } => ShapeJet {
                value: *a,
                gradient: vec![0.0; d],
                hessian: DMatrix::zeros(d, d),
            },
            Term::QuadraticCore { a, .. } => ShapeJet {
                value: 0.5 * a * sq_dist(p, c),
                gradient: p.iter().zip(c).map(|(x, c)| a * (x - c)).collect(),
                hessian: DMatrix::identity(d, d) * *a,
            },
            Term::Shear { c: k, .. } => {
                let n = d / 2;
                let mut gradient = vec![0.0; d];
                gradient[n] = *k;
                ShapeJet { value: k * (p[n] - c[n]), gradient, hessian: DMatrix::zeros(d, d) }
            }
        }
    }

    /// Errors unless the term lives in R^{2n}.
    pub fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() != 2 * n {
            return domain(format!("term lives in R^{} but the Hamiltonian in R^{}", self.dim(), 2 * n));
        }
        Ok(())
    }
}

fn check_center(center: &[f64]) -> Result<()> {
    if center.is_empty() || center.len() % 2 != 0 || center.iter().any(|c| !c.is_finite()) {
        return domain("term centre must have an even number of finite coordinates");
    }
    Ok(())
}

/// Returns `(g'(r)/r, g''(r))` for `g(r) = (a/2) r^2 chi(r)`.
fn radial_core_derivs(a: f64, radius: f64, width: f64, r: f64) -> (f64, f64) {
    if r <= radius {
        return (a, a);
    }
    let (chi, c1, c2) = cutoff(r, radius, width);
    let g1_over_r = a * chi + 0.5 * a * r * c1;
    let g2 = a * chi + 2.0 * a * r * c1 + 0.5 * a * r * r * c2;
    (g1_over_r, g2)
}

/// Per-axis `(chi, chi', chi'')` for the shear cutoff, derivatives in the coordinate itself.
fn shear_factors(p: &[f64], c: &[f64], plateau: &[f64], width: &[f64]) -> Vec<(f64, f64, f64)> {
    (0..p.len())
        .map(|i| {
            let dx = p[i] - c[i];
            let (v, d1, d2) = cutoff(dx.abs(), plateau[i], width[i]);
            (v, d1 * dx.signum(), d2)
        })
        .collect()
}

fn product_except(chis: &[(f64, f64, f64)], skip: &[usize]) -> f64 {
    chis.iter()
        .enumerate()
        .filter(|(i, _)| !skip.contains(i))
        .map(|(_, c)| c.0)
        .product()
}
