//! Compactly supported autonomous Hamiltonians on R^{2n}.

pub mod analysis;
pub mod profile;
pub mod spec;
pub mod terms;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use analysis::*;
pub use profile::eval_bump_profile;
pub use terms::Term;

use crate::error::{domain, Result};
use crate::geometry::SupportBox;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference { step: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpParams {
    pub b: f64,
    pub a: f64,
}

impl BumpParams {
    pub fn new(b: f64, a: f64) -> Result<Self> {
        if !(b > 0.0 && a > 0.0) || !b.is_finite() || !a.is_finite() {
            return domain(format!("bump needs B > 0 and A > 0, got B = {b}, A = {a}"));
        }
        Ok(Self { b, a })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedTerm {
    pub weight: f64,
    pub term: Term,
}

/// `H = sum_k w_k T_k` with a declared support box (the union of term boxes).
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n: usize,
    terms: Vec<WeightedTerm>,
    mode: DerivativeMode,
    support: SupportBox,
}

impl Hamiltonian {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: vec![], mode: DerivativeMode::Analytic, support: SupportBox::empty(2 * n) }
    }

    pub fn from_terms(n: usize, terms: Vec<WeightedTerm>) -> Result<Self> {
        if n == 0 {
            return domain("dimension n must be at least 1");
        }
        let mut support = SupportBox::empty(2 * n);
        for t in &terms {
            t.term.check_dim(n)?;
            if !t.weight.is_finite() {
                return domain("term weights must be finite");
            }
            support = support.union(&t.term.support_box());
        }
        Ok(Self { n, terms, mode: DerivativeMode::Analytic, support })
    }

    pub fn single(n: usize, term: Term) -> Result<Self> {
        Self::from_terms(n, vec![WeightedTerm { weight: 1.0, term }])
    }

    /// `(A / f_B(0)) f_B(|p|)` centred at the origin of R^{2n}.
    pub fn radial_bump(n: usize, params: BumpParams) -> Result<Self> {
        Self::single(n, Term::radial_bump(params.b, params.a, vec![0.0; 2 * n])?)
    }

    pub fn quadratic_core(n: usize, a: f64, radius: f64, width: f64) -> Result<Self> {
        Self::single(n, Term::quadratic_core(a, radius, width, vec![0.0; 2 * n])?)
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return domain("cannot add Hamiltonians of different dimension");
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self::from_terms(self.n, terms)?.with_mode(self.mode))
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.weight *= k;
        }
        out
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn terms(&self) -> &[WeightedTerm] {
        &self.terms
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn support_box(&self) -> &SupportBox {
        &self.support
    }

    pub fn is_identically_zero(&self) -> bool {
        self.terms.iter().all(|t| t.weight == 0.0)
    }

    /// Indices of the terms whose open support contains `p`.
    pub fn active_terms(&self, p: &[f64]) -> Vec<usize> {
        self.terms
            .iter()
            .enumerate()
            .filter(|(_, t)| t.weight != 0.0 && t.term.open_support_contains(p))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn open_support_contains(&self, p: &[f64]) -> bool {
        self.terms.iter().any(|t| t.weight != 0.0 && t.term.open_support_contains(p))
    }

    pub fn value(&self, p: &[f64]) -> f64 {
        if !self.support.contains(p) {
            return 0.0;
        }
        self.terms.iter().map(|t| t.weight * t.term.value(p)).sum()
    }

    pub fn gradient_into(&self, p: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if !self.support.contains(p) {
            return;
        }
        match self.mode {
            DerivativeMode::Analytic => {
                for t in &self.terms {
                    t.term.add_gradient(p, t.weight, out);
                }
            }
            DerivativeMode::FiniteDifference { step } => {
                let mut q = p.to_vec();
                for i in 0..p.len() {
                    q[i] = p[i] + step;
                    let fp = self.value(&q);
                    q[i] = p[i] - step;
                    let fm = self.value(&q);
                    q[i] = p[i];
                    out[i] = (fp - fm) / (2.0 * step);
                }
            }
        }
    }

    pub fn gradient(&self, p: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; p.len()];
        self.gradient_into(p, &mut g);
        g
    }

    pub fn hessian(&self, p: &[f64]) -> DMatrix<f64> {
        let d = p.len();
        let mut h = DMatrix::zeros(d, d);
        if !self.support.contains(p) {
            return h;
        }
        match self.mode {
            DerivativeMode::Analytic => {
                for t in &self.terms {
                    t.term.add_hessian(p, t.weight, &mut h);
                }
            }
            DerivativeMode::FiniteDifference { step } => {
                let mut q = p.to_vec();
                let f0 = self.value(p);
                for i in 0..d {
                    q[i] = p[i] + step;
                    let fp = self.value(&q);
                    q[i] = p[i] - step;
                    let fm = self.value(&q);
                    q[i] = p[i];
                    h[(i, i)] = (fp - 2.0 * f0 + fm) / (step * step);
                    for j in (i + 1)..d {
                        let mut corner = |si: f64, sj: f64| {
                            q[i] = p[i] + si * step;
                            q[j] = p[j] + sj * step;
                            let v = self.value(&q);
                            q[i] = p[i];
                            q[j] = p[j];
                            v
                        };
                        let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0)
                            + corner(-1.0, -1.0))
                            / (4.0 * step * step);
                        h[(i, j)] = v;
                        h[(j, i)] = v;
                    }
                }
            }
        }
        h
    }

    /// `H = 0`, `grad H = 0` and `Hess H = 0` up to `tol`.
    pub fn is_flat_at(&self, p: &[f64], tol: f64) -> bool {
        self.value(p).abs() < tol
            && crate::geometry::norm(&self.gradient(p)) < tol
            && self.hessian(p).amax() < tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn fd_check(h: &Hamiltonian, p: &[f64]) {
        let step = 1e-5;
        let g = h.gradient(p);
        let hess = h.hessian(p);
        let mut q = p.to_vec();
        for i in 0..p.len() {
            q[i] = p[i] + step;
            let fp = h.value(&q);
            let gp = h.gradient(&q);
            q[i] = p[i] - step;
            let fm = h.value(&q);
            let gm = h.gradient(&q);
            q[i] = p[i];
            let scale = 1.0 + g[i].abs();
            assert!(((fp - fm) / (2.0 * step) - g[i]).abs() < 1e-6 * scale, "grad {i} at {p:?}");
            for j in 0..p.len() {
                let fdh = (gp[j] - gm[j]) / (2.0 * step);
                assert!((fdh - hess[(j, i)]).abs() < 1e-5 * (1.0 + hess[(j, i)].abs()), "hess {i}{j} at {p:?}");
            }
        }
    }

    #[test]
    fn bump_peak_and_edge() {
        let h = Hamiltonian::radial_bump(1, BumpParams::new(4.0, 2.5).unwrap()).unwrap();
        assert!((h.value(&[0.0, 0.0]) - 2.5).abs() < 1e-14);
        assert_eq!(h.value(&[2.0, 0.0]), 0.0);
        assert_eq!(h.value(&[2.0_f64.sqrt(), 2.0_f64.sqrt()]), 0.0);
        assert_eq!(h.gradient(&[0.0, 0.0]), vec![0.0, 0.0]);
        // Hess(0) = -4A/B Id
        let hs = h.hessian(&[0.0, 0.0]);
        assert!((hs[(0, 0)] + 2.5).abs() < 1e-12 && hs[(0, 1)] == 0.0);
        let b = BumpParams::new(4.0, 2.5).unwrap();
        let f0 = eval_bump_profile(b.b, 0.0).unwrap();
        let v = h.value(&[0.7, -0.4]);
        let r = (0.49f64 + 0.16).sqrt();
        assert!((v - b.a / f0 * eval_bump_profile(b.b, r).unwrap()).abs() < 1e-14);
        assert!((1.0 / f0 - E).abs() < 1e-14);
    }

    #[test]
    fn analytic_derivatives_match_fd() {
        let bump = Hamiltonian::radial_bump(1, BumpParams::new(4.0, 2.5).unwrap()).unwrap();
        let core = Hamiltonian::quadratic_core(1, 3.0, 1.0, 2.0).unwrap();
        let shear = Hamiltonian::single(
            1,
            Term::shear(1.5, vec![2.5, 0.6], vec![4.0, 3.0], vec![0.0, 0.0]).unwrap(),
        )
        .unwrap();
        let core2 = Hamiltonian::quadratic_core(2, 2.0, 1.0, 2.0).unwrap();
        for p in [[0.3, -0.2], [1.1, 0.9], [-1.7, 0.4], [0.0, 1.9], [2.1, 2.3], [3.0, 0.5]] {
            fd_check(&bump, &p);
            fd_check(&core, &p);
            fd_check(&shear, &p);
        }
        fd_check(&shear, &[5.0, 1.5]);
        fd_check(&core2, &[0.9, 0.8, -0.7, 0.3]);
    }

    #[test]
    fn outside_support_is_exactly_zero() {
        let h = Hamiltonian::quadratic_core(1, 7.0, 1.0, 2.0).unwrap();
        for p in [[3.0, 0.0], [2.5, 2.5], [-10.0, 4.0]] {
            assert_eq!(h.value(&p), 0.0);
            assert!(h.gradient(&p).iter().all(|v| *v == 0.0));
            assert_eq!(h.hessian(&p).amax(), 0.0);
        }
    }

    #[test]
    fn core_hessian_is_a_identity_inside() {
        let h = Hamiltonian::quadratic_core(1, 2.0, 1.0, 2.0).unwrap();
        let hs = h.hessian(&[0.3, 0.5]);
        assert_eq!(hs, DMatrix::identity(2, 2) * 2.0);
    }

    #[test]
    fn fd_mode_tracks_analytic() {
        let h = Hamiltonian::radial_bump(1, BumpParams::new(4.0, 2.5).unwrap()).unwrap();
        let f = h.clone().with_mode(DerivativeMode::FiniteDifference { step: 1e-4 });
        let p = [0.6, -0.9];
        let (ga, gf) = (h.gradient(&p), f.gradient(&p));
        for i in 0..2 {
            assert!((ga[i] - gf[i]).abs() < 1e-7);
        }
        assert!((h.hessian(&p) - f.hessian(&p)).amax() < 1e-5);
        assert_eq!(f.hessian(&[5.0, 5.0]).amax(), 0.0);
    }

    #[test]
    fn shear_translates_in_core() {
        let h = Hamiltonian::single(
            1,
            Term::shear(1.5, vec![2.5, 0.6], vec![4.0, 3.0], vec![0.0, 0.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(h.gradient(&[0.4, 0.3]), vec![0.0, 1.5]);
        assert!((h.value(&[0.4, 0.3]) - 0.45).abs() < 1e-15);
    }
}
