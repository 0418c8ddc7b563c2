//! Symplectic flow of an autonomous H, its Reeb-shift lift, and general contact flows.

pub mod contact;
pub mod schedule;

use serde::{Deserialize, Serialize};

pub use contact::*;
pub use schedule::Schedule;

use crate::error::{domain, Error, Result};
use crate::geometry::{distance, EuclideanPoint};
use crate::hamiltonian::Hamiltonian;
use crate::quadrature::simpson_uniform;

/// Sign in `x_i' = S * dH/dy_i`, `y_i' = -S * dH/dx_i`.
///
/// `iota_X omega = -dH` with `omega = sum dx_i ^ dy_i` gives `S = -1`.
pub const CONTRACTION_SIGN: f64 = -1.0;

pub const DEFAULT_STEP: f64 = 1e-3;
/// Step-halving disagreement above this is an accuracy error.
pub const RICHARDSON_LIMIT: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Rk4,
    StormerVerlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Integrator {
    pub scheme: Scheme,
    pub step: f64,
}

impl Default for Integrator {
    fn default() -> Self {
        Self { scheme: Scheme::Rk4, step: DEFAULT_STEP }
    }
}

impl Integrator {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return domain(format!("integration step must be positive, got {}", self.step));
        }
        Ok(())
    }
}

pub fn symplectic_field_into(h: &Hamiltonian, p: &[f64], grad: &mut [f64], out: &mut [f64]) {
    let n = p.len() / 2;
    h.gradient_into(p, grad);
    for i in 0..n {
        out[i] = CONTRACTION_SIGN * grad[n + i];
        out[n + i] = -CONTRACTION_SIGN * grad[i];
    }
}

/// `X_H` solving `iota_X omega = -dH`.
pub fn symplectic_vector_field(h: &Hamiltonian, p: &EuclideanPoint) -> Vec<f64> {
    let d = p.coords().len();
    let mut grad = vec![0.0; d];
    let mut out = vec![0.0; d];
    symplectic_field_into(h, p.coords(), &mut grad, &mut out);
    out
}

/// `lambda_st(v) = sum y_i v_{x_i}` at base point `p`.
pub fn liouville(p: &[f64], v: &[f64]) -> f64 {
    let n = p.len() / 2;
    (0..n).map(|i| p[n + i] * v[i]).sum()
}

/// Number of steps for horizon `t`: at least 2 and even, so Simpson applies.
pub(crate) fn step_count(t: f64, step: f64) -> usize {
    let k = (t.abs() / step).ceil().max(2.0) as usize;
    k + k % 2
}

/// Fixed-step RK4 for `X_H`; calls `observe(p, x_dot)` at every node including both ends.
pub(crate) fn rk4_flow(
    h: &Hamiltonian,
    p0: &[f64],
    t: f64,
    steps: usize,
    mut observe: impl FnMut(&[f64], &[f64]),
) -> Vec<f64> {
    let d = p0.len();
    let mut p = p0.to_vec();
    if t == 0.0 || !h.support_box().contains(p0) {
        // X_H vanishes identically here, so the flow is stationary.
        let zero = vec![0.0; d];
        for _ in 0..=steps {
            observe(&p, &zero);
        }
        return p;
    }
    let dt = t / steps as f64;
    let mut grad = vec![0.0; d];
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    let mut tmp = vec![0.0; d];
    symplectic_field_into(h, &p, &mut grad, &mut k1);
    observe(&p, &k1);
    for _ in 0..steps {
        for i in 0..d {
            tmp[i] = p[i] + 0.5 * dt * k1[i];
        }
        symplectic_field_into(h, &tmp, &mut grad, &mut k2);
        for i in 0..d {
            tmp[i] = p[i] + 0.5 * dt * k2[i];
        }
        symplectic_field_into(h, &tmp, &mut grad, &mut k3);
        for i in 0..d {
            tmp[i] = p[i] + dt * k3[i];
        }
        symplectic_field_into(h, &tmp, &mut grad, &mut k4);
        for i in 0..d {
            p[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        symplectic_field_into(h, &p, &mut grad, &mut k1);
        observe(&p, &k1);
    }
    p
}

/// Implicit generalized leapfrog with `q = y`, `p = x` (so `q' = H_x`, `p' = -H_y`).
pub(crate) fn verlet_flow(
    h: &Hamiltonian,
    p0: &[f64],
    t: f64,
    steps: usize,
    mut observe: impl FnMut(&[f64]),
) -> Vec<f64> {
    let d = p0.len();
    let n = d / 2;
    let mut z = p0.to_vec();
    observe(&z);
    if t == 0.0 || !h.support_box().contains(p0) {
        for _ in 0..steps {
            observe(&z);
        }
        return z;
    }
    let dt = t / steps as f64;
    let s = -CONTRACTION_SIGN;
    let mut g = vec![0.0; d];
    let mut trial = vec![0.0; d];
    for _ in 0..steps {
        // half kick on x: x_half = x - dt/2 * S' H_y(x_half, y), fixed point in x_half
        let mut xh: Vec<f64> = z[..n].to_vec();
        for _ in 0..100 {
            trial[..n].copy_from_slice(&xh);
            trial[n..].copy_from_slice(&z[n..]);
            h.gradient_into(&trial, &mut g);
            let next: Vec<f64> = (0..n).map(|i| z[i] - 0.5 * dt * s * g[n + i]).collect();
            let gap = distance(&next, &xh);
            xh = next;
            if gap < 1e-15 {
                break;
            }
        }
        // drift on y: y1 = y + dt/2 (H_x(x_half, y) + H_x(x_half, y1))
        trial[..n].copy_from_slice(&xh);
        trial[n..].copy_from_slice(&z[n..]);
        h.gradient_into(&trial, &mut g);
        let gx0: Vec<f64> = g[..n].to_vec();
        let mut y1: Vec<f64> = z[n..].to_vec();
        for _ in 0..100 {
            trial[n..].copy_from_slice(&y1);
            h.gradient_into(&trial, &mut g);
            let next: Vec<f64> = (0..n).map(|i| z[n + i] + 0.5 * dt * s * (gx0[i] + g[i])).collect();
            let gap = distance(&next, &y1);
            y1 = next;
            if gap < 1e-15 {
                break;
            }
        }
        // second half kick, explicit
        trial[n..].copy_from_slice(&y1);
        h.gradient_into(&trial, &mut g);
        for i in 0..n {
            z[i] = xh[i] - 0.5 * dt * s * g[n + i];
            z[n + i] = y1[i];
        }
        observe(&z);
    }
    z
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowResult {
    pub point: EuclideanPoint,
    pub energy_drift: f64,
    /// `|p_h - p_{h/2}|` between the configured step and its half.
    pub step_halving_gap: f64,
    /// Richardson estimate of the global error at the configured step.
    pub richardson_error: f64,
    pub steps: usize,
}

fn run_scheme(h: &Hamiltonian, p0: &[f64], t: f64, steps: usize, scheme: Scheme) -> (Vec<f64>, f64) {
    let h0 = h.value(p0);
    let mut drift: f64 = 0.0;
    let end = match scheme {
        Scheme::Rk4 => rk4_flow(h, p0, t, steps, |p, _| drift = drift.max((h.value(p) - h0).abs())),
        Scheme::StormerVerlet => verlet_flow(h, p0, t, steps, |p| drift = drift.max((h.value(p) - h0).abs())),
    };
    (end, drift)
}

fn check_point(h: &Hamiltonian, p0: &EuclideanPoint) -> Result<()> {
    if p0.coords().len() != h.dim() {
        return domain("initial point dimension does not match the Hamiltonian");
    }
    Ok(())
}

/// `psi_H^t(p0)` with energy drift and a step-halving error estimate.
pub fn integrate_symplectic(h: &Hamiltonian, p0: &EuclideanPoint, t: f64, step: f64) -> Result<FlowResult> {
    integrate_symplectic_with(h, p0, t, Integrator { scheme: Scheme::Rk4, step })
}

pub fn integrate_symplectic_with(
    h: &Hamiltonian,
    p0: &EuclideanPoint,
    t: f64,
    integrator: Integrator,
) -> Result<FlowResult> {
    integrator.validate()?;
    check_point(h, p0)?;
    if !t.is_finite() {
        return domain("flow time must be finite");
    }
    let steps = step_count(t, integrator.step);
    let (coarse, drift) = run_scheme(h, p0.coords(), t, steps, integrator.scheme);
    let (fine, _) = run_scheme(h, p0.coords(), t, 2 * steps, integrator.scheme);
    let gap = distance(&coarse, &fine);
    if gap > RICHARDSON_LIMIT {
        return Err(Error::Accuracy(format!(
            "step halving changes psi^{t} by {gap:e} > {RICHARDSON_LIMIT:e}; use a smaller step than {}",
            integrator.step
        )));
    }
    let order = match integrator.scheme {
        Scheme::Rk4 => 4,
        Scheme::StormerVerlet => 2,
    };
    Ok(FlowResult {
        point: EuclideanPoint::from_raw(coarse),
        energy_drift: drift,
        step_halving_gap: gap,
        richardson_error: gap * (1u32 << order) as f64 / ((1u32 << order) - 1) as f64,
        steps,
    })
}

/// Flow end point and `F^t` from one RK4 pass, Simpson on the stored samples.
pub(crate) fn flow_and_shift(h: &Hamiltonian, p0: &[f64], t: f64, steps: usize) -> (Vec<f64>, f64) {
    let mut samples = Vec::with_capacity(steps + 1);
    let end = rk4_flow(h, p0, t, steps, |p, v| samples.push(liouville(p, v)));
    let integral = simpson_uniform(&samples, t / steps as f64).unwrap_or(0.0);
    (end, integral + t * h.value(p0))
}

/// `F^t(p0) = int_0^t lambda_st(X_H)(psi^s p0) ds + t H(p0)`.
pub fn reeb_shift(h: &Hamiltonian, p0: &EuclideanPoint, t: f64, step: f64) -> Result<f64> {
    Integrator { scheme: Scheme::Rk4, step }.validate()?;
    check_point(h, p0)?;
    let steps = step_count(t, step);
    let (coarse, f) = flow_and_shift(h, p0.coords(), t, steps);
    let (fine, _) = flow_and_shift(h, p0.coords(), t, 2 * steps);
    let gap = distance(&coarse, &fine);
    if gap > RICHARDSON_LIMIT {
        return Err(Error::Accuracy(format!("flow under the Reeb shift is not resolved: gap {gap:e}")));
    }
    Ok(f)
}
