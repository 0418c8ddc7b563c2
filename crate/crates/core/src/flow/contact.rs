//! Contact Hamiltonians `h(t, p, z)` on R^{2n} x S^1 and their flows.
//!
//! From `alpha(X) = h` and `iota_X d alpha = dh(R) alpha - dh` with
//! `alpha = dz - sum y_i dx_i`:
//!
//! ```text
//! x_i' = -h_{y_i}
//! y_i' =  h_{x_i} + y_i h_z
//! z'   =  h - sum y_i h_{y_i}
//! g'   =  h_z           (phi_t^* alpha = e^{g_t} alpha)
//! ```

use std::fmt::Debug;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{flow_and_shift, step_count, Integrator, Schedule, Scheme};
use crate::error::{domain, Error, Result};
use crate::geometry::{CylinderPoint, EuclideanPoint, SupportBox};
use crate::hamiltonian::Hamiltonian;

/// Tolerances of the autonomous cross-checks in `integrate_contact`.
pub const CONFORMAL_TOL: f64 = 1e-8;
pub const LIFT_TOL: f64 = 1e-6;

pub trait ContactHamiltonian: Send + Sync + Debug {
    fn n(&self) -> usize;
    fn value(&self, t: f64, p: &[f64], z: f64) -> f64;
    /// `(d_p h, d_z h)`.
    fn differential(&self, t: f64, p: &[f64], z: f64) -> (Vec<f64>, f64);
    /// A box containing the support of every `h^t`.
    fn support_box(&self) -> SupportBox;
    fn z_independent(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone)]
pub enum PathHamiltonian {
    Autonomous(Hamiltonian),
    /// `a'(t) H`, or `-a'(1 - t) H` for the inverse path when `reversed`.
    Scheduled { base: Hamiltonian, schedule: Schedule, reversed: bool },
    General(Arc<dyn ContactHamiltonian>),
}

impl PathHamiltonian {
    /// Time factor multiplying the base H for autonomous and scheduled paths.
    pub fn rate(&self, t: f64) -> Option<f64> {
        match self {
            PathHamiltonian::Autonomous(_) => Some(1.0),
            PathHamiltonian::Scheduled { schedule, reversed: false, .. } => Some(schedule.rate(t)),
            PathHamiltonian::Scheduled { schedule, reversed: true, .. } => Some(-schedule.rate(1.0 - t)),
            PathHamiltonian::General(_) => None,
        }
    }

    pub fn base(&self) -> Option<&Hamiltonian> {
        match self {
            PathHamiltonian::Autonomous(h) | PathHamiltonian::Scheduled { base: h, .. } => Some(h),
            PathHamiltonian::General(_) => None,
        }
    }
}

impl ContactHamiltonian for PathHamiltonian {
    fn n(&self) -> usize {
        match self {
            PathHamiltonian::General(g) => g.n(),
            other => other.base().map_or(1, Hamiltonian::n),
        }
    }

    fn value(&self, t: f64, p: &[f64], z: f64) -> f64 {
        match self {
            PathHamiltonian::General(g) => g.value(t, p, z),
            other => {
                let rate = other.rate(t).unwrap_or(0.0);
                if rate == 0.0 {
                    return 0.0;
                }
                rate * other.base().map_or(0.0, |h| h.value(p))
            }
        }
    }

    fn differential(&self, t: f64, p: &[f64], z: f64) -> (Vec<f64>, f64) {
        match self {
            PathHamiltonian::General(g) => g.differential(t, p, z),
            other => {
                let rate = other.rate(t).unwrap_or(0.0);
                let mut d = other.base().map_or_else(|| vec![0.0; p.len()], |h| h.gradient(p));
                d.iter_mut().for_each(|v| *v *= rate);
                (d, 0.0)
            }
        }
    }

    fn support_box(&self) -> SupportBox {
        match self {
            PathHamiltonian::General(g) => g.support_box(),
            other => other.base().map(|h| h.support_box().clone()).unwrap_or_else(|| SupportBox::empty(2)),
        }
    }

    fn z_independent(&self) -> bool {
        match self {
            PathHamiltonian::General(g) => g.z_independent(),
            _ => true,
        }
    }
}

/// A contact isotopy `phi_h` on `[0, horizon]` plus how to integrate it.
#[derive(Debug, Clone)]
pub struct ContactPathSpec {
    pub hamiltonian: PathHamiltonian,
    pub horizon: f64,
    pub integrator: Integrator,
}

impl ContactPathSpec {
    pub fn autonomous(h: Hamiltonian) -> Self {
        Self { hamiltonian: PathHamiltonian::Autonomous(h), horizon: 1.0, integrator: Integrator::default() }
    }

    pub fn scheduled(h: Hamiltonian, schedule: Schedule) -> Self {
        Self {
            hamiltonian: PathHamiltonian::Scheduled { base: h, schedule, reversed: false },
            horizon: 1.0,
            integrator: Integrator::default(),
        }
    }

    pub fn general(h: Arc<dyn ContactHamiltonian>) -> Self {
        Self { hamiltonian: PathHamiltonian::General(h), horizon: 1.0, integrator: Integrator::default() }
    }

    /// The inverse path, generated by `-k^{1-t}`.
    pub fn inverse(&self) -> Result<Self> {
        let hamiltonian = match &self.hamiltonian {
            PathHamiltonian::Autonomous(h) => PathHamiltonian::Autonomous(h.negated()),
            PathHamiltonian::Scheduled { base, schedule, reversed } => {
                PathHamiltonian::Scheduled { base: base.clone(), schedule: *schedule, reversed: !reversed }
            }
            PathHamiltonian::General(_) => {
                return Err(Error::Unsupported("inverse of a general contact path".into()))
            }
        };
        Ok(Self { hamiltonian, ..self.clone() })
    }

    pub fn validate(&self) -> Result<()> {
        self.integrator.validate()?;
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return domain(format!("time horizon must be positive, got {}", self.horizon));
        }
        if let PathHamiltonian::Scheduled { schedule, .. } = &self.hamiltonian {
            schedule.validate()?;
        }
        Ok(())
    }
}

/// The contact field at `(p, z)` and time `t`: base part, z part and `h_z`.
fn contact_field(h: &dyn ContactHamiltonian, t: f64, p: &[f64], z: f64) -> (Vec<f64>, f64, f64) {
    let n = p.len() / 2;
    let v = h.value(t, p, z);
    let (dp, hz) = h.differential(t, p, z);
    let mut base = vec![0.0; 2 * n];
    for i in 0..n {
        base[i] = -dp[n + i];
        base[n + i] = dp[i] + p[n + i] * hz;
    }
    let zdot = v + super::liouville(p, &base);
    #[cfg(debug_assertions)]
    check_defining_relations(p, &base, zdot, v, &dp, hz);
    (base, zdot, hz)
}

// alpha(X) = h and iota_X d alpha = h_z alpha - dh, coefficient by coefficient.
#[cfg(debug_assertions)]
fn check_defining_relations(p: &[f64], base: &[f64], zdot: f64, h: f64, dp: &[f64], hz: f64) {
    let n = p.len() / 2;
    let scale = 1.0 + h.abs() + dp.iter().map(|v| v.abs()).sum::<f64>() + hz.abs();
    let alpha_x = zdot - (0..n).map(|i| p[n + i] * base[i]).sum::<f64>();
    debug_assert!((alpha_x - h).abs() <= 1e-12 * scale, "alpha(X) != h");
    for i in 0..n {
        // dx_i: -y'_i = -h_z y_i - h_{x_i};  dy_i: x'_i = -h_{y_i}
        debug_assert!((-base[n + i] + hz * p[n + i] + dp[i]).abs() <= 1e-12 * scale);
        debug_assert!((base[i] + dp[n + i]).abs() <= 1e-12 * scale);
    }
}

/// Base and z components of `X_h` at `(q, t)`.
pub fn contact_vector_field(spec: &ContactPathSpec, q: &CylinderPoint, t: f64) -> (Vec<f64>, f64) {
    let p = q.base.coords();
    match &spec.hamiltonian {
        // z-independent closed form: X_H + (H + lambda(X_H)) d/dz, scaled by the schedule
        h @ (PathHamiltonian::Autonomous(_) | PathHamiltonian::Scheduled { .. }) => {
            let rate = h.rate(t).unwrap_or(0.0);
            let base_h = h.base().expect("scheduled paths carry a base Hamiltonian");
            let mut x = super::symplectic_vector_field(base_h, &q.base);
            x.iter_mut().for_each(|v| *v *= rate);
            let z = rate * base_h.value(p) + super::liouville(p, &x);
            (x, z)
        }
        PathHamiltonian::General(g) => {
            let (b, z, _) = contact_field(g.as_ref(), t, p, q.fiber());
            (b, z)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftState {
    pub base: EuclideanPoint,
    /// Un-wrapped z coordinate in the universal cover.
    pub reeb_lift: f64,
    pub conformal: f64,
}

impl LiftState {
    pub fn to_cylinder(&self) -> CylinderPoint {
        CylinderPoint::new(self.base.clone(), self.reeb_lift)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<LiftState>,
    /// `max |H(p_t) - H(p_0)|`, autonomous paths only.
    pub energy_drift: Option<f64>,
}

fn rk4_contact(
    h: &dyn ContactHamiltonian,
    y0: &[f64],
    t_end: f64,
    steps: usize,
    mut observe: impl FnMut(f64, &[f64]),
) -> Vec<f64> {
    // state = [p (2n), z, g]
    let d = y0.len() - 2;
    let rhs = |t: f64, y: &[f64]| -> Vec<f64> {
        let (b, zdot, hz) = contact_field(h, t, &y[..d], y[d]);
        let mut out = b;
        out.push(zdot);
        out.push(hz);
        out
    };
    let dt = t_end / steps as f64;
    let mut y = y0.to_vec();
    observe(0.0, &y);
    let mut tmp = vec![0.0; y.len()];
    for k in 0..steps {
        let t = k as f64 * dt;
        let k1 = rhs(t, &y);
        for i in 0..y.len() {
            tmp[i] = y[i] + 0.5 * dt * k1[i];
        }
        let k2 = rhs(t + 0.5 * dt, &tmp);
        for i in 0..y.len() {
            tmp[i] = y[i] + 0.5 * dt * k2[i];
        }
        let k3 = rhs(t + 0.5 * dt, &tmp);
        for i in 0..y.len() {
            tmp[i] = y[i] + dt * k3[i];
        }
        let k4 = rhs(t + dt, &tmp);
        for i in 0..y.len() {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        observe((k + 1) as f64 * dt, &y);
    }
    y
}

fn state_from(y: &[f64]) -> LiftState {
    let d = y.len() - 2;
    LiftState { base: EuclideanPoint::from_raw(y[..d].to_vec()), reeb_lift: y[d], conformal: y[d + 1] }
}

fn run_contact(
    spec: &ContactPathSpec,
    q0: &CylinderPoint,
    t: f64,
    mut observe: impl FnMut(f64, &[f64]),
) -> Result<LiftState> {
    spec.validate()?;
    let d = q0.base.coords().len();
    if d != 2 * spec.hamiltonian.n() {
        return domain("initial point dimension does not match the contact Hamiltonian");
    }
    if !(t >= 0.0) || !t.is_finite() {
        return domain(format!("contact flow time must be finite and >= 0, got {t}"));
    }
    if spec.integrator.scheme != Scheme::Rk4 {
        // The implicit leapfrog only covers the symplectic part; the coupled lift needs RK4.
        return Err(Error::Unsupported("contact flows are integrated with RK4 only".into()));
    }
    let mut y0 = q0.base.coords().to_vec();
    y0.push(q0.fiber());
    y0.push(0.0);
    let steps = step_count(t, spec.integrator.step);
    let end = if t == 0.0 {
        observe(0.0, &y0);
        y0
    } else {
        rk4_contact(&spec.hamiltonian, &y0, t, steps, &mut observe)
    };
    let state = state_from(&end);

    if spec.hamiltonian.z_independent() && state.conformal.abs() >= CONFORMAL_TOL {
        return Err(Error::Integrity(format!(
            "conformal factor {:e} for a z-independent Hamiltonian",
            state.conformal
        )));
    }
    if let PathHamiltonian::Autonomous(h) = &spec.hamiltonian {
        if t > 0.0 {
            let (_, shift) = flow_and_shift(h, q0.base.coords(), t, steps);
            let gap = (state.reeb_lift - q0.fiber() - shift).abs();
            if gap >= LIFT_TOL {
                return Err(Error::Integrity(format!("z-lift differs from the Reeb shift by {gap:e}")));
            }
        }
    }
    Ok(state)
}

/// `phi_h^t(q0)` lifted to the universal cover, with its conformal factor.
pub fn integrate_contact(spec: &ContactPathSpec, q0: &CylinderPoint, t: f64) -> Result<LiftState> {
    run_contact(spec, q0, t, |_, _| {})
}

/// Like `integrate_contact`, recording every `every`-th step.
pub fn integrate_contact_trajectory(
    spec: &ContactPathSpec,
    q0: &CylinderPoint,
    t: f64,
    every: usize,
) -> Result<Trajectory> {
    let every = every.max(1);
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut k = 0usize;
    let steps = step_count(t, spec.integrator.step);
    run_contact(spec, q0, t, |s, y| {
        if k % every == 0 || k == steps {
            times.push(s);
            states.push(state_from(y));
        }
        k += 1;
    })?;
    let energy_drift = match &spec.hamiltonian {
        PathHamiltonian::Autonomous(h) => {
            let h0 = h.value(q0.base.coords());
            Some(states.iter().map(|s| (h.value(s.base.coords()) - h0).abs()).fold(0.0, f64::max))
        }
        _ => None,
    };
    Ok(Trajectory { times, states, energy_drift })
}

/// Parallel `integrate_contact` over many initial points, results in input order.
pub fn integrate_contact_batch(spec: &ContactPathSpec, q0s: &[CylinderPoint], t: f64) -> Result<Vec<LiftState>> {
    q0s.par_iter().map(|q| integrate_contact(spec, q, t)).collect()
}

/// CSV with columns `t, x_1..x_n, y_1..y_n, z_lift, g, H_drift`.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, h0: Option<(&Hamiltonian, f64)>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let Some(first) = traj.states.first() else {
        w.flush()?;
        return Ok(());
    };
    let n = first.base.n();
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=n).map(|i| format!("y{i}")));
    header.extend(["z_lift", "g", "H_drift"].map(String::from));
    w.write_record(&header)?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![format!("{t}")];
        row.extend(s.base.coords().iter().map(|v| format!("{v}")));
        row.push(format!("{}", s.reeb_lift));
        row.push(format!("{}", s.conformal));
        row.push(match h0 {
            Some((h, v0)) => format!("{}", (h.value(s.base.coords()) - v0).abs()),
            None => String::new(),
        });
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
