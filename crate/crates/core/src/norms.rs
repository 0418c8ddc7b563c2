//! Shelukhin, discriminant, oscillation and FPR lengths and norms.
//!
//! Lengths are evaluated directly. Norm values are only emitted with a
//! certificate: the closed forms hold on admissible autonomous Hamiltonians
//! (plus a regular zero level for the discriminant and oscillation norms, and
//! a sign condition for the latter).

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::flow::{ContactHamiltonian, ContactPathSpec, PathHamiltonian};
use crate::geometry::{compass_maximize, Grid, SupportBox};
use crate::hamiltonian::{admissibility_check_with, default_resolution, regular_zero_check, Hamiltonian, DEFAULT_SAFETY_MARGIN};
use crate::quadrature::simpson;
use crate::translated::{translation_selector_inverse_with, translation_selector_with};

/// Audit tolerance for quadrature-based inequalities.
pub const AUDIT_TOL: f64 = 1e-6;
/// Extrema within this of an integer are snapped before floor/ceil.
pub const INTEGER_SNAP: f64 = 1e-9;
pub const DEFAULT_TIME_NODES: usize = 1001;

pub fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < INTEGER_SNAP {
        r
    } else {
        x
    }
}

fn floor_plus_one(x: f64) -> u64 {
    snap(x).floor() as u64 + 1
}

fn ceil(x: f64) -> u64 {
    snap(x).ceil() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignClass {
    Nonneg,
    Nonpos,
    Mixed,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Hypotheses {
    pub admissible: bool,
    pub regular_zero: bool,
    pub sign_definite: SignClass,
}

/// A norm value carrying its certificate status.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Gated<T> {
    Certified { value: T },
    NotCertified { reason: String },
    NotApplicable { reason: String },
}

impl<T: Copy> Gated<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            Gated::Certified { value } => Some(*value),
            _ => None,
        }
    }

    fn gate(ok: bool, value: T, reason: &str) -> Self {
        if ok {
            Gated::Certified { value }
        } else {
            Gated::NotCertified { reason: reason.to_string() }
        }
    }
}

/// An integer length that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscreteLength {
    Finite(u64),
    Infinite,
}

impl Serialize for DiscreteLength {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DiscreteLength::Finite(k) => s.serialize_u64(*k),
            DiscreteLength::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Spatial extrema of an autonomous H, clamped against the exterior value 0.
#[derive(Debug, Clone, Serialize)]
pub struct Extrema {
    pub max: f64,
    pub min: f64,
    pub argmax: Option<Vec<f64>>,
    pub argmin: Option<Vec<f64>>,
}

impl Extrema {
    pub fn sup_abs(&self) -> f64 {
        self.max.max(-self.min)
    }

    pub fn sign_class(&self) -> SignClass {
        if self.min >= 0.0 {
            SignClass::Nonneg
        } else if self.max <= 0.0 {
            SignClass::Nonpos
        } else {
            SignClass::Mixed
        }
    }
}

fn top_k(values: &[f64], k: usize, larger: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let o = values[a].total_cmp(&values[b]);
        (if larger { o.reverse() } else { o }).then(a.cmp(&b))
    });
    idx.truncate(k);
    idx
}

/// Grid scan followed by compass refinement of the five best samples each way.
pub fn spatial_extrema(h: &Hamiltonian, grid_resolution: usize) -> Result<Extrema> {
    if grid_resolution < 3 {
        return domain("grid resolution must be at least 3");
    }
    let bx = h.support_box();
    let Some(grid) = Grid::new(bx, grid_resolution) else {
        return Ok(Extrema { max: 0.0, min: 0.0, argmax: None, argmin: None });
    };
    let values: Vec<f64> = (0..grid.len()).into_par_iter().map(|i| h.value(&grid.point(i))).collect();
    let spacing = grid.spacing();
    let refine = |sign: f64| -> (Vec<f64>, f64) {
        let mut best: Option<(Vec<f64>, f64)> = None;
        let vals: Vec<f64> = values.iter().map(|v| sign * v).collect();
        for i in top_k(&vals, 5, true) {
            let (x, v) = compass_maximize(|p| sign * h.value(p), &grid.point(i), spacing, spacing * 1e-7, bx);
            if best.as_ref().map_or(true, |b| v > b.1) {
                best = Some((x, v));
            }
        }
        let (x, v) = best.expect("grid is nonempty");
        (x, sign * v)
    };
    let (xmax, vmax) = refine(1.0);
    let (xmin, vmin) = refine(-1.0);
    Ok(Extrema {
        max: vmax.max(0.0),
        min: vmin.min(0.0),
        argmax: (vmax > 0.0).then_some(xmax),
        argmin: (vmin < 0.0).then_some(xmin),
    })
}

#[derive(Debug, Clone, Copy, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LengthOptions {
    pub grid_resolution: usize,
    /// Simpson nodes per smooth time piece (odd, at least 101).
    pub time_nodes: usize,
    /// Fiber samples for z-dependent general paths.
    pub z_samples: usize,
}

impl LengthOptions {
    pub fn new(grid_resolution: usize) -> Self {
        Self { grid_resolution, time_nodes: DEFAULT_TIME_NODES, z_samples: 16 }
    }

    fn validate(&self) -> Result<()> {
        if self.time_nodes < 101 || self.time_nodes % 2 == 0 {
            return domain(format!("time quadrature needs an odd node count >= 101, got {}", self.time_nodes));
        }
        if self.grid_resolution < 3 || self.z_samples == 0 {
            return domain("grid resolution must be >= 3 and z_samples positive");
        }
        Ok(())
    }
}

/// Per-time spatial max and min of `k^t`, clamped against 0.
#[derive(Debug, Clone, Serialize)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub max: Vec<f64>,
    pub min: Vec<f64>,
}

/// `int max k^t dt`, `int min k^t dt` and `int max |k^t| dt` over the horizon.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PathIntegrals {
    pub integral_max: f64,
    pub integral_min: f64,
    pub length: f64,
}

fn time_pieces(path: &ContactPathSpec) -> Vec<f64> {
    let t_end = path.horizon;
    let mut knots = vec![0.0];
    if let PathHamiltonian::Scheduled { schedule, reversed, .. } = &path.hamiltonian {
        for b in schedule.breakpoints() {
            let b = if *reversed { 1.0 - b } else { b };
            if b > 0.0 && b < t_end {
                knots.push(b);
            }
        }
    }
    knots.push(t_end);
    knots.sort_by(f64::total_cmp);
    knots
}

struct GeneralExtrema<'a> {
    h: &'a dyn ContactHamiltonian,
    grid: Option<Grid>,
    zs: Vec<f64>,
}

impl GeneralExtrema<'_> {
    fn at(&self, t: f64) -> (f64, f64) {
        let Some(grid) = &self.grid else { return (0.0, 0.0) };
        let (mx, mn) = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let p = grid.point(i);
                self.zs.iter().fold((0.0f64, 0.0f64), |(a, b), &z| {
                    let v = self.h.value(t, &p, z);
                    (a.max(v), b.min(v))
                })
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold((0.0f64, 0.0f64), |(a, b), (c, d)| (a.max(c), b.min(d)));
        (mx, mn)
    }
}

/// Time integrals of the spatial extrema of `k^t`. For autonomous and scheduled
/// paths the spatial extrema of the base H are computed once; the flow is never
/// integrated since `max_x k^t(phi^t x) = max_y k^t(y)`.
pub fn path_integrals(path: &ContactPathSpec, opts: &LengthOptions) -> Result<PathIntegrals> {
    path.validate()?;
    opts.validate()?;
    let knots = time_pieces(path);
    let (mx_of, mn_of): (Box<dyn Fn(f64) -> f64 + Sync + '_>, Box<dyn Fn(f64) -> f64 + Sync + '_>) = match &path.hamiltonian {
        PathHamiltonian::General(g) => {
            let bx: SupportBox = g.support_box();
            let zs: Vec<f64> = if g.z_independent() {
                vec![0.0]
            } else {
                (0..opts.z_samples).map(|k| k as f64 / opts.z_samples as f64).collect()
            };
            let ext = GeneralExtrema { h: g.as_ref(), grid: Grid::new(&bx, opts.grid_resolution), zs };
            // one spatial scan per time node, shared by both integrands
            let mut out = PathIntegrals { integral_max: 0.0, integral_min: 0.0, length: 0.0 };
            for w in knots.windows(2) {
                let nodes = opts.time_nodes;
                let dt = (w[1] - w[0]) / (nodes - 1) as f64;
                let samples: Vec<(f64, f64)> = (0..nodes).map(|k| ext.at(w[0] + k as f64 * dt)).collect();
                let mx: Vec<f64> = samples.iter().map(|s| s.0).collect();
                let mn: Vec<f64> = samples.iter().map(|s| s.1).collect();
                let ab: Vec<f64> = samples.iter().map(|s| s.0.max(-s.1)).collect();
                out.integral_max += crate::quadrature::simpson_uniform(&mx, dt)?;
                out.integral_min += crate::quadrature::simpson_uniform(&mn, dt)?;
                out.length += crate::quadrature::simpson_uniform(&ab, dt)?;
            }
            return Ok(out);
        }
        other => {
            let base = other.base().expect("autonomous or scheduled path");
            let ext = spatial_extrema(base, opts.grid_resolution)?;
            let (m, n) = (ext.max, ext.min);
            let rate = move |t: f64| other.rate(t).expect("autonomous or scheduled path");
            (
                Box::new(move |t| {
                    let r = rate(t);
                    if r >= 0.0 { r * m } else { r * n }
                }),
                Box::new(move |t| {
                    let r = rate(t);
                    if r >= 0.0 { r * n } else { r * m }
                }),
            )
        }
    };
    let mut out = PathIntegrals { integral_max: 0.0, integral_min: 0.0, length: 0.0 };
    for w in knots.windows(2) {
        out.integral_max += simpson(&mx_of, w[0], w[1], opts.time_nodes)?;
        out.integral_min += simpson(&mn_of, w[0], w[1], opts.time_nodes)?;
        out.length += simpson(|t| mx_of(t).max(-mn_of(t)), w[0], w[1], opts.time_nodes)?;
    }
    Ok(out)
}

/// Sampled per-time extrema, for reporting.
pub fn path_sample(path: &ContactPathSpec, opts: &LengthOptions, nodes: usize) -> Result<PathSample> {
    path.validate()?;
    opts.validate()?;
    let nodes = nodes.max(2);
    let times: Vec<f64> = (0..nodes).map(|k| path.horizon * k as f64 / (nodes - 1) as f64).collect();
    let (max, min) = match &path.hamiltonian {
        PathHamiltonian::General(g) => {
            let bx = g.support_box();
            let zs = if g.z_independent() {
                vec![0.0]
            } else {
                (0..opts.z_samples).map(|k| k as f64 / opts.z_samples as f64).collect()
            };
            let ext = GeneralExtrema { h: g.as_ref(), grid: Grid::new(&bx, opts.grid_resolution), zs };
            times.iter().map(|&t| ext.at(t)).unzip()
        }
        other => {
            let ext = spatial_extrema(other.base().expect("base"), opts.grid_resolution)?;
            times
                .iter()
                .map(|&t| {
                    let r = other.rate(t).expect("rate");
                    if r >= 0.0 { (r * ext.max, r * ext.min) } else { (r * ext.min, r * ext.max) }
                })
                .unzip()
        }
    };
    Ok(PathSample { times, max, min })
}

/// `int_0^T max_x |k^t(x)| dt`.
pub fn shelukhin_length(path: &ContactPathSpec, grid_resolution: usize) -> Result<f64> {
    Ok(path_integrals(path, &LengthOptions::new(grid_resolution))?.length)
}

pub fn hypotheses(h: &Hamiltonian, grid_resolution: usize) -> Result<(Hypotheses, Extrema)> {
    let ext = spatial_extrema(h, grid_resolution)?;
    let admissible = admissibility_check_with(h, grid_resolution.max(16), DEFAULT_SAFETY_MARGIN)?.admissible;
    let regular_zero = regular_zero_check(h, grid_resolution)?;
    Ok((Hypotheses { admissible, regular_zero, sign_definite: ext.sign_class() }, ext))
}

fn require(h: &Hamiltonian, grid_resolution: usize) -> Result<Extrema> {
    let (hyp, ext) = hypotheses(h, grid_resolution)?;
    if !hyp.admissible {
        return Err(Error::Hypothesis("Hessian bound is not below 2pi".into()));
    }
    if !hyp.regular_zero {
        return Err(Error::Hypothesis("0 is not a regular value of H inside its support".into()));
    }
    Ok(ext)
}

/// `1 / max{max H, -min H}`, infinite for H = 0.
pub fn t_zero(h: &Hamiltonian) -> Result<f64> {
    t_zero_with(h, default_resolution(h.n()))
}

pub fn t_zero_with(h: &Hamiltonian, grid_resolution: usize) -> Result<f64> {
    let ext = require(h, grid_resolution)?;
    let m = ext.sup_abs();
    Ok(if m == 0.0 { f64::INFINITY } else { 1.0 / m })
}

fn discriminant_from_t0(t0: f64) -> DiscreteLength {
    if t0 == 0.0 {
        DiscreteLength::Infinite
    } else if t0.is_infinite() {
        // constant path, reported by convention
        DiscreteLength::Finite(1)
    } else {
        DiscreteLength::Finite(floor_plus_one(1.0 / t0))
    }
}

/// `floor(1/t0) + 1`; the identity path is degenerate and reported as 1.
pub fn discriminant_length_autonomous(h: &Hamiltonian) -> Result<DiscreteLength> {
    discriminant_length_autonomous_with(h, default_resolution(h.n()))
}

pub fn discriminant_length_autonomous_with(h: &Hamiltonian, grid_resolution: usize) -> Result<DiscreteLength> {
    Ok(discriminant_from_t0(t_zero_with(h, grid_resolution)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    pub max_h: f64,
    pub min_h: f64,
    pub shelukhin_length: f64,
    pub shelukhin_norm: Gated<f64>,
    pub discriminant_length: Gated<DiscreteLength>,
    pub discriminant_norm: Gated<u64>,
    pub oscillation_norm: Gated<u64>,
    pub fpr_norm: Gated<u64>,
    pub t_zero: Option<f64>,
    /// The identity: lengths of the constant path are conventions, all norms are 0.
    pub degenerate: bool,
    pub hypotheses: Hypotheses,
}

impl NormReport {
    /// Certified values of the norms in the order S, FPR, d, osc.
    pub fn certified(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![];
        if let Some(v) = self.shelukhin_norm.value() {
            out.push(("shelukhin", v));
        }
        if let Some(v) = self.fpr_norm.value() {
            out.push(("fpr", v as f64));
        }
        if let Some(v) = self.discriminant_norm.value() {
            out.push(("discriminant", v as f64));
        }
        if let Some(v) = self.oscillation_norm.value() {
            out.push(("oscillation", v as f64));
        }
        out
    }
}

pub fn norm_report(h: &Hamiltonian) -> Result<NormReport> {
    norm_report_with(h, default_resolution(h.n()))
}

pub fn norm_report_with(h: &Hamiltonian, grid_resolution: usize) -> Result<NormReport> {
    let (hyp, ext) = hypotheses(h, grid_resolution)?;
    let (mx, mn) = (ext.max, ext.min);
    let sup = ext.sup_abs();
    let degenerate = sup == 0.0;
    let adm = hyp.admissible;
    let disc_ok = adm && hyp.regular_zero;
    const NOT_ADM: &str = "Hessian bound is not below 2pi";
    let disc_reason = if adm { "0 is not a regular value inside the support" } else { NOT_ADM };

    let nu_d = if degenerate { 0 } else { floor_plus_one(mx).max(floor_plus_one(-mn)) };
    let nu_fpr = ceil(mx).max(ceil(-mn));
    let oscillation_norm = if degenerate && disc_ok {
        Gated::Certified { value: 0 }
    } else if !disc_ok {
        Gated::NotCertified { reason: disc_reason.into() }
    } else {
        match hyp.sign_definite {
            SignClass::Nonneg => Gated::Certified { value: floor_plus_one(mx) },
            SignClass::Nonpos => Gated::Certified { value: floor_plus_one(-mn) },
            SignClass::Mixed => Gated::NotApplicable { reason: "H changes sign".into() },
        }
    };
    let t0 = if disc_ok { Some(if degenerate { f64::INFINITY } else { 1.0 / sup }) } else { None };
    Ok(NormReport {
        max_h: mx,
        min_h: mn,
        shelukhin_length: sup,
        shelukhin_norm: Gated::gate(adm, sup, NOT_ADM),
        discriminant_length: match t0 {
            Some(t) => Gated::Certified { value: discriminant_from_t0(t) },
            None => Gated::NotCertified { reason: disc_reason.into() },
        },
        discriminant_norm: Gated::gate(disc_ok, nu_d, disc_reason),
        oscillation_norm,
        fpr_norm: Gated::gate(adm, nu_fpr, NOT_ADM),
        t_zero: t0.filter(|t| t.is_finite()),
        degenerate,
        hypotheses: hyp,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectorAudit {
    pub c: f64,
    pub c_inverse: f64,
    pub integral_max: f64,
    /// `-int min k^t dt`.
    pub neg_integral_min: f64,
    pub slack: f64,
    pub slack_inverse: f64,
    /// Both inequalities are equalities within the audit tolerance.
    pub equality: bool,
}

/// `c <= int max k^t` and `c_inv <= -int min k^t` for any representative path.
pub fn selector_lower_bound_audit(path: &ContactPathSpec, c_value: f64, c_inverse_value: f64) -> Result<SelectorAudit> {
    let n = path.hamiltonian.n();
    selector_lower_bound_audit_with(path, c_value, c_inverse_value, &LengthOptions::new(default_resolution(n)))
}

pub fn selector_lower_bound_audit_with(
    path: &ContactPathSpec,
    c_value: f64,
    c_inverse_value: f64,
    opts: &LengthOptions,
) -> Result<SelectorAudit> {
    let ints = path_integrals(path, opts)?;
    let slack = ints.integral_max - c_value;
    let slack_inverse = -ints.integral_min - c_inverse_value;
    if slack < -AUDIT_TOL || slack_inverse < -AUDIT_TOL {
        return Err(Error::Integrity(format!(
            "selector exceeds the path integral: c = {c_value} vs {}, c_inv = {c_inverse_value} vs {}",
            ints.integral_max, -ints.integral_min
        )));
    }
    Ok(SelectorAudit {
        c: c_value,
        c_inverse: c_inverse_value,
        integral_max: ints.integral_max,
        neg_integral_min: -ints.integral_min,
        slack,
        slack_inverse,
        equality: slack.abs() <= AUDIT_TOL && slack_inverse.abs() <= AUDIT_TOL,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FloorAudit {
    pub c: f64,
    pub c_inverse: f64,
    pub bound: u64,
    pub bound_inverse: u64,
    pub discriminant_norm: u64,
    pub degenerate: bool,
}

/// `max{floor c + 1, floor c_inv + 1} = nu_d`, using the selector from the
/// critical points and the norm from the spatial extrema.
pub fn floor_lower_bound_audit(h: &Hamiltonian) -> Result<FloorAudit> {
    floor_lower_bound_audit_with(h, default_resolution(h.n()))
}

pub fn floor_lower_bound_audit_with(h: &Hamiltonian, grid_resolution: usize) -> Result<FloorAudit> {
    let ext = require(h, grid_resolution)?;
    let c = translation_selector_with(h, 1.0, grid_resolution)?;
    let c_inverse = translation_selector_inverse_with(h, 1.0, grid_resolution)?;
    if ext.sup_abs() == 0.0 && c == 0.0 && c_inverse == 0.0 {
        return Ok(FloorAudit { c, c_inverse, bound: 0, bound_inverse: 0, discriminant_norm: 0, degenerate: true });
    }
    let nu_d = floor_plus_one(ext.max).max(floor_plus_one(-ext.min));
    let (b, bi) = (floor_plus_one(c), floor_plus_one(c_inverse));
    if b > nu_d || bi > nu_d || b.max(bi) != nu_d {
        return Err(Error::Integrity(format!(
            "floor bound mismatch: floor(c)+1 = {b}, floor(c_inv)+1 = {bi}, nu_d = {nu_d}"
        )));
    }
    Ok(FloorAudit { c, c_inverse, bound: b, bound_inverse: bi, discriminant_norm: nu_d, degenerate: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::Schedule;
    use crate::hamiltonian::{BumpParams, Term, WeightedTerm};

    fn bump(b: f64, a: f64) -> Hamiltonian {
        Hamiltonian::radial_bump(1, BumpParams::new(b, a).unwrap()).unwrap()
    }

    fn signed(max: f64, min: f64) -> Hamiltonian {
        Hamiltonian::from_terms(
            1,
            vec![
                WeightedTerm { weight: 1.0, term: Term::radial_bump(4.0, max, vec![-2.5, 0.0]).unwrap() },
                WeightedTerm { weight: -1.0, term: Term::radial_bump(6.0, -min, vec![2.5, 0.0]).unwrap() },
            ],
        )
        .unwrap()
    }

    #[test]
    fn snapping_only_near_integers() {
        assert_eq!(snap(2.9999999999995), 3.0);
        assert_eq!(snap(2.99), 2.99);
        assert_eq!(floor_plus_one(1.0), 2);
        assert_eq!(ceil(1.0), 1);
    }

    #[test]
    fn bump_norms() {
        let r = norm_report_with(&bump(6.0, 2.5), 128).unwrap();
        assert!((r.shelukhin_norm.value().unwrap() - 2.5).abs() < 1e-9);
        assert_eq!(r.fpr_norm.value(), Some(3));
        assert_eq!(r.discriminant_norm.value(), Some(3));
        assert_eq!(r.oscillation_norm.value(), Some(3));
        assert_eq!(r.discriminant_length.value(), Some(DiscreteLength::Finite(3)));
        assert!((r.t_zero.unwrap() - 0.4).abs() < 1e-9);
    }

    #[test]
    fn zero_norms() {
        let r = norm_report_with(&Hamiltonian::zero(1), 64).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.certified().iter().map(|c| c.1).collect::<Vec<_>>(), vec![0.0; 4]);
        assert_eq!(t_zero_with(&Hamiltonian::zero(1), 64).unwrap(), f64::INFINITY);
        assert_eq!(discriminant_length_autonomous_with(&Hamiltonian::zero(1), 64).unwrap(), DiscreteLength::Finite(1));
    }

    #[test]
    fn mixed_sign_norms() {
        let r = norm_report_with(&signed(1.7, -0.3), 128).unwrap();
        assert_eq!(r.hypotheses.sign_definite, SignClass::Mixed);
        assert!((r.shelukhin_norm.value().unwrap() - 1.7).abs() < 1e-9);
        assert_eq!(r.fpr_norm.value(), Some(2));
        assert_eq!(r.discriminant_norm.value(), Some(2));
        assert!(matches!(r.oscillation_norm, Gated::NotApplicable { .. }));
    }

    #[test]
    fn integer_branch_of_discriminant_length() {
        let h = signed(1.0, -2.0);
        assert!((t_zero_with(&h, 128).unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(discriminant_length_autonomous_with(&h, 128).unwrap(), DiscreteLength::Finite(3));
    }

    #[test]
    fn inadmissible_is_not_certified() {
        let h = Hamiltonian::quadratic_core(1, 7.0, 1.0, 2.0).unwrap();
        let r = norm_report_with(&h, 64).unwrap();
        assert!(r.certified().is_empty());
        assert!(r.shelukhin_length > 0.0);
        assert!(matches!(t_zero_with(&h, 64), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn reparametrized_length_scales_with_variation() {
        let h = bump(6.0, 2.5);
        let s = crate::flow::schedule::back_and_forth_with_variation(3.0, 2).unwrap();
        let path = ContactPathSpec::scheduled(h.clone(), s);
        let len = shelukhin_length(&path, 64).unwrap();
        assert!((len - 7.5).abs() < 1e-6, "{len}");
        let inv = shelukhin_length(&path.inverse().unwrap(), 64).unwrap();
        assert!((inv - len).abs() < 1e-9);
        let mono = ContactPathSpec::scheduled(h, Schedule::Power { p: 3.0 });
        assert!((shelukhin_length(&mono, 64).unwrap() - 2.5).abs() < 1e-9);
    }

    #[test]
    fn selector_audits() {
        let h = bump(6.0, 2.5);
        let opts = LengthOptions::new(64);
        let eq = selector_lower_bound_audit_with(&ContactPathSpec::autonomous(h.clone()), 2.5, 0.0, &opts).unwrap();
        assert!(eq.equality);
        let s = crate::flow::schedule::back_and_forth_with_variation(3.0, 1).unwrap();
        let bf = selector_lower_bound_audit_with(&ContactPathSpec::scheduled(h.clone(), s), 2.5, 0.0, &opts).unwrap();
        assert!(!bf.equality && bf.slack > 1.0);
        assert!((bf.integral_max - 2.5 * s.positive_variation()).abs() < 1e-9);
        let z = selector_lower_bound_audit_with(&ContactPathSpec::autonomous(Hamiltonian::zero(1)), 0.0, 0.0, &opts).unwrap();
        assert!(z.equality);
        assert!(matches!(
            selector_lower_bound_audit_with(&ContactPathSpec::autonomous(h), 3.0, 0.0, &opts),
            Err(Error::Integrity(_))
        ));
    }

    #[test]
    fn floor_audits() {
        let a = floor_lower_bound_audit_with(&bump(6.0, 2.5), 128).unwrap();
        assert_eq!((a.bound, a.discriminant_norm), (3, 3));
        let b = floor_lower_bound_audit_with(&bump(8.0, 3.0), 128).unwrap();
        assert_eq!((b.bound, b.discriminant_norm), (4, 4));
        assert!(floor_lower_bound_audit_with(&Hamiltonian::zero(1), 64).unwrap().degenerate);
    }
}
