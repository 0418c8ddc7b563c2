//! Translated points, discriminant points, the spectrum and the translation selector.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::flow::{flow_and_shift, integrate_contact, step_count, ContactPathSpec, DEFAULT_STEP};
use crate::geometry::{distance, norm, CylinderPoint, EuclideanPoint, Grid};
use crate::hamiltonian::analysis::lex_cmp;
use crate::hamiltonian::{
    admissibility_check_with, critical_points, default_resolution, AdmissibilityReport, CriticalPoint,
    CriticalPointReport, Hamiltonian, DEFAULT_SAFETY_MARGIN, FLAT_TOL, NEWTON_TOL,
};
use crate::linalg::lstsq;

/// Translations within this of an integer count as discriminant points.
pub const INTEGER_TOL: f64 = 1e-6;
/// Critical values closer than this are merged in the spectrum.
pub const VALUE_MERGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct TranslatedPoint {
    pub location: CylinderPoint,
    pub translation: f64,
    pub fixed_point_residual: f64,
    pub conformal_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumEntry {
    pub value: f64,
    pub witnesses: Vec<CriticalPoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub values: Vec<f64>,
    pub entries: Vec<SpectrumEntry>,
    pub time_scale: f64,
    pub admissibility: AdmissibilityReport,
}

fn require_admissible(h: &Hamiltonian, grid_resolution: usize) -> Result<AdmissibilityReport> {
    let adm = admissibility_check_with(h, grid_resolution.max(16), DEFAULT_SAFETY_MARGIN)?;
    if !adm.admissible {
        return Err(Error::Hypothesis(format!(
            "sup |Hess H| = {:.6} is not below 2pi - {}; the spectrum formula does not apply",
            adm.bound, adm.safety_margin
        )));
    }
    Ok(adm)
}

/// Distinct critical values with their witnesses (exterior 0 included).
fn critical_values(report: &CriticalPointReport) -> Vec<SpectrumEntry> {
    let mut pts: Vec<&CriticalPoint> = report.points.iter().collect();
    pts.sort_by(|a, b| a.value.total_cmp(&b.value).then(lex_cmp(a.location.coords(), b.location.coords())));
    let mut out: Vec<SpectrumEntry> = Vec::new();
    for c in pts {
        match out.last_mut() {
            Some(e) if (c.value - e.value).abs() <= VALUE_MERGE_TOL => e.witnesses.push(c.clone()),
            _ => out.push(SpectrumEntry { value: c.value, witnesses: vec![c.clone()] }),
        }
    }
    out
}

pub fn spectrum_autonomous(h: &Hamiltonian, t: f64) -> Result<SpectrumReport> {
    spectrum_autonomous_with(h, t, default_resolution(h.n()), NEWTON_TOL)
}

/// `{t H(p) : dH(p) = 0}`, refused unless H is admissible.
pub fn spectrum_autonomous_with(h: &Hamiltonian, t: f64, grid_resolution: usize, tol: f64) -> Result<SpectrumReport> {
    if !t.is_finite() {
        return domain("time must be finite");
    }
    let admissibility = require_admissible(h, grid_resolution)?;
    let crit = critical_points(h, grid_resolution, tol)?;
    let mut entries = critical_values(&crit);
    for e in &mut entries {
        e.value *= t;
    }
    if t < 0.0 {
        entries.reverse();
    }
    // t = 0 collapses everything onto 0
    let mut merged: Vec<SpectrumEntry> = Vec::new();
    for e in entries {
        match merged.last_mut() {
            Some(m) if m.value == e.value => m.witnesses.extend(e.witnesses),
            _ => merged.push(e),
        }
    }
    Ok(SpectrumReport { values: merged.iter().map(|e| e.value).collect(), entries: merged, time_scale: t, admissibility })
}

/// Largest and smallest critical values, each clamped against the exterior 0.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriticalRange {
    pub max: f64,
    pub min: f64,
}

pub fn critical_range(h: &Hamiltonian, grid_resolution: usize) -> Result<CriticalRange> {
    let crit = critical_points(h, grid_resolution, NEWTON_TOL)?;
    let max = crit.points.iter().map(|c| c.value).fold(0.0, f64::max);
    let min = crit.points.iter().map(|c| c.value).fold(0.0, f64::min);
    Ok(CriticalRange { max, min })
}

fn check_unit_time(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return domain(format!("selector time must lie in [0, 1], got {t}"));
    }
    Ok(())
}

/// `c(phi_H^t) = t max H`.
pub fn translation_selector(h: &Hamiltonian, t: f64) -> Result<f64> {
    translation_selector_with(h, t, default_resolution(h.n()))
}

pub fn translation_selector_with(h: &Hamiltonian, t: f64, grid_resolution: usize) -> Result<f64> {
    check_unit_time(t)?;
    require_admissible(h, grid_resolution)?;
    Ok(t * critical_range(h, grid_resolution)?.max)
}

/// `c((phi_H^t)^{-1}) = -t min H`.
pub fn translation_selector_inverse(h: &Hamiltonian, t: f64) -> Result<f64> {
    translation_selector_inverse_with(h, t, default_resolution(h.n()))
}

pub fn translation_selector_inverse_with(h: &Hamiltonian, t: f64, grid_resolution: usize) -> Result<f64> {
    check_unit_time(t)?;
    require_admissible(h, grid_resolution)?;
    let v = -t * critical_range(h, grid_resolution)?.min;
    Ok(if v == 0.0 { 0.0 } else { v })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanOptions {
    pub grid_resolution: usize,
    /// Newton tolerance on `|psi^t(p) - p|`.
    pub tol: f64,
    pub step: f64,
    /// Seeds need `|psi^t(p) - p| < seed_factor * grid spacing`.
    pub seed_factor: f64,
}

impl ScanOptions {
    pub fn for_dim(n: usize) -> Self {
        Self { grid_resolution: default_resolution(n), tol: 1e-9, step: DEFAULT_STEP, seed_factor: 10.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExteriorSummary {
    /// Every point outside the support is a translated point with this translation.
    pub translation: f64,
    /// Seeds or refined points that landed in a flat region and were folded into the exterior.
    pub absorbed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct UnresolvedFixedPoint {
    pub seed: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BruteForceReport {
    pub time: f64,
    pub points: Vec<TranslatedPoint>,
    pub exterior: ExteriorSummary,
    pub unresolved: Vec<UnresolvedFixedPoint>,
    pub grid_spacing: f64,
}

impl BruteForceReport {
    /// Distinct translations, exterior included, ascending.
    pub fn translations(&self, merge_tol: f64) -> Vec<f64> {
        let mut v: Vec<f64> = self.points.iter().map(|p| p.translation).collect();
        v.push(self.exterior.translation);
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() <= merge_tol);
        v
    }
}

fn flow_end(h: &Hamiltonian, p: &[f64], t: f64, step: f64) -> Vec<f64> {
    crate::flow::rk4_flow(h, p, t, step_count(t, step), |_, _| {})
}

fn displacement(h: &Hamiltonian, p: &[f64], t: f64, step: f64) -> Vec<f64> {
    let end = flow_end(h, p, t, step);
    end.iter().zip(p).map(|(a, b)| a - b).collect()
}

/// Newton on `psi^t(p) - p = 0` from `seed`, finite-difference Jacobian, SVD step.
fn refine_fixed_point(h: &Hamiltonian, seed: &[f64], t: f64, opts: &ScanOptions) -> std::result::Result<Vec<f64>, (Vec<f64>, f64)> {
    let d = seed.len();
    let mut p = seed.to_vec();
    let mut g = displacement(h, &p, t, opts.step);
    let mut gn = norm(&g);
    let delta = 1e-6;
    for _ in 0..40 {
        if gn < opts.tol {
            return Ok(p);
        }
        let mut jac = DMatrix::zeros(d, d);
        let mut q = p.clone();
        for j in 0..d {
            q[j] = p[j] + delta;
            let fp = displacement(h, &q, t, opts.step);
            q[j] = p[j] - delta;
            let fm = displacement(h, &q, t, opts.step);
            q[j] = p[j];
            for i in 0..d {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * delta);
            }
        }
        let step = lstsq(&jac, &-DVector::from_vec(g.clone()));
        let mut alpha = 1.0;
        let mut moved = false;
        while alpha > 1e-3 {
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, s)| a + alpha * s).collect();
            let gt = displacement(h, &trial, t, opts.step);
            let gtn = norm(&gt);
            if gtn < gn {
                p = trial;
                g = gt;
                gn = gtn;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if gn < opts.tol {
        Ok(p)
    } else {
        Err((p, gn))
    }
}

enum Refined {
    Point(TranslatedPoint),
    Flat,
    Unresolved(UnresolvedFixedPoint),
}

fn refine_translated(h: &Hamiltonian, seed: &[f64], t: f64, opts: &ScanOptions) -> Result<Refined> {
    match refine_fixed_point(h, seed, t, opts) {
        Ok(p) => {
            let bx = h.support_box();
            if !bx.contains_open(&p) || h.is_flat_at(&p, FLAT_TOL) {
                return Ok(Refined::Flat);
            }
            let steps = step_count(t, opts.step);
            let (end, shift) = flow_and_shift(h, &p, t, steps);
            let residual = distance(&end, &p);
            let mut spec = ContactPathSpec::autonomous(h.clone());
            spec.integrator.step = opts.step;
            let q0 = CylinderPoint::new(EuclideanPoint::from_raw(p.clone()), 0.0);
            let lift = integrate_contact(&spec, &q0, t)?;
            Ok(Refined::Point(TranslatedPoint {
                location: q0,
                translation: shift,
                fixed_point_residual: residual,
                conformal_residual: lift.conformal.abs(),
            }))
        }
        Err((p, res)) => {
            if h.is_flat_at(&p, FLAT_TOL) {
                Ok(Refined::Flat)
            } else {
                Ok(Refined::Unresolved(UnresolvedFixedPoint { seed: seed.to_vec(), residual: res }))
            }
        }
    }
}

pub fn brute_force_translated_points(h: &Hamiltonian, t: f64, grid_resolution: usize, tol: f64) -> Result<BruteForceReport> {
    let opts = ScanOptions { grid_resolution, tol, ..ScanOptions::for_dim(h.n()) };
    brute_force_translated_points_with(h, t, &opts)
}

/// Independent oracle: grid scan of `|psi^t(p) - p|`, Newton on the fixed-point
/// equation, translation `F^t(p)` at each solution. The support complement is
/// kept symbolic (translation 0).
pub fn brute_force_translated_points_with(h: &Hamiltonian, t: f64, opts: &ScanOptions) -> Result<BruteForceReport> {
    if !(opts.tol > 0.0) || !(opts.step > 0.0) || !t.is_finite() {
        return domain("brute force needs finite t and positive tol and step");
    }
    let exterior = |absorbed| ExteriorSummary { translation: 0.0, absorbed };
    let bx = h.support_box();
    let Some(grid) = Grid::new(bx, opts.grid_resolution.max(3)) else {
        return Ok(BruteForceReport { time: t, points: vec![], exterior: exterior(0), unresolved: vec![], grid_spacing: 0.0 });
    };
    let spacing = grid.spacing();
    let disp: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let p = grid.point(i);
            if bx.contains_open(&p) && h.open_support_contains(&p) {
                norm(&displacement(h, &p, t, opts.step))
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let seeds: Vec<usize> = (0..grid.len())
        .filter(|&i| disp[i] < opts.seed_factor * spacing)
        .filter(|&i| {
            grid.neighbors(i).into_iter().all(|j| disp[i] < disp[j] || (disp[i] == disp[j] && i < j))
        })
        .collect();

    let refined: Vec<Refined> = seeds
        .par_iter()
        .map(|&i| {
            let p = grid.point(i);
            if h.is_flat_at(&p, FLAT_TOL) {
                return Ok(Refined::Flat);
            }
            refine_translated(h, &p, t, opts)
        })
        .collect::<Result<_>>()?;

    let mut absorbed = 0;
    let mut found = Vec::new();
    let mut unresolved = Vec::new();
    for r in refined {
        match r {
            Refined::Point(p) => found.push(p),
            Refined::Flat => absorbed += 1,
            Refined::Unresolved(u) => unresolved.push(u),
        }
    }
    found.sort_by(|a, b| lex_cmp(a.location.base.coords(), b.location.base.coords()));
    let mut points: Vec<TranslatedPoint> = Vec::new();
    for c in found {
        match points.iter_mut().find(|q| q.location.base.distance(&c.location.base) <= 2.0 * spacing) {
            Some(q) => {
                if c.fixed_point_residual < q.fixed_point_residual {
                    *q = c;
                }
            }
            None => points.push(c),
        }
    }
    points.sort_by(|a, b| {
        a.translation.total_cmp(&b.translation).then(lex_cmp(a.location.base.coords(), b.location.base.coords()))
    });
    Ok(BruteForceReport { time: t, points, exterior: exterior(absorbed), unresolved, grid_spacing: spacing })
}

fn is_discriminant(p: &TranslatedPoint) -> bool {
    (p.translation - p.translation.round()).abs() < INTEGER_TOL && p.conformal_residual < INTEGER_TOL
}

/// Brute-force translated points with integer translation inside the open support box.
pub fn discriminant_points(h: &Hamiltonian, t: f64, grid_resolution: usize) -> Result<Vec<TranslatedPoint>> {
    let opts = ScanOptions { grid_resolution, ..ScanOptions::for_dim(h.n()) };
    discriminant_points_with(h, t, &opts)
}

pub fn discriminant_points_with(h: &Hamiltonian, t: f64, opts: &ScanOptions) -> Result<Vec<TranslatedPoint>> {
    let report = brute_force_translated_points_with(h, t, opts)?;
    Ok(report.points.into_iter().filter(is_discriminant).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscriminantOnset {
    pub time: f64,
    pub base: Vec<f64>,
    pub translation: f64,
    /// Discriminant points confirmed by a fresh Newton solve at `time`.
    pub confirmed: bool,
}

/// Earliest `t` in `(0, t_max]` at which an interior discriminant point appears.
///
/// Coarse scan over `coarse_steps` times with the brute-force oracle, then
/// bisection in `t` on the translation of the branch that crosses a non-zero
/// integer, continued from its base point by local Newton solves.
pub fn first_discriminant_time(
    h: &Hamiltonian,
    t_max: f64,
    coarse_steps: usize,
    opts: &ScanOptions,
) -> Result<Option<DiscriminantOnset>> {
    if !(t_max > 0.0) || coarse_steps < 2 {
        return domain("first_discriminant_time needs t_max > 0 and at least 2 coarse steps");
    }
    let translation_at = |base: &[f64], t: f64| -> Option<(Vec<f64>, f64)> {
        match refine_translated(h, base, t, opts).ok()? {
            Refined::Point(p) => Some((p.location.base.coords().to_vec(), p.translation)),
            _ => None,
        }
    };
    let mut prev: Vec<(Vec<f64>, f64)> = vec![];
    let mut t_prev = 0.0;
    for k in 1..=coarse_steps {
        let t = t_max * k as f64 / coarse_steps as f64;
        let report = brute_force_translated_points_with(h, t, opts)?;
        let mut best: Option<DiscriminantOnset> = None;
        for p in &report.points {
            let base = p.location.base.coords().to_vec();
            let tau = p.translation;
            // translation of the same branch at the previous time (0 at t = 0)
            let tau_prev = if t_prev == 0.0 {
                0.0
            } else {
                match prev.iter().find(|(b, _)| distance(b, &base) <= 3.0 * report.grid_spacing) {
                    Some((_, v)) => *v,
                    None => match translation_at(&base, t_prev) {
                        Some((_, v)) => v,
                        None => continue,
                    },
                }
            };
            let (lo_v, hi_v) = (tau_prev.min(tau), tau_prev.max(tau));
            let target = if tau >= tau_prev { lo_v.floor() + 1.0 } else { hi_v.ceil() - 1.0 };
            let hits = |m: f64| m != 0.0 && m >= lo_v - INTEGER_TOL && m <= hi_v + INTEGER_TOL;
            let m = if hits(target) {
                target
            } else if is_discriminant(p) && tau.round() != 0.0 {
                tau.round()
            } else {
                continue;
            };
            // bisection on the branch translation
            let (mut a, mut b) = (t_prev, t);
            let mut base_b = base.clone();
            // side of m before the crossing; tau itself may sit exactly on m
            let sign_a = (tau_prev - m).signum();
            for _ in 0..60 {
                if b - a < 1e-9 {
                    break;
                }
                let mid = 0.5 * (a + b);
                let Some((bm, vm)) = translation_at(&base_b, mid) else { break };
                if (vm - m).abs() >= INTEGER_TOL * 1e-3 && (vm - m).signum() == sign_a {
                    a = mid;
                } else {
                    b = mid;
                    base_b = bm;
                }
            }
            let confirmed = translation_at(&base_b, b).is_some_and(|(_, v)| (v - m).abs() < INTEGER_TOL);
            let onset = DiscriminantOnset { time: b, base: base_b, translation: m, confirmed };
            if best.as_ref().map_or(true, |o| onset.time < o.time) {
                best = Some(onset);
            }
        }
        if best.is_some() {
            return Ok(best);
        }
        prev = report.points.iter().map(|p| (p.location.base.coords().to_vec(), p.translation)).collect();
        t_prev = t;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{BumpParams, Term, WeightedTerm};

    fn bump(b: f64, a: f64) -> Hamiltonian {
        Hamiltonian::radial_bump(1, BumpParams::new(b, a).unwrap()).unwrap()
    }

    fn two_bump(w2: f64) -> Hamiltonian {
        Hamiltonian::from_terms(
            1,
            vec![
                WeightedTerm { weight: 1.0, term: Term::radial_bump(4.0, 1.2, vec![-2.5, 0.0]).unwrap() },
                WeightedTerm { weight: w2, term: Term::radial_bump(6.0, 2.5, vec![2.5, 0.0]).unwrap() },
            ],
        )
        .unwrap()
    }

    #[test]
    fn spectrum_examples() {
        let h = bump(6.0, 2.5);
        let s = spectrum_autonomous_with(&h, 1.0, 128, NEWTON_TOL).unwrap();
        assert_eq!(s.values.len(), 2);
        assert!(s.values[0] == 0.0 && (s.values[1] - 2.5).abs() < 1e-12);
        let s0 = spectrum_autonomous_with(&h, 0.0, 128, NEWTON_TOL).unwrap();
        assert_eq!(s0.values, vec![0.0]);
        let s2 = spectrum_autonomous_with(&two_bump(1.0), 0.5, 128, NEWTON_TOL).unwrap();
        assert_eq!(s2.values.len(), 3);
        assert!((s2.values[1] - 0.6).abs() < 1e-12 && (s2.values[2] - 1.25).abs() < 1e-12);
    }

    #[test]
    fn spectrum_refuses_inadmissible() {
        let h = Hamiltonian::quadratic_core(1, 7.0, 1.0, 2.0).unwrap();
        assert!(matches!(spectrum_autonomous_with(&h, 1.0, 64, NEWTON_TOL), Err(Error::Hypothesis(_))));
        assert!(matches!(translation_selector_with(&h, 1.0, 64), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn selector_examples() {
        let h = bump(6.0, 2.5);
        assert!((translation_selector_with(&h, 1.0, 128).unwrap() - 2.5).abs() < 1e-12);
        assert_eq!(translation_selector_with(&h, 0.0, 128).unwrap(), 0.0);
        assert_eq!(translation_selector_inverse_with(&h, 1.0, 128).unwrap(), 0.0);
        let neg = h.negated();
        assert_eq!(translation_selector_with(&neg, 1.0, 128).unwrap(), 0.0);
        assert!((translation_selector_inverse_with(&neg, 1.0, 128).unwrap() - 2.5).abs() < 1e-12);
        let signed = two_bump(-1.0).negated();
        assert!((translation_selector_inverse_with(&signed, 0.5, 128).unwrap() - 0.6).abs() < 1e-12);
        assert!(translation_selector_with(&h, 1.5, 128).is_err());
    }

    #[test]
    fn brute_force_matches_spectrum_on_bump() {
        let h = bump(6.0, 2.5);
        let r = brute_force_translated_points(&h, 1.0, 64, 1e-9).unwrap();
        assert_eq!(r.points.len(), 1, "{:?}", r.points);
        assert!(r.points[0].location.base.norm() < 1e-9);
        assert!((r.points[0].translation - 2.5).abs() < 1e-12);
        assert!(r.unresolved.is_empty());
        assert_eq!(r.translations(1e-9), vec![0.0, 2.5]);
    }

    #[test]
    fn discriminant_points_on_bump() {
        let h = bump(6.0, 2.5);
        let d = discriminant_points(&h, 0.4, 64).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d[0].translation - 1.0).abs() < 1e-12);
        assert!(discriminant_points(&h, 0.3, 64).unwrap().is_empty());
        assert!(discriminant_points(&Hamiltonian::zero(1), 0.7, 64).unwrap().is_empty());
    }

    #[test]
    fn onset_of_first_discriminant_point() {
        let h = bump(6.0, 2.5);
        let opts = ScanOptions { grid_resolution: 32, ..ScanOptions::for_dim(1) };
        let o = first_discriminant_time(&h, 1.0, 10, &opts).unwrap().unwrap();
        assert!((o.time - 0.4).abs() < 1e-6, "{o:?}");
        assert!(o.confirmed);
    }

    #[test]
    fn onset_on_a_coarse_node_from_below() {
        // min -2 crosses -1 exactly at the coarse time 0.5
        let h = Hamiltonian::from_terms(
            1,
            vec![
                WeightedTerm { weight: 1.0, term: Term::radial_bump(4.0, 1.0, vec![-2.5, 0.0]).unwrap() },
                WeightedTerm { weight: -1.0, term: Term::radial_bump(6.0, 2.0, vec![2.5, 0.0]).unwrap() },
            ],
        )
        .unwrap();
        let opts = ScanOptions { grid_resolution: 32, ..ScanOptions::for_dim(1) };
        let o = first_discriminant_time(&h, 1.0, 10, &opts).unwrap().unwrap();
        assert!((o.time - 0.5).abs() < 1e-6 && o.translation == -1.0 && o.confirmed, "{o:?}");
    }
}
