//! Hessian bounds, admissibility, critical points and the regular-zero test.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::{BumpParams, Hamiltonian};
use crate::error::{domain, Error, Result};
use crate::geometry::{compass_maximize, norm, EuclideanPoint, Grid};
use crate::linalg::{lstsq, operator_norm, signature};

pub const TWO_PI: f64 = 2.0 * PI;
pub const DEFAULT_SAFETY_MARGIN: f64 = 1e-3;
pub const NEWTON_TOL: f64 = 1e-10;
/// |H|, |grad H| and |Hess H| all below this means the point sits in a flat tail.
pub const FLAT_TOL: f64 = 1e-6;
pub const ZERO_VALUE_TOL: f64 = 1e-6;
pub const ZERO_GRAD_TOL: f64 = 1e-5;
const TOP_CELLS: usize = 5;
const MAX_ZERO_SEEDS: usize = 32;

pub fn default_resolution(n: usize) -> usize {
    if n <= 1 {
        256
    } else {
        64
    }
}

pub fn hessian_operator_norm(h: &Hamiltonian, p: &EuclideanPoint) -> Result<f64> {
    if p.coords().len() != h.dim() {
        return domain("point dimension does not match the Hamiltonian");
    }
    operator_norm(&h.hessian(p.coords()))
}

#[derive(Debug, Clone, Serialize)]
pub struct HessianBound {
    pub bound: f64,
    pub witness: Option<Vec<f64>>,
    pub grid_resolution: usize,
    pub grid_spacing: f64,
}

// Keeps the k best (value desc, index asc) entries; order-independent, so the
// parallel fold is deterministic.
fn merge_top(mut a: Vec<(f64, usize)>, b: Vec<(f64, usize)>, k: usize) -> Vec<(f64, usize)> {
    a.extend(b);
    a.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    a.truncate(k);
    a
}

pub fn global_hessian_bound(h: &Hamiltonian, grid_resolution: usize) -> Result<HessianBound> {
    if grid_resolution < 16 {
        return domain(format!("grid resolution must be >= 16, got {grid_resolution}"));
    }
    let Some(grid) = Grid::new(h.support_box(), grid_resolution) else {
        return Ok(HessianBound { bound: 0.0, witness: None, grid_resolution, grid_spacing: 0.0 });
    };
    let top = (0..grid.len())
        .into_par_iter()
        .map(|i| operator_norm(&h.hessian(&grid.point(i))).map(|v| vec![(v, i)]))
        .try_reduce(Vec::new, |a, b| Ok(merge_top(a, b, TOP_CELLS)))?;

    let spacing = grid.spacing();
    let f = |p: &[f64]| operator_norm(&h.hessian(p)).unwrap_or(f64::NEG_INFINITY);
    let mut best = (0.0, None);
    for &(v, i) in &top {
        let (x, fx) = compass_maximize(f, &grid.point(i), spacing, spacing * 1e-7, h.support_box());
        let (x, fx) = if fx >= v { (x, fx) } else { (grid.point(i), v) };
        if best.1.is_none() || fx > best.0 {
            best = (fx, Some(x));
        }
    }
    Ok(HessianBound { bound: best.0, witness: best.1, grid_resolution, grid_spacing: spacing })
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub bound: f64,
    pub admissible: bool,
    /// `2 pi - bound`.
    pub margin: f64,
    pub safety_margin: f64,
    pub witness: Option<Vec<f64>>,
    pub grid_resolution: usize,
    pub grid_spacing: f64,
}

pub fn admissibility_check(h: &Hamiltonian) -> Result<AdmissibilityReport> {
    admissibility_check_with(h, default_resolution(h.n()), DEFAULT_SAFETY_MARGIN)
}

pub fn admissibility_check_with(
    h: &Hamiltonian,
    grid_resolution: usize,
    safety_margin: f64,
) -> Result<AdmissibilityReport> {
    let hb = global_hessian_bound(h, grid_resolution)?;
    Ok(AdmissibilityReport {
        bound: hb.bound,
        admissible: hb.bound < TWO_PI - safety_margin,
        margin: TWO_PI - hb.bound,
        safety_margin,
        witness: hb.witness,
        grid_resolution,
        grid_spacing: hb.grid_spacing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Interior,
    /// Stands for the whole support complement, where H vanishes identically.
    Exterior,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    pub location: EuclideanPoint,
    pub value: f64,
    pub gradient_residual: f64,
    pub hessian_signature: (usize, usize, usize),
    pub kind: CriticalKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct UnresolvedSeed {
    pub seed: Vec<f64>,
    pub gradient_residual: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPointReport {
    /// Interior points first (lexicographic), then the synthetic exterior entry.
    pub points: Vec<CriticalPoint>,
    /// Converged or seeded points that sat in a flat tail and were folded into the exterior.
    pub absorbed_flat: usize,
    pub unresolved: Vec<UnresolvedSeed>,
    pub grid_resolution: usize,
    pub grid_spacing: f64,
}

impl CriticalPointReport {
    pub fn interior(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.points.iter().filter(|c| c.kind == CriticalKind::Interior)
    }

    /// Distinct critical values (including the exterior 0), ascending.
    pub fn values(&self, merge_tol: f64) -> Vec<f64> {
        let mut v: Vec<f64> = self.points.iter().map(|c| c.value).collect();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() <= merge_tol);
        v
    }
}

fn exterior_entry(h: &Hamiltonian) -> CriticalPoint {
    let d = h.dim();
    CriticalPoint {
        location: EuclideanPoint::from_raw(h.support_box().exterior_point()),
        value: 0.0,
        gradient_residual: 0.0,
        hessian_signature: (0, d, 0),
        kind: CriticalKind::Exterior,
    }
}

/// Local minima of `m` over the grid with ties broken by index, restricted to `keep`.
fn grid_local_minima(grid: &Grid, m: &[f64], keep: impl Fn(usize) -> bool) -> Vec<usize> {
    (0..grid.len())
        .filter(|&i| m[i].is_finite() && keep(i))
        .filter(|&i| {
            grid.neighbors(i)
                .into_iter()
                .all(|j| m[i] < m[j] || (m[i] == m[j] && i < j) || !m[j].is_finite())
        })
        .collect()
}

enum NewtonOutcome {
    Converged(Vec<f64>, f64),
    Failed(Vec<f64>, f64, String),
}

fn newton_gradient(h: &Hamiltonian, seed: &[f64], tol: f64) -> NewtonOutcome {
    let mut p = seed.to_vec();
    let mut g = h.gradient(&p);
    let mut gn = norm(&g);
    for _ in 0..60 {
        if gn < tol {
            return NewtonOutcome::Converged(p, gn);
        }
        let hess = h.hessian(&p);
        let step = lstsq(&hess, &-DVector::from_vec(g.clone()));
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-4 {
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, s)| a + alpha * s).collect();
            let gt = h.gradient(&trial);
            let gtn = norm(&gt);
            if gtn < gn {
                p = trial;
                g = gt;
                gn = gtn;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return NewtonOutcome::Failed(p, gn, "line search stalled".into());
        }
    }
    if gn < tol {
        NewtonOutcome::Converged(p, gn)
    } else {
        NewtonOutcome::Failed(p, gn, "iteration limit".into())
    }
}

/// Grid scan of |grad H| minima, Newton refinement, clustering at twice the grid spacing.
pub fn critical_points(h: &Hamiltonian, grid_resolution: usize, tol: f64) -> Result<CriticalPointReport> {
    if !(tol > 0.0) {
        return domain("critical point tolerance must be positive");
    }
    let bx = h.support_box();
    let Some(grid) = Grid::new(bx, grid_resolution.max(3)) else {
        return Ok(CriticalPointReport {
            points: vec![exterior_entry(h)],
            absorbed_flat: 0,
            unresolved: vec![],
            grid_resolution,
            grid_spacing: 0.0,
        });
    };
    let spacing = grid.spacing();
    let sqrt_d = (h.dim() as f64).sqrt();
    let gnorm: Vec<f64> = (0..grid.len()).into_par_iter().map(|i| norm(&h.gradient(&grid.point(i)))).collect();
    let minima = grid_local_minima(&grid, &gnorm, |i| bx.contains_open(&grid.point(i)));

    enum Seeded {
        Skip,
        Flat,
        Point(CriticalPoint),
        Unresolved(UnresolvedSeed),
    }
    let seeded: Vec<Seeded> = minima
        .par_iter()
        .map(|&i| {
            let seed = grid.point(i);
            if h.is_flat_at(&seed, FLAT_TOL) {
                return Ok(Seeded::Flat);
            }
            // A critical point within one cell forces |grad| <~ |Hess| * cell diameter.
            let reach = 2.0 * sqrt_d * spacing * operator_norm(&h.hessian(&seed))? + 1e-12;
            if gnorm[i] > reach {
                return Ok(Seeded::Skip);
            }
            Ok(match newton_gradient(h, &seed, tol) {
                NewtonOutcome::Converged(p, res) => {
                    if !bx.contains_open(&p) || h.is_flat_at(&p, FLAT_TOL) {
                        Seeded::Flat
                    } else {
                        Seeded::Point(CriticalPoint {
                            value: h.value(&p),
                            gradient_residual: res,
                            hessian_signature: signature(&h.hessian(&p), 1e-9)?,
                            location: EuclideanPoint::from_raw(p),
                            kind: CriticalKind::Interior,
                        })
                    }
                }
                NewtonOutcome::Failed(p, res, why) => {
                    if h.is_flat_at(&p, FLAT_TOL) {
                        Seeded::Flat
                    } else {
                        Seeded::Unresolved(UnresolvedSeed { seed, gradient_residual: res, reason: why })
                    }
                }
            })
        })
        .collect::<Result<_>>()?;

    let mut absorbed_flat = 0;
    let mut found = Vec::new();
    let mut unresolved = Vec::new();
    for s in seeded {
        match s {
            Seeded::Skip => {}
            Seeded::Flat => absorbed_flat += 1,
            Seeded::Point(c) => found.push(c),
            Seeded::Unresolved(u) => unresolved.push(u),
        }
    }
    found.sort_by(|a, b| lex_cmp(a.location.coords(), b.location.coords()));
    let mut points: Vec<CriticalPoint> = Vec::new();
    for c in found {
        match points.iter_mut().find(|q| q.location.distance(&c.location) <= 2.0 * spacing) {
            Some(q) => {
                if c.gradient_residual < q.gradient_residual {
                    *q = c;
                }
            }
            None => points.push(c),
        }
    }
    points.push(exterior_entry(h));
    Ok(CriticalPointReport { points, absorbed_flat, unresolved, grid_resolution, grid_spacing: spacing })
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Value, gradient and Hessian of the function whose zeros decide regularity at `p`.
///
/// Where exactly one term is active its shape factor is used (the envelope is
/// positive there, so zeros and their regularity coincide with those of H but
/// survive the flat tails). Where terms overlap H itself is used, provided at
/// least one active term is not flat.
fn zero_jet(h: &Hamiltonian, p: &[f64]) -> Option<(f64, Vec<f64>, DMatrix<f64>)> {
    let active = h.active_terms(p);
    match active.as_slice() {
        [] => None,
        [k] => {
            let t = &h.terms()[*k];
            let jet = t.term.shape_jet(p);
            Some((
                t.weight * jet.value,
                jet.gradient.iter().map(|g| t.weight * g).collect(),
                jet.hessian * t.weight,
            ))
        }
        many => {
            let lively = many.iter().any(|&k| {
                let t = &h.terms()[k];
                let mut g = vec![0.0; p.len()];
                t.term.add_gradient(p, t.weight, &mut g);
                (t.weight * t.term.value(p)).abs() + norm(&g) > FLAT_TOL
            });
            lively.then(|| (h.value(p), h.gradient(p), h.hessian(p)))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularZeroReport {
    pub regular: bool,
    /// A point in the open support where both |H| and |grad H| are below threshold.
    pub witness: Option<Vec<f64>>,
    pub seeds_refined: usize,
}

fn is_singular_zero(v: f64, g: &[f64]) -> bool {
    v.abs() < ZERO_VALUE_TOL && norm(g) < ZERO_GRAD_TOL
}

pub fn regular_zero_report(h: &Hamiltonian, grid_resolution: usize) -> Result<RegularZeroReport> {
    let bx = h.support_box();
    let Some(grid) = Grid::new(bx, grid_resolution.max(3)) else {
        return Ok(RegularZeroReport { regular: true, witness: None, seeds_refined: 0 });
    };
    let inside = |p: &[f64]| bx.contains_open(p) && h.open_support_contains(p);
    let jets: Vec<Option<(f64, Vec<f64>)>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let p = grid.point(i);
            if !inside(&p) {
                return None;
            }
            zero_jet(h, &p).map(|(v, g, _)| (v, g))
        })
        .collect();
    for (i, j) in jets.iter().enumerate() {
        if let Some((v, g)) = j {
            if is_singular_zero(*v, g) {
                return Ok(RegularZeroReport { regular: false, witness: Some(grid.point(i)), seeds_refined: 0 });
            }
        }
    }
    let merit: Vec<f64> = jets
        .iter()
        .map(|j| j.as_ref().map_or(f64::INFINITY, |(v, g)| v.abs() + norm(g)))
        .collect();
    let mut seeds = grid_local_minima(&grid, &merit, |_| true);
    seeds.sort_by(|a, b| merit[*a].total_cmp(&merit[*b]).then(a.cmp(b)));
    seeds.truncate(MAX_ZERO_SEEDS);

    let refined: Vec<Option<Vec<f64>>> = seeds
        .par_iter()
        .map(|&i| {
            let mut p = grid.point(i);
            for _ in 0..40 {
                let Some((v, g, hess)) = zero_jet(h, &p) else { return None };
                if is_singular_zero(v, &g) {
                    return inside(&p).then_some(p);
                }
                // Gauss-Newton on the residual (v, grad v).
                let d = p.len();
                let mut jac = DMatrix::zeros(d + 1, d);
                let mut r = DVector::zeros(d + 1);
                r[0] = v;
                for c in 0..d {
                    jac[(0, c)] = g[c];
                    r[c + 1] = g[c];
                    for k in 0..d {
                        jac[(k + 1, c)] = hess[(k, c)];
                    }
                }
                let step = lstsq(&jac, &-r.clone());
                if step.norm() < 1e-15 {
                    return None;
                }
                let r0 = r.norm();
                let mut alpha = 1.0;
                let mut moved = false;
                while alpha > 1e-4 {
                    let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, s)| a + alpha * s).collect();
                    if let Some((vt, gt, _)) = zero_jet(h, &trial) {
                        if (vt * vt + gt.iter().map(|x| x * x).sum::<f64>()).sqrt() < r0 {
                            p = trial;
                            moved = true;
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
                if !moved {
                    return None;
                }
            }
            None
        })
        .collect();
    let witness = refined.into_iter().flatten().next();
    Ok(RegularZeroReport { regular: witness.is_none(), witness, seeds_refined: seeds.len() })
}

/// True iff 0 is a regular value of H inside its open support (at sampling resolution).
pub fn regular_zero_check(h: &Hamiltonian, grid_resolution: usize) -> Result<bool> {
    Ok(regular_zero_report(h, grid_resolution)?.regular)
}

#[derive(Debug, Clone, Serialize)]
pub struct B0Report {
    pub a: f64,
    pub b0: f64,
    pub bound: f64,
    pub bracket: (f64, f64),
    pub evaluations: usize,
}

fn bump_bound(n: usize, b: f64, a: f64, res: usize) -> Result<f64> {
    let h = Hamiltonian::radial_bump(n, BumpParams::new(b, a)?)?;
    Ok(global_hessian_bound(&h, res)?.bound)
}

/// Smallest B (relative tolerance 1e-3) whose bump of height `a` is admissible.
///
/// The returned B is the upper end of the final bracket, so it always passes
/// `admissibility_check` with the default safety margin.
pub fn compute_b0(a: f64, n: usize, range: (f64, f64), grid_resolution: usize) -> Result<B0Report> {
    let (mut lo, mut hi) = range;
    if !(lo > 0.0 && lo < hi) || !(a > 0.0) {
        return domain(format!("compute_b0 needs 0 < B_lo < B_hi and A > 0, got {range:?}, A = {a}"));
    }
    let threshold = TWO_PI - DEFAULT_SAFETY_MARGIN;
    let mut evaluations = 0;
    let mut eval = |b: f64| {
        evaluations += 1;
        bump_bound(n, b, a, grid_resolution)
    };
    let f_hi = eval(hi)?;
    let f_lo = eval(lo)?;
    if f_hi >= threshold || f_lo < threshold {
        return Err(Error::Bracket(format!(
            "bound({lo}) = {f_lo}, bound({hi}) = {f_hi} do not straddle {threshold}"
        )));
    }
    let mut prev = f_lo;
    for k in 1..=5 {
        let b = lo * (hi / lo).powf(k as f64 / 6.0);
        let f = eval(b)?;
        if f > prev * (1.0 + 1e-9) {
            return Err(Error::Integrity(format!("hessian bound not decreasing in B near B = {b}")));
        }
        prev = f;
    }
    let mut bound = f_hi;
    while (hi - lo) / hi > 1e-3 {
        let mid = (lo * hi).sqrt();
        let f = eval(mid)?;
        if f < threshold {
            hi = mid;
            bound = f;
        } else {
            lo = mid;
        }
    }
    Ok(B0Report { a, b0: hi, bound, bracket: (lo, hi), evaluations })
}

/// `compute_b0` with a bracket widened geometrically until it straddles the threshold.
pub fn compute_b0_auto(a: f64, n: usize, grid_resolution: usize) -> Result<B0Report> {
    if !(a > 0.0) || !a.is_finite() {
        return domain(format!("A must be positive, got {a}"));
    }
    let threshold = TWO_PI - DEFAULT_SAFETY_MARGIN;
    let (mut lo, mut hi) = (0.5 * a, 4.0 * a);
    for _ in 0..40 {
        if bump_bound(n, hi, a, grid_resolution)? < threshold {
            break;
        }
        hi *= 2.0;
    }
    for _ in 0..40 {
        if bump_bound(n, lo, a, grid_resolution)? >= threshold {
            break;
        }
        lo *= 0.5;
    }
    compute_b0(a, n, (lo, hi), grid_resolution)
}

#[cfg(test)]
mod tests {
    use super::super::{Term, WeightedTerm};
    use super::*;

    fn bump(b: f64, a: f64) -> Hamiltonian {
        Hamiltonian::radial_bump(1, BumpParams::new(b, a).unwrap()).unwrap()
    }

    fn bump_at(b: f64, a: f64, c: [f64; 2], w: f64) -> WeightedTerm {
        WeightedTerm { weight: w, term: Term::radial_bump(b, a, c.to_vec()).unwrap() }
    }

    #[test]
    fn operator_norm_examples() {
        let core = Hamiltonian::quadratic_core(1, 2.0, 1.0, 2.0).unwrap();
        let p = EuclideanPoint::new(vec![0.2, 0.1]).unwrap();
        assert!((hessian_operator_norm(&core, &p).unwrap() - 2.0).abs() < 1e-14);
        // Hess(0) = -4A/B Id for the bump
        let o = EuclideanPoint::origin(1);
        assert!((hessian_operator_norm(&bump(4.0, 2.5), &o).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn zero_hamiltonian_bound_and_criticals() {
        let z = Hamiltonian::zero(1);
        assert_eq!(global_hessian_bound(&z, 32).unwrap().bound, 0.0);
        let adm = admissibility_check(&z).unwrap();
        assert!(adm.admissible && adm.bound == 0.0);
        let cps = critical_points(&z, 64, 1e-10).unwrap();
        assert_eq!(cps.points.len(), 1);
        assert_eq!(cps.points[0].kind, CriticalKind::Exterior);
        assert!(global_hessian_bound(&z, 8).is_err());
    }

    #[test]
    fn bump_bound_scales_like_one_over_b() {
        // sup |Hess| = K A / B with K ~ 14.509 (radial eigenvalue peak)
        let b1 = global_hessian_bound(&bump(4.0, 1.0), 128).unwrap().bound;
        let b2 = global_hessian_bound(&bump(8.0, 1.0), 128).unwrap().bound;
        assert!((b1 * 4.0 - 14.50905).abs() < 1e-3, "{b1}");
        assert!((b1 / b2 - 2.0).abs() < 1e-8);
        let b3 = global_hessian_bound(&bump(4.0, 2.0), 128).unwrap().bound;
        assert!((b3 / b1 - 2.0).abs() < 1e-8);
    }

    #[test]
    fn core_a7_not_admissible() {
        let core = Hamiltonian::quadratic_core(1, 7.0, 1.0, 2.0).unwrap();
        assert!(!admissibility_check_with(&core, 64, DEFAULT_SAFETY_MARGIN).unwrap().admissible);
    }

    #[test]
    fn bump_has_one_interior_critical_point() {
        let r = critical_points(&bump(4.0, 2.5), 128, NEWTON_TOL).unwrap();
        let interior: Vec<_> = r.interior().collect();
        assert_eq!(interior.len(), 1, "{:?}", r.points);
        assert!(interior[0].location.norm() < 1e-9);
        assert!((interior[0].value - 2.5).abs() < 1e-12);
        assert_eq!(interior[0].hessian_signature, (0, 0, 2));
        assert!(r.unresolved.is_empty());
        assert_eq!(r.points.last().unwrap().kind, CriticalKind::Exterior);
    }

    #[test]
    fn two_bump_critical_values() {
        let h = Hamiltonian::from_terms(
            1,
            vec![bump_at(1.0, 1.2, [-2.0, 0.0], 1.0), bump_at(1.0, 2.5, [2.0, 0.0], 1.0)],
        )
        .unwrap();
        let r = critical_points(&h, 128, NEWTON_TOL).unwrap();
        let vals: Vec<f64> = r.interior().map(|c| c.value).collect();
        assert_eq!(vals.len(), 2, "{:?}", r.points);
        assert!((vals[0] - 1.2).abs() < 1e-10 && (vals[1] - 2.5).abs() < 1e-10);
    }

    #[test]
    fn regular_zero_examples() {
        assert!(regular_zero_check(&bump(4.0, 2.5), 128).unwrap());
        assert!(regular_zero_check(&Hamiltonian::zero(1), 64).unwrap());
        let cancel = Hamiltonian::from_terms(
            1,
            vec![bump_at(4.0, 2.5, [0.0, 0.0], 1.0), bump_at(4.0, 2.5, [0.0, 0.0], -1.0)],
        )
        .unwrap();
        assert!(!regular_zero_check(&cancel, 128).unwrap());
        let signed = Hamiltonian::from_terms(
            1,
            vec![bump_at(4.0, 2.0, [0.0, 0.0], 1.0), bump_at(1.0, 3.0, [0.0, 0.0], -1.0)],
        )
        .unwrap();
        assert!(regular_zero_check(&signed, 128).unwrap());
        let core = Hamiltonian::quadratic_core(1, 2.0, 1.0, 2.0).unwrap();
        assert!(!regular_zero_check(&core, 64).unwrap());
    }

    #[test]
    fn b0_brackets_two_pi() {
        let r = compute_b0(2.5, 1, (1.0, 20.0), 64).unwrap();
        assert!(r.bound < TWO_PI && r.bound >= TWO_PI - 0.05, "{r:?}");
        assert!(compute_b0(2.5, 1, (10.0, 20.0), 64).is_err());
    }
}
