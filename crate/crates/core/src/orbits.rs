//! Short periodic orbits of autonomous Hamiltonian flows and the Parseval loop bound.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::flow::{rk4_flow, step_count, symplectic_field_into, DEFAULT_STEP};
use crate::geometry::{distance, norm, EuclideanPoint, Grid};
use crate::hamiltonian::analysis::lex_cmp;
use crate::hamiltonian::{admissibility_check_with, Hamiltonian, DEFAULT_SAFETY_MARGIN, TWO_PI};
use crate::linalg::lstsq;

/// Seeds with `|grad H|` below this are constant orbits.
pub const CONSTANT_GRAD_TOL: f64 = 1e-8;
/// Required closure of a reported orbit.
pub const CLOSURE_TOL: f64 = 1e-7;
/// An orbit is nonconstant when it moves farther than this many grid spacings.
pub const NONCONSTANT_SPACINGS: f64 = 10.0;

#[derive(Debug, Clone, Serialize)]
pub struct OrbitCandidate {
    pub seed: EuclideanPoint,
    pub period: f64,
    pub closure_residual: f64,
    pub max_displacement: f64,
    pub nonconstant_flag: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct UnresolvedOrbit {
    pub seed: Vec<f64>,
    pub period_guess: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitScan {
    pub orbits: Vec<OrbitCandidate>,
    pub unresolved: Vec<UnresolvedOrbit>,
    pub seeds_scanned: usize,
    pub grid_resolution: usize,
    pub grid_spacing: f64,
    pub period_samples: usize,
    pub t_max: f64,
}

impl OrbitScan {
    pub fn nonconstant(&self) -> impl Iterator<Item = &OrbitCandidate> {
        self.orbits.iter().filter(|o| o.nonconstant_flag)
    }
}

struct Sampled {
    closures: Vec<f64>,
    max_disp: f64,
}

/// `|psi^{T_k}(p) - p|` at `T_k = k T_max / samples`, k = 1..samples.
fn sample_closures(h: &Hamiltonian, p: &[f64], t_max: f64, samples: usize, step: f64) -> Sampled {
    let per = step_count(t_max / samples as f64, step);
    let total = per * samples;
    let mut closures = Vec::with_capacity(samples);
    let mut k = 0usize;
    let mut max_disp = 0.0f64;
    rk4_flow(h, p, t_max, total, |q, _| {
        if k > 0 {
            let d = distance(q, p);
            max_disp = max_disp.max(d);
            if k % per == 0 {
                closures.push(d);
            }
        }
        k += 1;
    });
    Sampled { closures, max_disp }
}

fn orbit_residual(h: &Hamiltonian, p: &[f64], t: f64, step: f64) -> Vec<f64> {
    let end = rk4_flow(h, p, t, step_count(t, step), |_, _| {});
    end.iter().zip(p).map(|(a, b)| a - b).collect()
}

/// Gauss-Newton on `psi^T(p) - p = 0` in the unknowns `(p, T)`.
fn refine_orbit(h: &Hamiltonian, p0: &[f64], t0: f64, step: f64) -> std::result::Result<(Vec<f64>, f64, f64), f64> {
    let d = p0.len();
    let mut p = p0.to_vec();
    let mut t = t0;
    let mut r = orbit_residual(h, &p, t, step);
    let mut rn = norm(&r);
    let delta = 1e-6;
    let mut grad = vec![0.0; d];
    let mut xh = vec![0.0; d];
    for _ in 0..30 {
        if rn < 1e-11 {
            break;
        }
        let mut jac = DMatrix::zeros(d, d + 1);
        let mut q = p.clone();
        for j in 0..d {
            q[j] = p[j] + delta;
            let fp = orbit_residual(h, &q, t, step);
            q[j] = p[j] - delta;
            let fm = orbit_residual(h, &q, t, step);
            q[j] = p[j];
            for i in 0..d {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * delta);
            }
        }
        let end: Vec<f64> = r.iter().zip(&p).map(|(a, b)| a + b).collect();
        symplectic_field_into(h, &end, &mut grad, &mut xh);
        for i in 0..d {
            jac[(i, d)] = xh[i];
        }
        let s = lstsq(&jac, &-DVector::from_vec(r.clone()));
        let mut alpha = 1.0;
        let mut moved = false;
        while alpha > 1e-3 {
            let tp: Vec<f64> = p.iter().enumerate().map(|(i, v)| v + alpha * s[i]).collect();
            let tt = t + alpha * s[d];
            if tt > 0.0 {
                let rt = orbit_residual(h, &tp, tt, step);
                let rtn = norm(&rt);
                if rtn < rn {
                    p = tp;
                    t = tt;
                    r = rt;
                    rn = rtn;
                    moved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if rn < CLOSURE_TOL {
        Ok((p, t, rn))
    } else {
        Err(rn)
    }
}

/// Grid seeds times sampled periods, near-closures refined jointly in `(p, T)`.
///
/// A candidate is a local minimum in `k` of the sampled closure that is below
/// 5% of the orbit's largest excursion; seeds that never leave a ball of ten
/// grid spacings are treated as frozen and skipped.
pub fn find_periodic_orbits(h: &Hamiltonian, t_max: f64, grid_resolution: usize, period_samples: usize) -> Result<OrbitScan> {
    find_periodic_orbits_with(h, t_max, grid_resolution, period_samples, DEFAULT_STEP)
}

pub fn find_periodic_orbits_with(
    h: &Hamiltonian,
    t_max: f64,
    grid_resolution: usize,
    period_samples: usize,
    step: f64,
) -> Result<OrbitScan> {
    if !(t_max > 0.0 && t_max <= 1.0) {
        return domain(format!("T_max must lie in (0, 1], got {t_max}"));
    }
    if period_samples < 64 {
        return domain(format!("period_samples must be at least 64, got {period_samples}"));
    }
    if grid_resolution < 3 || !(step > 0.0) {
        return domain("grid resolution must be >= 3 and the step positive");
    }
    let bx = h.support_box();
    let empty = |spacing| OrbitScan {
        orbits: vec![],
        unresolved: vec![],
        seeds_scanned: 0,
        grid_resolution,
        grid_spacing: spacing,
        period_samples,
        t_max,
    };
    let Some(grid) = Grid::new(bx, grid_resolution) else { return Ok(empty(0.0)) };
    let spacing = grid.spacing();
    let threshold = NONCONSTANT_SPACINGS * spacing;
    let dt_sample = t_max / period_samples as f64;

    let seeds: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let p = grid.point(i);
            bx.contains_open(&p) && norm(&h.gradient(&p)) >= CONSTANT_GRAD_TOL
        })
        .collect();

    // (seed index, period guess) for every candidate closure
    let candidates: Vec<(usize, f64)> = seeds
        .par_iter()
        .flat_map_iter(|&i| {
            let p = grid.point(i);
            let s = sample_closures(h, &p, t_max, period_samples, step);
            let mut out = vec![];
            if s.max_disp <= threshold {
                return out;
            }
            let c = &s.closures;
            for k in 0..c.len() {
                let left = if k == 0 { f64::INFINITY } else { c[k - 1] };
                let right = c.get(k + 1).copied().unwrap_or(f64::INFINITY);
                if c[k] < left && c[k] <= right && c[k] < 0.05 * s.max_disp {
                    out.push((i, (k + 1) as f64 * dt_sample));
                }
            }
            out
        })
        .collect();

    let refined: Vec<(usize, f64, std::result::Result<(Vec<f64>, f64, f64), f64>)> = candidates
        .par_iter()
        .map(|&(i, t)| (i, t, refine_orbit(h, &grid.point(i), t, step)))
        .collect();

    let mut found: Vec<(OrbitCandidate, Vec<Vec<f64>>)> = vec![];
    let mut unresolved = vec![];
    for (i, guess, r) in refined {
        match r {
            Ok((p, period, res)) => {
                if period > t_max * (1.0 + 1e-9) || norm(&h.gradient(&p)) < CONSTANT_GRAD_TOL {
                    continue;
                }
                let mut trace = vec![];
                let steps = step_count(period, step);
                let every = (steps / 64).max(1);
                let mut k = 0;
                rk4_flow(h, &p, period, steps, |q, _| {
                    if k % every == 0 {
                        trace.push(q.to_vec());
                    }
                    k += 1;
                });
                let max_displacement = trace.iter().map(|q| distance(q, &p)).fold(0.0, f64::max);
                let cand = OrbitCandidate {
                    seed: EuclideanPoint::from_raw(p),
                    period,
                    closure_residual: res,
                    max_displacement,
                    nonconstant_flag: max_displacement > threshold,
                };
                found.push((cand, trace));
            }
            Err(res) => unresolved.push(UnresolvedOrbit { seed: grid.point(i), period_guess: guess, residual: res }),
        }
    }
    found.sort_by(|a, b| a.0.period.total_cmp(&b.0.period).then(lex_cmp(a.0.seed.coords(), b.0.seed.coords())));
    let mut orbits: Vec<(OrbitCandidate, Vec<Vec<f64>>)> = vec![];
    for (c, trace) in found {
        let same = orbits.iter().any(|(o, tr)| {
            (o.period - c.period).abs() <= 1e-6 * o.period.max(1.0)
                && tr.iter().any(|q| distance(q, c.seed.coords()) <= 2.0 * spacing)
        });
        if !same {
            orbits.push((c, trace));
        }
    }
    let mut orbits: Vec<OrbitCandidate> = orbits.into_iter().map(|o| o.0).collect();
    orbits.sort_by(|a, b| lex_cmp(a.seed.coords(), b.seed.coords()).then(a.period.total_cmp(&b.period)));
    Ok(OrbitScan { orbits, unresolved, seeds_scanned: seeds.len(), grid_resolution, grid_spacing: spacing, period_samples, t_max })
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodCertificate {
    pub bound: f64,
    pub orbits_found: usize,
    /// Not (bound < 2pi and orbits found); absence of orbits is only "consistent at resolution".
    pub consistent: bool,
    pub scan: OrbitScan,
}

pub fn hessian_period_certificate(h: &Hamiltonian, grid_resolution: usize, period_samples: usize) -> Result<PeriodCertificate> {
    let adm = admissibility_check_with(h, grid_resolution.max(16), DEFAULT_SAFETY_MARGIN)?;
    let scan = find_periodic_orbits(h, 1.0, grid_resolution, period_samples)?;
    let orbits_found = scan.nonconstant().count();
    let consistent = !(adm.bound < TWO_PI && orbits_found > 0);
    if !consistent {
        return Err(Error::Integrity(format!(
            "{orbits_found} nonconstant orbits of period <= 1 although sup |Hess H| = {:.6} < 2pi",
            adm.bound
        )));
    }
    Ok(PeriodCertificate { bound: adm.bound, orbits_found, consistent, scan })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParsevalCheck {
    /// `|gamma'|_{L^2}`.
    pub lhs: f64,
    /// `|gamma''|_{L^2}`.
    pub rhs: f64,
    /// `rhs / 2pi - lhs`, zero for single-mode loops.
    pub gap: f64,
    pub ok: bool,
}

pub const PARSEVAL_TOL: f64 = 1e-9;
pub const CLOSED_LOOP_TOL: f64 = 1e-10;

/// `loop_samples[k] = gamma(k / N)` for `k = 0..=N` with `gamma(1) = gamma(0)`.
/// Derivatives are taken spectrally, dropping the Nyquist mode.
pub fn loop_parseval_check(loop_samples: &[Vec<f64>]) -> Result<ParsevalCheck> {
    if loop_samples.len() < 2 {
        return domain("a loop needs at least two samples");
    }
    let n = loop_samples.len() - 1;
    if n < 128 || !n.is_power_of_two() {
        return domain(format!("sample count must be a power of two >= 128, got {n}"));
    }
    let dim = loop_samples[0].len();
    if loop_samples.iter().any(|s| s.len() != dim) {
        return domain("loop samples have mixed dimensions");
    }
    let gap = distance(&loop_samples[0], &loop_samples[n]);
    if !(gap < CLOSED_LOOP_TOL) {
        return domain(format!("loop is not closed: endpoint gap {gap:.3e}"));
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    let (mut d1, mut d2) = (0.0, 0.0);
    for c in 0..dim {
        let mut buf: Vec<Complex<f64>> = loop_samples[..n].iter().map(|s| Complex::new(s[c], 0.0)).collect();
        fft.process(&mut buf);
        for (k, z) in buf.iter().enumerate() {
            if 2 * k == n {
                continue;
            }
            let freq = if 2 * k < n { k as f64 } else { k as f64 - n as f64 };
            let a2 = (z / n as f64).norm_sqr();
            let w = 2.0 * PI * freq;
            d1 += w * w * a2;
            d2 += w.powi(4) * a2;
        }
    }
    let (lhs, rhs) = (d1.sqrt(), d2.sqrt());
    let gap = rhs / TWO_PI - lhs;
    Ok(ParsevalCheck { lhs, rhs, gap, ok: gap >= -PARSEVAL_TOL })
}

/// Samples of `f` on `k / N`, `k = 0..=N`.
pub fn sample_loop(f: impl Fn(f64) -> Vec<f64>, n: usize) -> Vec<Vec<f64>> {
    (0..=n).map(|k| f(k as f64 / n as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::BumpParams;

    #[test]
    fn parseval_examples() {
        let circle = sample_loop(|t| vec![(TWO_PI * t).cos(), (TWO_PI * t).sin()], 256);
        let c = loop_parseval_check(&circle).unwrap();
        assert!((c.lhs - TWO_PI).abs() < 1e-9 && (c.rhs - TWO_PI * TWO_PI).abs() < 1e-8);
        assert!(c.gap.abs() < 1e-9 && c.ok);
        let two = sample_loop(
            |t| vec![(TWO_PI * t).cos() + 0.5 * (2.0 * TWO_PI * t).cos(), (TWO_PI * t).sin() - 0.5 * (2.0 * TWO_PI * t).sin()],
            256,
        );
        let c2 = loop_parseval_check(&two).unwrap();
        assert!(c2.ok && c2.gap > 0.1);
        let c3 = loop_parseval_check(&sample_loop(|_| vec![1.0, -2.0], 128)).unwrap();
        assert_eq!((c3.lhs, c3.rhs), (0.0, 0.0));
        let open = sample_loop(|t| vec![t, 0.0], 128);
        assert!(loop_parseval_check(&open).is_err());
        assert!(loop_parseval_check(&sample_loop(|_| vec![0.0], 100)).is_err());
    }

    #[test]
    fn core_orbits_have_closed_form_period() {
        let h = Hamiltonian::quadratic_core(1, 7.0, 1.0, 2.0).unwrap();
        let scan = find_periodic_orbits(&h, 1.0, 48, 128).unwrap();
        let core: Vec<_> = scan.nonconstant().filter(|o| o.seed.norm() < 0.9).collect();
        assert!(!core.is_empty());
        for o in core {
            assert!((o.period - TWO_PI / 7.0).abs() < 1e-4, "{o:?}");
            assert!(o.closure_residual < CLOSURE_TOL);
        }
    }

    #[test]
    fn no_short_orbits_below_two_pi() {
        let h = Hamiltonian::quadratic_core(1, 6.0, 1.0, 2.0).unwrap();
        assert_eq!(find_periodic_orbits(&h, 1.0, 48, 128).unwrap().nonconstant().count(), 0);
        let b = Hamiltonian::radial_bump(1, BumpParams::new(6.0, 2.5).unwrap()).unwrap();
        let cert = hessian_period_certificate(&b, 48, 128).unwrap();
        assert!(cert.consistent && cert.orbits_found == 0 && cert.bound < TWO_PI);
        assert!(find_periodic_orbits(&Hamiltonian::zero(1), 1.0, 48, 64).unwrap().orbits.is_empty());
    }

    #[test]
    fn rejects_bad_arguments() {
        let h = Hamiltonian::zero(1);
        assert!(find_periodic_orbits(&h, 1.5, 32, 64).is_err());
        assert!(find_periodic_orbits(&h, 1.0, 32, 32).is_err());
    }
}
