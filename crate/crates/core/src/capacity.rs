//! Displacement of cylinders over balls and the capacity-energy inequality.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::flow::{integrate_contact_batch, rk4_flow, step_count, ContactPathSpec, DEFAULT_STEP};
use crate::geometry::{compass_maximize, CylinderPoint, EuclideanPoint, Grid, SupportBox};
use crate::hamiltonian::{admissibility_check_with, default_resolution, Hamiltonian, DEFAULT_SAFETY_MARGIN};
use crate::norms::{norm_report_with, snap, spatial_extrema, NormReport};
use crate::translated::{translation_selector_inverse_with, translation_selector_with};

/// A domain `U x S^1` in the contact cylinder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    BallCylinder { radius: f64, center: Vec<f64> },
    BoxCylinder { lo: Vec<f64>, hi: Vec<f64> },
}

impl DomainSpec {
    pub fn ball(radius: f64, center: Vec<f64>) -> Result<Self> {
        let d = DomainSpec::BallCylinder { radius, center };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::BallCylinder { radius, center } => {
                if !(*radius > 0.0) || !radius.is_finite() {
                    return domain(format!("ball radius must be positive, got {radius}"));
                }
                if center.is_empty() || center.len() % 2 != 0 || center.iter().any(|c| !c.is_finite()) {
                    return domain("ball center must be a finite point of even dimension");
                }
            }
            DomainSpec::BoxCylinder { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() || lo.len() % 2 != 0 {
                    return domain("box corners must have the same even dimension");
                }
                if lo.iter().zip(hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
                    return domain("box must be nonempty with finite corners");
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::BallCylinder { center, .. } => center.len(),
            DomainSpec::BoxCylinder { lo, .. } => lo.len(),
        }
    }

    fn bounding_box(&self) -> SupportBox {
        match self {
            DomainSpec::BallCylinder { radius, center } => {
                SupportBox::cube(center, *radius).expect("validated domain")
            }
            DomainSpec::BoxCylinder { lo, hi } => SupportBox::new(lo.clone(), hi.clone()).expect("validated domain"),
        }
    }

    /// Euclidean distance from a base point to the closed base domain.
    pub fn distance_to(&self, p: &[f64]) -> f64 {
        match self {
            DomainSpec::BallCylinder { radius, center } => (crate::geometry::distance(p, center) - radius).max(0.0),
            DomainSpec::BoxCylinder { lo, hi } => p
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(x, (a, b))| {
                    let d = (a - x).max(x - b).max(0.0);
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Interior grid points plus boundary points obtained by radial projection.
    fn base_samples(&self, res: usize) -> (Vec<Vec<f64>>, f64) {
        let grid = Grid::new(&self.bounding_box(), res).expect("validated domain");
        let pts = (0..grid.len())
            .map(|i| {
                let p = grid.point(i);
                match self {
                    DomainSpec::BallCylinder { radius, center } => {
                        let r = crate::geometry::distance(&p, center);
                        if r <= *radius {
                            p
                        } else {
                            center.iter().zip(&p).map(|(c, x)| c + (x - c) * radius / r).collect()
                        }
                    }
                    DomainSpec::BoxCylinder { .. } => p,
                }
            })
            .collect();
        (pts, grid.spacing())
    }
}

/// `c(B(r) x S^1) = pi r^2`; no value is available for boxes.
pub fn cylinder_capacity(u: &DomainSpec) -> Result<f64> {
    u.validate()?;
    match u {
        DomainSpec::BallCylinder { radius, .. } => Ok(PI * radius * radius),
        DomainSpec::BoxCylinder { .. } => Err(Error::Unsupported("capacity of a box cylinder".into())),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DisplacementReport {
    /// Certified: every sampled image is farther than twice the sample spacing from U.
    pub displaced: bool,
    pub min_separation: f64,
    pub samples: usize,
    pub grid_spacing: f64,
    pub time: f64,
}

/// The flow of an autonomous h moves the base independently of z, so a
/// coarse fiber grid suffices.
pub const FIBER_SAMPLES: usize = 2;

pub fn displacement_check(h: &Hamiltonian, u: &DomainSpec, grid_resolution: usize, t: f64) -> Result<DisplacementReport> {
    u.validate()?;
    if u.dim() != h.dim() {
        return domain(format!("domain dimension {} does not match H dimension {}", u.dim(), h.dim()));
    }
    if grid_resolution < 3 || !t.is_finite() {
        return domain("displacement check needs grid resolution >= 3 and finite t");
    }
    let (base, spacing) = u.base_samples(grid_resolution);
    let fibers = FIBER_SAMPLES;
    let q0s: Vec<CylinderPoint> = base
        .iter()
        .flat_map(|p| {
            (0..fibers).map(move |k| {
                CylinderPoint::new(EuclideanPoint::new(p.clone()).expect("finite sample"), k as f64 / fibers as f64)
            })
        })
        .collect();
    let spec = ContactPathSpec::autonomous(h.clone());
    let images = integrate_contact_batch(&spec, &q0s, t)?;
    // the fiber of U is the whole circle, so only the base image matters
    let min_separation = images.iter().map(|s| u.distance_to(s.base.coords())).fold(f64::INFINITY, f64::min);
    Ok(DisplacementReport {
        displaced: min_separation > 2.0 * spacing,
        min_separation,
        samples: q0s.len(),
        grid_spacing: spacing,
        time: t,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NormSlack {
    pub norm: String,
    pub value: f64,
    pub ceil: u64,
    /// `ceil(c(U)) / 2`.
    pub required: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SandonCheck {
    pub c: f64,
    pub c_inverse: f64,
    pub ceil_capacity: u64,
    pub rhs: u64,
    pub slack: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityAudit {
    pub domain: DomainSpec,
    pub capacity: f64,
    pub displacement: DisplacementReport,
    pub norms: Vec<NormSlack>,
    pub sandon: Option<SandonCheck>,
    pub shelukhin_length: f64,
    pub report: NormReport,
    /// Set when H is outside the certified class and only the length is available.
    pub gap: Option<String>,
}

pub fn capacity_energy_audit(h: &Hamiltonian, u: &DomainSpec) -> Result<CapacityAudit> {
    capacity_energy_audit_with(h, u, default_resolution(h.n()), 48)
}

/// `ceil(nu) >= ceil(c(U)) / 2` for every certified norm, and
/// `ceil(c(U)) <= ceil(c(phi)) + ceil(c(phi^-1))`.
pub fn capacity_energy_audit_with(
    h: &Hamiltonian,
    u: &DomainSpec,
    grid_resolution: usize,
    domain_resolution: usize,
) -> Result<CapacityAudit> {
    let capacity = cylinder_capacity(u)?;
    let displacement = displacement_check(h, u, domain_resolution, 1.0)?;
    if !displacement.displaced {
        return Err(Error::Hypothesis(format!(
            "time-one map does not displace U (min separation {:.3e})",
            displacement.min_separation
        )));
    }
    let ceil_c = snap(capacity).ceil() as u64;
    let required = 0.5 * ceil_c as f64;
    let report = norm_report_with(h, grid_resolution)?;
    let mut norms = vec![];
    for (name, value) in report.certified() {
        let ceil = snap(value).ceil() as u64;
        let slack = ceil as f64 - required;
        if slack < 0.0 {
            return Err(Error::Integrity(format!(
                "capacity-energy inequality fails for the {name} norm: ceil({value}) < {required}"
            )));
        }
        norms.push(NormSlack { norm: name.to_string(), value, ceil, required, slack });
    }
    let admissible = report.hypotheses.admissible;
    let sandon = if admissible {
        let c = translation_selector_with(h, 1.0, grid_resolution)?;
        let c_inverse = translation_selector_inverse_with(h, 1.0, grid_resolution)?;
        let rhs = snap(c).ceil() as u64 + snap(c_inverse).ceil() as u64;
        if ceil_c > rhs {
            return Err(Error::Integrity(format!("Sandon inequality fails: ceil(c(U)) = {ceil_c} > {rhs}")));
        }
        Some(SandonCheck { c, c_inverse, ceil_capacity: ceil_c, rhs, slack: rhs as i64 - ceil_c as i64 })
    } else {
        None
    };
    let gap = (!admissible).then(|| {
        "Hessian bound is not below 2pi: no certified norm, only the Shelukhin length is reported".to_string()
    });
    Ok(CapacityAudit {
        domain: u.clone(),
        capacity,
        displacement,
        norms,
        sandon,
        shelukhin_length: report.shelukhin_length,
        report,
        gap,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugationCheck {
    pub max_h: f64,
    pub min_h: f64,
    pub max_conjugated: f64,
    pub min_conjugated: f64,
    pub unchanged: bool,
}

/// Extrema of `h o psi^{-1}` against those of `h`, where `psi` is the time-`t`
/// map of an admissible `k`. The conjugated path is generated by `h o psi^{-1}`
/// because `psi` lifts to a strict contactomorphism.
pub fn conjugation_spot_check(h: &Hamiltonian, k: &Hamiltonian, t: f64, grid_resolution: usize) -> Result<ConjugationCheck> {
    if h.dim() != k.dim() {
        return domain("conjugation needs Hamiltonians of equal dimension");
    }
    let adm = admissibility_check_with(k, grid_resolution.max(16), DEFAULT_SAFETY_MARGIN)?;
    if !adm.admissible {
        return Err(Error::Hypothesis("conjugating flow must be admissible".into()));
    }
    let ext = spatial_extrema(h, grid_resolution)?;
    let bx = h.support_box().union(k.support_box());
    let steps = step_count(t, DEFAULT_STEP);
    let conj = |p: &[f64]| h.value(&rk4_flow(k, p, -t, steps, |_, _| {}));
    let (mut mx, mut mn) = (0.0f64, 0.0f64);
    if let Some(grid) = Grid::new(&bx, grid_resolution) {
        let vals: Vec<f64> = (0..grid.len()).into_par_iter().map(|i| conj(&grid.point(i))).collect();
        let spacing = grid.spacing();
        let pick = |sign: f64| {
            let i = (0..vals.len()).max_by(|&a, &b| (sign * vals[a]).total_cmp(&(sign * vals[b])).then(b.cmp(&a))).unwrap();
            sign * compass_maximize(|p| sign * conj(p), &grid.point(i), spacing, spacing * 1e-7, &bx).1
        };
        mx = pick(1.0).max(0.0);
        mn = pick(-1.0).min(0.0);
    }
    let unchanged = (mx - ext.max).abs() < 1e-6 && (mn - ext.min).abs() < 1e-6;
    Ok(ConjugationCheck { max_h: ext.max, min_h: ext.min, max_conjugated: mx, min_conjugated: mn, unchanged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{BumpParams, Term};

    pub(crate) fn shear(c: f64, plateau: [f64; 2], width: [f64; 2]) -> Hamiltonian {
        Hamiltonian::single(1, Term::shear(c, plateau.to_vec(), width.to_vec(), vec![0.0, 0.0]).unwrap()).unwrap()
    }

    #[test]
    fn capacities() {
        let c1 = cylinder_capacity(&DomainSpec::ball(1.0, vec![0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(c1, PI);
        let c2 = cylinder_capacity(&DomainSpec::ball(0.5, vec![0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(c2, PI / 4.0);
        assert!(cylinder_capacity(&DomainSpec::ball(1e-9, vec![0.0, 0.0]).unwrap()).unwrap() < 1e-17);
        assert!(DomainSpec::ball(0.0, vec![0.0, 0.0]).is_err());
        let bx = DomainSpec::BoxCylinder { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] };
        assert!(matches!(cylinder_capacity(&bx), Err(Error::Unsupported(_))));
    }

    #[test]
    fn shear_displaces_small_ball_only_when_fast() {
        let u = DomainSpec::ball(0.5, vec![0.0, 0.0]).unwrap();
        let fast = displacement_check(&shear(1.5, [2.5, 0.6], [4.0, 3.0]), &u, 32, 1.0).unwrap();
        assert!(fast.displaced);
        assert!(fast.min_separation >= 0.5 - 1e-9 && fast.min_separation < 0.5 + fast.grid_spacing, "{fast:?}");
        let slow = displacement_check(&shear(0.5, [2.5, 0.6], [4.0, 3.0]), &u, 32, 1.0).unwrap();
        assert!(!slow.displaced);
        let zero = displacement_check(&Hamiltonian::zero(1), &u, 16, 1.0).unwrap();
        assert!(!zero.displaced && zero.min_separation == 0.0);
    }

    #[test]
    fn audit_on_displacing_shear() {
        let u = DomainSpec::ball(0.5, vec![0.0, 0.0]).unwrap();
        let a = capacity_energy_audit_with(&shear(1.5, [2.5, 0.6], [4.0, 3.0]), &u, 64, 24).unwrap();
        assert!(a.gap.is_none());
        assert!(!a.norms.is_empty());
        assert!(a.norms.iter().all(|n| n.ceil >= 1));
        let s = a.sandon.unwrap();
        assert!(s.ceil_capacity <= s.rhs);
        let id = capacity_energy_audit_with(&Hamiltonian::zero(1), &u, 64, 16);
        assert!(matches!(id, Err(Error::Hypothesis(_))));
    }

    #[test]
    fn conjugation_preserves_extrema() {
        let h = Hamiltonian::radial_bump(1, BumpParams::new(6.0, 2.5).unwrap()).unwrap();
        let k = Hamiltonian::single(1, Term::radial_bump(6.0, 1.0, vec![1.0, 0.5]).unwrap()).unwrap();
        let c = conjugation_spot_check(&h, &k, 1.0, 48).unwrap();
        assert!(c.unchanged, "{c:?}");
    }
}
