//! Acceptance suite, one line per criterion. Runs without the libtest
//! harness so the summary is always printed.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use contact_norms::capacity::{capacity_energy_audit_with, DomainSpec};
use contact_norms::flow::contact::{integrate_contact, integrate_contact_trajectory, ContactPathSpec};
use contact_norms::flow::schedule::Schedule;
use contact_norms::flow::{integrate_symplectic, reeb_shift};
use contact_norms::geometry::{CylinderPoint, EuclideanPoint};
use contact_norms::hamiltonian::analysis::compute_b0_auto;
use contact_norms::hamiltonian::terms::Term;
use contact_norms::hamiltonian::{BumpParams, DerivativeMode, Hamiltonian, WeightedTerm};
use contact_norms::norms::{
    discriminant_length_autonomous_with, path_integrals, selector_lower_bound_audit_with, t_zero_with, DiscreteLength,
    LengthOptions,
};
use contact_norms::orbits::{find_periodic_orbits, hessian_period_certificate, loop_parseval_check, sample_loop};
use contact_norms::scenario::{bump_norm_sweep, eval_trig_loop};
use contact_norms::translated::{
    brute_force_translated_points_with, first_discriminant_time, translation_selector_inverse_with,
    translation_selector_with, ScanOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRID: usize = 128;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn pt(c: &[f64]) -> EuclideanPoint {
    EuclideanPoint::new(c.to_vec()).unwrap()
}

fn bump(b: f64, a: f64) -> Hamiltonian {
    Hamiltonian::radial_bump(1, BumpParams::new(b, a).unwrap()).unwrap()
}

fn b0(a: f64) -> f64 {
    compute_b0_auto(a, 1, GRID).unwrap().b0
}

fn c1_sweep() -> Outcome {
    let rows = bump_norm_sweep(&[0.5, 2.5, 7.3], 1, GRID);
    let mut notes = vec![];
    let mut ok = true;
    for r in &rows {
        let a = r.a;
        if let Some(e) = &r.error {
            return Err(format!("A = {a}: {e}"));
        }
        let nu_s = r.nu_s.unwrap_or(f64::NAN);
        let ls = r.shelukhin_length.unwrap_or(f64::NAN);
        let expect_floor = a.floor() as u64 + 1;
        let row_ok = (nu_s - a).abs() <= 1e-9
            && (ls - a).abs() <= 1e-6
            && r.nu_fpr == Some(a.ceil() as u64)
            && r.nu_d == Some(expect_floor)
            && r.nu_osc == Some(expect_floor);
        ok &= row_ok;
        notes.push(format!(
            "A={a}: nu_S={nu_s:.12} L_S={ls:.9} nu_FPR={:?} nu_d={:?} nu_osc={:?}",
            r.nu_fpr, r.nu_d, r.nu_osc
        ));
    }
    check(ok, notes.join("; "))
}

fn c2_spectrum_oracle() -> Outcome {
    let h = bump(b0(2.5), 2.5);
    let mut opts = ScanOptions::for_dim(1);
    opts.grid_resolution = 96;
    let rep = brute_force_translated_points_with(&h, 1.0, &opts).map_err(|e| e.to_string())?;
    let at_origin = rep
        .points
        .iter()
        .find(|p| p.location.base.norm() < 1e-6 && (p.translation - 2.5).abs() < 1e-6 && p.fixed_point_residual < 1e-6);
    let stray: Vec<f64> = rep
        .points
        .iter()
        .map(|p| p.translation)
        .filter(|t| t.abs() > 1e-4 && (t - 2.5).abs() > 1e-4)
        .collect();
    let msg = format!(
        "{} interior points, translations {:?}, origin witness {}, stray {:?}",
        rep.points.len(),
        rep.translations(1e-4),
        at_origin.map_or("missing".into(), |p| format!("residual {:.1e}", p.fixed_point_residual)),
        stray
    );
    check(at_origin.is_some() && stray.is_empty(), msg)
}

fn c3_lift_exactness() -> Outcome {
    let b = b0(2.5);
    let h = bump(b, 2.5);
    let spec = ContactPathSpec::autonomous(h.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_g, mut worst_z) = (0.0f64, 0.0f64);
    let radius = b.sqrt();
    for _ in 0..100 {
        let (r, th) = (radius * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
        let p = pt(&[r * th.cos(), r * th.sin()]);
        let traj = integrate_contact_trajectory(&spec, &CylinderPoint::new(p.clone(), 0.0), 1.0, 50).map_err(|e| e.to_string())?;
        for (t, s) in traj.times.iter().zip(&traj.states) {
            worst_g = worst_g.max(s.conformal.abs());
            if *t > 0.0 {
                let shift = reeb_shift(&h, &p, *t, 1e-3).map_err(|e| e.to_string())?;
                worst_z = worst_z.max((s.reeb_lift - shift).abs());
            }
        }
    }
    check(worst_g < 1e-8 && worst_z < 1e-6, format!("max |g| = {worst_g:.2e}, max |z - shift| = {worst_z:.2e}"))
}

fn c4_orbits() -> Outcome {
    let start = Instant::now();
    let core = Hamiltonian::quadratic_core(1, 7.0, 1.0, 2.0).unwrap();
    let scan = find_periodic_orbits(&core, 1.0, 64, 256).map_err(|e| e.to_string())?;
    let target = TAU / 7.0;
    let inner: Vec<_> = scan.nonconstant().filter(|o| o.seed.norm() < 1.0).collect();
    let worst_period = inner.iter().map(|o| (o.period - target).abs()).fold(0.0, f64::max);
    let worst_closure = inner.iter().map(|o| o.closure_residual).fold(0.0, f64::max);
    let core_ok = !inner.is_empty() && worst_period < 1e-4 && worst_closure < 1e-7;

    let cert = hessian_period_certificate(&bump(4.0, 1.2), GRID, 256).map_err(|e| e.to_string())?;
    let found = cert.scan.nonconstant().count();
    let secs = start.elapsed().as_secs_f64();
    check(
        core_ok && cert.bound < TAU && found == 0 && secs <= 300.0,
        format!(
            "core a=7: {} orbits, period err {worst_period:.1e}, closure {worst_closure:.1e}; bump(4, 1.2) bound {:.4} < 2pi, {found} nonconstant orbits; {secs:.1}s",
            inner.len(),
            cert.bound
        ),
    )
}

fn c5_parseval() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = f64::INFINITY;
    for _ in 0..100 {
        let degree = rng.gen_range(1..=8);
        let coeffs: Vec<Vec<(f64, f64)>> = (0..2)
            .map(|_| (0..=degree).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
            .collect();
        let chk = loop_parseval_check(&sample_loop(|t| eval_trig_loop(&coeffs, t), 512)).map_err(|e| e.to_string())?;
        worst = worst.min(chk.gap);
    }
    let circle = sample_loop(|t| vec![1.7 * (TAU * t).cos(), 1.7 * (TAU * t).sin()], 512);
    let line = sample_loop(|t| vec![(TAU * t).sin(), 0.0], 512);
    let eq: f64 = [circle, line].iter().map(|l| loop_parseval_check(l).unwrap().gap.abs()).fold(0.0, f64::max);
    check(worst >= -1e-9 && eq <= 1e-9, format!("min gap over 100 loops {worst:.3e}, single-mode |gap| {eq:.1e}"))
}

fn signed_example() -> Hamiltonian {
    let terms = vec![
        WeightedTerm { weight: 1.0, term: Term::radial_bump(4.0, 1.0, vec![-2.5, 0.0]).unwrap() },
        WeightedTerm { weight: -1.0, term: Term::radial_bump(6.0, 2.0, vec![2.5, 0.0]).unwrap() },
    ];
    Hamiltonian::from_terms(1, terms).unwrap()
}

fn c6_discriminant() -> Outcome {
    let mut notes = vec![];
    let mut ok = true;
    let mut opts = ScanOptions::for_dim(1);
    opts.grid_resolution = 64;
    for (name, h, t0_expect) in [("bump max 2.5", bump(6.0, 2.5), 0.4), ("signed 1/-2", signed_example(), 0.5)] {
        let t0 = t_zero_with(&h, GRID).map_err(|e| e.to_string())?;
        let ld = discriminant_length_autonomous_with(&h, GRID).map_err(|e| e.to_string())?;
        let onset = first_discriminant_time(&h, 1.0, 20, &opts).map_err(|e| e.to_string())?;
        let onset_t = onset.as_ref().filter(|o| o.confirmed).map_or(f64::NAN, |o| o.time);
        let this = (t0 - t0_expect).abs() < 1e-9 && ld == DiscreteLength::Finite(3) && (onset_t - t0).abs() <= 1e-4;
        ok &= this;
        notes.push(format!("{name}: t0={t0:.9} L_d={ld:?} onset={onset_t:.7}"));
    }
    check(ok, notes.join("; "))
}

fn c7_geodesic() -> Outcome {
    let h = bump(b0(2.5), 2.5);
    let c = translation_selector_with(&h, 1.0, GRID).map_err(|e| e.to_string())?;
    let c_inv = translation_selector_inverse_with(&h, 1.0, GRID).map_err(|e| e.to_string())?;
    let mut schedules = vec![Schedule::Identity];
    schedules.extend([2.0, 3.0, 4.0, 5.0].map(|p| Schedule::Power { p }));
    for (beta, freq) in [(0.5, 1), (-0.8, 2), (1.0, 3), (0.3, 4), (-1.0, 1)] {
        schedules.push(Schedule::BackAndForth { beta, freq });
    }
    for (beta, freq) in [(1.5, 1), (2.0, 1), (3.0, 2), (-1.5, 2), (2.5, 3), (4.0, 1), (-3.0, 3), (1.2, 4), (6.0, 2), (-2.0, 1)] {
        schedules.push(Schedule::BackAndForth { beta, freq });
    }
    let opts = LengthOptions::new(GRID);
    let mut mismatches = vec![];
    let mut max_slack: f64 = 0.0;
    for s in &schedules {
        let audit = selector_lower_bound_audit_with(&ContactPathSpec::scheduled(h.clone(), *s), c, c_inv, &opts)
            .map_err(|e| format!("{s:?}: {e}"))?;
        max_slack = max_slack.max(audit.slack);
        if audit.equality != s.is_monotone() {
            mismatches.push(format!("{s:?} slack {:.2e}", audit.slack));
        }
    }
    check(
        (c - 2.5).abs() < 1e-9 && mismatches.is_empty(),
        format!("c = {c}, {} schedules, max slack {max_slack:.3}, equality iff monotone: {mismatches:?}", schedules.len()),
    )
}

fn c8_capacity() -> Outcome {
    let shear = Hamiltonian::single(1, Term::shear(1.5, vec![2.5, 0.6], vec![4.0, 3.0], vec![0.0, 0.0]).unwrap()).unwrap();
    let u = DomainSpec::ball(0.5, vec![0.0, 0.0]).unwrap();
    let audit = capacity_energy_audit_with(&shear, &u, GRID, 24).map_err(|e| e.to_string())?;
    let d = &audit.displacement;
    let displaced = d.displaced && d.min_separation > 2.0 * d.grid_spacing;
    let ceil_ok = !audit.norms.is_empty() && audit.norms.iter().all(|n| n.ceil >= 1);
    let sandon = audit.sandon.as_ref().map_or(false, |s| s.slack >= 0);
    let (cap, rhs) = audit.sandon.as_ref().map_or((0, 0), |s| (s.ceil_capacity, s.rhs));
    check(
        displaced && ceil_ok && sandon && (audit.capacity - PI / 4.0).abs() < 1e-15,
        format!(
            "min separation {:.4} > 2 x {:.4}; ceil(nu) = {:?}; Sandon {cap} <= {rhs}",
            d.min_separation,
            d.grid_spacing,
            audit.norms.iter().map(|n| (n.norm.as_str(), n.ceil)).collect::<Vec<_>>()
        ),
    )
}

fn c9_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut energy, mut group, mut reparam, mut fd) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let h = bump(b0(2.5), 2.5);
    let spec = ContactPathSpec::autonomous(h.clone());
    let base_len = path_integrals(&spec, &LengthOptions::new(64)).map_err(|e| e.to_string())?.length;
    let fd_h = h.clone().with_mode(DerivativeMode::FiniteDifference { step: 1e-5 });
    for k in 0..20 {
        let p = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        energy = energy.max(integrate_symplectic(&h, &pt(&p), 1.0, 1e-3).map_err(|e| e.to_string())?.energy_drift);

        let (s, t) = (rng.gen_range(0.1..0.5), rng.gen_range(0.1..0.5));
        let q0 = CylinderPoint::new(pt(&p), 0.0);
        let whole = integrate_contact(&spec, &q0, s + t).map_err(|e| e.to_string())?;
        let half = integrate_contact(&spec, &q0, s).map_err(|e| e.to_string())?;
        let rest = integrate_contact(&spec, &half.to_cylinder(), t).map_err(|e| e.to_string())?;
        let dz = (whole.reeb_lift - rest.reeb_lift).rem_euclid(1.0);
        group = group.max(whole.base.distance(&rest.base)).max(dz.min(1.0 - dz));

        let sched = if k % 2 == 0 {
            Schedule::Power { p: rng.gen_range(2.0..5.0) }
        } else {
            Schedule::BackAndForth { beta: rng.gen_range(-1.0..1.0), freq: rng.gen_range(1..4) }
        };
        let len = path_integrals(&ContactPathSpec::scheduled(h.clone(), sched), &LengthOptions::new(64))
            .map_err(|e| e.to_string())?
            .length;
        reparam = reparam.max((len - base_len).abs());

        let scale = 1.0 + h.gradient(&p).iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (u, v) in h.gradient(&p).iter().zip(fd_h.gradient(&p)) {
            fd = fd.max((u - v).abs() / scale);
        }
    }
    check(
        energy <= 1e-7 && group <= 1e-6 && reparam <= 1e-6 && fd <= 1e-6,
        format!("energy {energy:.1e}, group law {group:.1e}, reparametrization {reparam:.1e}, fd gradient {fd:.1e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("norm sweep", c1_sweep),
        ("spectrum vs brute force", c2_spectrum_oracle),
        ("contact lift", c3_lift_exactness),
        ("hessian and orbits", c4_orbits),
        ("parseval", c5_parseval),
        ("discriminant length", c6_discriminant),
        ("selector lower bounds", c7_geodesic),
        ("capacity-energy", c8_capacity),
        ("invariants", c9_properties),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let label = format!("criterion {}", k + 1);
        if !filter.is_empty() && !filter.iter().any(|x| label.contains(x.as_str()) || name.contains(x.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("{label}: PASS [{name}] {msg} ({secs:.1}s)"),
            Err(msg) => {
                failed += 1;
                println!("{label}: FAIL [{name}] {msg} ({secs:.1}s)");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
