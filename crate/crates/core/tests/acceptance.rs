//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Exits non-zero when any criterion fails, except that the application
//! comparisons (criterion 10) only fail the run when
//! `INID_STRICT_ACCEPTANCE=1`; their outcome is always printed.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use inid_core::applications::{dppca_run, DpPcaConfig};
use inid_core::experiments::{
    dpcd_noiseless_check, dpcd_study, dpcd_tasks, dppca_config, paired_wins, sign_test_p_value,
};
use inid_core::gaussian::realized_mu;
use inid_core::mechanism::audit;
use inid_core::{
    calibrate_laplace, majorizes, pure_dp_check, solve_mu0, BisectionConfig, GaussianCalibrator, Mechanism,
    Mode, Normalization, PrivacyBudget, ProfileFamily, ProfileKind, SeededRng, SensitivityProfile,
};

struct Outcome {
    passed: bool,
    detail: String,
    /// Reported but not fatal unless strict mode is on.
    advisory: bool,
}

fn ok(passed: bool, detail: String) -> Outcome {
    Outcome {
        passed,
        detail,
        advisory: false,
    }
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn family(kind: ProfileKind, k: usize, norm: Normalization) -> SensitivityProfile {
    ProfileFamily::new(kind, k, norm).generate().unwrap()
}

fn gaussian(eps: f64, delta: f64) -> GaussianCalibrator {
    GaussianCalibrator::new(PrivacyBudget::new(eps, delta).unwrap()).unwrap()
}

fn table_two() -> Outcome {
    let p = SensitivityProfile::new(vec![0.85, 0.15]).unwrap();
    let eps = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
    let iid_row = [4.0, 2.0, 1.3333, 1.0, 0.8, 0.6667];
    let inid_row = [3.4283, 1.7141, 1.1428, 0.8571, 0.6857, 0.5714];
    let mut worst: f64 = 0.0;
    for (i, e) in eps.iter().enumerate() {
        let a = calibrate_laplace(&p, *e, Mode::Iid, 1.0).unwrap().theoretical_error;
        let b = calibrate_laplace(&p, *e, Mode::Inid, 1.0).unwrap().theoretical_error;
        // expected ℓ1 error is Σβ: K‖λ‖₁/ε for iid, (Σ√λ_i)²/ε for inid
        let a_ref = 2.0 * 1.0 / e;
        let b_ref = (0.85f64.sqrt() + 0.15f64.sqrt()).powi(2) / e;
        assert!((a - a_ref).abs() < 1e-12 && (b - b_ref).abs() < 1e-12);
        worst = worst.max((a - iid_row[i]).abs()).max((b - inid_row[i]).abs());
    }
    ok(worst < 5e-5, format!("max deviation from the published rows {worst:.2e} (limit 5e-5)"))
}

fn reductions(mech: Mechanism, targets: &[(ProfileKind, f64, f64)]) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for &(kind, want, tol) in targets {
        let k = 20;
        let (iid, inid, oracle) = match mech {
            Mechanism::Gaussian => {
                let p = family(kind, k, Normalization::L2Unit);
                let g = gaussian(0.5, 1e-6);
                let iid = g.calibrate(&p, Mode::Iid, 2.0).unwrap().theoretical_error;
                let inid = g.calibrate(&p, Mode::Inid, 2.0).unwrap().theoretical_error;
                (iid, inid, db(k as f64 * p.l2().powi(2) / p.l1().powi(2)))
            }
            Mechanism::Laplace => {
                let p = family(kind, k, Normalization::L1Unit);
                let iid = calibrate_laplace(&p, 0.5, Mode::Iid, 2.0).unwrap().theoretical_error;
                let inid = calibrate_laplace(&p, 0.5, Mode::Inid, 2.0).unwrap().theoretical_error;
                let s: f64 = p.lambda().iter().map(|l| l.powf(2.0 / 3.0)).sum();
                (iid, inid, db(k as f64 * p.l1().powi(2) / s.powi(3)))
            }
        };
        let r = db(iid) - db(inid);
        let good = (r - want).abs() <= tol && (r - oracle).abs() < 1e-9;
        pass &= good;
        parts.push(format!("{kind} {r:.4} dB (want {want}±{tol})"));
    }
    ok(pass, parts.join(", "))
}

fn saturation() -> Outcome {
    let mut pass = true;
    let mut lap_range = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 40..=100 {
        let p = family(ProfileKind::Exponential, k, Normalization::L1Unit);
        let m = db(calibrate_laplace(&p, 0.5, Mode::Inid, 2.0).unwrap().theoretical_error);
        lap_range = (lap_range.0.min(m), lap_range.1.max(m));
        pass &= (m - 14.43).abs() <= 0.25;
    }
    let e = std::f64::consts::E;
    let want = db((e + 1.0) / (e - 1.0));
    let g = gaussian(0.5, 1e-6);
    let one_hot = db(1.0 / g.mu0().powi(2));
    let mut gap_range = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 40..=100 {
        let p = family(ProfileKind::Exponential, k, Normalization::L2Unit);
        let gap = db(g.calibrate(&p, Mode::Inid, 2.0).unwrap().theoretical_error) - one_hot;
        gap_range = (gap_range.0.min(gap), gap_range.1.max(gap));
        pass &= (gap - want).abs() <= 0.05;
    }
    ok(
        pass,
        format!(
            "Laplace K=40..100 in [{:.4}, {:.4}] dB (want 14.43±0.25); Gaussian gap over one-hot in [{:.4}, {:.4}] dB (want {want:.4}±0.05)",
            lap_range.0, lap_range.1, gap_range.0, gap_range.1
        ),
    )
}

fn solver() -> Outcome {
    let t = Instant::now();
    let cfg = BisectionConfig::default();
    let mut rng = SeededRng::new(2024, 5);
    let mut worst_gap: f64 = 0.0;
    let mut failures = Vec::new();
    for i in 0..100 {
        let eps = log_uniform_in(&mut rng, 0.01, 10.0);
        let delta = log_uniform_in(&mut rng, 1e-10, 0.1);
        let b = PrivacyBudget::new(eps, delta).unwrap();
        let r = solve_mu0(&b, &cfg).unwrap();
        let scan = mu0_grid_scan(eps, delta, cfg.tolerance);
        worst_gap = worst_gap.max((r.mu0 - scan).abs());
        let lo = mu_bound_reference(eps, delta);
        let hi = mu_bound_reference(eps, r.delta_prime);
        let slack = 1e-8 * hi;
        let phi = inid_core::privacy_profile(r.mu0, &b).unwrap();
        if (r.mu0 - scan).abs() > 10.0 * cfg.tolerance
            || r.mu0 < lo - slack
            || r.mu0 > hi + slack
            || phi > delta
        {
            failures.push(format!("#{i} eps={eps:.4} delta={delta:.2e}"));
        }
    }
    let el = t.elapsed();
    ok(
        failures.is_empty() && el < Duration::from_secs(5),
        format!(
            "100 budgets, max |solver - grid scan| {worst_gap:.1e} (limit {:.0e}), {} failures {:?}, {:.2}s",
            10.0 * cfg.tolerance,
            failures.len(),
            failures,
            el.as_secs_f64()
        ),
    )
}

fn optimality() -> Outcome {
    let mut rng = SeededRng::new(77, 6);
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut cases = 0;
    let mut feasible = true;
    for _ in 0..50 {
        let k = 2 + (rng.uniform() * 5.0) as usize;
        let lambda: Vec<f64> = (0..k).map(|_| log_uniform_in(&mut rng, 0.01, 1.0)).collect();
        let profile = SensitivityProfile::new(lambda.clone()).unwrap();
        for p in [1.0, 2.0, 3.0] {
            for mech in [Mechanism::Gaussian, Mechanism::Laplace] {
                let (s, c) = match mech {
                    Mechanism::Gaussian => {
                        let g = gaussian(1.0, 1e-5);
                        (g.calibrate(&profile, Mode::Inid, p).unwrap(), Constraint::Gaussian { mu: g.mu0() })
                    }
                    Mechanism::Laplace => (
                        calibrate_laplace(&profile, 1.0, Mode::Inid, p).unwrap(),
                        Constraint::Laplace { eps: 1.0 },
                    ),
                };
                let target = match c {
                    Constraint::Gaussian { mu } => mu,
                    Constraint::Laplace { eps } => eps,
                };
                feasible &= (c.spent(&lambda, &s.scales) - target).abs() < 1e-10 * target;
                let closed = lp_objective(&s.scales, p);
                let start = c.shares(&lambda, &s.scales);
                let found = projected_search(c, &lambda, p, &start, &mut rng, 3000);
                worst = worst.max((closed - found) / closed);
                cases += 1;
            }
        }
    }
    ok(
        worst <= 1e-6 && feasible,
        format!("{cases} cases, largest relative improvement found by search {worst:.2e} (limit 1e-6), closed forms feasible: {feasible}"),
    )
}

fn schur() -> Outcome {
    let mut rng = SeededRng::new(99, 7);
    let g = gaussian(1.0, 1e-6);
    let mut strict = 0;
    for _ in 0..200 {
        let k = 2 + (rng.uniform() * 9.0) as usize;
        let (a, b) = robin_hood_pair(&mut rng, k);
        assert!(majorizes_reference(&a, &b) && majorizes(&a, &b).unwrap());
        // Gaussian: majorization of squared profiles
        let la = SensitivityProfile::new(a.iter().map(|v| v.sqrt()).collect()).unwrap();
        let lb = SensitivityProfile::new(b.iter().map(|v| v.sqrt()).collect()).unwrap();
        let ga = g.calibrate(&la, Mode::Inid, 2.0).unwrap().theoretical_error;
        let gb = g.calibrate(&lb, Mode::Inid, 2.0).unwrap().theoretical_error;
        // Laplace: majorization of the profiles themselves
        let pa = SensitivityProfile::new(a.clone()).unwrap();
        let pb = SensitivityProfile::new(b.clone()).unwrap();
        let xa = calibrate_laplace(&pa, 1.0, Mode::Inid, 2.0).unwrap().theoretical_error;
        let xb = calibrate_laplace(&pb, 1.0, Mode::Inid, 2.0).unwrap().theoretical_error;
        if ga < gb && xa < xb {
            strict += 1;
        }
    }
    let mut ordered = 0;
    let mut equality_ok = 0;
    let mut gaussian_spr_gap: f64 = 0.0;
    for i in 0..200 {
        let k = 2 + (rng.uniform() * 9.0) as usize;
        let uniform = i % 10 == 0;
        let lambda: Vec<f64> = if uniform {
            vec![uniform_in(&mut rng, 0.1, 2.0); k]
        } else {
            (0..k).map(|_| uniform_in(&mut rng, 0.01, 2.0)).collect()
        };
        let p = SensitivityProfile::new(lambda).unwrap();
        let gm: Vec<f64> = Mode::ALL
            .iter()
            .map(|m| g.calibrate(&p, *m, 2.0).unwrap().theoretical_error)
            .collect();
        let lm: Vec<f64> = Mode::ALL
            .iter()
            .map(|m| calibrate_laplace(&p, 1.0, *m, 2.0).unwrap().theoretical_error)
            .collect();
        let (gi, gs, gn) = (gm[0], gm[1], gm[2]);
        let (li, ls, ln) = (lm[0], lm[1], lm[2]);
        let tol = 1e-10;
        let le = |x: f64, y: f64| x <= y * (1.0 + tol);
        if le(gn, gi) && le(gi, gs) && le(ln, li) && le(li, ls) {
            ordered += 1;
        }
        gaussian_spr_gap = gaussian_spr_gap.max((gs - gi).abs() / gi);
        let eq = |x: f64, y: f64| (x - y).abs() <= tol * y;
        let ties = [eq(gn, gi), eq(ln, li), eq(li, ls)];
        if ties.iter().all(|t| *t == uniform) {
            equality_ok += 1;
        }
    }
    ok(
        strict == 200 && ordered == 200 && equality_ok == 200 && gaussian_spr_gap < 1e-10,
        format!(
            "majorization pairs strictly ordered {strict}/200; inid <= iid <= spr {ordered}/200; \
             equality iff uniform {equality_ok}/200 (Gaussian iid and spr coincide for every profile, max rel gap {gaussian_spr_gap:.1e})"
        ),
    )
}

fn audits() -> Outcome {
    let t = Instant::now();
    let p = family(ProfileKind::Exponential, 8, Normalization::L2Unit);
    let g = gaussian(1.0, 1e-3);
    let s = g.calibrate(&p, Mode::Inid, 2.0).unwrap();
    assert!((realized_mu(&p, &s).unwrap() - g.mu0()).abs() < 1e-12);
    let r = audit(&s, &p, 1.0, 1e-3, 1_000_000, &SeededRng::new(31, 0)).unwrap();
    let within = (r.empirical_profile - 1e-3).abs() <= 4.0 * r.std_error;

    let lp = family(ProfileKind::Linear, 8, Normalization::L1Unit);
    let ls = calibrate_laplace(&lp, 1.0, Mode::Inid, 2.0).unwrap();
    let spent = pure_dp_check(&lp, &ls).unwrap();
    let direct: f64 = lp.lambda().iter().zip(&ls.scales).map(|(l, b)| l / b).sum();
    let lr = audit(&ls, &lp, 1.0, 0.0, 1_000_000, &SeededRng::new(32, 0)).unwrap();
    let exact = (spent - 1.0).abs() <= 1e-12 && (direct - 1.0).abs() <= 1e-12;
    let bounded = lr.max_loss <= 1.0 + 1e-12;
    let el = t.elapsed();
    ok(
        within && exact && bounded && el < Duration::from_secs(30),
        format!(
            "Gaussian profile estimate {:.3e} ± {:.1e} vs 1e-3; Laplace Σλ/β - ε = {:.1e}, max sampled loss {:.12}; {:.1}s",
            r.empirical_profile,
            r.std_error,
            spent - 1.0,
            lr.max_loss,
            el.as_secs_f64()
        ),
    )
}

fn crossover() -> Outcome {
    let g = gaussian(0.5, 1e-6);
    let mut exp_ok = true;
    for k in 2..=50 {
        let p = family(ProfileKind::Exponential, k, Normalization::L2Unit);
        let l = calibrate_laplace(&p, 0.5, Mode::Inid, 2.0).unwrap().theoretical_error;
        let gg = g.calibrate(&p, Mode::Inid, 2.0).unwrap().theoretical_error;
        exp_ok &= l < gg;
    }
    let mut first_worse = None;
    let mut consistent = true;
    for k in 2..=50 {
        let p = family(ProfileKind::Uniform, k, Normalization::L2Unit);
        let l = calibrate_laplace(&p, 0.5, Mode::Iid, 2.0).unwrap().theoretical_error;
        let gg = g.calibrate(&p, Mode::Iid, 2.0).unwrap().theoretical_error;
        let worse = l > gg;
        if worse && first_worse.is_none() {
            first_worse = Some(k);
        }
        consistent &= worse == (k >= 9);
    }
    ok(
        exp_ok && consistent && first_worse == Some(9),
        format!("exponential: Laplace below Gaussian for all K in 2..=50: {exp_ok}; uniform: Laplace first worse at K = {first_worse:?}"),
    )
}

fn applications() -> Outcome {
    let t = Instant::now();
    let mut lines = Vec::new();
    let mut comparisons = true;
    let mut sanity = true;
    let budget = PrivacyBudget::new(1.0, 1e-6).unwrap();
    for task in dpcd_tasks() {
        let study = dpcd_study(&task, budget, 0, 32).unwrap();
        let (w, n) = paired_wins(study.errors(Mode::Inid), study.errors(Mode::Spr));
        let p = sign_test_p_value(w, n);
        let (wi, ni) = paired_wins(study.errors(Mode::Inid), study.errors(Mode::Iid));
        let pi = sign_test_p_value(wi, ni);
        comparisons &= p < 0.05;
        lines.push(format!(
            "DP-CD {}: inid beats spr {w}/{n} (p={p:.3}), inid beats iid {wi}/{ni} (p={pi:.1e})",
            task.name
        ));
        let noiseless = dpcd_noiseless_check(&task, 0, 32, 300).unwrap();
        let worst = noiseless.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        sanity &= worst < 1e-6;
        lines.push(format!("DP-CD {} noiseless: worst relative error {worst:.1e}", task.name));
    }
    let pca_budget = PrivacyBudget::new(2.0, 1e-6).unwrap();
    for mech in [Mechanism::Gaussian, Mechanism::Laplace] {
        let rng = SeededRng::new(0, 0);
        let iid = dppca_run(&dppca_config(mech, Mode::Iid, pca_budget, 100), &rng).unwrap();
        let inid = dppca_run(&dppca_config(mech, Mode::Inid, pca_budget, 100), &rng).unwrap();
        let (w, n) = paired_wins(&inid.per_trial, &iid.per_trial);
        let p = sign_test_p_value(w, n);
        comparisons &= p < 0.05;
        lines.push(format!(
            "DP-PCA {mech}: mean SRE iid {:.4} inid {:.4}, inid wins {w}/{n} (p={p:.3})",
            iid.mean_sre, inid.mean_sre
        ));
    }
    let noiseless = DpPcaConfig {
        noiseless: true,
        ..dppca_config(Mechanism::Gaussian, Mode::Inid, pca_budget, 30)
    };
    let r = dppca_run(&noiseless, &SeededRng::new(1, 0)).unwrap();
    let worst = r.per_trial.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    sanity &= worst < 1e-10;
    lines.push(format!("DP-PCA noiseless: worst SRE {worst:.1e}"));
    let el = t.elapsed();
    let timely = el < Duration::from_secs(300);
    lines.push(format!(
        "comparisons significant: {comparisons}; sanity runs: {sanity}; {:.1}s",
        el.as_secs_f64()
    ));
    Outcome {
        passed: comparisons && sanity && timely,
        detail: lines.join("\n      "),
        // the sanity runs and timing stay fatal
        advisory: sanity && timely,
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let strict = std::env::var("INID_STRICT_ACCEPTANCE").is_ok_and(|v| v == "1");
    let criteria: Vec<Criterion> = vec![
        ("Laplace two-coordinate table", table_two),
        ("Gaussian dB reductions at K=20", || {
            reductions(
                Mechanism::Gaussian,
                &[
                    (ProfileKind::Linear, 1.145, 0.001),
                    (ProfileKind::Quadratic, 2.442, 0.001),
                    (ProfileKind::Exponential, 9.658, 0.005),
                ],
            )
        }),
        ("Laplace dB reductions at K=20", || {
            reductions(
                Mechanism::Laplace,
                &[
                    (ProfileKind::Linear, 0.546, 0.01),
                    (ProfileKind::Quadratic, 1.39, 0.01),
                    (ProfileKind::Exponential, 7.609, 0.01),
                ],
            )
        }),
        ("exponential-profile saturation", saturation),
        ("privacy-profile solver", solver),
        ("closed-form optimality", optimality),
        ("Schur monotonicity and mode ordering", schur),
        ("privacy audits", audits),
        ("Laplace/Gaussian crossover", crossover),
        ("DP-CD and DP-PCA applications", applications),
    ];
    let mut fatal = 0;
    let mut passed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            ok(false, format!("panicked: {msg}"))
        });
        let tag = if out.passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {} ({name}) [{:.2}s]: {}", i + 1, t.elapsed().as_secs_f64(), out.detail);
        if out.passed {
            passed += 1;
        } else if !out.advisory || strict {
            fatal += 1;
        }
    }
    println!("{passed}/{} criteria passed", criteria.len());
    if passed < criteria.len() && fatal == 0 {
        println!("remaining failures are reported only; set INID_STRICT_ACCEPTANCE=1 to make them fatal");
    }
    if fatal > 0 {
        std::process::exit(1);
    }
}
