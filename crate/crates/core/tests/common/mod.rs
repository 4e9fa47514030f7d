//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use inid_core::{privacy_profile, PrivacyBudget, SeededRng};
use statrs::distribution::{ContinuousCDF, Normal};

/// `Q⁻¹(δ)` from statrs, kept separate from the crate's own inverse.
pub fn q_inv_reference(delta: f64) -> f64 {
    -Normal::standard().inverse_cdf(delta)
}

/// `√(Q⁻¹(δ)² + 2ε) − Q⁻¹(δ)`
pub fn mu_bound_reference(eps: f64, delta: f64) -> f64 {
    let q = q_inv_reference(delta);
    (q * q + 2.0 * eps).sqrt() - q
}

/// Largest μ with `φ_ε(μ) ≤ δ`, by repeated grid refinement: a log grid over
/// `[1e-4, 200]`, then 64-point linear grids on the crossing cell until the
/// cell is narrower than `width`.
pub fn mu0_grid_scan(eps: f64, delta: f64, width: f64) -> f64 {
    let b = PrivacyBudget::new(eps, delta).unwrap();
    let ok = |mu: f64| privacy_profile(mu, &b).unwrap() <= delta;
    let n = 4000;
    let (a, z) = (1e-4f64.ln(), 200f64.ln());
    let grid: Vec<f64> = (0..=n).map(|i| (a + (z - a) * i as f64 / n as f64).exp()).collect();
    assert!(ok(grid[0]), "grid start already violates the budget");
    let mut lo = grid[0];
    let mut hi = f64::NAN;
    for w in grid.windows(2) {
        if !ok(w[1]) {
            lo = w[0];
            hi = w[1];
            break;
        }
    }
    assert!(hi.is_finite(), "no crossing below 200");
    while hi - lo > width {
        let pts: Vec<f64> = (0..=64).map(|i| lo + (hi - lo) * i as f64 / 64.0).collect();
        let mut moved = false;
        for w in pts.windows(2) {
            if !ok(w[1]) {
                lo = w[0];
                hi = w[1];
                moved = true;
                break;
            }
        }
        if !moved || pts[1] == lo && pts[63] == hi {
            break;
        }
    }
    lo
}

pub fn uniform_in(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.uniform()
}

pub fn log_uniform_in(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    uniform_in(rng, lo.ln(), hi.ln()).exp()
}

/// Random point of the probability simplex (flat Dirichlet).
pub fn dirichlet(rng: &mut SeededRng, k: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| -(1.0 - rng.uniform()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// How a mechanism turns budget shares into scales.
#[derive(Clone, Copy, Debug)]
pub enum Constraint {
    /// `Σ λ_i²/σ_i² = μ²`; share `w_i` gives `σ_i = λ_i/(μ √w_i)`.
    Gaussian { mu: f64 },
    /// `Σ λ_i/β_i = ε`; share `w_i` gives `β_i = λ_i/(ε w_i)`.
    Laplace { eps: f64 },
}

impl Constraint {
    pub fn scales(self, lambda: &[f64], w: &[f64]) -> Vec<f64> {
        lambda
            .iter()
            .zip(w)
            .map(|(l, w)| match self {
                Constraint::Gaussian { mu } => l / (mu * w.sqrt()),
                Constraint::Laplace { eps } => l / (eps * w),
            })
            .collect()
    }

    pub fn spent(self, lambda: &[f64], s: &[f64]) -> f64 {
        match self {
            Constraint::Gaussian { .. } => lambda.iter().zip(s).map(|(l, s)| (l / s).powi(2)).sum::<f64>().sqrt(),
            Constraint::Laplace { .. } => lambda.iter().zip(s).map(|(l, s)| l / s).sum(),
        }
    }

    pub fn shares(self, lambda: &[f64], s: &[f64]) -> Vec<f64> {
        let raw: Vec<f64> = match self {
            Constraint::Gaussian { .. } => lambda.iter().zip(s).map(|(l, s)| (l / s).powi(2)).collect(),
            Constraint::Laplace { .. } => lambda.iter().zip(s).map(|(l, s)| l / s).collect(),
        };
        let t: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / t).collect()
    }
}

pub fn lp_objective(s: &[f64], p: f64) -> f64 {
    s.iter().map(|v| v.powf(p)).sum()
}

/// Smallest `Σ s_i^p` found by random simplex sampling plus pairwise share
/// transfers around `start` (local moves stay on the constraint surface).
pub fn projected_search(
    c: Constraint,
    lambda: &[f64],
    p: f64,
    start: &[f64],
    rng: &mut SeededRng,
    random_points: usize,
) -> f64 {
    let k = lambda.len();
    let obj = |w: &[f64]| lp_objective(&c.scales(lambda, w), p);
    let mut best = f64::INFINITY;
    for _ in 0..random_points {
        best = best.min(obj(&dirichlet(rng, k)));
    }
    let mut w = start.to_vec();
    let mut cur = obj(&w);
    best = best.min(cur);
    for step in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
        for _ in 0..200 {
            let mut improved = false;
            for i in 0..k {
                for j in 0..k {
                    if i == j {
                        continue;
                    }
                    let t = step * w[i];
                    let mut v = w.clone();
                    v[i] -= t;
                    v[j] += t;
                    let o = obj(&v);
                    if o < cur {
                        w = v;
                        cur = o;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    best.min(cur)
}

/// Sorted-prefix-sum majorization check written independently of the crate.
pub fn majorizes_reference(a: &[f64], b: &[f64]) -> bool {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(|p, q| q.total_cmp(p));
    y.sort_by(|p, q| q.total_cmp(p));
    let (mut sx, mut sy) = (0.0, 0.0);
    for (u, v) in x.iter().zip(&y) {
        sx += u;
        sy += v;
        if sx < sy - 1e-12 {
            return false;
        }
    }
    (sx - sy).abs() <= 1e-12 * sx.max(1.0)
}

/// `(a, b)` with `a ≻ b` strictly: `b` takes a Robin-Hood transfer from a
/// richer to a poorer coordinate of `a`, leaving their order intact.
pub fn robin_hood_pair(rng: &mut SeededRng, k: usize) -> (Vec<f64>, Vec<f64>) {
    loop {
        let a: Vec<f64> = (0..k).map(|_| uniform_in(rng, 0.05, 1.0)).collect();
        let i = (rng.uniform() * k as f64) as usize % k;
        let j = (rng.uniform() * k as f64) as usize % k;
        let (rich, poor) = if a[i] > a[j] { (i, j) } else { (j, i) };
        let gap = a[rich] - a[poor];
        if rich == poor || gap < 1e-3 {
            continue;
        }
        let t = uniform_in(rng, 0.05, 0.45) * gap;
        let mut b = a.clone();
        b[rich] -= t;
        b[poor] += t;
        return (a, b);
    }
}
