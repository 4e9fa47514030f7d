//! Differentially private PCA by covariance perturbation.
//!
//! Noise is added to the `K = M(M+1)/2` upper-triangular entries of
//! `Σ_n x_n x_nᵀ`, the matrix is symmetrized, and the top-r eigenvectors are
//! compared with the true subspace.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{gaussian_scales, GaussianCalibrator, PrivacyBudget};
use crate::laplace::{effective_epsilon, laplace_scales};
use crate::mechanism::{RunningMoments, SeededRng};
use crate::profile::SensitivityProfile;
use crate::scales::{Mechanism, Mode};

const EIGEN_EPS: f64 = 1e-14;
const EIGEN_MAX_ITER: usize = 10_000;
const MAX_REDRAWS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DpPcaConfig {
    pub n_users: usize,
    pub n_features: usize,
    pub rank: usize,
    pub budget: PrivacyBudget,
    pub mechanism: Mechanism,
    /// `Iid` perturbs the raw matrix; `Inid` clips entries first.
    pub mode: Mode,
    pub trials: usize,
    /// No clipping and no noise.
    pub noiseless: bool,
}

impl DpPcaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_users == 0 || self.n_features == 0 || self.rank == 0 || self.trials == 0 {
            return Err(Error::Config("users, features, rank and trials must be >= 1".into()));
        }
        if self.rank > self.n_features {
            return Err(Error::Config(format!(
                "rank {} exceeds feature count {}",
                self.rank, self.n_features
            )));
        }
        if self.mode == Mode::Spr {
            return Err(Error::Config("DP-PCA supports iid and inid modes".into()));
        }
        Ok(())
    }

    pub fn coordinates(&self) -> usize {
        self.n_features * (self.n_features + 1) / 2
    }
}

/// Upper-triangular (row-major, diagonal included) index pairs.
pub fn upper_indices(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect()
}

/// Per-entry sensitivities: diagonal `c`, off-diagonal `c/√2`, with `c`
/// chosen so that `‖λ‖₂ = 1`.
pub fn dppca_profile(m: usize) -> Result<SensitivityProfile> {
    if m == 0 {
        return Err(Error::Config("need at least one feature".into()));
    }
    let mf = m as f64;
    let c = 2.0 / (mf * (mf + 3.0)).sqrt();
    let lambda = upper_indices(m)
        .into_iter()
        .map(|(i, j)| if i == j { c } else { c / 2f64.sqrt() })
        .collect();
    SensitivityProfile::new(lambda)
}

/// Mean SRE over trials plus the per-trial values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DpPcaResult {
    pub mean_sre: f64,
    pub std_error: f64,
    pub per_trial: Vec<f64>,
    pub discarded: usize,
}

/// `‖(I − ÛÛᵀ)U‖_F / ‖U‖_F`
pub fn subspace_recovery_error(u: &DMatrix<f64>, u_hat: &DMatrix<f64>) -> f64 {
    let resid = u - u_hat * (u_hat.transpose() * u);
    resid.norm() / u.norm()
}

fn noise_scales(cfg: &DpPcaConfig, lambda: &[f64]) -> Result<Vec<f64>> {
    Ok(match cfg.mechanism {
        Mechanism::Gaussian => {
            let mu0 = GaussianCalibrator::new(cfg.budget)?.mu0();
            gaussian_scales(lambda, mu0, cfg.mode, 2.0)
        }
        Mechanism::Laplace => laplace_scales(lambda, effective_epsilon(&cfg.budget)?, cfg.mode, 2.0),
    })
}

/// Orthonormal basis of a random r-dimensional subspace and N unit-norm
/// points drawn from it.
fn synthesize(m: usize, r: usize, n: usize, rng: &mut SeededRng) -> (DMatrix<f64>, DMatrix<f64>) {
    let g = DMatrix::from_fn(m, r, |_, _| rng.standard_normal());
    let u = g.qr().q();
    let coeff = DMatrix::from_fn(r, n, |_, _| rng.standard_normal());
    let mut x = &u * coeff;
    for mut col in x.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    (u, x)
}

fn one_trial(
    cfg: &DpPcaConfig,
    pairs: &[(usize, usize)],
    lambda: &[f64],
    scales: &[f64],
    rng: &mut SeededRng,
) -> Option<f64> {
    let m = cfg.n_features;
    let (u, x) = synthesize(m, cfg.rank, cfg.n_users, rng);
    let clip = !cfg.noiseless && cfg.mode == Mode::Inid;
    let mut upper = vec![0.0; pairs.len()];
    for col in x.column_iter() {
        for (k, (i, j)) in pairs.iter().enumerate() {
            let v = col[*i] * col[*j];
            upper[k] += if clip { v.clamp(-lambda[k], lambda[k]) } else { v };
        }
    }
    // draws happen regardless of mode so paired runs share noise
    let draws: Vec<f64> = (0..pairs.len())
        .map(|_| match cfg.mechanism {
            Mechanism::Gaussian => rng.standard_normal(),
            Mechanism::Laplace => rng.standard_laplace(),
        })
        .collect();
    let mut r_mat = DMatrix::zeros(m, m);
    for (k, (i, j)) in pairs.iter().enumerate() {
        let v = if cfg.noiseless {
            upper[k]
        } else {
            upper[k] + scales[k] * draws[k]
        };
        r_mat[(*i, *j)] = v;
        r_mat[(*j, *i)] = v;
    }
    let eig = SymmetricEigen::try_new(r_mat, EIGEN_EPS, EIGEN_MAX_ITER)?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|a, b| eig.eigenvalues[*b].total_cmp(&eig.eigenvalues[*a]));
    let cols: Vec<_> = order[..cfg.rank].iter().map(|c| eig.eigenvectors.column(*c)).collect();
    let u_hat = DMatrix::from_columns(&cols);
    let sre = subspace_recovery_error(&u, &u_hat);
    sre.is_finite().then_some(sre)
}

/// Trials run in parallel; trial `t` uses `rng.substream(t)`, so paired
/// configurations that differ only in mode see the same data and draws.
pub fn dppca_run(cfg: &DpPcaConfig, rng: &SeededRng) -> Result<DpPcaResult> {
    cfg.validate()?;
    let profile = dppca_profile(cfg.n_features)?;
    let lambda = profile.lambda();
    let scales = if cfg.noiseless {
        vec![0.0; lambda.len()]
    } else {
        noise_scales(cfg, lambda)?
    };
    let pairs = upper_indices(cfg.n_features);
    let outcomes: Vec<(Option<f64>, usize)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng.substream(t as u64);
            for attempt in 0..MAX_REDRAWS {
                if let Some(s) = one_trial(cfg, &pairs, lambda, &scales, &mut r) {
                    return (Some(s), attempt);
                }
            }
            (None, MAX_REDRAWS)
        })
        .collect();
    let mut per_trial = Vec::with_capacity(cfg.trials);
    let mut discarded = 0;
    let mut moments = RunningMoments::default();
    for (s, d) in outcomes {
        discarded += d;
        let s = s.ok_or(Error::Convergence {
            iterations: EIGEN_MAX_ITER,
            width: f64::NAN,
        })?;
        moments.push(s);
        per_trial.push(s);
    }
    Ok(DpPcaResult {
        mean_sre: moments.mean,
        std_error: moments.std_error(),
        per_trial,
        discarded,
    })
}
