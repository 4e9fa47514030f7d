//! Noise sampling, Monte-Carlo error estimates and privacy audits.
//!
//! Randomized work is split into fixed-size chunks, each drawing from its
//! own ChaCha substream, and chunk statistics are merged in chunk order.
//! Results therefore depend only on `(seed, stream_id)` and never on the
//! number of worker threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::gaussian::{privacy_profile, realized_mu, PrivacyBudget};
use crate::profile::SensitivityProfile;
use crate::scales::{Mechanism, NoiseScales};

/// Samples per parallel work unit.
pub const CHUNK: usize = 1 << 14;

/// Minimum sample count accepted by [`audit`].
pub const MIN_AUDIT_SAMPLES: usize = 10_000;

/// Audit passes while the estimate stays under `δ + AUDIT_SIGMAS · SE`.
pub const AUDIT_SIGMAS: f64 = 4.0;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ChaCha12 generator addressed by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream_id: u64,
    inner: ChaCha12Rng,
}

impl SeededRng {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Independent child stream `k`, a pure function of this stream's
    /// address (not of how much has been drawn from it).
    pub fn substream(&self, k: u64) -> Self {
        Self::new(self.seed, splitmix64(self.stream_id ^ splitmix64(k)))
    }

    fn laplace(&mut self, beta: f64) -> f64 {
        // one u64: top bit picks the sign, low 53 bits give u in [0, 1)
        let bits = self.inner.next_u64();
        let u = (bits & ((1 << 53) - 1)) as f64 / (1u64 << 53) as f64;
        let mag = -beta * (-u).ln_1p();
        if bits >> 63 == 1 {
            -mag
        } else {
            mag
        }
    }

    fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Standard Laplace draw (β = 1).
    pub fn standard_laplace(&mut self) -> f64 {
        self.laplace(1.0)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.normal()
    }

    /// Uniform draw on [0, 1) with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

fn draw_into(scales: &NoiseScales, rng: &mut SeededRng, out: &mut [f64]) {
    for (o, &s) in out.iter_mut().zip(&scales.scales) {
        // always draw so zero-scale coordinates keep the stream aligned
        let v = match scales.mechanism {
            Mechanism::Gaussian => rng.normal() * s,
            Mechanism::Laplace => rng.laplace(s),
        };
        *o = if s == 0.0 { 0.0 } else { v };
    }
}

/// One noise vector with independent coordinates.
pub fn sample_noise(scales: &NoiseScales, rng: &mut SeededRng) -> Vec<f64> {
    let mut out = vec![0.0; scales.len()];
    draw_into(scales, rng, &mut out);
    out
}

/// `query + noise`.
pub fn perturb(query: &[f64], scales: &NoiseScales, rng: &mut SeededRng) -> Result<Vec<f64>> {
    if query.len() != scales.len() {
        return domain(format!(
            "query has length {} but scales have {}",
            query.len(),
            scales.len()
        ));
    }
    let noise = sample_noise(scales, rng);
    Ok(query.iter().zip(noise).map(|(q, t)| q + t).collect())
}

/// Streaming mean/variance, mergeable (Chan et al.).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningMoments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, o: &RunningMoments) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * (self.n as f64 * o.n as f64 / n as f64);
        self.n = n;
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

fn chunk_counts(n: usize) -> Vec<(u64, usize)> {
    let full = n / CHUNK;
    let mut v: Vec<(u64, usize)> = (0..full).map(|c| (c as u64, CHUNK)).collect();
    if !n.is_multiple_of(CHUNK) {
        v.push((full as u64, n % CHUNK));
    }
    v
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

/// Monte-Carlo estimate of `E‖T‖_p^p`.
pub fn empirical_lp_error(scales: &NoiseScales, p: f64, n: usize, rng: &SeededRng) -> Result<Estimate> {
    if n == 0 {
        return domain("empirical_lp_error needs n >= 1");
    }
    if !(p >= 1.0) || p.is_infinite() {
        return domain(format!("error order must be finite and >= 1, got {p}"));
    }
    let parts: Vec<RunningMoments> = chunk_counts(n)
        .into_par_iter()
        .map(|(c, len)| {
            let mut r = rng.substream(c);
            let mut t = vec![0.0; scales.len()];
            let mut acc = RunningMoments::default();
            for _ in 0..len {
                draw_into(scales, &mut r, &mut t);
                let v: f64 = if p == 2.0 {
                    t.iter().map(|x| x * x).sum()
                } else {
                    t.iter().map(|x| x.abs().powf(p)).sum()
                };
                acc.push(v);
            }
            acc
        })
        .collect();
    let mut total = RunningMoments::default();
    for part in &parts {
        total.merge(part);
    }
    Ok(Estimate {
        mean: total.mean,
        std_error: total.std_error(),
        n,
    })
}

/// Exact Gaussian privacy profile at the worst-case shift `d = λ`.
/// Returns the profile value and the shift used.
pub fn gaussian_privacy_loss_tail(
    scales: &NoiseScales,
    profile: &SensitivityProfile,
    epsilon: f64,
) -> Result<(f64, Vec<f64>)> {
    let d = profile.lambda().to_vec();
    let m = realized_mu(profile, scales)?;
    let budget = PrivacyBudget::new(epsilon, 0.0)?;
    let v = if m == 0.0 {
        0.0
    } else {
        privacy_profile(m, &budget)?
    };
    Ok((v, d))
}

/// Monte-Carlo privacy audit at one shift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub mechanism: Mechanism,
    pub epsilon: f64,
    pub delta_target: f64,
    /// Estimate of `P{ζ_d(T) ≥ ε} − e^ε P{ζ_{−d}(T) ≤ −ε}`.
    pub empirical_profile: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub worst_case_d: Vec<f64>,
    /// Sample mean and variance of `ζ_d(T)`.
    pub loss_mean: f64,
    pub loss_variance: f64,
    /// Largest `ζ_d(T)` observed.
    pub max_loss: f64,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.empirical_profile <= self.delta_target + AUDIT_SIGMAS * self.std_error
    }
}

#[derive(Clone, Copy)]
struct AuditAcc {
    indicator: RunningMoments,
    loss: RunningMoments,
    max_loss: f64,
}

/// Audits `scales` at the worst-case shift `d = λ`.
pub fn audit(
    scales: &NoiseScales,
    profile: &SensitivityProfile,
    epsilon: f64,
    delta_target: f64,
    n: usize,
    rng: &SeededRng,
) -> Result<AuditReport> {
    audit_at_shift(scales, profile, profile.lambda(), epsilon, delta_target, n, rng)
}

/// Audits `scales` at a chosen shift `d` with `|d_i| ≤ λ_i`.
pub fn audit_at_shift(
    scales: &NoiseScales,
    profile: &SensitivityProfile,
    d: &[f64],
    epsilon: f64,
    delta_target: f64,
    n: usize,
    rng: &SeededRng,
) -> Result<AuditReport> {
    if n < MIN_AUDIT_SAMPLES {
        return domain(format!("audit needs at least {MIN_AUDIT_SAMPLES} samples, got {n}"));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return domain(format!("audit epsilon must be finite and >= 0, got {epsilon}"));
    }
    let k = profile.len();
    if scales.len() != k || d.len() != k {
        return domain("audit: scales, profile and shift must have equal length");
    }
    for (i, (&di, &li)) in d.iter().zip(profile.lambda()).enumerate() {
        if di.abs() > li {
            return domain(format!("shift coordinate {i} exceeds its sensitivity"));
        }
        if li > 0.0 && scales.scales[i] == 0.0 {
            return Err(Error::InfiniteLoss {
                coordinate: i,
                lambda: li,
            });
        }
    }
    // coordinates with d_i = 0 contribute nothing to the loss
    let active: Vec<(usize, f64, f64)> = d
        .iter()
        .enumerate()
        .filter(|(_, di)| **di != 0.0)
        .map(|(i, di)| (i, *di, scales.scales[i]))
        .collect();
    let e_eps = epsilon.exp();
    let mech = scales.mechanism;

    let parts: Vec<AuditAcc> = chunk_counts(n)
        .into_par_iter()
        .map(|(c, len)| {
            let mut r = rng.substream(c);
            let mut t = vec![0.0; k];
            let mut acc = AuditAcc {
                indicator: RunningMoments::default(),
                loss: RunningMoments::default(),
                max_loss: f64::NEG_INFINITY,
            };
            for _ in 0..len {
                draw_into(scales, &mut r, &mut t);
                let (mut plus, mut minus) = (0.0, 0.0);
                for &(i, di, s) in &active {
                    let ti = t[i];
                    match mech {
                        Mechanism::Gaussian => {
                            let s2 = s * s;
                            let lin = ti * di / s2;
                            let quad = di * di / (2.0 * s2);
                            plus += lin + quad;
                            minus += -lin + quad;
                        }
                        Mechanism::Laplace => {
                            plus += ((ti + di).abs() - ti.abs()) / s;
                            minus += ((ti - di).abs() - ti.abs()) / s;
                        }
                    }
                }
                let x = f64::from(u8::from(plus >= epsilon))
                    - e_eps * f64::from(u8::from(minus <= -epsilon));
                acc.indicator.push(x);
                acc.loss.push(plus);
                acc.max_loss = acc.max_loss.max(plus);
            }
            acc
        })
        .collect();

    let mut ind = RunningMoments::default();
    let mut loss = RunningMoments::default();
    let mut max_loss = f64::NEG_INFINITY;
    for p in &parts {
        ind.merge(&p.indicator);
        loss.merge(&p.loss);
        max_loss = max_loss.max(p.max_loss);
    }
    Ok(AuditReport {
        mechanism: mech,
        epsilon,
        delta_target,
        empirical_profile: ind.mean,
        std_error: ind.std_error(),
        n_samples: n,
        worst_case_d: d.to_vec(),
        loss_mean: loss.mean,
        loss_variance: loss.variance(),
        max_loss,
    })
}
