//! Special functions of the standard Gaussian and a bracketing bisection
//! solver for monotone increasing functions.
//!
//! The complementary error function is evaluated with two self-contained
//! expansions: an all-positive-term series for `erf` on small arguments and a
//! Lentz-evaluated continued fraction for the scaled function
//! `erfcx(x) = exp(x^2) erfc(x)` in the tail. Working with `erfcx` lets tail
//! probabilities be combined in log space, which is what
//! [`scaled_tail_product`] relies on.

use crate::error::{domain, Error, Result};

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const LN_2: f64 = std::f64::consts::LN_2;

/// Switch point between the series and the continued fraction.
const SERIES_CUTOFF: f64 = 1.5;

/// erf(x) for 0 <= x < SERIES_CUTOFF via
/// erf(x) = 2/sqrt(pi) exp(-x^2) sum_n 2^n x^(2n+1) / (2n+1)!!.
/// Every term is positive, so there is no cancellation.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

/// erfcx(x) for x >= SERIES_CUTOFF from the continued fraction
/// erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))).
fn erfcx_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for j in 1..10_000 {
        let a = 0.5 * j as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    FRAC_1_SQRT_PI / f
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < SERIES_CUTOFF {
        1.0 - erf_series(x)
    } else {
        (-x * x).exp() * erfcx_continued_fraction(x)
    }
}

/// Scaled complementary error function `exp(x^2) erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        let x2 = x * x;
        return 2.0 * x2.exp() - erfcx(-x);
    }
    if x < SERIES_CUTOFF {
        (x * x).exp() * (1.0 - erf_series(x))
    } else {
        erfcx_continued_fraction(x)
    }
}

/// Standard normal density.
pub fn gaussian_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Survival function of the standard normal, `Q(x) = P{N(0,1) > x}`.
pub fn gaussian_q(x: f64) -> f64 {
    0.5 * erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Natural log of `Q(x)`, finite for every finite `x`.
pub fn ln_gaussian_q(x: f64) -> f64 {
    if x > 0.0 {
        let z = x * std::f64::consts::FRAC_1_SQRT_2;
        -0.5 * x * x + erfcx(z).ln() - LN_2
    } else {
        gaussian_q(x).ln()
    }
}

/// Inverse of [`gaussian_q`] on the open unit interval.
pub fn gaussian_q_inv(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return domain(format!("gaussian_q_inv needs u in (0,1), got {u}"));
    }
    if u > 0.5 {
        // 1 - u is exact here (Sterbenz), and Q(-x) = 1 - Q(x).
        return Ok(-gaussian_q_inv(1.0 - u)?);
    }
    // Q(x) = u  <=>  Phi(-x) = u.
    let mut x = -acklam_normal_quantile(u);
    let ln_u = u.ln();
    // Newton on ln Q(x) - ln u; ln Q is concave and decreasing so this is
    // well behaved even deep in the tail.
    for _ in 0..50 {
        let ln_q = ln_gaussian_q(x);
        let g = ln_q - ln_u;
        // d/dx ln Q(x) = -pdf(x)/Q(x)
        let slope = -(gaussian_pdf(x).ln() - ln_q).exp();
        let step = g / slope;
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    Ok(x)
}

/// Rational approximation to the standard normal quantile (P. J. Acklam),
/// relative error about 1e-9. Only used as a starting point.
fn acklam_normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// `exp(eps) * Q(x)` evaluated in log space.
///
/// Intermediates stay finite for `eps` up to 1e4 and `|x|` up to 1e3; the
/// result itself is `+inf` only when the true value exceeds `f64::MAX`.
pub fn scaled_tail_product(eps: f64, x: f64) -> f64 {
    if x.is_infinite() {
        return if x > 0.0 { 0.0 } else { eps.exp() };
    }
    (eps + ln_gaussian_q(x)).exp()
}

/// Stopping rule for [`bisect_monotone`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionConfig {
    /// Absolute width of the final bracket.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 200,
        }
    }
}

impl BisectionConfig {
    pub fn new(tolerance: f64, max_iterations: usize) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return domain(format!("bisection tolerance must be positive, got {tolerance}"));
        }
        if max_iterations == 0 {
            return domain("max_iterations must be at least 1");
        }
        Ok(Self {
            tolerance,
            max_iterations,
        })
    }

    /// Iterations needed to shrink a bracket of `width` below the tolerance.
    pub fn iterations_for(&self, width: f64) -> usize {
        if width <= self.tolerance {
            0
        } else {
            (width / self.tolerance).log2().ceil() as usize
        }
    }
}

/// Final bracket of a bisection run. `root` is the lower endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub root: f64,
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

/// Bisection for a monotone increasing `f` with `f(lo) <= 0 <= f(hi)`.
///
/// Returns the lower endpoint of the final bracket, so `f(root) <= 0`
/// always holds.
pub fn bisect_monotone<F>(mut f: F, lo: f64, hi: f64, cfg: &BisectionConfig) -> Result<Bisection>
where
    F: FnMut(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return domain(format!("bisection needs finite lo < hi, got [{lo}, {hi}]"));
    }
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo.is_nan() || f_hi.is_nan() || f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }

    let (mut lo, mut hi) = (lo, hi);
    let mut iterations = 0;
    while hi - lo > cfg.tolerance {
        if iterations == cfg.max_iterations {
            return Err(Error::Convergence {
                iterations,
                width: hi - lo,
            });
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            // bracket is down to adjacent floats
            break;
        }
        let f_mid = f(mid);
        if f_mid.is_nan() {
            return Err(Error::NotFinite {
                at: mid,
                value: f_mid,
            });
        }
        if f_mid > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(Bisection {
        root: lo,
        lo,
        hi,
        iterations,
    })
}
