//! Special functions needed by the GOE baselines.

use crate::error::{Error, Result};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;

/// Above this index harmonic numbers come from their asymptotic series.
pub const HARMONIC_EXACT_LIMIT: u64 = 1_000_000;

/// `h_n = Σ_{k=1}^n 1/k`.
pub fn harmonic_number(n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if n <= HARMONIC_EXACT_LIMIT {
        // smallest terms first keeps the rounding error at a few ulps
        return (1..=n).rev().map(|k| 1.0 / k as f64).sum();
    }
    let x = n as f64;
    let x2 = x * x;
    x.ln() + EULER_GAMMA + 1.0 / (2.0 * x) - 1.0 / (12.0 * x2) + 1.0 / (120.0 * x2 * x2)
        - 1.0 / (252.0 * x2 * x2 * x2)
}

/// Harmonic number continued to real arguments, `h_x = ψ(x + 1) + γ`.
pub fn harmonic_real(x: f64) -> Result<f64> {
    if x.fract() == 0.0 && x >= 0.0 && x <= u64::MAX as f64 {
        return Ok(harmonic_number(x as u64));
    }
    Ok(digamma(x + 1.0)? + EULER_GAMMA)
}

// B_2k / (2k) for the digamma series and B_2k for the trigamma series, k = 1..
const B2K: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Digamma function `ψ(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("digamma needs x > 0, got {x}")));
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut pow = inv2;
    let mut series = 0.0;
    for (k, b) in B2K.iter().enumerate() {
        series += b / (2.0 * (k + 1) as f64) * pow;
        pow *= inv2;
    }
    Ok(acc + x.ln() - 0.5 / x - series)
}

/// Trigamma function `ψ'(x)` for `x > 0`.
pub fn trigamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("trigamma needs x > 0, got {x}")));
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut pow = inv2 * inv;
    let mut series = 0.0;
    for b in B2K {
        series += b * pow;
        pow *= inv2;
    }
    Ok(acc + inv + 0.5 * inv2 + series)
}

/// `erf(x)^n`, accurate when `erf(x)` is close to one.
pub fn erf_pow(x: f64, n: f64) -> f64 {
    if x <= 0.0 {
        return if n == 0.0 { 1.0 } else { 0.0 };
    }
    let c = libm::erfc(x);
    if c < 0.5 {
        (n * (-c).ln_1p()).exp()
    } else {
        libm::erf(x).powf(n)
    }
}
