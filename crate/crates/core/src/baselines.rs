//! Analytic GOE predictions for the generalized fractal dimensions of
//! eigenvectors, used as the fully chaotic reference.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad;
use crate::special::{erf_pow, harmonic_real, trigamma};

fn check_dim(dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::Domain(format!("GOE baseline needs dim >= 2, got {dim}")));
    }
    Ok(dim as f64)
}

/// Mean and variance of `D1` over GOE eigenvectors of size `dim`.
///
/// For odd `dim` the harmonic number at `dim / 2` is continued through the digamma function.
pub fn goe_d1_stats(dim: usize) -> Result<(f64, f64)> {
    let n = check_dim(dim)?;
    let ln = n.ln();
    let mean = (harmonic_real(n / 2.0)? - 2.0 + 4f64.ln()) / ln;
    let pi2 = std::f64::consts::PI.powi(2);
    let var = ((3.0 * pi2 - 24.0) * (n + 2.0) - 8.0) / (2.0 * (n + 2.0).powi(2) * ln * ln)
        - trigamma(2.0 + n / 2.0)? / (ln * ln);
    Ok((mean, var))
}

/// `D2` of the averaged participation, `-log_dim <R2>`, and its variance.
pub fn goe_d2_stats(dim: usize) -> Result<(f64, f64)> {
    let n = check_dim(dim)?;
    let ln = n.ln();
    let d2 = ((n + 2.0).ln() - 3f64.ln()) / ln;
    let var = 8.0 * (n - 1.0) / (3.0 * (n + 4.0) * (n + 6.0) * ln * ln);
    Ok((d2, var))
}

/// Probability that every squared component of a GOE eigenvector stays below `s`.
fn max_intensity_below(s: f64, n: f64) -> f64 {
    erf_pow((n * s / 2.0).sqrt(), n)
}

/// `k`-th raw moment of `D_inf` over GOE eigenvectors of size `dim`.
///
/// Components are treated as independent Porter-Thomas intensities. Normalization
/// correlates them, which matters at small `dim` (about 10% low at `dim = 10`) and
/// fades as `dim` grows.
///
/// Integrated in `u = -ln s`, where the integrand is a smooth step located near `u = ln dim`.
pub fn goe_dinf_moment(dim: usize, k: u32) -> Result<f64> {
    let n = check_dim(dim)?;
    if k == 0 {
        return Err(Error::Domain("moment order must be at least 1".into()));
    }
    let ln = n.ln();
    let tail = ln + 40.0;
    let mut breaks = vec![0.0];
    for b in [ln - 4.0, ln - 1.0, ln, ln + 2.0, ln + 8.0] {
        if b > *breaks.last().unwrap() && b < tail {
            breaks.push(b);
        }
    }
    breaks.push(tail);
    let kf = k as f64;
    let mut f = |u: f64| u.powi(k as i32 - 1) * max_intensity_below((-u).exp(), n);
    let (integral, _) = quad::integrate_breaks(&mut f, &breaks, 1e-300, 1e-12)?;
    Ok(kf * integral / ln.powi(k as i32))
}

/// Mean and variance of `D_inf` from the first two moments.
pub fn goe_dinf_stats(dim: usize) -> Result<(f64, f64)> {
    let m1 = goe_dinf_moment(dim, 1)?;
    let m2 = goe_dinf_moment(dim, 2)?;
    Ok((m1, m2 - m1 * m1))
}

/// Density of `D_inf` over GOE eigenvectors of size `dim`. Zero for `dinf <= 0`.
pub fn goe_dinf_pdf(dinf: f64, dim: usize) -> f64 {
    if dim < 2 || !(dinf > 0.0) || !dinf.is_finite() {
        return 0.0;
    }
    let n = dim as f64;
    let t = n.powf(-dinf);
    let x = (t * n / 2.0).sqrt();
    let erf_part = erf_pow(x, n - 1.0);
    if erf_part == 0.0 {
        return 0.0;
    }
    n.powf(1.5) / (2.0 * std::f64::consts::PI * t).sqrt() * (-t * n / 2.0).exp() * erf_part * t * n.ln()
}

/// Cumulative distribution of `D_inf`, `P(D_inf <= dinf)`.
pub fn goe_dinf_cdf(dinf: f64, dim: usize) -> f64 {
    if dim < 2 || !(dinf > 0.0) {
        return 0.0;
    }
    let n = dim as f64;
    let x = (n * n.powf(-dinf) / 2.0).sqrt();
    let c = libm::erfc(x);
    if c < 0.5 {
        // 1 - erf^n without cancellation in the lower tail
        -(n * (-c).ln_1p()).exp_m1()
    } else {
        1.0 - max_intensity_below(n.powf(-dinf), n)
    }
}

/// All analytic GOE reference values for one dimension.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoeBaseline {
    pub dim: usize,
    pub mean_d1: f64,
    pub var_d1: f64,
    pub d2_tilde: f64,
    pub var_d2: f64,
    /// Raw moments of `D_inf` keyed by order.
    pub dinf_moments: BTreeMap<u32, f64>,
}

impl GoeBaseline {
    pub fn compute(dim: usize) -> Result<Self> {
        let (mean_d1, var_d1) = goe_d1_stats(dim)?;
        let (d2_tilde, var_d2) = goe_d2_stats(dim)?;
        let mut dinf_moments = BTreeMap::new();
        for k in 1..=2 {
            dinf_moments.insert(k, goe_dinf_moment(dim, k)?);
        }
        Ok(Self { dim, mean_d1, var_d1, d2_tilde, var_d2, dinf_moments })
    }

    pub fn mean_dinf(&self) -> f64 {
        self.dinf_moments[&1]
    }

    pub fn var_dinf(&self) -> f64 {
        let m1 = self.dinf_moments[&1];
        self.dinf_moments[&2] - m1 * m1
    }

    /// `(quantity, value)` pairs in a fixed order.
    pub fn quantities(&self) -> Vec<(String, f64)> {
        let mut out = vec![
            ("mean_d1".to_string(), self.mean_d1),
            ("var_d1".to_string(), self.var_d1),
            ("d2_tilde".to_string(), self.d2_tilde),
            ("var_d2".to_string(), self.var_d2),
            ("mean_dinf".to_string(), self.mean_dinf()),
            ("var_dinf".to_string(), self.var_dinf()),
        ];
        for (k, v) in &self.dinf_moments {
            out.push((format!("dinf_moment_{k}"), *v));
        }
        out
    }
}

/// Writes baselines as long-format CSV with columns `dim,quantity,value`.
pub fn write_baseline_csv<W: Write>(baselines: &[GoeBaseline], mut w: W) -> Result<()> {
    writeln!(w, "dim,quantity,value")?;
    for b in baselines {
        for (q, v) in b.quantities() {
            writeln!(w, "{},{},{:e}", b.dim, q, v)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn d1_reference_values() {
        // 30-digit evaluations with an exact rational h_63
        let (mean, var) = goe_d1_stats(126).unwrap();
        assert!(rel(mean, 0.850_769_319_073_719_7) < 1e-12);
        assert!(rel(var, 2.634_382_176_362_375_4e-4) < 1e-9);
        let (mean, _) = goe_d1_stats(127).unwrap();
        assert!(rel(mean, 0.851_000_014_635_337_8) < 1e-12);
        assert!(goe_d1_stats(1).is_err());
    }

    #[test]
    fn d1_mean_approaches_one_like_inverse_log() {
        let gap = |d: usize| (1.0 - goe_d1_stats(d).unwrap().0) * (d as f64).ln();
        // (1 - mean) ln N -> 2 - ln 4 - γ + ln 2 from below, slowly
        let target = 2.0 - 4f64.ln() - crate::special::EULER_GAMMA + 2f64.ln();
        let (a, b) = (gap(1 << 10), gap(1 << 20));
        assert!((b - target).abs() < (a - target).abs());
        assert!((b - target).abs() < 1e-5);
    }

    #[test]
    fn d2_reference_values() {
        let (d2, var) = goe_d2_stats(126).unwrap();
        assert!(rel(d2, 0.776_095_779_250_687_3) < 1e-13);
        assert!(rel(var, 8.304_973_401_181_654e-4) < 1e-12);
        assert!(goe_d2_stats(1).is_err());
        // var * N * ln^2 N stays bounded
        for p in 8..=14 {
            let d = 1usize << p;
            let (_, v) = goe_d2_stats(d).unwrap();
            let scaled = v * d as f64 * (d as f64).ln().powi(2);
            assert!(scaled > 2.0 && scaled < 3.0, "{scaled}");
        }
    }

    #[test]
    fn dinf_moments_match_high_precision_quadrature() {
        let cases = [
            (10, 0.484_935_744_541_332_3, 0.291_773_969_886_759_5),
            (126, 0.574_750_855_773_533_7, 0.333_478_564_002_732_66),
            (1024, 0.644_674_019_438_313, 0.416_350_213_981_739_3),
        ];
        for (dim, m1, m2) in cases {
            assert!(rel(goe_dinf_moment(dim, 1).unwrap(), m1) < 1e-9, "dim {dim}");
            assert!(rel(goe_dinf_moment(dim, 2).unwrap(), m2) < 1e-9, "dim {dim}");
        }
        let (_, var) = goe_dinf_stats(1024).unwrap();
        assert!(rel(var, 7.456_226_429_888_93e-4) < 1e-7);
        assert!(goe_dinf_moment(10, 0).is_err());
    }

    #[test]
    fn dinf_variance_scales_as_inverse_fourth_power_of_log() {
        let pts: Vec<(f64, f64)> = (8..=14)
            .map(|p| {
                let d = 1usize << p;
                let (_, v) = goe_dinf_stats(d).unwrap();
                ((d as f64).ln().ln(), v.ln())
            })
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        assert!((slope + 4.0).abs() < 0.3, "slope {slope}");
    }

    #[test]
    fn dinf_mean_gap_tracks_loglog_over_log() {
        let ratio = |d: usize| {
            let l = (d as f64).ln();
            (1.0 - goe_dinf_moment(d, 1).unwrap()) * l / l.ln()
        };
        let values: Vec<f64> = [1usize << 8, 1 << 12, 1 << 16, 1 << 20].iter().map(|&d| ratio(d)).collect();
        for v in &values {
            assert!(*v > 0.5 && *v < 1.5, "{values:?}");
        }
    }

    #[test]
    fn dinf_pdf_is_normalized_and_consistent() {
        for dim in [126usize, 1024] {
            let (mass, _) = quad::integrate(|d| goe_dinf_pdf(d, dim), 1e-9, 1.5, 1e-12, 1e-10).unwrap();
            assert!((mass - 1.0).abs() < 1e-3, "dim {dim}: {mass}");
            let (mean, _) =
                quad::integrate(|d| d * goe_dinf_pdf(d, dim), 1e-9, 1.5, 1e-12, 1e-10).unwrap();
            assert!(rel(mean, goe_dinf_moment(dim, 1).unwrap()) < 1e-6);
        }
        // mode near the mean at dim 1024
        let mut best = (0.0, 0.0);
        for i in 1..2000 {
            let d = i as f64 / 2000.0;
            let p = goe_dinf_pdf(d, 1024);
            if p > best.1 {
                best = (d, p);
            }
        }
        assert!(rel(best.0, goe_dinf_moment(1024, 1).unwrap()) < 0.05);
        assert_eq!(goe_dinf_pdf(0.0, 1024), 0.0);
    }

    #[test]
    fn cdf_derivative_is_pdf() {
        let dim = 512;
        for d in [0.4, 0.55, 0.65, 0.75] {
            let h = 1e-6;
            let num = (goe_dinf_cdf(d + h, dim) - goe_dinf_cdf(d - h, dim)) / (2.0 * h);
            assert!(rel(num, goe_dinf_pdf(d, dim)) < 1e-5, "{d}: {num} vs {}", goe_dinf_pdf(d, dim));
        }
    }

    #[test]
    fn baseline_table() {
        let b = GoeBaseline::compute(126).unwrap();
        assert!(b.mean_d1 > 0.0 && b.mean_d1 <= 1.0);
        assert!(b.var_dinf() > 0.0);
        let mut buf = Vec::new();
        write_baseline_csv(&[b], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("dim,quantity,value\n126,mean_d1,"));
        assert_eq!(text.lines().count(), 1 + 8);
    }
}
