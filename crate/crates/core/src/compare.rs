//! Distribution-level comparison of models: empirical densities, Gaussian
//! and Edgeworth fits, the mean-shift distance and the KL divergence, and
//! the energy map between BHH and EGOE spectra.

use serde::Serialize;

use crate::chaos::moment_stats;
use crate::error::{Error, Result};
use crate::quad;

const MIN_BINS: usize = 20;
const MAX_BINS: usize = 10_000;
const DENSITY_FLOOR: f64 = 1e-12;

/// Piecewise-constant probability density on contiguous bins.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramDensity {
    pub edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub n_samples: usize,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Freedman-Diaconis bin count for `samples`, at least 20.
pub fn freedman_diaconis_bins(samples: &[f64]) -> usize {
    if samples.len() < 2 {
        return MIN_BINS;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let span = sorted[sorted.len() - 1] - sorted[0];
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    if iqr <= 0.0 || span <= 0.0 {
        return MIN_BINS;
    }
    let width = 2.0 * iqr / (samples.len() as f64).cbrt();
    ((span / width).ceil() as usize).clamp(MIN_BINS, MAX_BINS)
}

impl HistogramDensity {
    /// Bins spanning the sample range, counted by the Freedman-Diaconis rule.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let bins = freedman_diaconis_bins(samples);
        let (lo, hi) = finite_range(samples)?;
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Self::with_range(samples, lo, hi, bins)
    }

    /// `bins` equal bins on `[lo, hi]`; samples outside the range are rejected.
    pub fn with_range(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::TooFew { need: 1, got: 0 });
        }
        if bins == 0 || !(hi > lo) {
            return Err(Error::Domain(format!("bad histogram range [{lo}, {hi}] with {bins} bins")));
        }
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for &x in samples {
            if !(lo..=hi).contains(&x) {
                return Err(Error::Domain(format!("sample {x} outside [{lo}, {hi}]")));
            }
            counts[(((x - lo) / width).floor() as usize).min(bins - 1)] += 1;
        }
        let n = samples.len() as f64;
        let edges = (0..=bins).map(|i| if i == bins { hi } else { lo + i as f64 * width }).collect();
        let densities = counts.iter().map(|&c| c as f64 / (n * width)).collect();
        Ok(HistogramDensity { edges, densities, n_samples: samples.len() })
    }

    pub fn bins(&self) -> usize {
        self.densities.len()
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1]))
    }

    pub fn mass(&self) -> f64 {
        self.edges.windows(2).zip(&self.densities).map(|(w, d)| (w[1] - w[0]) * d).sum()
    }

    /// Long-format CSV rows `lo,hi,density`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "bin_lo,bin_hi,density")?;
        for (e, d) in self.edges.windows(2).zip(&self.densities) {
            writeln!(w, "{:e},{:e},{:e}", e[0], e[1], d)?;
        }
        Ok(())
    }
}

fn finite_range(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::TooFew { need: 1, got: 0 });
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in samples {
        if !x.is_finite() {
            return Err(Error::Domain("non-finite sample".into()));
        }
        lo = lo.min(x);
        hi = hi.max(x);
    }
    Ok((lo, hi))
}

/// Normal density with the sample mean and standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianModel {
    pub mu: f64,
    pub sigma: f64,
}

impl GaussianModel {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !mu.is_finite() {
            return Err(Error::ZeroVariance);
        }
        Ok(Self { mu, sigma })
    }

    pub fn fit(samples: &[f64]) -> Result<Self> {
        let m = moment_stats(samples)?;
        Self::new(m.mean, m.var.sqrt())
    }

    pub fn density(&self, x: f64) -> f64 {
        let z = (x - self.mu) / self.sigma;
        (-0.5 * z * z).exp() / (self.sigma * (2.0 * std::f64::consts::PI).sqrt())
    }
}

/// Second-order Edgeworth expansion around a normal density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EdgeworthModel {
    pub mu: f64,
    pub sigma: f64,
    /// Skewness.
    pub gamma1: f64,
    /// Excess kurtosis.
    pub gamma2: f64,
    /// Mass of the clipped series; densities are divided by it.
    norm: f64,
}

pub const EDGEWORTH_MIN_SAMPLES: usize = 50;

impl EdgeworthModel {
    pub fn new(mu: f64, sigma: f64, gamma1: f64, gamma2: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::ZeroVariance);
        }
        let mut m = EdgeworthModel { mu, sigma, gamma1, gamma2, norm: 1.0 };
        let (mass, _) = quad::integrate_breaks(
            &mut |z| m.clipped_standard(z),
            &[-12.0, -4.0, -2.0, 0.0, 2.0, 4.0, 12.0],
            1e-12,
            1e-10,
        )?;
        if !(mass > 0.0) {
            return Err(Error::Domain("Edgeworth series is nowhere positive".into()));
        }
        m.norm = mass;
        Ok(m)
    }

    /// Fit from sample moments.
    pub fn fit(samples: &[f64]) -> Result<Self> {
        if samples.len() < EDGEWORTH_MIN_SAMPLES {
            return Err(Error::TooFew { need: EDGEWORTH_MIN_SAMPLES, got: samples.len() });
        }
        let n = samples.len() as f64;
        let mu = samples.iter().sum::<f64>() / n;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &x in samples {
            let d = x - mu;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
        if !(m2 > 0.0) {
            return Err(Error::ZeroVariance);
        }
        Self::new(mu, m2.sqrt(), m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    }

    fn clipped_standard(&self, z: f64) -> f64 {
        let z2 = z * z;
        let he3 = z * (z2 - 3.0);
        let he4 = z2 * z2 - 6.0 * z2 + 3.0;
        let he6 = z2 * z2 * z2 - 15.0 * z2 * z2 + 45.0 * z2 - 15.0;
        let poly = 1.0 + self.gamma1 / 6.0 * he3 + self.gamma2 / 24.0 * he4 + self.gamma1 * self.gamma1 / 72.0 * he6;
        let phi = (-0.5 * z2).exp() / (2.0 * std::f64::consts::PI).sqrt();
        (phi * poly).max(0.0)
    }

    pub fn density(&self, x: f64) -> f64 {
        self.clipped_standard((x - self.mu) / self.sigma) / (self.sigma * self.norm)
    }
}

/// Shift of the reference mean from the BHH mean in units of the BHH standard deviation.
pub fn d_q_distance(ref_mean: f64, bhh_mean: f64, bhh_var: f64) -> Result<f64> {
    if !(bhh_var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok((ref_mean - bhh_mean) / bhh_var.sqrt())
}

/// `KL(p || q)` as a midpoint sum over the bins of `p`.
pub fn kl_divergence(p: &HistogramDensity, q: impl Fn(f64) -> f64) -> f64 {
    let mut kl = 0.0;
    for (w, &pd) in p.edges.windows(2).zip(&p.densities) {
        if pd <= 0.0 {
            continue;
        }
        let qd = q(0.5 * (w[0] + w[1])).max(DENSITY_FLOOR);
        let pd = pd.max(DENSITY_FLOOR);
        kl += (w[1] - w[0]) * pd * (pd / qd).ln();
    }
    kl
}

/// `∫ (model - hist)^2` over the histogram's bins.
pub fn integrated_squared_error(hist: &HistogramDensity, model: impl Fn(f64) -> f64) -> f64 {
    const SUB: usize = 8;
    let mut ise = 0.0;
    for (w, &d) in hist.edges.windows(2).zip(&hist.densities) {
        let h = (w[1] - w[0]) / SUB as f64;
        for j in 0..SUB {
            let x = w[0] + (j as f64 + 0.5) * h;
            ise += h * (model(x) - d).powi(2);
        }
    }
    ise
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::TooFew { need: 1, got: 0 });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Result of comparing one model's distribution against the BHH one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceReport {
    /// `"GOE-BHH"` and similar; reference model first.
    pub pair: String,
    /// `"1"`, `"2"` or `"inf"`.
    pub q: String,
    pub dim: usize,
    pub d_q: f64,
    pub kl: f64,
    pub n_samples: usize,
    pub bins: usize,
    pub binning: String,
}

/// Bulk centre `eps*` as a function of `eta`, linearly interpolated in `ln eta`.
#[derive(Clone, Debug, PartialEq)]
pub struct DosMaxCurve {
    points: Vec<(f64, f64)>,
}

impl DosMaxCurve {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::TooFew { need: 1, got: 0 });
        }
        if points.iter().any(|&(eta, e)| !(eta > 0.0) || !(0.0..=1.0).contains(&e)) {
            return Err(Error::Domain("DOS maxima need eta > 0 and eps* in [0, 1]".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        points.dedup_by(|a, b| a.0 == b.0);
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn eps_star(&self, eta: f64) -> Result<f64> {
        let pts = &self.points;
        let tol = 1e-9 * eta.abs();
        let missing = Error::MissingDosMax { eta };
        if !(eta > 0.0) || eta < pts[0].0 - tol || eta > pts[pts.len() - 1].0 + tol {
            return Err(missing);
        }
        let i = pts.partition_point(|p| p.0 < eta);
        if i < pts.len() && (pts[i].0 - eta).abs() <= tol {
            return Ok(pts[i].1);
        }
        if i == 0 {
            return Ok(pts[0].1);
        }
        if i == pts.len() {
            return Ok(pts[pts.len() - 1].1);
        }
        let (a, b) = (pts[i - 1], pts[i]);
        let t = (eta.ln() - a.0.ln()) / (b.0.ln() - a.0.ln());
        Ok(a.1 + t * (b.1 - a.1))
    }
}

/// EGOE scaled energy at the same distance from the bulk centre as `eps_bhh`.
///
/// The result is clamped to `[0, 1]`; with `reflect` values above one half are folded to `1 - eps`.
pub fn eps_egoe_map(eps_bhh: f64, eta: f64, curve: &DosMaxCurve, reflect: bool) -> Result<f64> {
    let e = (eps_bhh - curve.eps_star(eta)? + 0.5).clamp(0.0, 1.0);
    Ok(if reflect && e > 0.5 { 1.0 - e } else { e })
}

/// Fraction of levels below `eps`, linear between levels of the sorted `levels`.
fn level_fraction(levels: &[f64], eps: f64) -> f64 {
    let n = levels.len();
    if eps <= levels[0] {
        return 0.0;
    }
    if eps >= levels[n - 1] {
        return 1.0;
    }
    let i = levels.partition_point(|&x| x <= eps);
    let (a, b) = (levels[i - 1], levels[i]);
    let t = if b > a { (eps - a) / (b - a) } else { 0.0 };
    (i - 1) as f64 / (n - 1) as f64 + t / (n - 1) as f64
}

fn level_at_fraction(levels: &[f64], f: f64) -> f64 {
    let n = levels.len();
    let pos = f.clamp(0.0, 1.0) * (n - 1) as f64;
    let i = (pos.floor() as usize).min(n - 2);
    levels[i] + (pos - i as f64) * (levels[i + 1] - levels[i])
}

/// EGOE scaled energy below which the same fraction of levels lies as below `eps_bhh`.
///
/// Both level lists are sorted scaled energies with at least two entries.
pub fn eps_egoe_percentile(eps_bhh: f64, bhh_eps: &[f64], egoe_eps: &[f64]) -> Result<f64> {
    for levels in [bhh_eps, egoe_eps] {
        if levels.len() < 2 {
            return Err(Error::TooFew { need: 2, got: levels.len() });
        }
        if levels.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("levels must be sorted".into()));
        }
    }
    Ok(level_at_fraction(egoe_eps, level_fraction(bhh_eps, eps_bhh)))
}
