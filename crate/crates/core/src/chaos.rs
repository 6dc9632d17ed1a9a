//! Chaos quantifiers: level-spacing ratios, generalized fractal dimensions of
//! eigenvectors and their moment statistics, resolved in scaled energy.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{bin_of, Spectrum};

/// Spacings at or below this fraction of the spectral scale count as degenerate.
pub const DEGENERACY_RTOL: f64 = 1e-12;

/// Fewest levels an energy bin needs before its statistics are reported.
pub const MIN_LEVELS_PER_BIN: usize = 10;

/// `r_n = min(s_n / s_{n+1}, s_{n+1} / s_n)` for each pair of neighbouring spacings.
///
/// Fails if any spacing is exactly zero; see [`spacing_ratios_lenient`].
pub fn spacing_ratios(levels: &[f64]) -> Result<Vec<f64>> {
    check_levels(levels)?;
    let zero = levels.windows(2).filter(|w| w[1] == w[0]).count();
    if zero > 0 {
        return Err(Error::DegenerateSpectrum { zero_spacings: zero });
    }
    Ok(levels
        .windows(3)
        .map(|w| ratio(w[1] - w[0], w[2] - w[1]))
        .collect())
}

fn check_levels(levels: &[f64]) -> Result<()> {
    if levels.len() < 3 {
        return Err(Error::TooFew { need: 3, got: levels.len() });
    }
    if levels.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("levels must be finite".into()));
    }
    if levels.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("levels must be ascending".into()));
    }
    Ok(())
}

#[inline]
fn ratio(a: f64, b: f64) -> f64 {
    if a <= b {
        a / b
    } else {
        b / a
    }
}

/// Spacing ratios with degenerate spacings excluded.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RatioSet {
    pub values: Vec<f64>,
    /// Index of the level shared by the two spacings of each ratio.
    pub middle: Vec<usize>,
    /// Spacings treated as degenerate; every ratio touching one is dropped.
    pub degenerate_spacings: usize,
}

impl RatioSet {
    pub fn mean(&self) -> Option<f64> {
        if self.values.is_empty() {
            None
        } else {
            Some(self.values.iter().sum::<f64>() / self.values.len() as f64)
        }
    }
}

/// Like [`spacing_ratios`] but drops ratios that involve a spacing below
/// [`DEGENERACY_RTOL`] times the spectral scale, and counts those spacings.
pub fn spacing_ratios_lenient(levels: &[f64]) -> Result<RatioSet> {
    check_levels(levels)?;
    let scale = levels
        .iter()
        .fold(levels[levels.len() - 1] - levels[0], |m, v| m.max(v.abs()));
    let tol = DEGENERACY_RTOL * scale;
    let spacings: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    let degenerate = |s: f64| s <= tol;
    let mut out = RatioSet {
        degenerate_spacings: spacings.iter().filter(|&&s| degenerate(s)).count(),
        ..Default::default()
    };
    for (n, w) in spacings.windows(2).enumerate() {
        if degenerate(w[0]) || degenerate(w[1]) {
            continue;
        }
        out.values.push(ratio(w[0], w[1]));
        out.middle.push(n + 1);
    }
    Ok(out)
}

/// Order of a generalized fractal dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum QOrder {
    Finite(f64),
    Infinity,
}

impl fmt::Display for QOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QOrder::Finite(q) => write!(f, "{q}"),
            QOrder::Infinity => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for QOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(QOrder::Infinity),
            t => {
                let q: f64 = t.parse().map_err(|_| Error::Parse(format!("bad q value {t:?}")))?;
                if !(q.is_finite() && q > 0.0) {
                    return Err(Error::Domain(format!("q = {q} must be positive")));
                }
                Ok(QOrder::Finite(q))
            }
        }
    }
}

fn check_vector(v: &[f64], dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::Domain(format!("dimension {dim} < 2 leaves ln N undefined")));
    }
    if v.len() != dim {
        return Err(Error::Domain(format!("vector has {} components, expected {dim}", v.len())));
    }
    let norm_sq: f64 = v.iter().map(|x| x * x).sum();
    if !((norm_sq - 1.0).abs() <= 1e-8) {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok(())
}

/// Scaled Rényi dimension `D_q = -ln(Σ|v_i|^(2q)) / ((q - 1) ln N)`, with the
/// Shannon limit at `q = 1` and `-ln max|v_i|^2 / ln N` at `q = ∞`.
pub fn gfd(v: &[f64], q: QOrder, dim: usize) -> Result<f64> {
    check_vector(v, dim)?;
    let ln_n = (dim as f64).ln();
    Ok(match q {
        QOrder::Infinity => -max_intensity(v).ln() / ln_n,
        QOrder::Finite(q) if q <= 0.0 || !q.is_finite() => {
            return Err(Error::Domain(format!("q = {q} must be positive")));
        }
        QOrder::Finite(q) if q == 1.0 => shannon(v) / ln_n,
        QOrder::Finite(q) => {
            let r: f64 = v.iter().map(|x| (x * x).powf(q)).sum();
            -r.ln() / ((q - 1.0) * ln_n)
        }
    })
}

fn shannon(v: &[f64]) -> f64 {
    v.iter()
        .map(|x| {
            let p = x * x;
            if p > 0.0 {
                -p * p.ln()
            } else {
                0.0
            }
        })
        .sum()
}

fn max_intensity(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x * x))
}

/// `D_1`, `D_2` and `D_∞` of one eigenvector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GfdRecord {
    pub state_index: usize,
    pub energy: f64,
    pub eps: f64,
    pub d1: f64,
    pub d2: f64,
    pub dinf: f64,
    /// Extra finite orders, as `(q, D_q)`.
    pub dq_extra: Vec<(f64, f64)>,
}

/// `(D_1, D_2, D_∞)` in a single pass over the intensities.
pub fn gfd_triplet(v: &[f64]) -> Result<(f64, f64, f64)> {
    check_vector(v, v.len())?;
    let ln_n = (v.len() as f64).ln();
    let (mut ent, mut ipr, mut pmax) = (0.0, 0.0, 0.0f64);
    for x in v {
        let p = x * x;
        if p > 0.0 {
            ent -= p * p.ln();
        }
        ipr += p * p;
        pmax = pmax.max(p);
    }
    Ok((ent / ln_n, -ipr.ln() / ln_n, -pmax.ln() / ln_n))
}

/// Fractal dimensions of every eigenvector stored in `s`.
pub fn gfd_records(s: &Spectrum, extra_q: &[f64]) -> Result<Vec<GfdRecord>> {
    let eps = s.eps()?;
    let mut out = Vec::with_capacity(s.vector_indices().len());
    for &k in s.vector_indices() {
        let v = s.vector(k).expect("listed vector is stored");
        let (d1, d2, dinf) = gfd_triplet(v)?;
        let dq_extra = extra_q
            .iter()
            .map(|&q| gfd(v, QOrder::Finite(q), v.len()).map(|d| (q, d)))
            .collect::<Result<Vec<_>>>()?;
        out.push(GfdRecord { state_index: k, energy: s.eigenvalues()[k], eps: eps[k], d1, d2, dinf, dq_extra });
    }
    Ok(out)
}

/// Sample moments. The variance is the population variance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentStats {
    pub count: usize,
    pub mean: f64,
    pub var: f64,
    /// `⟨(x - mean)^3⟩ / var^(3/2)`; `None` below three samples or at zero variance.
    pub skew: Option<f64>,
    pub stderr_mean: f64,
}

pub fn moment_stats(samples: &[f64]) -> Result<MomentStats> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::TooFew { need: 1, got: 0 });
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let (mut m2, mut m3) = (0.0, 0.0);
    for &x in samples {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    let var = m2 / nf;
    let m3 = m3 / nf;
    let skew = if n >= 3 && var > 0.0 { Some(m3 / var.powf(1.5)) } else { None };
    Ok(MomentStats { count: n, mean, var, skew, stderr_mean: (var / nf).sqrt() })
}

/// Standard error of the population variance of `samples`, `sqrt((m4 - m2^2) / n)`.
pub fn variance_stderr(samples: &[f64]) -> Result<f64> {
    let m = moment_stats(samples)?;
    let n = samples.len() as f64;
    let m4 = samples.iter().map(|x| (x - m.mean).powi(4)).sum::<f64>() / n;
    Ok(((m4 - m.var * m.var).max(0.0) / n).sqrt())
}

/// Mean and variance of pooled samples with delete-one-group jackknife errors.
///
/// Samples inside a group (one random-matrix realization) are correlated, so
/// the errors are estimated from the spread between groups.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupedStats {
    pub groups: usize,
    pub count: usize,
    pub mean: f64,
    pub var: f64,
    pub stderr_mean: f64,
    pub stderr_var: f64,
}

pub fn grouped_stats(groups: &[Vec<f64>]) -> Result<GroupedStats> {
    let groups: Vec<&Vec<f64>> = groups.iter().filter(|g| !g.is_empty()).collect();
    let g = groups.len();
    if g < 2 {
        return Err(Error::TooFew { need: 2, got: g });
    }
    let (mut n, mut s1, mut s2) = (0usize, 0.0, 0.0);
    let sums: Vec<(usize, f64, f64)> = groups
        .iter()
        .map(|xs| (xs.len(), xs.iter().sum::<f64>(), xs.iter().map(|x| x * x).sum::<f64>()))
        .collect();
    for &(c, a, b) in &sums {
        n += c;
        s1 += a;
        s2 += b;
    }
    let moments = |n: usize, s1: f64, s2: f64| {
        let mean = s1 / n as f64;
        (mean, (s2 / n as f64 - mean * mean).max(0.0))
    };
    let (mean, _) = moments(n, s1, s2);
    // two-pass variance for the full sample
    let var = groups.iter().flat_map(|xs| xs.iter()).map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    let leave: Vec<(f64, f64)> = sums.iter().map(|&(c, a, b)| moments(n - c, s1 - a, s2 - b)).collect();
    let gf = g as f64;
    let jk = |pick: fn(&(f64, f64)) -> f64| {
        let avg = leave.iter().map(pick).sum::<f64>() / gf;
        ((gf - 1.0) / gf * leave.iter().map(|x| (pick(x) - avg).powi(2)).sum::<f64>()).sqrt()
    };
    Ok(GroupedStats {
        groups: g,
        count: n,
        mean,
        var,
        stderr_mean: jk(|x| x.0),
        stderr_var: jk(|x| x.1),
    })
}

/// One η point of an energy-resolved scan.
#[derive(Clone, Debug)]
pub struct ScanInput<'a> {
    pub eta: f64,
    pub spectrum: &'a Spectrum,
    /// Fractal dimensions of (some of) the eigenvectors; may be empty.
    pub gfds: &'a [GfdRecord],
}

/// A row of the long-format scan table. `value` is `None` for undefined cells.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub eta: f64,
    pub eps_bin_center: f64,
    pub quantifier: String,
    pub value: Option<f64>,
    pub stderr: Option<f64>,
    pub count: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    /// Degenerate spacings excluded from `r`, summed over η.
    pub degenerate_spacings: usize,
}

impl ScanTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "eta,eps_bin_center,quantifier,value,stderr,count")?;
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.12e}")).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                w,
                "{:e},{:.6},{},{},{},{}",
                r.eta,
                r.eps_bin_center,
                r.quantifier,
                opt(r.value),
                opt(r.stderr),
                r.count
            )?;
        }
        Ok(())
    }

    pub fn find(&self, eta: f64, quantifier: &str, eps_bin_center: f64) -> Option<&ScanRow> {
        self.rows.iter().find(|r| {
            r.eta == eta && r.quantifier == quantifier && (r.eps_bin_center - eps_bin_center).abs() < 1e-9
        })
    }
}

/// Inner fractions (percent of levels around the spectral centre) for `⟨r⟩`.
pub const INNER_PERCENTS: [u32; 4] = [40, 60, 80, 100];

/// Mean `r` over ratios whose middle level lies in the central `percent` of
/// the level indices.
pub fn inner_mean_ratio(ratios: &RatioSet, levels: usize, percent: u32) -> Option<MomentStats> {
    let drop = ((levels as f64) * (1.0 - percent as f64 / 100.0) / 2.0).floor() as usize;
    let (lo, hi) = (drop, levels - drop);
    let sel: Vec<f64> = ratios
        .values
        .iter()
        .zip(&ratios.middle)
        .filter(|(_, &m)| m >= lo && m < hi)
        .map(|(&r, _)| r)
        .collect();
    moment_stats(&sel).ok()
}

/// Per `(η, ε-bin)` statistics: `⟨r⟩` and mean/variance/skewness of `D_1, D_2, D_∞`,
/// plus the inner-fraction `⟨r⟩` values (reported at bin centre 0.5).
pub fn energy_resolved_scan(inputs: &[ScanInput<'_>], bins: usize) -> Result<ScanTable> {
    if bins == 0 {
        return Err(Error::Domain("need at least one bin".into()));
    }
    let mut table = ScanTable::default();
    for input in inputs {
        let s = input.spectrum;
        let eps = s.eps()?;
        let ratios = spacing_ratios_lenient(s.eigenvalues())?;
        table.degenerate_spacings += ratios.degenerate_spacings;
        let mut levels_in = vec![0usize; bins];
        for &e in eps {
            levels_in[bin_of(e, bins)] += 1;
        }
        let mut r_in: Vec<Vec<f64>> = vec![Vec::new(); bins];
        for (&r, &m) in ratios.values.iter().zip(&ratios.middle) {
            r_in[bin_of(eps[m], bins)].push(r);
        }
        let mut g_in: Vec<Vec<&GfdRecord>> = vec![Vec::new(); bins];
        for g in input.gfds {
            g_in[bin_of(g.eps, bins)].push(g);
        }
        for b in 0..bins {
            let center = (b as f64 + 0.5) / bins as f64;
            let defined = levels_in[b] >= MIN_LEVELS_PER_BIN;
            let mut push = |name: &str, value: Option<f64>, stderr: Option<f64>, count: usize| {
                table.rows.push(ScanRow {
                    eta: input.eta,
                    eps_bin_center: center,
                    quantifier: name.to_string(),
                    value: if defined { value } else { None },
                    stderr: if defined { stderr } else { None },
                    count,
                });
            };
            let r = moment_stats(&r_in[b]).ok();
            push("r_mean", r.map(|m| m.mean), r.map(|m| m.stderr_mean), r_in[b].len());
            if input.gfds.is_empty() {
                continue;
            }
            for (name, pick) in [
                ("d1", (|g: &GfdRecord| g.d1) as fn(&GfdRecord) -> f64),
                ("d2", |g: &GfdRecord| g.d2),
                ("dinf", |g: &GfdRecord| g.dinf),
            ] {
                let xs: Vec<f64> = g_in[b].iter().map(|g| pick(g)).collect();
                let m = moment_stats(&xs).ok();
                let n = xs.len();
                push(&format!("{name}_mean"), m.map(|m| m.mean), m.map(|m| m.stderr_mean), n);
                push(&format!("{name}_var"), m.map(|m| m.var), None, n);
                push(&format!("{name}_skew"), m.and_then(|m| m.skew), None, n);
            }
        }
        for p in INNER_PERCENTS {
            let m = inner_mean_ratio(&ratios, s.dim(), p);
            table.rows.push(ScanRow {
                eta: input.eta,
                eps_bin_center: 0.5,
                quantifier: format!("r_inner{p}"),
                value: m.map(|m| m.mean),
                stderr: m.map(|m| m.stderr_mean),
                count: m.map(|m| m.count).unwrap_or(0),
            });
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_examples() {
        assert_eq!(spacing_ratios(&[0.0, 1.0, 3.0]).unwrap(), vec![0.5]);
        let ladder: Vec<f64> = (0..20).map(|i| 0.25 * i as f64).collect();
        assert!(spacing_ratios(&ladder).unwrap().iter().all(|&r| r == 1.0));
        assert!(matches!(
            spacing_ratios(&[0.0, 1.0, 1.0, 2.0, 2.0]),
            Err(Error::DegenerateSpectrum { zero_spacings: 2 })
        ));
        assert!(spacing_ratios(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn lenient_ratios_skip_degeneracies() {
        let r = spacing_ratios_lenient(&[0.0, 1.0, 1.0, 3.0, 4.0, 6.0]).unwrap();
        assert_eq!(r.degenerate_spacings, 1);
        // spacings 1, 0, 2, 1, 2: only (2,1) and (1,2) survive
        assert_eq!(r.values, vec![0.5, 0.5]);
        assert_eq!(r.middle, vec![3, 4]);
    }

    #[test]
    fn gfd_examples() {
        let u = vec![0.5; 4];
        for q in [QOrder::Finite(0.5), QOrder::Finite(1.0), QOrder::Finite(2.0), QOrder::Infinity] {
            assert!((gfd(&u, q, 4).unwrap() - 1.0).abs() < 1e-14);
        }
        let e = vec![0.0, 1.0, 0.0];
        for q in [QOrder::Finite(1.0), QOrder::Finite(2.0), QOrder::Finite(3.0), QOrder::Infinity] {
            assert_eq!(gfd(&e, q, 3).unwrap(), 0.0);
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = vec![h, h, 0.0, 0.0];
        assert!((gfd(&v, QOrder::Finite(2.0), 4).unwrap() - 0.5).abs() < 1e-14);
        assert!(matches!(gfd(&[1.0, 1.0], QOrder::Infinity, 2), Err(Error::NotNormalized { .. })));
        assert!(gfd(&[1.0], QOrder::Infinity, 1).is_err());
        let (d1, d2, dinf) = gfd_triplet(&v).unwrap();
        assert!((d1 - 0.5).abs() < 1e-14 && (d2 - 0.5).abs() < 1e-14 && (dinf - 0.5).abs() < 1e-14);
    }

    #[test]
    fn moment_examples() {
        let m = moment_stats(&[2.5, 2.5, 2.5]).unwrap();
        assert_eq!((m.mean, m.var, m.skew), (2.5, 0.0, None));
        let m = moment_stats(&[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(m.skew, Some(0.0));
        assert!(moment_stats(&[]).is_err());
        assert_eq!(moment_stats(&[1.0, 2.0]).unwrap().skew, None);
    }

    #[test]
    fn moments_of_small_set_frozen() {
        // exact rationals: mean 4, population variance 10, third central moment 36
        let m = moment_stats(&[1.0, 2.0, 3.0, 4.0, 10.0]).unwrap();
        assert!((m.mean - 4.0).abs() < 1e-15);
        assert!((m.var - 10.0).abs() < 1e-13);
        assert!((m.skew.unwrap() - 1.1384199576606167).abs() < 1e-13);
        assert!((m.stderr_mean - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn q_parsing() {
        assert_eq!("inf".parse::<QOrder>().unwrap(), QOrder::Infinity);
        assert_eq!("2".parse::<QOrder>().unwrap(), QOrder::Finite(2.0));
        assert!("-1".parse::<QOrder>().is_err());
        assert!("x".parse::<QOrder>().is_err());
    }

    #[test]
    fn inner_fraction_selection() {
        let levels: Vec<f64> = (0..10).map(|i| (i * i) as f64).collect();
        let r = spacing_ratios_lenient(&levels).unwrap();
        let all = inner_mean_ratio(&r, 10, 100).unwrap();
        assert_eq!(all.count, 8);
        // 40% of 10 levels keeps indices 3..7, i.e. middles 3, 4, 5, 6
        assert_eq!(inner_mean_ratio(&r, 10, 40).unwrap().count, 4);
    }

    #[test]
    fn grouped_errors_match_iid_limit() {
        // singleton groups reduce the jackknife to the usual standard error
        let xs = [1.0, 2.0, 3.0, 4.0, 10.0];
        let groups: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let g = grouped_stats(&groups).unwrap();
        assert!((g.mean - 4.0).abs() < 1e-12);
        assert!((g.var - 10.0).abs() < 1e-12);
        // sample standard deviation / sqrt(n) = sqrt(12.5 / 5)
        assert!((g.stderr_mean - 2.5f64.sqrt()).abs() < 1e-12);
        assert!(grouped_stats(&[vec![1.0, 2.0]]).is_err());
        // fourth central moment of {1,2,3,4,10} is 278.8
        assert!((variance_stderr(&xs).unwrap() - ((278.8 - 100.0) / 5.0f64).sqrt()).abs() < 1e-12);
    }
}
