//! In-memory experiment pipelines shared by the command line and the acceptance suite.
//!
//! Every sweep runs its tasks on the ambient rayon pool and collects results in
//! task order, so output does not depend on the worker count.

use bose_chaos::baselines::{goe_dinf_pdf, GoeBaseline};
use bose_chaos::bhh::{build_h, BhhParams};
use bose_chaos::chaos::{
    gfd_records, grouped_stats, moment_stats, variance_stderr, GfdRecord, GroupedStats, MomentStats, QOrder,
};
use bose_chaos::compare::{
    d_q_distance, eps_egoe_map, eps_egoe_percentile, kl_divergence, DistanceReport, DosMaxCurve, EdgeworthModel,
    GaussianModel, HistogramDensity,
};
use bose_chaos::egoe::{sample_egoe_stream, EgoeParams};
use bose_chaos::fock::{SectorBasis, Symmetry};
use bose_chaos::matrix::SymmetricMatrix;
use bose_chaos::spectra::{
    diagonalize_selected, dos_histogram, full_diagonalize, select_near_target, Spectrum, DEFAULT_DENSE_CAP,
};
use bose_chaos::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// Which eigenvectors a diagonalization keeps.
#[derive(Clone, Debug, PartialEq)]
pub enum VectorRequest {
    None,
    All,
    /// The `k` levels nearest to each scaled-energy target.
    Nearest { targets: Vec<f64>, k: usize },
}

impl VectorRequest {
    pub fn nearest(targets: &[f64], k: usize) -> Self {
        VectorRequest::Nearest { targets: targets.to_vec(), k }
    }
}

pub fn diagonalize(m: &SymmetricMatrix, req: &VectorRequest) -> Result<Spectrum> {
    match req {
        VectorRequest::None => full_diagonalize(m, false),
        VectorRequest::All => full_diagonalize(m, true),
        VectorRequest::Nearest { targets, k } => diagonalize_selected(m, DEFAULT_DENSE_CAP, |s| {
            let mut all = Vec::new();
            for &t in targets {
                all.extend(select_near_target(s, t, *k)?);
            }
            Ok(all)
        }),
    }
}

/// Value of `D_q` stored in a record, if that order was computed.
pub fn gfd_value(r: &GfdRecord, q: QOrder) -> Option<f64> {
    match q {
        QOrder::Infinity => Some(r.dinf),
        QOrder::Finite(x) if x == 1.0 => Some(r.d1),
        QOrder::Finite(x) if x == 2.0 => Some(r.d2),
        QOrder::Finite(x) => r.dq_extra.iter().find(|(p, _)| *p == x).map(|&(_, d)| d),
    }
}

/// Finite orders other than 1 and 2, which records carry separately.
pub fn extra_orders(qs: &[QOrder]) -> Vec<f64> {
    let mut out = Vec::new();
    for q in qs {
        if let QOrder::Finite(x) = *q {
            if x != 1.0 && x != 2.0 && !out.contains(&x) {
                out.push(x);
            }
        }
    }
    out
}

/// One diagonalized matrix with fractal dimensions of its stored eigenvectors.
/// The eigenvectors themselves are dropped once the records exist.
#[derive(Clone, Debug)]
pub struct Diagonalized {
    pub spectrum: Spectrum,
    /// Sorted by `state_index`.
    pub gfds: Vec<GfdRecord>,
}

impl Diagonalized {
    pub fn new(m: &SymmetricMatrix, req: &VectorRequest, extra_q: &[f64]) -> Result<Self> {
        let mut spectrum = diagonalize(m, req)?;
        let gfds = if spectrum.has_vectors() { gfd_records(&spectrum, extra_q)? } else { Vec::new() };
        spectrum.retain_vectors(&[]);
        Ok(Diagonalized { spectrum, gfds })
    }

    /// Records of the `k` levels nearest to `eps`, nearest first.
    pub fn near(&self, eps: f64, k: usize) -> Result<Vec<&GfdRecord>> {
        select_near_target(&self.spectrum, eps, k)?
            .into_iter()
            .map(|i| {
                self.gfds
                    .binary_search_by_key(&i, |r| r.state_index)
                    .map(|j| &self.gfds[j])
                    .map_err(|_| Error::Domain(format!("eigenvector {i} was not computed")))
            })
            .collect()
    }

    /// `D_q` values of the `k` levels nearest to `eps`.
    pub fn samples(&self, eps: f64, k: usize, q: QOrder) -> Result<Vec<f64>> {
        self.near(eps, k)?
            .into_iter()
            .map(|r| gfd_value(r, q).ok_or_else(|| Error::Domain(format!("D_q for q = {q} was not computed"))))
            .collect()
    }
}

/// A Bose-Hubbard spectrum at one tunneling strength.
#[derive(Clone, Debug)]
pub struct BhhPoint {
    pub eta: f64,
    pub data: Diagonalized,
    /// Centre of the fullest DOS bin.
    pub eps_star: f64,
}

pub fn bhh_matrix(basis: &SectorBasis, eta: f64) -> Result<SymmetricMatrix> {
    let spec = basis.spec();
    build_h(&BhhParams::from_eta(eta, spec.n, spec.l, spec.bc, basis.kind()), basis)
}

pub fn bhh_point(basis: &SectorBasis, eta: f64, req: &VectorRequest, extra_q: &[f64], dos_bins: usize) -> Result<BhhPoint> {
    let data = Diagonalized::new(&bhh_matrix(basis, eta)?, req, extra_q)?;
    let eps_star = dos_histogram(&data.spectrum, dos_bins)?.eps_star;
    Ok(BhhPoint { eta, data, eps_star })
}

/// One BHH point per η, in grid order.
pub fn bhh_sweep(
    basis: &SectorBasis,
    etas: &[f64],
    req: &VectorRequest,
    extra_q: &[f64],
    dos_bins: usize,
) -> Result<Vec<BhhPoint>> {
    etas.par_iter().map(|&eta| bhh_point(basis, eta, req, extra_q, dos_bins)).collect()
}

/// DOS maxima of a sweep as an interpolating curve.
pub fn dos_max_curve(points: &[BhhPoint]) -> Result<DosMaxCurve> {
    DosMaxCurve::new(points.iter().map(|p| (p.eta, p.eps_star)).collect())
}

/// Ensemble parameters that fit `basis`: reflection-symmetric couplings for parity sectors.
pub fn egoe_params_for(basis: &SectorBasis, lambda: f64, seed: u64) -> EgoeParams {
    let spec = basis.spec();
    EgoeParams {
        lambda,
        reflection_symmetric: matches!(spec.symmetry, Symmetry::Parity(_)),
        ..EgoeParams::new(spec.n, spec.l, seed)
    }
}

/// Realizations `0..count` of the ensemble, realization `i` drawn from stream `i`.
pub fn egoe_sweep(
    basis: &SectorBasis,
    params: &EgoeParams,
    count: usize,
    req: &VectorRequest,
    extra_q: &[f64],
) -> Result<Vec<Diagonalized>> {
    (0..count as u64)
        .into_par_iter()
        .map(|stream| Diagonalized::new(&sample_egoe_stream(params, basis, stream)?, req, extra_q))
        .collect()
}

/// Mean, variance and skewness of `D_q` at one target with standard errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuantifierStats {
    pub count: usize,
    pub mean: f64,
    pub var: f64,
    pub skew: Option<f64>,
    pub stderr_mean: f64,
    pub stderr_var: f64,
}

impl QuantifierStats {
    /// Statistics of independent samples.
    pub fn iid(samples: &[f64]) -> Result<Self> {
        let m: MomentStats = moment_stats(samples)?;
        Ok(QuantifierStats {
            count: m.count,
            mean: m.mean,
            var: m.var,
            skew: m.skew,
            stderr_mean: m.stderr_mean,
            stderr_var: variance_stderr(samples)?,
        })
    }

    /// Pooled statistics over realizations; errors from the jackknife over realizations.
    pub fn grouped(groups: &[Vec<f64>]) -> Result<Self> {
        let g: GroupedStats = grouped_stats(groups)?;
        let pooled: Vec<f64> = groups.concat();
        Ok(QuantifierStats {
            count: g.count,
            mean: g.mean,
            var: g.var,
            skew: moment_stats(&pooled)?.skew,
            stderr_mean: g.stderr_mean,
            stderr_var: g.stderr_var,
        })
    }
}

/// Per-realization `D_q` samples near `eps`.
pub fn egoe_groups(realizations: &[Diagonalized], eps: f64, k: usize, q: QOrder) -> Result<Vec<Vec<f64>>> {
    realizations.iter().map(|r| r.samples(eps, k, q)).collect()
}

/// GOE prediction for `D_q`: mean, variance and density.
pub struct GoeReference {
    pub mean: f64,
    pub var: f64,
    density: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl GoeReference {
    /// `None` for orders without an analytic prediction.
    pub fn new(baseline: &GoeBaseline, q: QOrder) -> Result<Option<Self>> {
        let dim = baseline.dim;
        let (mean, var) = match q {
            QOrder::Finite(x) if x == 1.0 => (baseline.mean_d1, baseline.var_d1),
            QOrder::Finite(x) if x == 2.0 => (baseline.d2_tilde, baseline.var_d2),
            QOrder::Infinity => (baseline.mean_dinf(), baseline.var_dinf()),
            QOrder::Finite(_) => return Ok(None),
        };
        let density: Box<dyn Fn(f64) -> f64 + Send + Sync> = match q {
            QOrder::Infinity => Box::new(move |x| goe_dinf_pdf(x, dim)),
            _ => {
                let g = GaussianModel::new(mean, var.sqrt())?;
                Box::new(move |x| g.density(x))
            }
        };
        Ok(Some(GoeReference { mean, var, density }))
    }

    pub fn density(&self, x: f64) -> f64 {
        (self.density)(x)
    }
}

pub const BINNING: &str = "freedman-diaconis";

/// `d_q` and KL of `samples` against a reference mean and density.
pub fn distance(
    pair: &str,
    q: QOrder,
    dim: usize,
    ref_mean: f64,
    ref_density: impl Fn(f64) -> f64,
    samples: &[f64],
) -> Result<(DistanceReport, HistogramDensity)> {
    let m = moment_stats(samples)?;
    let hist = HistogramDensity::from_samples(samples)?;
    let report = DistanceReport {
        pair: pair.to_string(),
        q: q.to_string(),
        dim,
        d_q: d_q_distance(ref_mean, m.mean, m.var)?,
        kl: kl_divergence(&hist, ref_density),
        n_samples: samples.len(),
        bins: hist.bins(),
        binning: BINNING.to_string(),
    };
    Ok((report, hist))
}

/// Distribution comparison at one target energy and order.
#[derive(Debug)]
pub struct Comparison {
    pub q: QOrder,
    pub eps: f64,
    pub bhh: QuantifierStats,
    pub egoe: QuantifierStats,
    pub goe: Option<(f64, f64)>,
    pub reports: Vec<DistanceReport>,
    /// `(file stem, histogram)` for the samples under test.
    pub histograms: Vec<(String, HistogramDensity)>,
}

/// GOE-BHH, EGOE-BHH and GOE-EGOE distances for pooled BHH samples and
/// ensemble realizations. The second model of each pair supplies the histogram.
pub fn compare_models(
    q: QOrder,
    eps: f64,
    dim: usize,
    bhh_samples: &[f64],
    egoe_groups: &[Vec<f64>],
    baseline: &GoeBaseline,
) -> Result<Comparison> {
    let egoe_samples = egoe_groups.concat();
    let bhh = QuantifierStats::iid(bhh_samples)?;
    let egoe = QuantifierStats::grouped(egoe_groups)?;
    let goe = GoeReference::new(baseline, q)?;
    let mut reports = Vec::new();
    let tag = q.to_string();
    let mut histograms = Vec::new();

    let edge = EdgeworthModel::fit(&egoe_samples)?;
    let (r, h) = distance("EGOE-BHH", q, dim, egoe.mean, |x| edge.density(x), bhh_samples)?;
    reports.push(r);
    histograms.push((format!("hist_bhh_q{tag}"), h));
    if let Some(g) = &goe {
        let (r, _) = distance("GOE-BHH", q, dim, g.mean, |x| g.density(x), bhh_samples)?;
        reports.insert(0, r);
        let (r, h) = distance("GOE-EGOE", q, dim, g.mean, |x| g.density(x), &egoe_samples)?;
        reports.push(r);
        histograms.push((format!("hist_egoe_q{tag}"), h));
    } else {
        histograms.push((format!("hist_egoe_q{tag}"), HistogramDensity::from_samples(&egoe_samples)?));
    }
    Ok(Comparison { q, eps, bhh, egoe, goe: goe.map(|g| (g.mean, g.var)), reports, histograms })
}

/// Pooled BHH `D_q` samples over all points at one target.
pub fn pooled_bhh(points: &[BhhPoint], eps: f64, k: usize, q: QOrder) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for p in points {
        out.extend(p.data.samples(eps, k, q)?);
    }
    Ok(out)
}

/// One row of the energy-map table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyMapRow {
    pub eta: f64,
    pub eps_bhh: f64,
    pub eps_star: f64,
    pub shift: f64,
    pub percentile: f64,
}

/// Both BHH-to-EGOE energy maps on a grid of BHH energies.
pub fn energy_map_table(points: &[BhhPoint], egoe: &[Diagonalized], eps_grid: &[f64]) -> Result<Vec<EnergyMapRow>> {
    let curve = dos_max_curve(points)?;
    let mut pooled: Vec<f64> = Vec::new();
    for r in egoe {
        pooled.extend_from_slice(r.spectrum.eps()?);
    }
    pooled.sort_by(f64::total_cmp);
    let mut rows = Vec::new();
    for p in points {
        for &e in eps_grid {
            rows.push(EnergyMapRow {
                eta: p.eta,
                eps_bhh: e,
                eps_star: p.eps_star,
                shift: eps_egoe_map(e, p.eta, &curve, false)?,
                percentile: eps_egoe_percentile(e, p.data.spectrum.eps()?, &pooled)?,
            });
        }
    }
    Ok(rows)
}
