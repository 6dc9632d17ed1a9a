//! Runs one configured experiment and writes its output files.

use std::io::Write;
use std::path::PathBuf;

use bose_chaos::baselines::{goe_dinf_pdf, write_baseline_csv, GoeBaseline};
use bose_chaos::chaos::{energy_resolved_scan, GfdRecord, QOrder, ScanInput, ScanTable};
use bose_chaos::compare::DistanceReport;
use bose_chaos::egoe::sample_egoe_stream;
use bose_chaos::fock::{fock_dim, sector_dimensions, SectorBasis};
use bose_chaos::spectra::{dos_histogram, DosHistogram, Spectrum};
use serde::Serialize;

use crate::config::{lin_grid, Experiment, OutputFormat, RunConfig};
use crate::error::{CliError, Result};
use crate::experiments::{
    bhh_matrix, bhh_point, bhh_sweep, compare_models, diagonalize, egoe_groups, egoe_params_for, egoe_sweep,
    energy_map_table, extra_orders, pooled_bhh, BhhPoint, EnergyMapRow, QuantifierStats,
    VectorRequest,
};
use crate::output::{opt_field, Metadata, OutputDir};

/// Runs `cfg` on a pool of `cfg.threads` workers and returns the files written.
pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Other(format!("thread pool: {e}")))?;
    let mut out = OutputDir::create(&cfg.out, Metadata::for_config(cfg))?;
    pool.install(|| match cfg.experiment {
        Experiment::Basis => run_basis(cfg, &mut out),
        Experiment::Spectrum => run_spectrum(cfg, &mut out),
        Experiment::Scan => run_scan(cfg, &mut out),
        Experiment::EgoeScan | Experiment::LambdaScan => run_egoe(cfg, &mut out),
        Experiment::Compare => run_compare(cfg, &mut out),
        Experiment::Baselines => run_baselines(cfg, &mut out),
    })?;
    Ok(out.written().to_vec())
}

fn sector_basis(cfg: &RunConfig) -> Result<SectorBasis> {
    Ok(SectorBasis::build(cfg.sector(), cfg.basis)?)
}

fn label_extra(cfg: &RunConfig, basis: &SectorBasis) -> Vec<(&'static str, String)> {
    vec![
        ("sector", cfg.sector().label()),
        ("basis", cfg.basis.to_string()),
        ("dim", basis.dim().to_string()),
    ]
}

#[derive(Serialize)]
struct SectorDim {
    sector: String,
    dim: usize,
}

#[derive(Serialize)]
struct BasisState<'a> {
    index: usize,
    occ: &'a [u8],
    norm: f64,
}

#[derive(Serialize)]
struct BasisDoc<'a> {
    sector: String,
    basis: String,
    dim: usize,
    full_dim: u128,
    sectors: Vec<SectorDim>,
    states: Vec<BasisState<'a>>,
}

fn run_basis(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let basis = sector_basis(cfg)?;
    let full_dim = fock_dim(cfg.n, cfg.l);
    let sectors: Vec<SectorDim> = sector_dimensions(cfg.bc, cfg.n, cfg.l)?
        .into_iter()
        .map(|(sector, dim)| SectorDim { sector, dim })
        .collect();
    if cfg.format == OutputFormat::Json {
        let states = (0..basis.dim())
            .map(|i| BasisState { index: i, occ: basis.rep(i), norm: basis.norm(i) })
            .collect();
        let doc = BasisDoc {
            sector: cfg.sector().label(),
            basis: cfg.basis.to_string(),
            dim: basis.dim(),
            full_dim,
            sectors,
            states,
        };
        out.json("basis.json", &doc)?;
        return Ok(());
    }
    let extra = label_extra(cfg, &basis);
    out.csv("basis.csv", &extra, |w| {
        write!(w, "index")?;
        for m in 1..=cfg.l {
            write!(w, ",occ_{m}")?;
        }
        writeln!(w, ",norm")?;
        for (i, occ) in basis.reps().enumerate() {
            write!(w, "{i}")?;
            for o in occ {
                write!(w, ",{o}")?;
            }
            writeln!(w, ",{:e}", basis.norm(i))?;
        }
        Ok(())
    })?;
    out.csv("sectors.csv", &[("boundary", cfg.bc.to_string())], |w| {
        writeln!(w, "sector,dim")?;
        for s in &sectors {
            writeln!(w, "{},{}", s.sector, s.dim)?;
        }
        writeln!(w, "full,{full_dim}")?;
        Ok(())
    })?;
    Ok(())
}

fn write_dos(w: &mut dyn Write, h: &DosHistogram) -> bose_chaos::Result<()> {
    writeln!(w, "bin_lo,bin_hi,count")?;
    for (e, c) in h.bin_edges.windows(2).zip(&h.counts) {
        writeln!(w, "{:.6},{:.6},{c}", e[0], e[1])?;
    }
    Ok(())
}

fn write_gfd_header(w: &mut dyn Write, lead: &str, extra_q: &[f64]) -> bose_chaos::Result<()> {
    write!(w, "{lead}state_index,energy,eps,d1,d2,dinf")?;
    for q in extra_q {
        write!(w, ",d_q{q}")?;
    }
    writeln!(w)?;
    Ok(())
}

fn write_gfd_row(w: &mut dyn Write, lead: &str, r: &GfdRecord) -> bose_chaos::Result<()> {
    write!(w, "{lead}{},{:e},{:e},{:e},{:e},{:e}", r.state_index, r.energy, r.eps, r.d1, r.d2, r.dinf)?;
    for (_, d) in &r.dq_extra {
        write!(w, ",{d:e}")?;
    }
    writeln!(w)?;
    Ok(())
}

/// Little-endian dump: `u64 dim, u64 count`, `count` eigenvalue indices as `u64`,
/// then the vectors one after another as `f64`.
fn write_vectors(w: &mut dyn Write, s: &Spectrum) -> bose_chaos::Result<()> {
    let idx = s.vector_indices();
    w.write_all(&(s.dim() as u64).to_le_bytes())?;
    w.write_all(&(idx.len() as u64).to_le_bytes())?;
    for &k in idx {
        w.write_all(&(k as u64).to_le_bytes())?;
    }
    for &k in idx {
        for x in s.vector(k).expect("listed vector is stored") {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SpectrumDoc<'a> {
    sector: String,
    basis: String,
    eta: f64,
    dim: usize,
    e_min: f64,
    e_max: f64,
    eps_star: f64,
    eigenvalues: &'a [f64],
    gfd: &'a [GfdRecord],
}

fn run_spectrum(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let basis = sector_basis(cfg)?;
    let eta = cfg.eta_grid[0];
    let h = bhh_matrix(&basis, eta)?;
    if let Some(path) = &cfg.export_matrix {
        if cfg.format == OutputFormat::Bin {
            out.binary_at(path, |w| h.write_binary(w))?;
        } else {
            out.csv_at(path, |w| h.write_csv(w))?;
        }
    }
    let req = match (cfg.eps_targets.is_empty(), cfg.format) {
        (false, _) => VectorRequest::nearest(&cfg.eps_targets, cfg.k_states),
        (true, OutputFormat::Bin) => VectorRequest::All,
        (true, _) => VectorRequest::None,
    };
    let spectrum = diagonalize(&h, &req)?;
    let gfds = if spectrum.has_vectors() {
        bose_chaos::chaos::gfd_records(&spectrum, &extra_orders(&cfg.q_orders))?
    } else {
        Vec::new()
    };
    let dos = dos_histogram(&spectrum, cfg.bins)?;
    let mut extra = label_extra(cfg, &basis);
    extra.push(("eta", format!("{eta:e}")));

    if cfg.format == OutputFormat::Json {
        let doc = SpectrumDoc {
            sector: cfg.sector().label(),
            basis: cfg.basis.to_string(),
            eta,
            dim: spectrum.dim(),
            e_min: spectrum.e_min(),
            e_max: spectrum.e_max(),
            eps_star: dos.eps_star,
            eigenvalues: spectrum.eigenvalues(),
            gfd: &gfds,
        };
        out.json("spectrum.json", &doc)?;
        return Ok(());
    }
    let eps = spectrum.eps()?;
    out.csv("spectrum.csv", &extra, |w| {
        writeln!(w, "index,E,eps")?;
        for (i, (e, x)) in spectrum.eigenvalues().iter().zip(eps).enumerate() {
            writeln!(w, "{i},{e:e},{x:e}")?;
        }
        Ok(())
    })?;
    let mut dos_extra = extra.clone();
    dos_extra.push(("eps_star", format!("{}", dos.eps_star)));
    out.csv("dos.csv", &dos_extra, |w| write_dos(w, &dos))?;
    if !gfds.is_empty() {
        let xq = extra_orders(&cfg.q_orders);
        out.csv("gfd.csv", &extra, |w| {
            write_gfd_header(w, "", &xq)?;
            for r in &gfds {
                write_gfd_row(w, "", r)?;
            }
            Ok(())
        })?;
    }
    if cfg.format == OutputFormat::Bin && spectrum.has_vectors() {
        let path = cfg.out.join("eigenvectors.bin");
        out.binary_at(&path, |w| write_vectors(w, &spectrum))?;
    }
    Ok(())
}

/// Long-format row of target-energy statistics.
#[derive(Clone, Debug, Serialize)]
pub struct TargetRow {
    pub eta: Option<f64>,
    pub lambda: Option<f64>,
    pub eps_target: f64,
    pub quantifier: String,
    pub value: Option<f64>,
    pub stderr: Option<f64>,
    pub count: usize,
}

fn target_rows(
    eta: Option<f64>,
    lambda: Option<f64>,
    eps: f64,
    q: QOrder,
    s: &QuantifierStats,
) -> impl Iterator<Item = TargetRow> {
    let name = |what: &str| format!("d{q}_{what}");
    let rows = [
        (name("mean"), Some(s.mean), Some(s.stderr_mean)),
        (name("var"), Some(s.var), Some(s.stderr_var)),
        (name("skew"), s.skew, None),
    ];
    let count = s.count;
    rows.into_iter().map(move |(quantifier, value, stderr)| TargetRow {
        eta,
        lambda,
        eps_target: eps,
        quantifier,
        value,
        stderr,
        count,
    })
}

fn write_target_rows(w: &mut dyn Write, rows: &[TargetRow]) -> bose_chaos::Result<()> {
    writeln!(w, "eta,lambda,eps_target,quantifier,value,stderr,count")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.eta.map(|x| format!("{x:e}")).unwrap_or_default(),
            r.lambda.map(|x| format!("{x:e}")).unwrap_or_default(),
            r.eps_target,
            r.quantifier,
            opt_field(r.value),
            opt_field(r.stderr),
            r.count
        )?;
    }
    Ok(())
}

fn bhh_target_rows(points: &[BhhPoint], targets: &[f64], k: usize, qs: &[QOrder]) -> Result<Vec<TargetRow>> {
    let mut rows = Vec::new();
    for p in points {
        for &t in targets {
            for &q in qs {
                let s = QuantifierStats::iid(&p.data.samples(t, k, q)?)?;
                rows.extend(target_rows(Some(p.eta), None, t, q, &s));
            }
        }
    }
    Ok(rows)
}

#[derive(Serialize)]
struct DosMax {
    eta: f64,
    eps_star: f64,
}

#[derive(Serialize)]
struct ScanDoc<'a> {
    sector: String,
    basis: String,
    dim: usize,
    table: &'a ScanTable,
    dos_max: Vec<DosMax>,
    targets: &'a [TargetRow],
}

fn run_scan(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let basis = sector_basis(cfg)?;
    let req = if cfg.eps_targets.is_empty() {
        VectorRequest::All
    } else {
        VectorRequest::nearest(&cfg.eps_targets, cfg.k_states)
    };
    let xq = extra_orders(&cfg.q_orders);
    let points = bhh_sweep(&basis, &cfg.eta_grid, &req, &xq, cfg.bins)?;
    let inputs: Vec<ScanInput<'_>> = points
        .iter()
        .map(|p| ScanInput { eta: p.eta, spectrum: &p.data.spectrum, gfds: &p.data.gfds })
        .collect();
    let table = energy_resolved_scan(&inputs, cfg.bins)?;
    let targets = bhh_target_rows(&points, &cfg.eps_targets, cfg.k_states, &cfg.q_orders)?;
    let extra = label_extra(cfg, &basis);

    if cfg.format == OutputFormat::Json {
        let doc = ScanDoc {
            sector: cfg.sector().label(),
            basis: cfg.basis.to_string(),
            dim: basis.dim(),
            table: &table,
            dos_max: points.iter().map(|p| DosMax { eta: p.eta, eps_star: p.eps_star }).collect(),
            targets: &targets,
        };
        out.json("scan.json", &doc)?;
        return Ok(());
    }
    let mut scan_extra = extra.clone();
    scan_extra.push(("degenerate_spacings", table.degenerate_spacings.to_string()));
    out.csv("scan.csv", &scan_extra, |w| table.write_csv(w))?;
    out.csv("dos_max.csv", &extra, |w| {
        writeln!(w, "eta,eps_star")?;
        for p in &points {
            writeln!(w, "{:e},{}", p.eta, p.eps_star)?;
        }
        Ok(())
    })?;
    out.csv("gfd.csv", &extra, |w| {
        write_gfd_header(w, "eta,", &xq)?;
        for p in &points {
            let lead = format!("{:e},", p.eta);
            for r in &p.data.gfds {
                write_gfd_row(w, &lead, r)?;
            }
        }
        Ok(())
    })?;
    if !targets.is_empty() {
        out.csv("targets.csv", &extra, |w| write_target_rows(w, &targets))?;
    }
    Ok(())
}

/// Scaled energies at which the ensemble is evaluated: the configured targets, or
/// with `eta` set, the BHH targets mapped by the DOS-maximum shift.
fn egoe_targets(cfg: &RunConfig, basis: &SectorBasis) -> Result<(Vec<f64>, Option<f64>)> {
    let Some(eta) = cfg.eta else {
        return Ok((cfg.eps_targets.clone(), None));
    };
    let p = bhh_point(basis, eta, &VectorRequest::None, &[], cfg.bins)?;
    let curve = bose_chaos::compare::DosMaxCurve::new(vec![(eta, p.eps_star)])?;
    let mapped = cfg
        .eps_targets
        .iter()
        .map(|&e| bose_chaos::compare::eps_egoe_map(e, eta, &curve, false))
        .collect::<bose_chaos::Result<Vec<_>>>()?;
    Ok((mapped, Some(p.eps_star)))
}

#[derive(Serialize)]
struct EgoeDoc<'a> {
    sector: String,
    dim: usize,
    realizations: usize,
    eps_bhh: &'a [f64],
    eps_egoe: &'a [f64],
    bhh_eps_star: Option<f64>,
    rows: &'a [TargetRow],
}

fn run_egoe(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let basis = sector_basis(cfg)?;
    let (targets, bhh_eps_star) = egoe_targets(cfg, &basis)?;
    let xq = extra_orders(&cfg.q_orders);
    let req = VectorRequest::nearest(&targets, cfg.k_states);
    let detailed = cfg.experiment == Experiment::EgoeScan;
    if let Some(path) = &cfg.export_matrix {
        // realization 0 of the first lambda, i.e. the first matrix of the sweep
        let h = sample_egoe_stream(&egoe_params_for(&basis, cfg.lambdas[0], cfg.seed), &basis, 0)?;
        if cfg.format == OutputFormat::Bin {
            out.binary_at(path, |w| h.write_binary(w))?;
        } else {
            out.csv_at(path, |w| h.write_csv(w))?;
        }
    }
    let mut rows = Vec::new();
    let mut pooled_eps: Vec<f64> = Vec::new();
    let mut records: Vec<(f64, usize, GfdRecord)> = Vec::new();
    for &lambda in &cfg.lambdas {
        let params = egoe_params_for(&basis, lambda, cfg.seed);
        let real = egoe_sweep(&basis, &params, cfg.realizations, &req, &xq)?;
        for &t in &targets {
            for &q in &cfg.q_orders {
                let s = QuantifierStats::grouped(&egoe_groups(&real, t, cfg.k_states, q)?)?;
                rows.extend(target_rows(None, Some(lambda), t, q, &s));
            }
        }
        if detailed {
            for (i, r) in real.iter().enumerate() {
                pooled_eps.extend_from_slice(r.spectrum.eps()?);
                records.extend(r.gfds.iter().map(|g| (lambda, i, g.clone())));
            }
        }
    }
    let mut extra = label_extra(cfg, &basis);
    extra.push(("realizations", cfg.realizations.to_string()));
    if let (Some(eta), Some(star)) = (cfg.eta, bhh_eps_star) {
        extra.push(("bhh_eta", format!("{eta:e}")));
        extra.push(("bhh_eps_star", format!("{star}")));
    }
    let name = if detailed { "egoe_scan" } else { "lambda_scan" };
    if cfg.format == OutputFormat::Json {
        let doc = EgoeDoc {
            sector: cfg.sector().label(),
            dim: basis.dim(),
            realizations: cfg.realizations,
            eps_bhh: &cfg.eps_targets,
            eps_egoe: &targets,
            bhh_eps_star,
            rows: &rows,
        };
        out.json(&format!("{name}.json"), &doc)?;
        return Ok(());
    }
    out.csv(&format!("{name}.csv"), &extra, |w| write_target_rows(w, &rows))?;
    if detailed {
        let dos = DosHistogram::from_eps(&pooled_eps, cfg.bins)?;
        let mut dos_extra = extra.clone();
        dos_extra.push(("eps_star", format!("{}", dos.eps_star)));
        out.csv("egoe_dos.csv", &dos_extra, |w| write_dos(w, &dos))?;
        out.csv("egoe_gfd.csv", &extra, |w| {
            write_gfd_header(w, "lambda,realization,", &xq)?;
            for (lambda, i, g) in &records {
                write_gfd_row(w, &format!("{lambda:e},{i},"), g)?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ComparisonDoc {
    q: String,
    eps: f64,
    bhh: QuantifierStats,
    egoe: QuantifierStats,
    goe_mean: Option<f64>,
    goe_var: Option<f64>,
}

#[derive(Serialize)]
struct CompareDoc<'a> {
    sector: String,
    dim: usize,
    eta_grid: &'a [f64],
    k_states: usize,
    realizations: usize,
    lambda: f64,
    reports: Vec<DistanceReport>,
    statistics: Vec<ComparisonDoc>,
    baseline: GoeBaseline,
}

fn run_compare(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let basis = sector_basis(cfg)?;
    let dim = basis.dim();
    let xq = extra_orders(&cfg.q_orders);
    let req = VectorRequest::nearest(&cfg.eps_targets, cfg.k_states);
    let points = bhh_sweep(&basis, &cfg.eta_grid, &req, &xq, cfg.bins)?;
    let lambda = cfg.lambdas[0];
    let params = egoe_params_for(&basis, lambda, cfg.seed);
    let egoe = egoe_sweep(&basis, &params, cfg.realizations, &req, &xq)?;
    let baseline = GoeBaseline::compute(dim)?;

    let mut reports = Vec::new();
    let mut statistics = Vec::new();
    let mut histograms = Vec::new();
    for &eps in &cfg.eps_targets {
        for &q in &cfg.q_orders {
            let bhh = pooled_bhh(&points, eps, cfg.k_states, q)?;
            let groups = egoe_groups(&egoe, eps, cfg.k_states, q)?;
            let c = compare_models(q, eps, dim, &bhh, &groups, &baseline)?;
            statistics.push(ComparisonDoc {
                q: q.to_string(),
                eps,
                bhh: c.bhh,
                egoe: c.egoe,
                goe_mean: c.goe.map(|g| g.0),
                goe_var: c.goe.map(|g| g.1),
            });
            reports.extend(c.reports.iter().cloned().map(|r| (eps, r)));
            for (stem, h) in c.histograms {
                histograms.push((format!("{stem}_eps{eps}.csv"), h));
            }
        }
    }
    let map_rows: Vec<EnergyMapRow> = energy_map_table(&points, &egoe, &lin_grid(0.05, 0.95, 19))?;
    let extra = label_extra(cfg, &basis);

    for (name, h) in &histograms {
        out.csv(name, &extra, |w| h.write_csv(w))?;
    }
    out.csv("eps_map.csv", &extra, |w| {
        writeln!(w, "eta,eps_bhh,eps_star,eps_egoe_shift,eps_egoe_percentile")?;
        for r in &map_rows {
            writeln!(w, "{:e},{:.6},{},{:.6},{:.6}", r.eta, r.eps_bhh, r.eps_star, r.shift, r.percentile)?;
        }
        Ok(())
    })?;
    if cfg.format == OutputFormat::Csv {
        out.csv("compare.csv", &extra, |w| {
            writeln!(w, "pair,q,eps,dim,d_q,kl,n_samples,bins,binning")?;
            for (eps, r) in &reports {
                writeln!(
                    w,
                    "{},{},{},{},{:e},{:e},{},{},{}",
                    r.pair, r.q, eps, r.dim, r.d_q, r.kl, r.n_samples, r.bins, r.binning
                )?;
            }
            Ok(())
        })?;
    }
    let doc = CompareDoc {
        sector: cfg.sector().label(),
        dim,
        eta_grid: &cfg.eta_grid,
        k_states: cfg.k_states,
        realizations: cfg.realizations,
        lambda,
        reports: reports.into_iter().map(|(_, r)| r).collect(),
        statistics,
        baseline,
    };
    out.json("compare.json", &doc)?;
    Ok(())
}

#[derive(Serialize)]
struct BaselinesDoc {
    baselines: Vec<GoeBaseline>,
}

fn run_baselines(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let baselines = cfg.dims.iter().map(|&d| GoeBaseline::compute(d)).collect::<bose_chaos::Result<Vec<_>>>()?;
    if cfg.format == OutputFormat::Json {
        out.json("baselines.json", &BaselinesDoc { baselines })?;
        return Ok(());
    }
    out.csv("baselines.csv", &[], |w| write_baseline_csv(&baselines, w))?;
    out.csv("dinf_pdf.csv", &[], |w| {
        writeln!(w, "dim,dinf,pdf")?;
        for &d in &cfg.dims {
            for x in lin_grid(0.005, 1.0, 200) {
                writeln!(w, "{d},{x:.4},{:e}", goe_dinf_pdf(x, d))?;
            }
        }
        Ok(())
    })?;
    Ok(())
}
