use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bose_chaos::baselines::GoeBaseline;
use bose_chaos::chaos::QOrder;
use bose_chaos::fock::{BasisKind, Parity, SectorBasis, SectorSpec};
use bose_chaos::matrix::SymmetricMatrix;
use bose_chaos_cli::experiments::{
    bhh_matrix, bhh_sweep, compare_models, egoe_groups, egoe_params_for, egoe_sweep, pooled_bhh, VectorRequest,
};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bose-chaos")).args(args).output().expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

/// Data lines of a CSV file (metadata comments stripped).
fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[test]
fn basis_reports_full_dimension() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin(&["basis", "--n", "5", "--l", "5", "--bc", "hwbc", "--out", &out_arg(tmp.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines = data_lines(&tmp.path().join("sectors.csv"));
    assert_eq!(lines.last().unwrap(), "full,126");
    let parts: usize = lines[1..lines.len() - 1]
        .iter()
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(parts, 126);
    let basis = data_lines(&tmp.path().join("basis.csv"));
    assert_eq!(basis[0], "index,occ_1,occ_2,occ_3,occ_4,occ_5,norm");
    assert_eq!(basis.len(), 127);
    let text = fs::read_to_string(tmp.path().join("basis.csv")).unwrap();
    assert!(text.starts_with("# tool=bose-chaos version="));
    assert!(text.contains("# config_sha256=") && text.contains("# seed="));
}

#[test]
fn empty_eta_grid_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin(&["scan", "--n", "4", "--l", "4", "--eta-grid", "", "--out", &out_arg(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eta_grid"));
}

#[test]
fn config_file_errors_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "experiment = basis\nn = 4\nl = 4\nparity = -1\n").unwrap();
    let out = tmp.path().join("o");
    let o = bin(&["basis", "--config", cfg.to_str().unwrap(), "--l", "5", "--out", &out_arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("basis.csv")).unwrap();
    assert!(text.contains("# sector=hwbc_n4_l5_p-1"));

    fs::write(&cfg, "n = 4\ncolour = red\n").unwrap();
    let o = bin(&["basis", "--config", cfg.to_str().unwrap(), "--out", &out_arg(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let o = bin(&["egoe-scan", "--n", "4", "--l", "4", "--basis", "tunneling", "--out", &out_arg(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oversized_dense_problem_is_a_capacity_error() {
    let tmp = tempfile::tempdir().unwrap();
    // full hard-wall space at N = L = 10 has 92378 states
    let o = bin(&["spectrum", "--n", "10", "--l", "10", "--eta", "0.2", "--out", &out_arg(tmp.path())]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let runs: &[&[&str]] = &[
        &["spectrum", "--n", "5", "--l", "5", "--parity", "+1", "--eta", "0.3", "--eps", "0.5", "--k-states", "10"],
        &["scan", "--n", "5", "--l", "5", "--parity", "-1", "--eta-grid", "log(0.01, 1, 4)"],
        &["egoe-scan", "--n", "5", "--l", "5", "--parity", "-1", "--realizations", "6", "--k-states", "10"],
        &["compare", "--n", "5", "--l", "5", "--parity", "-1", "--realizations", "6", "--k-states", "20"],
        &["baselines", "--dims", "64,128"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut listings = Vec::new();
        for (rep, threads) in [(0, "1"), (1, "2")] {
            let dir = tmp.path().join(format!("{i}_{rep}"));
            let mut a: Vec<&str> = args.to_vec();
            let d = out_arg(&dir);
            a.extend(["--out", &d, "--threads", threads]);
            let o = bin(&a);
            assert!(o.status.success(), "{:?}: {}", args, String::from_utf8_lossy(&o.stderr));
            listings.push(dir_bytes(&dir));
        }
        assert!(!listings[0].is_empty());
        assert_eq!(listings[0], listings[1], "{:?}", args);
    }
}

#[test]
fn exported_matrix_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("h.bin");
    let o = bin(&[
        "spectrum",
        "--n",
        "5",
        "--l",
        "5",
        "--parity",
        "+1",
        "--eta",
        "0.3",
        "--format",
        "bin",
        "--export-matrix",
        path.to_str().unwrap(),
        "--out",
        &out_arg(&tmp.path().join("o")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = SymmetricMatrix::read_binary(fs::File::open(&path).unwrap()).unwrap();
    let b = SectorBasis::build(SectorSpec::hwbc(5, 5, Parity::Even), BasisKind::Interaction).unwrap();
    assert_eq!(m, bhh_matrix(&b, 0.3).unwrap());
    assert!(tmp.path().join("h.bin.meta.json").exists());
    // every eigenvector of the 66-dimensional sector
    let v = fs::read(tmp.path().join("o/eigenvectors.bin")).unwrap();
    assert_eq!(v.len(), 16 + 66 * 8 + 66 * 66 * 8);
}

#[test]
fn compare_reports_three_pairs_matching_the_library() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin(&[
        "compare",
        "--n",
        "7",
        "--l",
        "7",
        "--parity",
        "-1",
        "--q-orders",
        "1",
        "--realizations",
        "10",
        "--seed",
        "77",
        "--out",
        &out_arg(tmp.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("compare.json")).unwrap()).unwrap();
    assert_eq!(doc["metadata"]["seed"], 77);
    let reports = doc["reports"].as_array().unwrap();
    let pairs: Vec<&str> = reports.iter().map(|r| r["pair"].as_str().unwrap()).collect();
    assert_eq!(pairs, ["GOE-BHH", "EGOE-BHH", "GOE-EGOE"]);

    let b = SectorBasis::build(SectorSpec::hwbc(7, 7, Parity::Odd), BasisKind::Interaction).unwrap();
    let etas = bose_chaos_cli::config::default_compare_eta_grid();
    let req = VectorRequest::nearest(&[0.5], 100);
    let q = QOrder::Finite(1.0);
    let pts = bhh_sweep(&b, &etas, &req, &[], 100).unwrap();
    let bhh = pooled_bhh(&pts, 0.5, 100, q).unwrap();
    let egoe = egoe_sweep(&b, &egoe_params_for(&b, 1.0, 77), 10, &req, &[]).unwrap();
    let groups = egoe_groups(&egoe, 0.5, 100, q).unwrap();
    let c = compare_models(q, 0.5, b.dim(), &bhh, &groups, &GoeBaseline::compute(b.dim()).unwrap()).unwrap();
    for (json, lib) in reports.iter().zip(&c.reports) {
        // serde_json's default float parser may be off in the last bit
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-14 * b.abs().max(1.0);
        assert!(close(json["d_q"].as_f64().unwrap(), lib.d_q));
        assert!(close(json["kl"].as_f64().unwrap(), lib.kl));
        assert_eq!(json["n_samples"].as_u64().unwrap() as usize, lib.n_samples);
    }
    assert!(tmp.path().join("hist_bhh_q1_eps0.5.csv").exists());
}

#[test]
fn shipped_config_templates_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let map = bose_chaos_cli::parse_config_text(&fs::read_to_string(&path).unwrap()).unwrap();
        let experiment: bose_chaos_cli::Experiment = map["experiment"].parse().unwrap();
        let cfg = bose_chaos_cli::RunConfig::from_map(experiment, &map);
        assert!(cfg.is_ok(), "{}: {:?}", path.display(), cfg.err());
        seen += 1;
    }
    assert!(seen >= 8);
}

#[test]
fn sparsity_templates_export_nested_patterns() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut nnz = Vec::new();
    let runs = [
        ("fig1_sparsity_bhh_interaction.cfg", "spectrum"),
        ("fig1_sparsity_bhh_tunneling.cfg", "spectrum"),
        ("fig1_sparsity_egoe.cfg", "egoe-scan"),
    ];
    for (file, sub) in runs {
        let cfg = dir.join(file);
        let name = file.trim_end_matches(".cfg");
        let exported = tmp.path().join(format!("h_{name}.csv"));
        let o = bin(&[
            sub,
            "--config",
            cfg.to_str().unwrap(),
            "--export-matrix",
            exported.to_str().unwrap(),
            "--out",
            &out_arg(&tmp.path().join(name)),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let m = SymmetricMatrix::read_csv(std::io::BufReader::new(fs::File::open(&exported).unwrap())).unwrap();
        assert_eq!(m.dim(), 126);
        nnz.push(m);
    }
    let egoe = nnz[2].sparsity_pattern();
    assert!(nnz[0].sparsity_pattern().is_subset(&egoe));
    assert!(nnz[1].sparsity_pattern().is_subset(&egoe));
    assert!(nnz[0].nnz() < nnz[1].nnz() && nnz[1].nnz() < nnz[2].nnz());
}
