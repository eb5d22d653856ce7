use std::path::Path;
use std::process::Command;

use pbe_core::app::*;
use pbe_core::mesh::{BallMeshParams, MarkedMode};
use pbe_core::model::{Nonlinearity, PointCharge};
use pbe_core::refine::{IterationRecord, StrategyKind};

const SMALL_MESH: &str = "[mesh]\nmolecular_radius = 2\nouter_radius = 20\nlayers = 2\nsurface_subdivisions = 1\n";

fn record(estimate: f64, eff: Option<f64>, c: [f64; 4]) -> IterationRecord {
    IterationRecord {
        level: 0,
        vertex_count: 6718,
        qoi: 0.0,
        estimate,
        effectivity: eff,
        e_r: c[0],
        e_m: c[1],
        e_gamma: c[2],
        e_domega: c[3],
        e_neg: 0.0,
        action: None,
    }
}

#[test]
fn empty_config_gives_documented_defaults() {
    let cfg = parse_config("").unwrap();
    assert_eq!(cfg.coefficients.eps_m, 1.0);
    assert_eq!(cfg.coefficients.eps_s, 78.0);
    assert_eq!(cfg.coefficients.kappa_sq, 0.918168);
    assert_eq!(cfg.qoi_eta, 0.005);
    assert_eq!(cfg.strategy.dorfler_theta, 0.2);
    assert_eq!(cfg.strategy.dominance_factor, 3.0);
    assert_eq!(cfg.strategy.half_rule, 0.5);
    assert_eq!(cfg.nonlinearity, Nonlinearity::Linearized);
    assert_eq!(cfg, RunConfig::default());
}

#[test]
fn negative_kappa_is_a_constraint_error_with_line() {
    let e = parse_config("# salt\n[coefficients]\nkappa_sq = -1\n").unwrap_err();
    assert_eq!(e.line, 3);
    assert!(matches!(e.kind, ConfigErrorKind::Constraint { ref key, .. } if key == "kappa_sq"), "{e}");
}

#[test]
fn config_errors_name_their_line() {
    let unknown = parse_config("[coefficients]\neps_m = 2\nepsilon = 3\n").unwrap_err();
    assert_eq!(unknown.line, 3);
    assert!(matches!(unknown.kind, ConfigErrorKind::UnknownKey { .. }));

    let mismatch = parse_config("[strategy]\nmax_levels = three\n").unwrap_err();
    assert_eq!(mismatch.line, 2);
    assert!(matches!(mismatch.kind, ConfigErrorKind::TypeMismatch { .. }));

    let section = parse_config("[bogus]\n").unwrap_err();
    assert!(matches!(section.kind, ConfigErrorKind::UnknownSection(_)));

    let dup = parse_config("[coefficients]\neps_s = 80\neps_s = 78\n").unwrap_err();
    assert_eq!(dup.line, 3);

    let syntax = parse_config("[mesh]\nlayers 4\n").unwrap_err();
    assert!(matches!(syntax.kind, ConfigErrorKind::Syntax(_)));
}

#[test]
fn exactly_one_charge_and_mesh_source() {
    let both = parse_config("[charges]\npqr = a.pqr\ncharge = 0 0 0 1\n");
    assert!(both.is_err());
    let both = parse_config("[mesh]\nfile = m.mesh\nlayers = 3\n");
    assert!(both.is_err());
    let radii = parse_config("[mesh]\nmolecular_radius = 5\nouter_radius = 4\n");
    assert!(radii.is_err());
}

#[test]
fn inline_charges_accumulate() {
    let cfg = parse_config("[charges]\ncharge = 0.5 0 0 0.27\ncharge = -0.5 0 0 -0.7\n").unwrap();
    let ChargeSource::Inline(q) = cfg.charges else { panic!("expected inline charges") };
    assert_eq!(q.len(), 2);
    assert_eq!(q[1].charge, -0.7);
    assert_eq!(q[0].position.x, 0.5);
}

#[test]
fn config_round_trip() {
    let text = "output = run.csv\n\
        [coefficients]\neps_s = 80.5\nkappa_sq = 0.1234567890123\nnonlinearity = nonlinear\nqoi_eta = 0.01\n\
        [charges]\ncharge = 0.1 -0.2 0.3 1.5\ncharge = 0 0 0 -0.25\n\
        [mesh]\nmolecular_radius = 1.5\nouter_radius = 12\nlayers = 3\nsurface_subdivisions = 1\nsolvent_layers = 7\n\
        [strategy]\nkind = acr\ndorfler_theta = 0.3\nmax_levels = 5\ngoal = 1e-4\ntarget_mode = split\nmarking_mode = bisect\n\
        [solver]\nrel_tolerance = 1e-9\nmax_iterations = 777\npreconditioner = jacobi\nnewton_damping = 0.5\n";
    let cfg = parse_config(text).unwrap();
    assert_eq!(cfg.strategy.kind, StrategyKind::Acr);
    assert_eq!(cfg.strategy.target_mode, MarkedMode::SplitAllEdges);
    assert_eq!(cfg.nonlinearity, Nonlinearity::Nonlinear);
    let again = parse_config(&serialize_config(&cfg)).unwrap();
    assert_eq!(cfg, again);
    let defaults = RunConfig::default();
    assert_eq!(parse_config(&serialize_config(&defaults)).unwrap(), defaults);
}

#[test]
fn mesh_file_source_round_trips() {
    let cfg = parse_config("[mesh]\nfile = meshes/ball.mesh\n[charges]\npqr = mol.pqr\n").unwrap();
    assert_eq!(cfg.mesh, MeshSource::File("meshes/ball.mesh".into()));
    assert_eq!(parse_config(&serialize_config(&cfg)).unwrap(), cfg);
    let mut resolved = cfg.clone();
    resolved.resolve_paths(Path::new("/data"));
    assert_eq!(resolved.charges, ChargeSource::Pqr("/data/mol.pqr".into()));
}

const METHANOL: &str = "\
REMARK  methanol-like test molecule
ATOM      1  C   MOL     1      -0.500   0.000   0.000  0.2700 1.7000
ATOM      2  H   MOL     1       0.500   0.300   0.000  0.4300 1.2000
HETATM    3  O   MOL     1       0.000  -0.600   0.100 -0.7000 1.5200
TER
END
";

#[test]
fn pqr_three_records_net_neutral() {
    let q = parse_pqr(METHANOL).unwrap();
    assert_eq!(q.len(), 3);
    let charges: Vec<f64> = q.charges().iter().map(|c| c.charge).collect();
    assert_eq!(charges, vec![0.27, 0.43, -0.7]);
    assert!(q.total_charge().abs() < 1e-12);
    let atoms = parse_pqr_atoms(METHANOL).unwrap();
    assert_eq!(atoms[2].name, "O");
    assert_eq!(atoms[2].radius, 1.52);
    assert_eq!(atoms[1].position.y, 0.3);
}

#[test]
fn pqr_empty_is_empty() {
    assert_eq!(parse_pqr("").unwrap().len(), 0);
    assert_eq!(parse_pqr("REMARK nothing\nEND\n").unwrap().len(), 0);
}

#[test]
fn pqr_bad_charge_names_line() {
    let text = "REMARK x\nATOM 1 C MOL 1 0.0 0.0 0.0 0.27 1.7\nATOM 2 O MOL 1 1.0 0.0 0.0 abc 1.5\n";
    let e = parse_pqr(text).unwrap_err();
    assert_eq!(e.line, 3);
    assert!(e.message.contains("charge"), "{e}");
    assert!(parse_pqr("ATOM 1 C MOL 1 0.0\n").is_err());
}

#[test]
fn table_row_formats_estimate_and_components() {
    let r = record(-1.14, Some(1.05), [2.05e-1, 5.26e-9, -1.34, 4.86e-4]);
    let csv = emit_table(&[r], TableFormat::Csv);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.next(), Some("0,6718,-1.14,1.05,2.05e-01,5.26e-09,-1.34e+00,4.86e-04"));
}

#[test]
fn significant_digit_formatting() {
    assert_eq!(format_sig3(-1.14), "-1.14");
    assert_eq!(format_sig3(0.317), "0.317");
    assert_eq!(format_sig3(0.0123), "0.0123");
    assert_eq!(format_sig3(12.345), "12.3");
    assert_eq!(format_sig3(9.996), "10.0");
    assert_eq!(format_sig3(3.49e-3), "3.49e-3");
    assert_eq!(format_component(-1.34), "-1.34e+00");
    assert_eq!(format_component(5.26e-9), "5.26e-09");
    assert_eq!(format_component(0.0), "0.00e+00");
}

#[test]
fn missing_effectivity_is_blank_or_dashes() {
    let r = record(-0.5, None, [1.0, 0.0, -1.5, 0.0]);
    let csv = emit_table(std::slice::from_ref(&r), TableFormat::Csv);
    assert_eq!(csv.lines().nth(1).unwrap().split(',').nth(3), Some(""));
    let aligned = emit_table(&[r], TableFormat::Aligned);
    assert!(aligned.lines().nth(1).unwrap().split_whitespace().any(|c| c == "--"));
}

#[test]
fn csv_round_trip_to_printed_precision() {
    let recs = [
        record(-1.1437, Some(1.0521), [0.20534, 5.2611e-9, -1.3391, 4.8633e-4]),
        record(-3.4912e-3, None, [-2.0e-5, 0.0, -3.4e-3, 1.0e-7]),
    ];
    let rows = parse_csv(&emit_table(&recs, TableFormat::Csv)).unwrap();
    assert_eq!(rows.len(), 2);
    for (r, row) in recs.iter().zip(&rows) {
        let close = |a: f64, b: f64| (a - b).abs() <= 5e-3 * a.abs().max(1e-300);
        assert!(close(r.estimate, row.estimate));
        assert_eq!(r.effectivity.is_some(), row.effectivity.is_some());
        if let (Some(a), Some(b)) = (r.effectivity, row.effectivity) {
            assert!(close(a, b));
        }
        for (a, b) in [r.e_r, r.e_m, r.e_gamma, r.e_domega].iter().zip(row.components) {
            assert!(close(*a, b) || (*a == 0.0 && b == 0.0));
        }
    }
}

#[test]
fn reference_file_round_trip() {
    let r = Reference { qoi: -0.51861046159173, degree: 2, vertices: 411635 };
    assert_eq!(parse_reference(&write_reference(&r)).unwrap(), r);
    assert!(parse_reference("qoi = 1").is_err());
    assert!(parse_reference("pbe-reference 1\nqoi = nan\n").is_err());
}

#[test]
fn error_exit_codes() {
    let cfg_err = AppError::from(parse_config("[coefficients]\neps_m = 0\n").unwrap_err());
    assert_eq!(cfg_err.exit_code(), 2);
    let mut cfg = parse_config(SMALL_MESH).unwrap();
    cfg.charges = ChargeSource::Inline(vec![PointCharge { position: pbe_core::mesh::Point3::new(5.0, 0.0, 0.0), charge: 1.0 }]);
    let outside = solve_goal(&cfg, 0, false).unwrap_err();
    assert_eq!(outside.exit_code(), 2, "{outside}");
    cfg.charges = ChargeSource::Pqr("/nonexistent/x.pqr".into());
    assert_eq!(solve_goal(&cfg, 0, false).unwrap_err().exit_code(), 4);
}

#[test]
fn generated_mesh_levels_grow() {
    let mut cfg = RunConfig::default();
    cfg.mesh = MeshSource::Generate(BallMeshParams { layers: 2, surface_subdivisions: 1, ..Default::default() });
    let coarse = build_mesh(&cfg, 0).unwrap();
    let fine = build_mesh(&cfg, 1).unwrap();
    assert!(fine.num_vertices() > 4 * coarse.num_vertices());
}

fn pbe(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pbe")).current_dir(dir).args(args).output().unwrap()
}

#[test]
fn cli_commands_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("run.ini"), SMALL_MESH).unwrap();

    let out = pbe(d, &["--config", "run.ini", "mesh-gen", "--out", "ball.mesh"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(d.join("ball.mesh").exists());

    // The written mesh can serve as the mesh source.
    std::fs::write(d.join("file.ini"), "[mesh]\nfile = ball.mesh\n").unwrap();
    let from_file = pbe(d, &["--config", "file.ini", "solve"]);
    let generated = pbe(d, &["--config", "run.ini", "solve"]);
    assert!(from_file.status.success(), "{}", String::from_utf8_lossy(&from_file.stderr));
    assert_eq!(from_file.stdout, generated.stdout);

    let out = pbe(d, &["--config", "run.ini", "solve", "--enriched", "--out", "ref.txt"]);
    assert!(out.status.success());
    let reference = load_reference(&d.join("ref.txt")).unwrap();
    assert_eq!(reference.degree, 2);

    let out = pbe(d, &["--config", "run.ini", "estimate", "--reference", "ref.txt"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("E_Gamma = ") && text.contains("effectivity = "), "{text}");

    let out = pbe(d, &["--config", "run.ini", "refine", "--strategy", "ucr", "--levels", "1", "--reference", "ref.txt"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.effectivity.is_some()));

    let again = pbe(d, &["--config", "run.ini", "refine", "--strategy", "ucr", "--levels", "1", "--reference", "ref.txt"]);
    let first = pbe(d, &["--config", "run.ini", "refine", "--strategy", "ucr", "--levels", "1", "--reference", "ref.txt"]);
    assert_eq!(again.stdout, first.stdout, "refinement output must be deterministic");

    let out = pbe(d, &["--config", "run.ini", "oracle", "--intervals", "2000"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("radial_qoi = "));

    std::fs::write(d.join("bad.ini"), "[coefficients]\nkappa_sq = -1\n").unwrap();
    let out = pbe(d, &["--config", "bad.ini", "solve"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().filter(|l| l.starts_with("error[config]: ")).count(), 1, "{err}");

    let out = pbe(d, &["refine", "--strategy", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error[usage]: ") && err.lines().count() == 1, "{err}");

    let out = pbe(d, &["--config", "missing.ini", "solve"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error[io]: "));

    // Newton cannot converge in a single iteration.
    std::fs::write(
        d.join("newton.ini"),
        format!("{SMALL_MESH}[coefficients]\nnonlinearity = nonlinear\ncharge_scale = 50\n[solver]\nnewton_max_iterations = 1\n"),
    )
    .unwrap();
    let out = pbe(d, &["--config", "newton.ini", "solve"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error[solver]: "));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let born = load_config(Some(&dir.join("born.ini"))).unwrap();
    assert_eq!(born.strategy.kind, StrategyKind::Ucr);
    assert_eq!(born.output, None);
    let methanol = load_config(Some(&dir.join("methanol.ini"))).unwrap();
    assert_eq!(methanol.charges, ChargeSource::Pqr(dir.join("methanol.pqr")));
    assert_eq!(load_charges(&methanol).unwrap().len(), 3);
}
