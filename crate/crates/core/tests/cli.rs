use std::io::Write;
use std::process::Command;

use clap::Parser;
use dirac_stso::cli::{
    csv_header, exit_code, parse_config_text, reference_values, run, table_layout, table_sweep, tabulated_value,
    CliArgs, OutputFormat, RunConfig,
};
use dirac_stso::Error;

fn args(list: &[&str]) -> CliArgs {
    let mut v = vec!["dirac-scf"];
    v.extend_from_slice(list);
    CliArgs::try_parse_from(v).unwrap()
}

fn config_location(e: &Error) -> Option<String> {
    match e {
        Error::Config { location, .. } => location.clone(),
        _ => None,
    }
}

#[test]
fn config_text_parsing() {
    let kv = parse_config_text("# header\nZ = 2\n\ntol-scf=1e-30  # inline\n", "run.cfg").unwrap();
    assert_eq!(kv["Z"], ("2".to_string(), 2));
    assert_eq!(kv["tol_scf"], ("1e-30".to_string(), 4));
    let e = parse_config_text("Z = 2\nnonsense\n", "run.cfg").unwrap_err();
    assert_eq!(config_location(&e).as_deref(), Some("run.cfg:2"));
}

#[test]
fn precedence_env_then_file_then_flags() {
    let file = "digits = 40\nZ = 3\nzeta = 2.5\nN = 1\n";
    let cfg = RunConfig::from_parts(&args(&[]), Some(("f.cfg", file)), Some("60")).unwrap();
    assert_eq!((cfg.digits, cfg.charge.as_str()), (40, "3"));
    let cfg = RunConfig::from_parts(
        &args(&["--digits", "35", "--Z", "4"]),
        Some(("f.cfg", file)),
        Some("60"),
    )
    .unwrap();
    assert_eq!((cfg.digits, cfg.charge.as_str()), (35, "4"));
    let cfg = RunConfig::from_parts(&args(&["--zeta", "1.7"]), None, Some("45")).unwrap();
    assert_eq!(cfg.digits, 45);
    assert_eq!(cfg.exponents, Some(vec!["1.7".to_string()]));
}

#[test]
fn file_errors_name_line_and_key() {
    let e = RunConfig::from_parts(&args(&[]), Some(("f.cfg", "Z = 2\nN = four\n")), None).unwrap_err();
    assert_eq!(config_location(&e).as_deref(), Some("f.cfg:2 (N)"));
    let e = RunConfig::from_parts(&args(&[]), Some(("f.cfg", "\ncolour = red\n")), None).unwrap_err();
    assert_eq!(config_location(&e).as_deref(), Some("f.cfg:2 (colour)"));
    // range checks after merging still point at the file line
    let e = RunConfig::from_parts(&args(&["--opt"]), Some(("f.cfg", "Z = 2\nN = 5\n")), None).unwrap_err();
    assert_eq!(config_location(&e).as_deref(), Some("f.cfg:2 (N)"));
    let e = RunConfig::from_parts(&args(&["--opt", "--N", "5"]), Some(("f.cfg", "N = 5\n")), None).unwrap_err();
    assert_eq!(config_location(&e).as_deref(), Some("N"));
    let e = RunConfig::from_parts(&args(&["--zeta", "1"]), None, Some("many")).unwrap_err();
    assert!(matches!(e, Error::Config { .. }));
}

#[test]
fn validation_rejects_bad_settings() {
    let bad: &[&[&str]] = &[
        &["--N", "3", "--opt"],
        &["--Z", "0", "--opt"],
        &["--Z", "-2", "--opt"],
        &["--c", "0", "--opt"],
        &["--digits", "20", "--opt"],
        &["--N", "2"],
        &["--N", "2", "--zeta", "1.5"],
        &["--zeta", "-1"],
        &["--jobs", "0", "--opt"],
        &["--table", "3"],
        &["--damping", "1.5", "--opt"],
        &["--N", "4", "--opt", "--stage-plan", "1,2"],
        &["--N", "6", "--opt", "--stage-plan", "1,6"],
        &["--N", "4", "--opt", "--stage-plan", "2,1,4"],
        &["--tol-scf", "-1", "--opt"],
    ];
    for a in bad {
        let e = RunConfig::from_parts(&args(a), None, None).unwrap_err();
        assert_eq!(exit_code(&e), 1, "{a:?}: {e}");
    }
    assert!(RunConfig::from_parts(&args(&["--N", "4", "--opt", "--stage-plan", "2,4"]), None, None).is_ok());
    assert!(RunConfig::from_parts(&args(&["--table", "1"]), None, None).is_ok());
}

#[test]
fn exit_codes_by_error_kind() {
    assert_eq!(exit_code(&Error::DuplicateBasisFunction(0, 1)), 1);
    assert_eq!(exit_code(&Error::PrecisionTooLow(10)), 1);
    assert_eq!(exit_code(&Error::NoElectronicState), 2);
    assert_eq!(
        exit_code(&Error::NoConvergence {
            what: "SCF iteration",
            iterations: 3
        }),
        2
    );
}

#[test]
fn fixed_exponent_run_and_serializations() {
    let cfg = RunConfig::from_parts(&args(&["--N", "2", "--zeta", "1.45,2.9", "--digits", "30"]), None, None).unwrap();
    let report = run(&cfg).unwrap();
    assert!(report.converged);
    assert_eq!(report.labels, vec!["1s", "1s'"]);
    assert_eq!((report.below, report.above), (2, 2));
    assert!(report.energy < 0.0);

    let json: serde_json::Value = serde_json::from_str(&report.render(OutputFormat::Json)).unwrap();
    assert_eq!(json["Z"], "2");
    assert_eq!(json["N"], 2);
    assert_eq!(json["energy"].as_str().unwrap(), report.energy.to_full_string());
    assert_eq!(json["exponents"].as_array().unwrap().len(), 2);
    assert!(json.get("show_trace").is_none());
    assert_eq!(json["scf_trace"].as_array().unwrap().len(), report.iterations + 1);

    let text = report.render(OutputFormat::Csv);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(header.join(","), csv_header().trim_end());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][3], report.energy.to_full_string());
    // every CSV column carries the same value as the JSON field
    let as_text = |v: &serde_json::Value| match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    let keys = [
        "Z",
        "z_param",
        "N",
        "energy",
        "abs_energy",
        "occupied_eigenvalue",
        "below",
        "above",
        "iterations",
        "converged",
    ];
    for (i, key) in keys.iter().enumerate() {
        assert_eq!(&rows[0][i], as_text(&json[*key]), "{key}");
    }
    let exps: Vec<String> = json["exponents"].as_array().unwrap().iter().map(as_text).collect();
    assert_eq!(&rows[0][10], exps.join(";"));

    let plain = report.render(OutputFormat::Text);
    assert!(plain.contains(&report.energy.abs().to_fixed(12)));
}

#[test]
fn reference_table_lookup() {
    let all = reference_values();
    assert!(all.iter().any(|r| r.source != "table"));
    assert_eq!(tabulated_value(1, 2, "0", 1).as_deref(), Some("2.847793824071"));
    assert_eq!(tabulated_value(1, 2, "0.0", 1).as_deref(), Some("2.847793824071"));
    assert!(tabulated_value(1, 2, "0", 3).is_none());
    assert!(table_layout(3).is_err());
    let (rows, stages) = table_layout(2).unwrap();
    assert_eq!(rows.len(), 26);
    assert_eq!(stages, vec![1, 2, 4, 6]);
}

#[test]
fn single_cell_sweep_matches_run() {
    let template = RunConfig::from_parts(&args(&["--table", "1", "--digits", "30"]), None, None).unwrap();
    let sweep = table_sweep(1, &[(2, "0".into()), (80, "-1".into())], &[1], &template).unwrap();
    assert_eq!(sweep.failed_cells(), 1);
    assert!(sweep.rows[1].cells[0].error.is_some());
    let cell = sweep.rows[0].cells[0].stage.as_ref().unwrap();

    let cfg = RunConfig::from_parts(&args(&["--opt", "--digits", "30"]), None, None).unwrap();
    let report = run(&cfg).unwrap();
    assert_eq!(cell.energy, report.energy);
    assert_eq!(sweep.rows[0].cells[0].tabulated.as_deref(), Some("2.847793824071"));
    let csv_text = sweep.render(OutputFormat::Csv);
    assert_eq!(csv_text.lines().count(), 3);
}

fn binary() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dirac-scf"));
    cmd.env_remove("DIRAC_SCF_DIGITS");
    cmd
}

#[test]
fn binary_exit_codes() {
    let out = binary().args(["--N", "3", "--opt"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsupported basis size 3"));

    let out = binary()
        .args(["--Z", "80", "--zparam", "-1", "--zeta", "70", "--digits", "30"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = binary()
        .args(["--N", "2", "--zeta", "1.4,2.8", "--digits", "30", "--max-iter", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = binary()
        .args(["--zeta", "1.6875", "--output", "json"])
        .env("DIRAC_SCF_DIGITS", "32")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["digits"], 32);
}

#[test]
fn binary_reads_config_file_and_dumps_integrals() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("he.cfg");
    let dump = dir.path().join("ints.txt");
    let mut f = std::fs::File::create(&cfg_path).unwrap();
    writeln!(
        f,
        "# helium, minimal basis\nZ = 2\nzparam = 0.5\ndigits = 30\nzeta = 1.6875\noutput = csv"
    )
    .unwrap();
    let out = binary()
        .arg("--config")
        .arg(&cfg_path)
        .arg("--dump-integrals")
        .arg(&dump)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("Z,z,N,energy"));
    let dumped = std::fs::read_to_string(&dump).unwrap();
    assert!(dumped.starts_with("# S 2x2"));

    let mut f = std::fs::File::create(&cfg_path).unwrap();
    writeln!(f, "Z = 2\nN = 5").unwrap();
    let out = binary().arg("--config").arg(&cfg_path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("he.cfg"));
}
