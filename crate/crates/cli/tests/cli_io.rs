use std::fs;
use std::process::Command;

use modadc::experiment::{run_table1, ExperimentConfig, FoldMode};
use modadc_cli::config::{parse_config_text, resolve, Overrides};
use modadc_cli::output::{emit_report, emit_traces, read_report, read_traces, ReportRow, TraceRow};
use modadc_cli::plot::emit_plot;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_modadc"))
}

#[test]
fn empty_report_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.csv");
    emit_report(&p, "", &[]).unwrap();
    assert_eq!(
        fs::read_to_string(&p).unwrap(),
        "label,rho,alpha,bits,sinad_conv_db,sinad_usf_db,sinad_gain_db,enob_conv,enob_usf\n"
    );
    assert!(read_report(&p).unwrap().is_empty());
}

#[test]
fn report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.csv");
    let mut rows: Vec<ReportRow> = run_table1(&ExperimentConfig::default())
        .unwrap()
        .iter()
        .map(ReportRow::from)
        .collect();
    rows[0].sinad_usf_db = f64::INFINITY;
    emit_report(&p, "# rho=1.0\n", &rows).unwrap();
    assert_eq!(read_report(&p).unwrap(), rows);
}

#[test]
fn traces_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    let rows: Vec<TraceRow> = (0..50)
        .map(|k| {
            let t = k as f64 * 1e-4;
            TraceRow {
                t_s: t,
                input_v: (t * 7.0).sin() * 3.0,
                folded_v: 0.1 / 3.0,
                quantized_v: -0.5,
                corrected_v: 1e-300,
                recovered_v: -2.0f64.sqrt(),
            }
        })
        .collect();
    emit_traces(&p, "", &rows).unwrap();
    assert_eq!(read_traces(&p).unwrap(), rows);
}

#[test]
fn config_file_then_flags() {
    let mut cfg = ExperimentConfig::default();
    parse_config_text("# comment\n\nrho = 4\nmode=circuit_fold\n", &mut cfg).unwrap();
    assert_eq!(cfg.rho, 4.0);
    assert_eq!(cfg.mode, FoldMode::Circuit);
    assert!(parse_config_text("rho 4", &mut cfg).is_err());
    assert!(parse_config_text("colour=blue", &mut cfg).is_err());

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.txt");
    fs::write(&p, "rho=4\nbits=10\n").unwrap();
    let cfg = resolve(FoldMode::Ideal, Some(&p), &Overrides(vec![("bits", "12".into())])).unwrap();
    assert_eq!((cfg.rho, cfg.bits), (4.0, 12));
    let bad = resolve(FoldMode::Ideal, None, &Overrides(vec![("alpha", "0.5".into())]));
    assert_eq!(bad.unwrap_err().exit_code(), 2);
}

#[test]
fn exit_codes() {
    let ok = bin().args(["table1", "--duration_s", "1"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let text = String::from_utf8(ok.stdout).unwrap();
    assert!(text.starts_with("# rho=1.0\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 9);

    let bad = bin().args(["exp1", "--bits", "0"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let bad = bin().args(["exp2", "--rho", "-3"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));

    // 64 V of drive against a 15 V rail
    let fail = bin()
        .args(["simulate", "--rho", "8", "--alpha", "8", "--duration_s", "0.05", "--freq_hz", "200"])
        .output()
        .unwrap();
    assert_eq!(fail.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&fail.stderr).contains("fold"));
}

#[test]
fn simulate_recover_metrics_chain() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim.csv");
    let rec = dir.path().join("rec.csv");
    let rep = dir.path().join("rep.csv");
    let svg = dir.path().join("sim.svg");
    let png = dir.path().join("rec.png");
    let common = ["--rho", "3", "--sample_rate_hz", "20000"];
    let st = bin().arg("simulate").args(common).arg("--out").arg(&sim).arg("--plot").arg(&svg).status().unwrap();
    assert!(st.success());
    let header = fs::read_to_string(&sim).unwrap();
    assert!(header.contains("# mode=circuit_fold\n"));
    assert!(header.contains("\nt_s,input_v,folded_v,quantized_v,corrected_v,recovered_v\n"));

    let st = bin().arg("recover").args(common).arg("--input").arg(&sim).arg("--out").arg(&rec).arg("--plot").arg(&png).status().unwrap();
    assert!(st.success());
    assert_eq!(read_traces(&sim).unwrap(), read_traces(&rec).unwrap());

    let st = bin().arg("metrics").args(common).arg("--input").arg(&rec).arg("--out").arg(&rep).status().unwrap();
    assert!(st.success());
    let row = &read_report(&rep).unwrap()[0];
    assert!((row.rho - 3.0).abs() < 0.01);
    assert!((row.sinad_gain_db - 20.0 * 3f64.log10()).abs() < 3.0, "{row:?}");

    assert!(fs::read_to_string(&svg).unwrap().contains("<svg"));
    assert_eq!(&fs::read(&png).unwrap()[1..4], b"PNG");
}

#[test]
fn plot_rejects_unknown_extension() {
    let dir = tempfile::tempdir().unwrap();
    let err = emit_plot(&[], &dir.path().join("x.gif")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    emit_plot(&[], &dir.path().join("empty.svg")).unwrap();
}
