//! End-to-end checks of the experiment harness.

use std::process::Command;

use rfxy_cli::campaign::{
    csv_string, run_campaign, with_suffix, write_reports, CampaignSpec, InstanceSpec,
};
use rfxy_cli::config::{GlobalSection, LocalSection};

fn tiny_campaign(dir: &std::path::Path, mode: &str) -> CampaignSpec {
    CampaignSpec {
        master_seed: 11,
        output: dir.join("report"),
        mode: mode.into(),
        solvers: vec!["mbh".into(), "ms".into()],
        runs_per_solver: 6,
        local: LocalSection::default(),
        global: GlobalSection {
            nr: 2,
            mni: 2,
            threads: 1,
            ..GlobalSection::default()
        },
        instances: vec![
            InstanceSpec {
                d: 2,
                l: 4,
                delta: 2.0,
                seed: 101,
                label: "h1".into(),
            },
            InstanceSpec {
                d: 2,
                l: 4,
                delta: 2.5,
                seed: 102,
                label: "h2".into(),
            },
        ],
    }
}

#[test]
fn global_campaign_produces_bounded_rows_and_flags_winners() {
    let dir = tempfile::tempdir().unwrap();
    let spec = tiny_campaign(dir.path(), "global");
    let report = run_campaign(&spec).unwrap();
    assert_eq!(report.rows.len(), 4);
    for row in &report.rows {
        let f_low = -(row.d as f64 + row.delta) * (row.l as f64).powi(row.d as i32);
        assert!(row.best_energy >= f_low);
        assert!(row.gap >= 0.0);
    }
    // Each (instance, field) group flags at least one winner.
    for field in ["h1", "h2"] {
        assert!(report
            .rows
            .iter()
            .any(|r| r.field == field && r.winner));
    }
    // Instance files were materialized before solving.
    let inst_dir = rfxy_cli::campaign::instance_dir(&spec.output);
    assert!(inst_dir.join("d2_L4_delta2_seed101.rfxy").exists());

    write_reports(&report, &spec.output).unwrap();
    assert!(with_suffix(&spec.output, ".csv").exists());
    assert!(with_suffix(&spec.output, ".json").exists());
}

#[test]
fn csv_and_json_carry_identical_numeric_payloads() {
    let dir = tempfile::tempdir().unwrap();
    let spec = tiny_campaign(dir.path(), "global");
    let report = run_campaign(&spec).unwrap();
    write_reports(&report, &spec.output).unwrap();

    let json: rfxy_cli::campaign::CampaignReport = serde_json::from_str(
        &std::fs::read_to_string(with_suffix(&spec.output, ".json")).unwrap(),
    )
    .unwrap();
    let mut csv_reader =
        csv::Reader::from_path(with_suffix(&spec.output, ".csv")).unwrap();
    let csv_rows: Vec<rfxy_cli::campaign::ReportRow> = csv_reader
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap();
    assert_eq!(csv_rows.len(), json.rows.len());
    for (a, b) in csv_rows.iter().zip(&json.rows) {
        assert_eq!(a.best_energy, b.best_energy);
        assert_eq!(a.gap, b.gap);
        assert_eq!(a.local_searches, b.local_searches);
        assert_eq!(a.winner, b.winner);
    }
}

#[test]
fn compare_local_emits_energy_lists() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = tiny_campaign(dir.path(), "compare-local");
    spec.instances.truncate(1);
    let report = run_campaign(&spec).unwrap();
    write_reports(&report, &spec.output).unwrap();

    assert_eq!(report.rows.len(), 2);
    for solver in ["rtr", "rcg"] {
        let list = with_suffix(&spec.output, &format!("_h1_{solver}.txt"));
        let text = std::fs::read_to_string(list).unwrap();
        assert_eq!(text.lines().count(), 6);
        for line in text.lines() {
            let e: f64 = line.parse().unwrap();
            assert!(e >= -(2.0 + 2.0) * 16.0);
        }
    }
}

#[test]
fn campaign_csv_is_reproducible_modulo_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let spec = tiny_campaign(dir.path(), "global");
    let a = csv_string(&run_campaign(&spec).unwrap().rows).unwrap();
    let b = csv_string(&run_campaign(&spec).unwrap().rows).unwrap();
    assert_eq!(strip_wall(&a), strip_wall(&b));
}

fn strip_wall(csv_text: &str) -> String {
    // Column 8 (0-based 7) is wall_seconds.
    csv_text
        .lines()
        .map(|line| {
            line.split(',')
                .enumerate()
                .filter(|(i, _)| *i != 7)
                .map(|(_, v)| v)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn binary_gen_solve_and_oracle_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = dir.path().join("tiny.rfxy");
    let bin = env!("CARGO_BIN_EXE_rfxy");

    let out = Command::new(bin)
        .args(["gen", "--d", "1", "--l", "4", "--delta", "2.0", "--seed", "7"])
        .arg("--out")
        .arg(&inst_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(inst_path.exists());

    let result_path = dir.path().join("result.json");
    let out = Command::new(bin)
        .args(["solve", "--solver", "mbh"])
        .arg("--instance")
        .arg(&inst_path)
        .arg("--out")
        .arg(&result_path)
        .args(["--seed", "3", "--threads", "1"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let solved: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&result_path).unwrap()).unwrap();
    let best = solved["best_energy"].as_f64().unwrap();
    assert!(best >= -(1.0 + 2.0) * 4.0);

    let out = Command::new(bin)
        .args(["oracle", "--k", "8", "--refine"])
        .arg("--instance")
        .arg(&inst_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("grid minimum"), "{text}");
    assert!(text.contains("refined"), "{text}");

    // The solver must match the oracle target on this trivial instance.
    let refined: f64 = text
        .lines()
        .find(|l| l.starts_with("refined:"))
        .and_then(|l| l.split_whitespace().nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!(best <= refined + 1e-6);
}
