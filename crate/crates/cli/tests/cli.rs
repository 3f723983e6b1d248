use std::fs;
use std::path::Path;
use std::process::{Command as Process, Output};

use taskalloc_cli::{run, Command, RunConfig};

const TAB3_FILE: &str = r#"{
  "total": 1150,
  "graph": {"n": 3, "edges": [[1, 2], [2, 3]]},
  "agents": [
    {"family": "quadratic", "a": 0.006, "b": 5, "lower": 200, "upper": 350},
    {"family": "quadratic", "a": 0.008, "b": 5.4, "lower": 350, "upper": 480},
    {"family": "quadratic", "a": 0.01, "b": 5.6, "lower": 410, "upper": 540}
  ]
}"#;

fn bin(args: &[&str]) -> Output {
    Process::new(env!("CARGO_BIN_EXE_taskalloc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn example(command: Command, id: &str) -> RunConfig {
    RunConfig {
        example: Some(id.to_string()),
        ..RunConfig::new(command)
    }
}

fn write_input(dir: &Path, text: &str) -> String {
    let path = dir.join("problem.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

/// Value printed after `label` on the first line that contains it.
fn field(report: &str, label: &str) -> f64 {
    let line = report
        .lines()
        .find(|l| l.contains(label))
        .unwrap_or_else(|| panic!("no {label:?}"));
    line[line.find(label).unwrap() + label.len()..]
        .split_whitespace()
        .next()
        .unwrap()
        .trim_end_matches(',')
        .parse()
        .unwrap()
}

#[test]
fn solve_tab1_prints_both_tables() {
    let out = run(&example(Command::Solve, "tab1")).unwrap();
    assert_eq!(out.status, 0);
    let r = &out.report;
    assert!(r.contains("with keys rounded to 3 decimals:"));
    for v in ["1.897", "2.682", "3.873", "1077.73200227", "1345.15310631"] {
        assert!(r.contains(v), "missing {v}\n{r}");
    }
    assert!((field(r, "ln lambda_new =") - 2.931448).abs() < 1e-6);
    assert!(r.contains("kkt certificate: PASS"));
    assert!(r.contains("beta_1:"));
}

#[test]
fn solve_file_matches_builtin_tab3() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_input(dir.path(), TAB3_FILE);
    let from_file = run(&RunConfig {
        input: Some(input.into()),
        output_dir: Some(dir.path().to_path_buf()),
        ..RunConfig::new(Command::Solve)
    })
    .unwrap();
    let builtin = run(&example(Command::Solve, "tab3")).unwrap();
    assert_eq!(from_file.status, 0);
    // Only the instance label differs.
    let strip = |s: &str| s.lines().skip(2).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&from_file.report), strip(&builtin.report));
    for v in ["1026.66666667", "1202.5", "0.00342857142857"] {
        assert!(builtin.report.contains(v), "missing {v}");
    }
    assert_eq!(
        fs::read_to_string(dir.path().join("solve.txt")).unwrap(),
        from_file.report
    );
}

#[test]
fn missing_total_is_a_parse_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_input(dir.path(), &TAB3_FILE.replacen("\"total\": 1150,", "", 1));
    let o = bin(&["solve", "--input", &input]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.starts_with("error-code: E_PARSE\n"), "{err}");
    assert!(err.contains("total"));
    assert!(err.contains("line"), "{err}");
}

#[test]
fn infeasible_total_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_input(dir.path(), &TAB3_FILE.replacen("1150", "2000", 1));
    let o = bin(&["verify", "--input", &input]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8(o.stderr)
        .unwrap()
        .starts_with("error-code: E_INFEASIBLE\n"));
}

#[test]
fn usage_and_io_errors() {
    let o = bin(&["solve"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr)
        .unwrap()
        .starts_with("error-code: E_USAGE\n"));
    let o = bin(&["solve", "--input", "/definitely/not/here.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr)
        .unwrap()
        .starts_with("error-code: E_IO\n"));
    let o = bin(&["reproduce", "--example", "fig9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr)
        .unwrap()
        .starts_with("error-code: E_UNKNOWN_EXAMPLE\n"));
}

#[test]
fn simulate_fig3_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&RunConfig {
        output_dir: Some(dir.path().to_path_buf()),
        ..example(Command::Simulate, "fig3")
    })
    .unwrap();
    assert_eq!(out.status, 0);
    assert!(out.report.contains("converged: yes"));
    assert!(out
        .report
        .contains("cost nonincreasing over recorded samples: yes"));
    assert!(out
        .report
        .contains("lyapunov reference: solver output (interior)"));
    // All agents end at one fitness value.
    let line = out
        .report
        .lines()
        .find(|l| l.starts_with("final fitness range"))
        .unwrap();
    let nums: Vec<f64> = line
        .trim_start_matches("final fitness range: [")
        .trim_end_matches(']')
        .split(", ")
        .map(|s| s.parse().unwrap())
        .collect();
    assert!(nums[1] - nums[0] <= 1e-6);

    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,t,w_1,w_2,w_3,w_4,w_5,w_6,C,V,residual"
    );
    let last: Vec<&str> = lines.last().unwrap().split(',').collect();
    let v: f64 = last[9].parse().unwrap();
    assert!(v.abs() < 1e-6, "final V {v}");
    assert_eq!(
        fs::read_to_string(dir.path().join("summary.txt")).unwrap(),
        out.report
    );
}

#[test]
fn simulate_fig2_defaults_converge_monotonically() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&RunConfig {
        output_dir: Some(dir.path().to_path_buf()),
        ..example(Command::Simulate, "fig2")
    })
    .unwrap();
    assert_eq!(out.status, 0);
    assert!(out.report.contains("dt: 0.0001"));
    assert!(out.report.contains("converged: yes"));
    assert!(out
        .report
        .contains("cost nonincreasing over recorded samples: yes"));
}

#[test]
fn simulate_large_step_overflows_with_suggestion() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = bin(&["simulate", "--example", "fig2", "--dt", "10", "--out", d]);
    assert_eq!(o.status.code(), Some(4));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.starts_with("error-code: E_STEP_OVERFLOW\n"), "{err}");
    assert!(err.contains("--dt 5e0"), "{err}");
}

#[test]
fn simulate_step_cap_reports_nonconvergence() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&RunConfig {
        output_dir: Some(dir.path().to_path_buf()),
        max_steps: Some(50),
        ..example(Command::Simulate, "fig3")
    })
    .unwrap();
    assert_eq!(out.status, 4);
    assert!(out.report.contains("converged: no"));
    assert!(out.report.contains("steps: 50"));
}

#[test]
fn verify_tab1_million_samples() {
    let out = run(&RunConfig {
        samples: 1_000_000,
        seed: 42,
        ..example(Command::Verify, "tab1")
    })
    .unwrap();
    assert_eq!(out.status, 0, "{}", out.report);
    let gap = field(&out.report, "relative gap (oracle - solver) / solver:");
    assert!((0.0..=5e-3).contains(&gap), "gap {gap}");
    assert!(out.report.contains("verdict: verified"));
}

#[test]
fn verify_tab3_grid_close_to_solver() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&RunConfig {
        samples: 100_000,
        grid: Some(0.1),
        dump_samples: Some(10),
        output_dir: Some(dir.path().to_path_buf()),
        ..example(Command::Verify, "tab3")
    })
    .unwrap();
    assert_eq!(out.status, 0, "{}", out.report);
    assert!(out.report.contains("grid: resolution 0.1"));
    assert!(field(&out.report, "max |grid - solver| per coordinate:") <= 0.2);
    let csv = fs::read_to_string(dir.path().join("oracle.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("sample_index,w_1,w_2,w_3,C"));
    assert_eq!(csv.lines().count(), 11);
    assert_eq!(
        fs::read_to_string(dir.path().join("verify.txt")).unwrap(),
        out.report
    );
}

#[test]
fn verify_single_agent_agrees_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_input(
        dir.path(),
        r#"{"total": 42, "graph": {"n": 1, "edges": []},
            "agents": [{"family": "exponential", "a": 10, "lower": 0, "upper": 100}]}"#,
    );
    let out = run(&RunConfig {
        input: Some(input.into()),
        samples: 1000,
        ..RunConfig::new(Command::Verify)
    })
    .unwrap();
    assert_eq!(out.status, 0, "{}", out.report);
    for line in out.report.lines().filter(|l| l.contains("relative gap")) {
        assert!(
            line.contains("gap (oracle - solver) / solver: 0 "),
            "{line}"
        );
    }
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let args = |t: &'static str| {
        [
            "verify",
            "--example",
            "tab3",
            "--samples",
            "50000",
            "--seed",
            "9",
            "--threads",
            t,
        ]
    };
    let one = bin(&args("1"));
    let four = bin(&args("4"));
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let again = bin(&args("4"));
    assert_eq!(four.stdout, again.stdout);
}

#[test]
fn reproduce_each_example_passes() {
    for id in ["tab1", "tab3", "fig2", "fig3"] {
        let out = run(&example(Command::Reproduce, id)).unwrap();
        assert_eq!(out.status, 0, "{id}:\n{}", out.report);
        assert!(!out.report.contains("FAIL"), "{}", out.report);
        assert!(out.report.ends_with("overall: PASS\n"));
    }
}

#[test]
fn reproduce_tab1_checks_every_table_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&RunConfig {
        output_dir: Some(dir.path().to_path_buf()),
        ..example(Command::Reproduce, "tab1")
    })
    .unwrap();
    let r = &out.report;
    // 6 agent keys, 6 sorted keys, 6 m_j, 5 slopes, 3 loads, the sum and the certificate.
    assert_eq!(
        r.lines()
            .filter(|l| l.ends_with("PASS") && l.starts_with("  "))
            .count(),
        28
    );
    assert!(r.contains("m_2                    expected     1077.732"));
    assert!(dir.path().join("reproduce_tab1.txt").exists());
}

#[test]
fn reproduce_reports_mismatch_with_exit_5() {
    let o = bin(&["reproduce", "--example", "fig2", "--max-steps", "1000"]);
    assert_eq!(o.status.code(), Some(5));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("converged"));
    assert!(out.ends_with("overall: FAIL\n"));
}
