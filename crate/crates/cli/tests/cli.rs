//! End-to-end checks of the command-line surface: exit codes, output
//! determinism, tube-count linearity of the device card, and config-file
//! precedence.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cntsram"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cntsram_cli_{tag}_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn device_card_values_and_linearity() {
    let one = run(&["device", "--chirality", "19,0"]);
    assert!(one.status.success());
    let text1 = stdout(&one);
    assert!(text1.contains("d_cnt_nm=1.50592"), "{text1}");
    assert!(text1.contains("vth_v=0.28954"), "{text1}");

    let five = run(&["device", "--chirality", "19,0", "--tubes", "5"]);
    let text5 = stdout(&five);
    let ion = |t: &str| -> f64 {
        t.lines()
            .find_map(|l| l.strip_prefix("i_on_a="))
            .unwrap()
            .parse()
            .unwrap()
    };
    let ratio = ion(&text5) / ion(&text1);
    assert_eq!(ratio, 5.0, "tube scaling must be exact");
}

#[test]
fn bad_flags_exit_64() {
    assert_eq!(run(&["device", "--chirality", "0,0"]).status.code(), Some(64));
    assert_eq!(run(&["device", "--chirality", "x,y"]).status.code(), Some(64));
    assert_eq!(run(&["simulate", "--cell", "6t", "--op", "read9"]).status.code(), Some(64));
    assert_eq!(run(&["simulate", "--cell", "11t", "--op", "hold"]).status.code(), Some(64));
    assert_eq!(run(&["snm", "--cell", "6t", "--mode", "sideways"]).status.code(), Some(64));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
}

#[test]
fn simulate_writes_deterministic_trace() {
    let d1 = tmpdir("det1");
    let d2 = tmpdir("det2");
    for d in [&d1, &d2] {
        let out = run(&["simulate", "--cell", "6t", "--op", "write0", "--out", d.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).contains("verdict: Pass"));
    }
    let a = std::fs::read(d1.join("6t_write0_trace.csv")).unwrap();
    let b = std::fs::read(d2.join("6t_write0_trace.csv")).unwrap();
    assert_eq!(a, b, "identical invocations must produce byte-identical CSV");
    let header = String::from_utf8_lossy(&a);
    let header = header.lines().next().unwrap();
    for col in ["time", "Q", "QB", "BL", "BLB", "WL"] {
        assert!(header.contains(col), "missing column {col} in {header}");
    }
}

#[test]
fn simulate_netlist_bypass() {
    let dir = tmpdir("netlist");
    let net = dir.join("rc.sp");
    std::fs::write(
        &net,
        "V1 in gnd pwl (0 0 1n 0.9)\nR1 in out 1k\nC1 out gnd 10f\n.port OUT out\n.end\n",
    )
    .unwrap();
    let out = run(&[
        "simulate",
        "--netlist",
        net.to_str().unwrap(),
        "--duration",
        "20n",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("rc_trace.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains("OUT"));
    let last = csv.lines().last().unwrap();
    let out_v: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!((out_v - 0.9).abs() < 1e-3, "RC settled at {out_v}");
}

#[test]
fn snm_respects_assist_flag() {
    let base = run(&["snm", "--cell", "10t", "--mode", "write", "--out", tmpdir("wm0").to_str().unwrap()]);
    assert!(base.status.success());
    let plain = stdout(&base);
    assert!(plain.contains("monostable=false"), "{plain}");

    let boosted = run(&[
        "snm",
        "--cell",
        "10t",
        "--mode",
        "write",
        "--assist",
        "0.3",
        "--out",
        tmpdir("wm1").to_str().unwrap(),
    ]);
    let btext = stdout(&boosted);
    assert!(btext.contains("monostable=true"), "{btext}");
    let margin = |t: &str| -> f64 {
        t.split_whitespace()
            .find_map(|tok| tok.strip_prefix("margin_v="))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(margin(&btext) > margin(&plain));
}

#[test]
fn config_file_overrides_defaults() {
    let dir = tmpdir("cfg");
    let cfg = dir.join("low_vdd.conf");
    std::fs::write(&cfg, "vdd_v=0.8\n").unwrap();
    let out = run(&["device", "--chirality", "19,0", "--config", cfg.to_str().unwrap()]);
    assert!(stdout(&out).contains("vdd_v=0.8"));
    // Flag wins over file.
    let out = run(&[
        "device",
        "--chirality",
        "19,0",
        "--config",
        cfg.to_str().unwrap(),
        "--vdd",
        "0.7",
    ]);
    assert!(stdout(&out).contains("vdd_v=0.7"));
    // Unknown keys are rejected as usage errors.
    let bad = dir.join("bad.conf");
    std::fs::write(&bad, "nonsense_key=1\n").unwrap();
    assert_eq!(
        run(&["device", "--chirality", "19,0", "--config", bad.to_str().unwrap()]).status.code(),
        Some(64)
    );
}

#[test]
fn shipped_default_config_loads() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.conf");
    let out = run(&["device", "--chirality", "19,0", "--config", path]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("vth_v=0.28954"));
}
