use std::path::PathBuf;
use std::process::{Command, Output};

fn fpsi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpsi")).args(args).output().unwrap()
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("fpsi-cli-{}-{name}", std::process::id()))
}

#[test]
fn invalid_flags_exit_2() {
    for args in [
        &["--mode", "bogus"][..],
        &["--n", "abc"],
        &["--mode", "temporal", "--dt", "0.1"],
        &["--mode", "single", "--n", "4", "--dt", "0.3", "--T", "1"],
        &["--mode", "single", "--n", "4,8"],
        &["--gamma", "-1"],
        &["--mode", "temporal", "--n", "8,4"],
        &["--parallel", "maybe"],
    ] {
        let o = fpsi(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn help_exits_0() {
    assert_eq!(fpsi(&["--help"]).status.code(), Some(0));
}

#[test]
fn spatial_csv_shape() {
    let out = tmp("spatial.csv");
    let o = fpsi(&["--mode", "spatial", "--n", "2,4", "--dt", "1e-3", "--T", "2e-3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    std::fs::remove_file(&out).ok();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,dt,h,e_eta,e_xi,e_phi,e_u,e_p");
    assert!(lines[1].starts_with("2,1.00000e-3,5.00000e-1,"));
    assert!(lines[2].starts_with("4,1.00000e-3,2.50000e-1,"));
    assert_eq!(lines[4], "pair,rate_eta,rate_xi,rate_phi,rate_u,rate_p");
    assert!(lines[5].starts_with("2-4,"));
    assert_eq!(lines[5].split(',').count(), 6);
    assert!(String::from_utf8(o.stdout).unwrap().contains("e_eta"));
}

#[test]
fn parallel_flag_does_not_change_output() {
    let run = |flag: &str| {
        let out = tmp(&format!("temporal-{flag}.csv"));
        let o = fpsi(&["--mode", "temporal", "--n", "2,4", "--T", "0.05", "--parallel", flag, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        let b = std::fs::read(&out).unwrap();
        std::fs::remove_file(&out).ok();
        b
    };
    assert_eq!(run("on"), run("off"));
}

#[test]
fn energy_and_projection_modes() {
    let out = tmp("energy.csv");
    let o = fpsi(&["--mode", "energy", "--n", "3", "--dt", "0.01,1", "--steps", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    std::fs::remove_file(&out).ok();
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
    let o = fpsi(&["--mode", "projections", "--n", "2,4"]);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout).unwrap().contains("reproduction"));
}
