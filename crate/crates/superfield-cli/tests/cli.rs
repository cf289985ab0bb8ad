use std::path::PathBuf;
use std::process::Command;

use proptest::prelude::*;
use superfield::random::Sampler;
use superfield::{Chart, Parity, Variant};
use superfield_cli::eval::Eval;
use superfield_cli::parse::{parse_change, parse_expr};
use superfield_cli::report::{change_text, series_text};
use superfield_cli::run_from;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn sfk(args: &[&str]) -> (String, String, i32) {
    run_from(std::iter::once("sfk").chain(args.iter().copied()))
}

#[test]
fn virasoro_catalog_checks_out() {
    let (out, _, code) = sfk(&["check-algebra", "--catalog", "virasoro", "--window", "4"]);
    assert_eq!(code, 0, "{}", out);
    assert!(out.contains("PASS table.virasoro"));
}

#[test]
fn superprojective_schwarzian_prints_zero() {
    let f = fixture("changes.sf");
    let (out, _, code) = sfk(&["schwarzian", &f, "--change", "proj"]);
    assert_eq!((out.as_str(), code), ("0\n", 0));
}

#[test]
fn odd_shift_is_not_superconformal() {
    let f = fixture("changes.sf");
    let (out, _, code) = sfk(&["check-sc", "--level", "n1", &f, "--change", "shifted"]);
    assert_eq!(code, 1);
    assert!(out.contains("first nonzero term -a1"), "{}", out);
}

#[test]
fn inline_changes() {
    let (out, _, code) = sfk(&["check-sc", "--change", "(z + a1 a2 z^2, th1)"]);
    assert_eq!(code, 1, "{}", out);
    let (_, err, code) = sfk(&["check-sc", "--change", "change { F = th1, Psi = z }"]);
    assert_eq!(code, 2);
    assert!(err.contains("parity error"), "{}", err);
}

#[test]
fn parse_errors_carry_positions() {
    let (_, err, code) = sfk(&["schwarzian", "--change", "(z + , th1)"]);
    assert_eq!(code, 2);
    assert!(err.contains("parse error at 1:"), "{}", err);
    let (out, _, code) = sfk(&["--machine", "schwarzian", "--change", "(z, th1"]);
    assert_eq!(code, 2);
    assert!(out.contains("error.kind = parse\n") && out.ends_with("exit = 2\n"), "{}", out);
}

#[test]
fn config_errors_exit_two() {
    assert_eq!(sfk(&["--trunc", "1", "schwarzian", "--change", "(z, th1)"]).2, 2);
    assert_eq!(sfk(&["--grassmann", "12", "selftest"]).2, 2);
    assert_eq!(sfk(&["no-such-command"]).2, 2);
    assert_eq!(sfk(&["extension-class", "--module", "k2_1", "--param", "m=1"]).2, 2);
    assert_eq!(sfk(&["extension-class", "--module", "k2_1", "--param", "c=q"]).2, 2);
    let f = fixture("changes.sf");
    assert_eq!(sfk(&["schwarzian", &f, "--change", "missing"]).2, 2);
    assert_eq!(sfk(&["--n", "2", "schwarzian", &f, "--change", "proj"]).2, 2);
}

#[test]
fn presentation_file_is_consistent() {
    let f = fixture("k1.sfa");
    let (out, _, code) = sfk(&["check-algebra", &f, "--window", "3"]);
    assert_eq!(code, 0, "{}", out);
    assert!(out.contains("PASS jacobi"));
    // component fields of an N = 1 file are unknown, so no mode table applies
    let (_, err, code) = sfk(&["check-algebra", &f, "--table", "ns"]);
    assert_eq!(code, 2);
    assert!(err.contains("no weight data"), "{}", err);
}

#[test]
fn n0_presentation_uses_declared_weights() {
    let src = "variant NK 0\ngen L even weight 2\n[L,L] = (T + 2l) L + (1/12) l^3 c\n";
    let p = std::env::temp_dir().join(format!("sfk-vir-{}.sfa", std::process::id()));
    std::fs::write(&p, src).unwrap();
    let f = p.to_string_lossy().into_owned();
    let (out, _, code) = sfk(&["check-algebra", &f, "--window", "3", "--table", "virasoro"]);
    assert_eq!(code, 0, "{}", out);
    let (out, _, code) = sfk(&["mode-bracket", "L_3", "L_-3", &f, "--table", "virasoro"]);
    std::fs::remove_file(&p).ok();
    assert_eq!(code, 0, "{}", out);
    assert!(out.contains("2*c"), "{}", out);
}

#[test]
fn machine_output_is_deterministic() {
    let f = fixture("changes.sf");
    for args in [
        vec!["--machine", "compose", f.as_str(), "--change", "r", "--with", "t"],
        vec!["--machine", "--seed", "5", "transition", "--module", "b1_half", f.as_str(), "--change", "proj", "--verify"],
        vec!["--machine", "check-algebra", "--catalog", "n2", "--window", "2"],
    ] {
        let a = sfk(&args);
        let b = sfk(&args);
        assert_eq!(a, b);
        assert!(a.0.starts_with("command = ") && a.0.ends_with("exit = 0\n"), "{}", a.0);
    }
}

#[test]
fn composite_round_trips_through_the_printer() {
    let f = fixture("changes.sf");
    let (out, _, _) = sfk(&["--machine", "compose", &f, "--change", "r", "--with", "t"]);
    let text = out.lines().find_map(|l| l.strip_prefix("value.composite = ")).unwrap();
    let (again, _, code) = sfk(&["--machine", "compose", "--change", text, "--with", "(z, th1)"]);
    assert_eq!(code, 0);
    assert!(again.contains(&format!("value.composite = {}\n", text)), "{}", again);
}

#[test]
fn module_commands() {
    let f = fixture("changes.sf");
    let (out, _, code) = sfk(&["transition", "--module", "k1_3half", &f, "--change", "proj", "--verify", "--cocycle", "proj"]);
    assert_eq!(code, 0, "{}", out);
    let (out, _, code) = sfk(&["extension-class", "--module", "b1_half", "--param", "m=0"]);
    assert_eq!(code, 0);
    assert!(out.contains("split = true"));
    let (out, _, _) = sfk(&["extension-class", "--module", "B2W_0", "--param", "m=-2"]);
    assert!(out.contains("split = false"));
    let (out, _, code) = sfk(&["gl11", "pi-(t,j)", "--dual", "--shift"]);
    assert_eq!(code, 0, "{}", out);
    assert!(out.contains("dual.iso = pi+(-t,-j)"), "{}", out);
    let (out, _, code) = sfk(&["gl11", "pi+(1,0)", "--module", "K2W_1"]);
    assert_eq!(code, 0, "{}", out);
}

#[test]
fn exp_coords_against_closed_forms() {
    let f = fixture("changes.sf");
    let (out, _, code) = sfk(&["exp-coords", "--family", "k11", "--order", "2", &f, "--change", "proj", "--verify"]);
    assert_eq!(code, 0, "{}", out);
    assert_eq!(sfk(&["exp-coords", "--family", "k11", "--order", "3", &f, "--change", "proj"]).2, 2);
}

#[test]
fn n2_chart_commands() {
    let f = fixture("n2.sf");
    let (out, _, code) = sfk(&["check-sc", "--level", "n2o", &f]);
    assert_eq!(code, 0, "{}", out);
    assert_eq!(sfk(&["schwarzian2", &f]).0, "0\n");
}

#[test]
fn truncation_from_environment() {
    let bin = env!("CARGO_BIN_EXE_sfk");
    let out = Command::new(bin)
        .args(["--machine", "compose", "--change", "(z + z^2, th1)", "--with", "(z, th1)"])
        .env("SFK_TRUNC", "3")
        .output()
        .unwrap();
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("F = z + z^2 + O(4)"), "{}", s);
    let out = Command::new(bin).args(["schwarzian", "--change", "(z, th1)"]).env("SFK_TRUNC", "1").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // the flag wins over the variable
    let out = Command::new(bin)
        .args(["--trunc", "5", "--machine", "compose", "--change", "(z, th1)", "--with", "(z, th1)"])
        .env("SFK_TRUNC", "3")
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().contains("O(6)"));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn series_print_parse_round_trip(seed: u64, n in 0usize..=2, odd: bool, trunc in 2i32..6) {
        let mut s = Sampler::new(seed);
        let ch = Chart::new(n);
        let p = if odd { Parity::Odd } else { Parity::Even };
        let x = s.series(ch, trunc, p, 0, 0.4);
        let ev = Eval::new(None, 4);
        let text = series_text(&x);
        let back = ev.series(&parse_expr(&text).unwrap(), ch, 9).unwrap();
        prop_assert_eq!(back.trunc(), x.trunc());
        prop_assert!(back.eq_trunc(&x), "{} vs {}", text, back);
        prop_assert_eq!(series_text(&back), text);
    }

    #[test]
    fn change_print_parse_round_trip(seed: u64, n in 1usize..=2, nk: bool) {
        let mut s = Sampler::new(seed);
        let v = if nk { Variant::NK } else { Variant::NW };
        let rho = s.change(n, 4, v);
        let text = change_text(&rho);
        let ev = Eval::new(None, 4);
        let back = ev.change(&parse_change(&text).unwrap(), 9, false, Variant::NK).unwrap();
        prop_assert!(back.eq_trunc(&rho));
        prop_assert_eq!(back.variant, rho.variant);
        prop_assert_eq!(change_text(&back), text);
    }
}
