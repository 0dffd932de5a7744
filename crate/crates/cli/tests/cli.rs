use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use excess::quartic_census::parse_census;
use excess::searchkit::SurvivorRecord;
use excess::weilkit::parse_record;

fn excess(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_excess")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("excess-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn gate_rows() {
    let o = excess(&["gate"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "g=3: q ≤ 32"));
    assert!(out.lines().any(|l| l == "g=5: q ≤ 4"));
    assert!(!out.contains("g=11"));
    assert_eq!(out.lines().count(), 8);
}

#[test]
fn sieve_genus6_matches_fixtures_and_round_trips() {
    let dir = scratch("sieve");
    let path = dir.join("g6.txt");
    let o = excess(&["sieve", "--g", "6", "--q", "2", "--fixtures", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 missing out of 3"));
    let text = fs::read_to_string(&path).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(body.len() >= 3);
    for l in body {
        let r = parse_record(l, 2).unwrap();
        assert_eq!(excess::weilkit::format_record(&r), l);
    }
    let o = excess(&["sieve", "--g", "6", "--q", "3", "--fixtures", "--out", dir.join("g6q3.txt").to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("0 missing out of 0, 0 extra"));
}

#[test]
fn sieve_outside_gate_fails() {
    let o = excess(&["sieve", "--g", "7", "--q", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn census_writes_parseable_file() {
    let dir = scratch("census");
    let path = dir.join("c3.txt");
    let o = excess(&["census", "--q", "3^1", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("8 classes over F_3"));
    let text = fs::read_to_string(&path).unwrap();
    let entries = parse_census(&text).unwrap();
    assert_eq!(entries.len(), 8);
    assert_eq!(excess::quartic_census::write_census(&entries), text);
}

#[test]
fn census_default_output_dir_from_env() {
    let dir = scratch("envdir");
    let o = Command::new(env!("CARGO_BIN_EXE_excess"))
        .args(["census", "--q", "2", "--method", "brute"])
        .env("EXCESS_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(parse_census(&fs::read_to_string(dir.join("census_q2.txt")).unwrap()).unwrap().len(), 4);
}

#[test]
fn census_q29_is_verification_only() {
    let dir = scratch("q29");
    let o = excess(&["census", "--q", "29", "--out", dir.join("r.txt").to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("verification only"));
    assert!(out.contains("(T - 10)^3"));
    assert_eq!(excess(&["census", "--q", "25"]).status.code(), Some(2));
}

#[test]
fn verify_suites() {
    for suite in ["gate", "quartics-f2", "genus9", "genus7"] {
        let o = excess(&["verify", "--suite", suite]);
        assert!(o.status.success(), "{suite}: {}", stdout(&o));
        assert!(stdout(&o).contains("0 failure(s)"));
        assert!(!stdout(&o).contains("FAIL"));
    }
    assert_eq!(excess(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
}

#[test]
fn search_resume_is_byte_identical() {
    let dir = scratch("search");
    let (a, b, cp) = (dir.join("a.txt"), dir.join("b.txt"), dir.join("cp.txt"));
    let tiles: Vec<String> = (0..12).map(|i| (i * 5).to_string()).collect();
    let mut base = vec!["search", "--campaign", "g6d7", "--tiles", "64"];
    for t in &tiles {
        base.extend(["--tile-index", t.as_str()]);
    }
    let run = |extra: &[&str]| {
        let mut args = base.clone();
        args.extend_from_slice(extra);
        let o = excess(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    run(&["--out", a.to_str().unwrap()]);
    run(&["--out", b.to_str().unwrap(), "--checkpoint", cp.to_str().unwrap(), "--max-tiles", "5"]);
    run(&["--out", b.to_str().unwrap(), "--checkpoint", cp.to_str().unwrap(), "--max-tiles", "1", "--workers", "2"]);
    run(&["--out", b.to_str().unwrap(), "--checkpoint", cp.to_str().unwrap(), "--workers", "3"]);
    let (ta, tb) = (fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    assert_eq!(ta, tb);
    let recs: Vec<SurvivorRecord> =
        ta.lines().filter(|l| !l.starts_with('#')).map(|l| SurvivorRecord::parse_line(l).unwrap()).collect();
    assert!(!recs.is_empty());
    assert!(recs.windows(2).all(|w| w[0].mask < w[1].mask));
    for (r, l) in recs.iter().zip(ta.lines().skip(1)) {
        assert_eq!(r.to_line(), l);
    }
    // a checkpoint from a different layout is refused
    let o = excess(&["search", "--campaign", "G6D7", "--tiles", "32", "--out", b.to_str().unwrap(), "--checkpoint", cp.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn search_rejects_invalid_tiles() {
    assert_eq!(excess(&["search", "--campaign", "G6D7", "--tiles", "3"]).status.code(), Some(2));
    assert_eq!(excess(&["search", "--campaign", "G6D7", "--tiles", "4", "--tile-index", "4"]).status.code(), Some(2));
    assert_eq!(excess(&["search", "--campaign", "nope"]).status.code(), Some(2));
}
