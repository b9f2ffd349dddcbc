use std::path::Path;
use std::process::Command;

use staircase::cli::{run, EXIT_CONSTRUCTION, EXIT_FORMAT, EXIT_OK, EXIT_USAGE};

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("staircase").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn data_lines(out: &str) -> Vec<&str> {
    out.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn params_reproduce_both_tables() {
    let (code, out, _) = call(&["params", "--tables"]);
    assert_eq!(code, EXIT_OK);
    let rows = data_lines(&out);
    let expected = [
        "family,m,t,s,n,k,r,M,R,OH%",
        "ff,8,3,63,192,168,24,72,3/4,33.3",
        "ff,8,3,15,240,216,24,96,4/5,25.0",
        "ff,9,3,187,324,297,27,135,5/6,20.0",
        "ff,10,3,183,840,810,30,390,13/14,7.69",
        "pff,8,3,15,240,216,24,96,3/4,33.3",
        "pff,9,3,187,324,297,27,135,4/5,25.0",
        "pff,9,3,133,378,351,27,162,5/6,20.0",
        "pff,10,3,123,900,870,30,420,13/14,7.69",
    ];
    assert_eq!(rows, expected);
    assert!(out.starts_with("# config: "));
}

#[test]
fn params_single_rows_and_errors() {
    let (code, out, _) = call(&["params", "--family", "pff", "--m", "9", "--t", "3", "--s", "133"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("pff,9,3,133,378,351,27,162,5/6,20.0"));
    let (code, out, _) = call(&["params", "--family", "sc", "--m", "8", "--t", "3", "--s", "1", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let row: serde_json::Value = serde_json::from_str(out.lines().last().unwrap()).unwrap();
    assert_eq!(row["block"], 127);
    // n = 254, k = 230, R = 2R_c - 1
    assert_eq!(row["rate"], "103/127");
    // parity mismatch and 2r >= M are argument errors
    assert_eq!(call(&["params", "--family", "ff", "--m", "7", "--t", "2", "--s", "28"]).0, EXIT_USAGE);
    assert_eq!(call(&["params", "--family", "ff", "--m", "7", "--t", "3", "--s", "1"]).0, EXIT_USAGE);
    assert_eq!(call(&["params", "--family", "xx", "--m", "7", "--t", "3", "--s", "1"]).0, EXIT_USAGE);
    assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
}

#[test]
fn ncg_and_floor_verbs() {
    let (code, out, _) = call(&["ncg", "--rate", "3/4", "--p15", "1.82e-2", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(out.lines().last().unwrap()).unwrap();
    assert!((v["gap_db"].as_f64().unwrap() - 1.64).abs() <= 0.02);
    assert_eq!(call(&["ncg", "--rate", "1.5", "--p15", "0.01"]).0, EXIT_USAGE);

    let (code, out, _) = call(&["floor", "--family", "ff", "--m", "8", "--t", "3", "--s", "63", "--p", "1e-2,1e-3"]);
    assert_eq!(code, EXIT_OK);
    let rows = data_lines(&out);
    assert_eq!(rows[0], "family,M,r,t,p,BKER,BER");
    let f: Vec<&str> = rows[1].split(',').collect();
    let ber: f64 = f[6].parse().unwrap();
    assert!((ber - 2.22e-13).abs() < 1e-15);
    assert_eq!(rows.len(), 3);
}

#[test]
fn encode_decode_round_trips_every_family() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cache = cache.to_str().unwrap();
    let payload: Vec<u8> = (0..2500u32).map(|i| (i * 7919 % 251) as u8).collect();
    let input = dir.path().join("payload.bin");
    std::fs::write(&input, &payload).unwrap();
    let cases: [&[&str]; 4] = [
        &["--family", "sc", "--m", "7", "--t", "2", "--s", "27"],
        &["--family", "ff", "--m", "7", "--t", "2", "--s", "27"],
        &["--family", "pff", "--m", "7", "--t", "2", "--s", "39", "--L", "1"],
        &["--family", "pff", "--m", "7", "--t", "2", "--s", "39", "--L", "3"],
    ];
    for (i, code_args) in cases.iter().enumerate() {
        let stream = dir.path().join(format!("s{i}.bin"));
        let noisy = dir.path().join(format!("n{i}.bin"));
        let back = dir.path().join(format!("b{i}.bin"));
        let with = |verb: &str, extra: &[&str]| {
            let mut v = vec![verb];
            v.extend_from_slice(code_args);
            v.extend_from_slice(&["--cache-dir", cache]);
            v.extend_from_slice(extra);
            call(&v)
        };
        if i > 0 {
            // encoding needs the construction cache
            let (code, _, err) = with("encode", &["--in", input.to_str().unwrap(), "--out", stream.to_str().unwrap()]);
            assert_eq!(code, EXIT_CONSTRUCTION, "{err}");
            assert_eq!(with("construct", &[]).0, EXIT_OK);
        }
        assert_eq!(with("encode", &["--in", input.to_str().unwrap(), "--out", stream.to_str().unwrap()]).0, EXIT_OK);
        let dec = |src: &Path, dst: &Path| {
            call(&["decode", "--cache-dir", cache, "--in", src.to_str().unwrap(), "--out", dst.to_str().unwrap()])
        };
        assert_eq!(dec(&stream, &back).0, EXIT_OK);
        assert_eq!(std::fs::read(&back).unwrap(), payload, "noiseless case {i}");
        let (code, _, _) =
            with("inject", &["--in", stream.to_str().unwrap(), "--out", noisy.to_str().unwrap(), "--p", "0.002", "--seed", "3"]);
        assert_eq!(code, EXIT_OK);
        assert_ne!(std::fs::read(&noisy).unwrap(), std::fs::read(&stream).unwrap());
        assert_eq!(dec(&noisy, &back).0, EXIT_OK);
        assert_eq!(std::fs::read(&back).unwrap(), payload, "noisy case {i}");
    }
}

#[test]
fn format_errors_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let input = dir.path().join("p.bin");
    let stream = dir.path().join("s.bin");
    let out = dir.path().join("o.bin");
    std::fs::write(&input, b"hello staircase").unwrap();
    let sc = ["--family", "sc", "--m", "7", "--t", "2", "--s", "27"];
    let mut args = vec!["encode"];
    args.extend_from_slice(&sc);
    args.extend_from_slice(&["--in", input.to_str().unwrap(), "--out", stream.to_str().unwrap()]);
    assert_eq!(call(&args).0, EXIT_OK);
    let good = std::fs::read(&stream).unwrap();
    let decode = || call(&["decode", "--cache-dir", cache, "--in", stream.to_str().unwrap(), "--out", out.to_str().unwrap()]).0;

    let mut bad = good.clone();
    bad[1] = 2;
    std::fs::write(&stream, &bad).unwrap();
    assert_eq!(decode(), EXIT_FORMAT);
    std::fs::write(&stream, &good[..good.len() - 1]).unwrap();
    assert_eq!(decode(), EXIT_FORMAT);
    bad = good.clone();
    bad[0] = b'Q';
    std::fs::write(&stream, &bad).unwrap();
    assert_eq!(decode(), EXIT_FORMAT);

    // a corrupted cache is a format error
    let ff = ["--family", "ff", "--m", "6", "--t", "1", "--s", "25", "--cache-dir", cache];
    let mut c = vec!["construct"];
    c.extend_from_slice(&ff);
    let (code, out_text, _) = call(&c);
    assert_eq!(code, EXIT_OK);
    let path = serde_json::from_str::<serde_json::Value>(out_text.lines().last().unwrap()).unwrap()["path"]
        .as_str()
        .unwrap()
        .to_string();
    let mut bytes = std::fs::read(&path).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 0x80;
    std::fs::write(&path, bytes).unwrap();
    let mut e = vec!["encode"];
    e.extend_from_slice(&ff);
    e.extend_from_slice(&["--in", input.to_str().unwrap(), "--out", stream.to_str().unwrap()]);
    assert_eq!(call(&e).0, EXIT_FORMAT);
    // missing input file is a usage error
    assert_eq!(call(&["decode", "--in", "/nonexistent/x", "--out", out.to_str().unwrap()]).0, EXIT_USAGE);
}

#[test]
fn inject_reports_stall_and_deletion() {
    let base = ["inject", "--family", "sc", "--m", "7", "--t", "2", "--s", "27", "--format", "csv"];
    let (code, out, _) = call(&base);
    assert_eq!(code, EXIT_OK);
    assert!(data_lines(&out)[1].starts_with("sc,9,stalled,9"));
    let mut dropped = base.to_vec();
    dropped.extend_from_slice(&["--drop", "4"]);
    let (_, out, _) = call(&dropped);
    assert!(data_lines(&out)[1].starts_with("sc,8,corrected,0"));
    let last = dropped.len() - 1;
    dropped[last] = "99";
    assert_eq!(call(&dropped).0, EXIT_USAGE);
}

#[test]
fn simulate_streams_checkpoints_and_summary() {
    let (code, out, _) = call(&[
        "simulate", "--family", "ff", "--m", "6", "--t", "1", "--s", "25", "--lambda", "4", "--p", "0,0.01", "--max-frames", "40",
        "--batch", "20", "--workers", "2", "--seed", "5",
    ]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    let config: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(config["verb"], "simulate");
    assert_eq!(config["config"]["decoder"]["window"], 7);
    let checkpoints: Vec<serde_json::Value> =
        lines.iter().filter(|l| l.starts_with("{\"")).skip(1).map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(checkpoints.len(), 4);
    for key in ["family", "p", "frames", "bits", "bit_errs", "blk_errs", "ber", "bker", "ci95"] {
        assert!(checkpoints[0].get(key).is_some(), "{key}");
    }
    assert_eq!(checkpoints[1]["bit_errs"], 0);
    let csv: Vec<&str> = lines.iter().copied().skip_while(|l| !l.starts_with("family,")).collect();
    assert_eq!(csv.len(), 3);
    assert!(csv[1].starts_with("ff,0e0,40,"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_staircase");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code().unwrap();
    assert_eq!(status(&["params", "--tables"]), 0);
    assert_eq!(status(&["params"]), 2);
    assert_eq!(status(&["ncg", "--rate", "3/4", "--p15", "0.7"]), 2);
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none");
    assert_eq!(
        status(&[
            "encode", "--family", "pff", "--m", "6", "--t", "1", "--s", "25", "--cache-dir", missing.to_str().unwrap(), "--in",
            bin, "--out", "/dev/null",
        ]),
        3
    );
    assert_eq!(
        status(&["construct", "--family", "ff", "--m", "6", "--t", "1", "--s", "25", "--column", "same", "--cache-dir", missing.to_str().unwrap()]),
        3
    );
}
