use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn wavecs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavecs"))
        .args(args)
        .output()
        .expect("spawn wavecs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_pgm(
    dir: &Path,
    name: &str,
    w: usize,
    h: usize,
    px: impl Fn(usize, usize) -> u8,
) -> PathBuf {
    let mut bytes = format!("P5\n{w} {h}\n255\n").into_bytes();
    for i in 0..h {
        for j in 0..w {
            bytes.push(px(i, j));
        }
    }
    let path = dir.join(name);
    fs::write(&path, bytes).unwrap();
    path
}

/// Smooth test pattern with a few edges.
fn pattern(i: usize, j: usize) -> u8 {
    let (x, y) = (i as f64 / 8.0, j as f64 / 11.0);
    let v = 128.0
        + 60.0 * x.sin() * y.cos()
        + if (i / 16 + j / 16).is_multiple_of(3) {
            40.0
        } else {
            0.0
        };
    v.clamp(0.0, 255.0) as u8
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compress_reports_payload_size() {
    let dir = TempDir::new().unwrap();
    let img = write_pgm(dir.path(), "a.pgm", 512, 512, pattern);
    let out = dir.path().join("a.wcs");
    let o = wavecs(&["compress", s(&img), s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "i_cs=3136 irl=83.6");
    assert_eq!(fs::metadata(&out).unwrap().len(), 55 + 8 * 3136 + 4);

    let o = wavecs(&[
        "compress",
        s(&img),
        s(&out),
        "--rr-coarse",
        "1",
        "--rr-next",
        "1",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("i_cs=4096 "), "{}", stdout(&o));
}

#[test]
fn compress_rejects_non_dyadic() {
    let dir = TempDir::new().unwrap();
    let img = write_pgm(dir.path(), "b.pgm", 500, 500, |_, _| 7);
    let o = wavecs(&["compress", s(&img), s(&dir.path().join("b.wcs"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("image side must be a power of two ≥ 64"),
        "{}",
        stderr(&o)
    );

    let img = write_pgm(dir.path(), "c.pgm", 128, 64, |_, _| 7);
    let o = wavecs(&["compress", s(&img), s(&dir.path().join("c.wcs"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn io_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.pgm");
    let o = wavecs(&["compress", s(&missing), s(&dir.path().join("x.wcs"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.pgm"));
    let o = wavecs(&[
        "decompress",
        s(&dir.path().join("none.wcs")),
        s(&dir.path().join("x.pgm")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn zero_image_round_trip() {
    let dir = TempDir::new().unwrap();
    let img = write_pgm(dir.path(), "zero.pgm", 64, 64, |_, _| 0);
    let wcs = dir.path().join("zero.wcs");
    let rec = dir.path().join("zero_rec.pgm");
    assert!(wavecs(&["compress", s(&img), s(&wcs)]).status.success());
    let o = wavecs(&["decompress", s(&wcs), s(&rec)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("residual_coarse="));
    assert_eq!(fs::read(&rec).unwrap(), fs::read(&img).unwrap());
    let o = wavecs(&["eval", s(&img), s(&rec)]);
    assert_eq!(stdout(&o).trim(), "psnr=inf epsilon=0");
}

#[test]
fn corrupted_payload_is_rejected() {
    let dir = TempDir::new().unwrap();
    let img = write_pgm(dir.path(), "p.pgm", 64, 64, pattern);
    let wcs = dir.path().join("p.wcs");
    assert!(wavecs(&["compress", s(&img), s(&wcs)]).status.success());
    let mut bytes = fs::read(&wcs).unwrap();
    let n = bytes.len();
    bytes[n - 1] ^= 0xff;
    fs::write(&wcs, bytes).unwrap();
    let o = wavecs(&["decompress", s(&wcs), s(&dir.path().join("p_rec.pgm"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("payload checksum mismatch"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn decoding_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let img = write_pgm(dir.path(), "d.pgm", 128, 128, pattern);
    let wcs = dir.path().join("d.wcs");
    let wcs2 = dir.path().join("d2.wcs");
    assert!(wavecs(&["compress", s(&img), s(&wcs), "--seed", "5"])
        .status
        .success());
    assert!(
        wavecs(&["--sequential", "compress", s(&img), s(&wcs2), "--seed", "5"])
            .status
            .success()
    );
    assert_eq!(fs::read(&wcs).unwrap(), fs::read(&wcs2).unwrap());
    let (r1, r2) = (dir.path().join("r1.pgm"), dir.path().join("r2.pgm"));
    assert!(wavecs(&["decompress", s(&wcs), s(&r1)]).status.success());
    assert!(wavecs(&["--sequential", "decompress", s(&wcs), s(&r2)])
        .status
        .success());
    assert_eq!(fs::read(&r1).unwrap(), fs::read(&r2).unwrap());
}

#[test]
fn eval_examples() {
    let dir = TempDir::new().unwrap();
    let a = write_pgm(dir.path(), "a.pgm", 8, 8, |_, _| 255);
    let b = write_pgm(dir.path(), "b.pgm", 8, 8, |_, _| 254);
    let o = wavecs(&["eval", s(&a), s(&b)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "psnr=48.131 epsilon=0.0039");
    assert_eq!(
        stdout(&wavecs(&["eval", s(&a), s(&a)])).trim(),
        "psnr=inf epsilon=0"
    );

    let c = write_pgm(dir.path(), "c.pgm", 8, 4, |_, _| 255);
    let o = wavecs(&["eval", s(&a), s(&c)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("size mismatch"));
}

#[test]
fn detect_counts() {
    let dir = TempDir::new().unwrap();
    let flat = write_pgm(dir.path(), "flat.pgm", 32, 32, |_, _| 90);
    let mask = dir.path().join("mask.pgm");
    let o = wavecs(&["detect", s(&flat), s(&mask)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "flagged=0");
    assert!(fs::read(&mask).unwrap().ends_with(&[0; 1024]));

    let one = write_pgm(dir.path(), "one.pgm", 32, 32, |i, j| {
        if (i, j) == (5, 9) {
            255
        } else {
            10
        }
    });
    let o = wavecs(&["detect", s(&one), s(&mask), "--k", "3"]);
    assert_eq!(stdout(&o).trim(), "flagged=1");
    let bytes = fs::read(&mask).unwrap();
    let raster = &bytes[bytes.len() - 1024..];
    assert_eq!(raster[5 * 32 + 9], 255);
    assert_eq!(raster.iter().filter(|&&b| b == 255).count(), 1);

    assert_eq!(
        wavecs(&["detect", s(&one), s(&mask), "--k", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn bench_is_deterministic_and_aggregates() {
    let dir = TempDir::new().unwrap();
    let img = write_pgm(dir.path(), "pat.pgm", 64, 64, pattern);
    let zero = write_pgm(dir.path(), "zero.pgm", 64, 64, |_, _| 0);
    let bad = write_pgm(dir.path(), "odd.pgm", 48, 48, |_, _| 1);
    let (c1, c2) = (dir.path().join("1.csv"), dir.path().join("2.csv"));
    let args = |csv: &Path| {
        vec![
            "bench".to_string(),
            s(&img).into(),
            s(&zero).into(),
            s(&bad).into(),
            "--wavelet".into(),
            "sym8,db4".into(),
            "--seeds".into(),
            "0..2".into(),
            "--csv".into(),
            s(csv).into(),
        ]
    };
    let run = |csv: &Path| {
        let a = args(csv);
        wavecs(&a.iter().map(String::as_str).collect::<Vec<_>>())
    };
    let o = run(&c1);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(run(&c2).status.success());
    let text = fs::read_to_string(&c1).unwrap();
    assert_eq!(text, fs::read_to_string(&c2).unwrap());

    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "image,wavelet,seed,i_cs,irl,psnr_db,epsilon,status"
    );
    // 3 images x 2 wavelets x (3 seeds + median)
    assert_eq!(lines.len(), 1 + 3 * 2 * 4);
    assert!(lines[1].starts_with("pat,Symmlet-8,0,3136,1.3,"));
    assert!(lines[4].starts_with("pat,Symmlet-8,median,3136,1.3,"));
    assert!(lines[4].ends_with(",median 3/3"));
    assert!(lines[5].starts_with("pat,Daubechies-4,0,"));
    assert_eq!(lines[9], "zero,Symmlet-8,0,3136,1.3,inf,0,ok");
    assert_eq!(lines[12], "zero,Symmlet-8,median,3136,1.3,inf,0,median 3/3");
    assert!(
        lines[17].starts_with("odd,Symmlet-8,0,,,,,\"error: "),
        "{}",
        lines[17]
    );
    assert!(lines[20].ends_with(",median 0/3"));
}

#[test]
fn bench_matches_manual_chain() {
    let dir = TempDir::new().unwrap();
    let img = write_pgm(dir.path(), "chain.pgm", 128, 128, pattern);
    let wcs = dir.path().join("chain.wcs");
    let rec = dir.path().join("chain_rec.pgm");
    let csv = dir.path().join("chain.csv");

    let c = wavecs(&[
        "compress",
        s(&img),
        s(&wcs),
        "--wavelet",
        "coif6",
        "--seed",
        "3",
    ]);
    assert!(c.status.success());
    assert!(wavecs(&["decompress", s(&wcs), s(&rec)]).status.success());
    let e = stdout(&wavecs(&["eval", s(&img), s(&rec)]));
    let b = wavecs(&[
        "bench",
        s(&img),
        "--wavelet",
        "coif6",
        "--seeds",
        "3",
        "--quantize",
        "--csv",
        s(&csv),
    ]);
    assert!(b.status.success(), "{}", stderr(&b));

    let csv_text = fs::read_to_string(&csv).unwrap();
    let row: Vec<&str> = csv_text.lines().nth(1).unwrap().split(',').collect();
    let field = |text: &str, key: &str| -> f64 {
        let tok = text
            .split_whitespace()
            .find_map(|t| t.strip_prefix(&format!("{key}=")))
            .unwrap();
        tok.parse().unwrap()
    };
    assert_eq!(row[3], field(&stdout(&c), "i_cs").to_string());
    assert_eq!(row[4].parse::<f64>().unwrap(), field(&stdout(&c), "irl"));
    let (psnr, eps) = (field(&e, "psnr"), field(&e, "epsilon"));
    assert_eq!(row[5], format!("{psnr:.2}"));
    assert_eq!(row[6], format!("{eps:.4}"));
    assert_eq!(row[7], "ok");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(wavecs(&["compress"]).status.code(), Some(2));
    assert_eq!(wavecs(&["frobnicate"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let img = write_pgm(dir.path(), "u.pgm", 64, 64, pattern);
    let o = wavecs(&[
        "compress",
        s(&img),
        s(&dir.path().join("u.wcs")),
        "--wavelet",
        "haar9",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = wavecs(&[
        "compress",
        s(&img),
        s(&dir.path().join("u.wcs")),
        "--rr-next",
        "1.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
}
