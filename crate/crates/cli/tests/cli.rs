use std::path::Path;
use std::process::{Command, Output};

fn gswseg(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gswseg"))
        .args(args)
        .env("GSWSEG_OUT_DIR", out_dir)
        .output()
        .expect("binary runs")
}

fn text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn synth_segment_and_score() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let problem = d.join("p.txt");
    let out = gswseg(
        &[
            "synth",
            "--width",
            "8",
            "--height",
            "8",
            "--clusters",
            "3",
            "--seed",
            "2",
            "-o",
            problem.to_str().unwrap(),
        ],
        d,
    );
    assert!(out.status.success(), "{out:?}");

    let out = gswseg(
        &[
            "segment",
            problem.to_str().unwrap(),
            "--iters",
            "60",
            "--seeds",
            "3,4",
            "--no-timing",
        ],
        d,
    );
    assert!(out.status.success(), "{out:?}");
    let stdout = text(&out);
    assert!(
        stdout.contains("seed 3:") && stdout.contains("Rand index"),
        "{stdout}"
    );
    for seed in [3, 4] {
        for name in [
            format!("trace_{seed}.csv"),
            format!("labels_{seed}.txt"),
            format!("map_{seed}.ppm"),
        ] {
            assert!(d.join(&name).exists(), "missing {name}");
        }
    }
    let first = std::fs::read(d.join("trace_3.csv")).unwrap();
    let rerun = tempfile::tempdir().unwrap();
    let out = gswseg(
        &[
            "segment",
            problem.to_str().unwrap(),
            "--iters",
            "60",
            "--seeds",
            "3",
            "--no-timing",
        ],
        rerun.path(),
    );
    assert!(out.status.success());
    assert_eq!(
        std::fs::read(rerun.path().join("trace_3.csv")).unwrap(),
        first
    );
    assert_eq!(
        std::fs::read(rerun.path().join("map_3.ppm")).unwrap(),
        std::fs::read(d.join("map_3.ppm")).unwrap()
    );

    let labels = d.join("labels_3.txt");
    let out = gswseg(
        &[
            "rand-index",
            labels.to_str().unwrap(),
            labels.to_str().unwrap(),
        ],
        d,
    );
    assert_eq!(text(&out).trim(), "1.000000");

    let render = d.join("r.ppm");
    let out = gswseg(
        &[
            "render",
            problem.to_str().unwrap(),
            labels.to_str().unwrap(),
            "-o",
            render.to_str().unwrap(),
        ],
        d,
    );
    assert!(out.status.success());
    assert_eq!(
        std::fs::read(render).unwrap(),
        std::fs::read(d.join("map_3.ppm")).unwrap()
    );
}

#[test]
fn other_commands_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = gswseg(
        &[
            "simulate-prior",
            "--alpha",
            "2",
            "--n",
            "30",
            "--draws",
            "20",
            "--sweeps-per-draw",
            "5",
        ],
        d,
    );
    assert!(out.status.success(), "{out:?}");
    assert!(text(&out).contains("mean k"));
    assert!(d.join("prior_k_0.csv").exists());

    let small = d.join("small.txt");
    std::fs::write(
        &small,
        "gswseg-problem 1\nsites 3 bins 2\nhistograms\n3 1\n2 2\n0 4\nedges 2\n0 1 0.5\n1 2 0.5\n",
    )
    .unwrap();
    let out = gswseg(
        &[
            "oracle-check",
            small.to_str().unwrap(),
            "--sweeps",
            "20000",
            "--lambdas",
            "0,1",
        ],
        d,
    );
    assert!(out.status.success(), "{out:?}");
    assert_eq!(text(&out).matches("total variation").count(), 2);

    let out = gswseg(
        &[
            "lambda-sweep",
            small.to_str().unwrap(),
            "--lambdas",
            "0,10",
            "--iters",
            "20",
        ],
        d,
    );
    assert!(out.status.success(), "{out:?}");
    assert!(d.join("lambda_sweep.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(gswseg(&["segment"], d).status.code(), Some(2));

    let bad = d.join("bad.txt");
    std::fs::write(
        &bad,
        "gswseg-problem 1\nsites 2 bins 2\nhistograms\n1 0\n0 1\nedges 2\n0 1 0.5\n0 1 0.5\n",
    )
    .unwrap();
    assert_eq!(
        gswseg(&["segment", bad.to_str().unwrap()], d).status.code(),
        Some(3)
    );
    assert_eq!(
        gswseg(&["segment", d.join("missing.txt").to_str().unwrap()], d)
            .status
            .code(),
        Some(3)
    );

    let good = d.join("good.txt");
    std::fs::write(
        &good,
        "gswseg-problem 1\nsites 2 bins 2\nhistograms\n1 0\n0 1\nedges 1\n0 1 0.5\n",
    )
    .unwrap();
    let out = gswseg(&["segment", good.to_str().unwrap(), "--alpha=-1"], d);
    assert_eq!(out.status.code(), Some(4));
    let out = gswseg(
        &[
            "segment",
            good.to_str().unwrap(),
            "--prior",
            "tdp",
            "--tmin",
            "2",
            "--init",
            "singletons",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("configuration error"));
}

#[test]
fn ingest_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // 2x1 binary PPM
    let img = d.join("img.ppm");
    let mut bytes = b"P6\n2 1\n255\n".to_vec();
    bytes.extend_from_slice(&[200, 10, 10, 10, 10, 200]);
    std::fs::write(&img, bytes).unwrap();
    let map = d.join("sp.txt");
    std::fs::write(&map, "0 1\n").unwrap();
    let out_path = d.join("p.txt");
    let out = gswseg(
        &[
            "ingest",
            "--image",
            img.to_str().unwrap(),
            "--spmap",
            map.to_str().unwrap(),
            "-o",
            out_path.to_str().unwrap(),
        ],
        d,
    );
    assert!(out.status.success(), "{out:?}");
    let written = std::fs::read_to_string(out_path).unwrap();
    assert!(written.contains("sites 2 bins 120"));
}
