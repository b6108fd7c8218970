use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_islandize"));
    c.env_remove("ISLANDIZE_LOG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn cora() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/cora.edges")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn gen_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.edges");
    let b = dir.path().join("b.edges");
    for p in [&a, &b] {
        ok(&run(&[
            "gen",
            "--sbm",
            "4x6",
            "--hubs",
            "2",
            "--seed",
            "7",
            "--out",
            s(p),
        ]));
    }
    let text = std::fs::read(&a).unwrap();
    assert!(!text.is_empty());
    assert_eq!(text, std::fs::read(&b).unwrap());
}

#[test]
fn islandize_writes_the_result_schema() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.edges");
    let planted = dir.path().join("planted.json");
    ok(&run(&[
        "gen",
        "--sbm",
        "4x6",
        "--hubs",
        "2",
        "--seed",
        "7",
        "--out",
        s(&g),
        "--planted",
        s(&planted),
    ]));
    let r = dir.path().join("r.json");
    let spy = dir.path().join("spy.pgm");
    let out = run(&[
        "islandize",
        "--input",
        s(&g),
        "--th-init",
        "8",
        "--c-max",
        "16",
        "--out",
        s(&r),
        "--spy",
        s(&spy),
    ]);
    ok(&out);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&r).unwrap()).unwrap();
    for key in [
        "hubs",
        "islands",
        "inter_hub_edges",
        "rounds",
        "adjacency_reads",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let p: serde_json::Value = serde_json::from_slice(&std::fs::read(&planted).unwrap()).unwrap();
    let mut hubs: Vec<u64> = v["hubs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|h| h.as_u64().unwrap())
        .collect();
    hubs.sort_unstable();
    let mut want: Vec<u64> = p["hubs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|h| h.as_u64().unwrap())
        .collect();
    want.sort_unstable();
    assert_eq!(hubs, want);
    assert!(std::fs::read(&spy).unwrap().starts_with(b"P5"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut seen = Vec::new();
    for i in 0..2 {
        let r = dir.path().join(format!("r{i}.json"));
        let rep = dir.path().join(format!("rep{i}.json"));
        ok(&run(&[
            "islandize",
            "--input",
            s(&cora()),
            "--seed",
            "3",
            "--out",
            s(&r),
        ]));
        ok(&run(&[
            "infer",
            "--input",
            s(&cora()),
            "--layers",
            "32,8,4",
            "--report",
            s(&rep),
        ]));
        seen.push((std::fs::read(&r).unwrap(), std::fs::read(&rep).unwrap()));
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn parallel_threads_give_a_valid_result() {
    let dir = tempfile::tempdir().unwrap();
    let r = dir.path().join("r.json");
    ok(&run(&[
        "islandize",
        "--input",
        s(&cora()),
        "--mode",
        "par",
        "--seed",
        "3",
        "--threads",
        "4",
        "--out",
        s(&r),
    ]));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&r).unwrap()).unwrap();
    let hubs = v["hubs"].as_array().unwrap().len();
    let island_nodes: usize = v["islands"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["nodes"].as_array().unwrap().len())
        .sum();
    assert_eq!(hubs + island_nodes, 2708);
}

#[test]
fn island_count_reads_less_than_pull_row() {
    let dir = tempfile::tempdir().unwrap();
    let mut reads = Vec::new();
    for strategy in ["island", "pull-row"] {
        let out = dir.path().join(format!("{strategy}.json"));
        ok(&run(&[
            "count",
            "--input",
            s(&cora()),
            "--strategy",
            strategy,
            "--buffer-words",
            "2708",
            "--out",
            s(&out),
        ]));
        let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
        assert_eq!(v["memory"]["strategy"], strategy);
        reads.push(v["memory"]["reads_words"].as_u64().unwrap());
    }
    assert!(reads[0] < reads[1], "{reads:?}");
}

#[test]
fn infer_reports_cora_gcn() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("out.json");
    let out = run(&[
        "infer",
        "--input",
        s(&cora()),
        "--layers",
        "1433,16,7",
        "--normalize",
        "sym",
        "--k",
        "2",
        "--report",
        s(&rep),
    ]);
    ok(&out);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&rep).unwrap()).unwrap();
    let macs = v["cost"]["total"]["combination_macs"].as_u64().unwrap();
    assert_eq!(macs, 2708 * (1433 * 16 + 16 * 7));
    assert_eq!(v["cost"]["layers"].as_array().unwrap().len(), 2);
    assert!(String::from_utf8_lossy(&out.stdout).contains("aggregation share"));
}

#[test]
fn weights_and_features_load_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.edges");
    std::fs::write(&g, "0 1\n1 2\n").unwrap();
    let x = dir.path().join("x.csv");
    std::fs::write(&x, "1,0\n0,1\n1,1\n").unwrap();
    let w = dir.path().join("w.csv");
    std::fs::write(&w, "1,0\n0,1\n").unwrap();
    let y = dir.path().join("y.csv");
    ok(&run(&[
        "infer",
        "--input",
        s(&g),
        "--layers",
        "2,2",
        "--normalize",
        "none",
        "--features",
        s(&x),
        "--weights",
        s(&w),
        "--output",
        s(&y),
        "--buffer-words",
        "0",
    ]));
    // plain neighbor sums
    assert_eq!(std::fs::read_to_string(&y).unwrap(), "0,1\n2,1\n0,1\n");
}

#[test]
fn spy_with_and_without_ordering() {
    let dir = tempfile::tempdir().unwrap();
    let r = dir.path().join("r.json");
    ok(&run(&["islandize", "--input", s(&cora()), "--out", s(&r)]));
    let csv = dir.path().join("spy.csv");
    ok(&run(&[
        "spy",
        "--input",
        s(&cora()),
        "--result",
        s(&r),
        "--csv",
        s(&csv),
    ]));
    let lines = std::fs::read_to_string(&csv).unwrap().lines().count();
    assert!(lines >= 10556);
    let pgm = dir.path().join("id.pgm");
    ok(&run(&[
        "spy",
        "--input",
        s(&cora()),
        "--out",
        s(&pgm),
        "--side",
        "64",
    ]));
}

#[test]
fn config_file_applies_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    std::fs::write(&good, "[locator]\nc_max = 8\n[consumer]\nk = 4\n").unwrap();
    let r = dir.path().join("r.json");
    ok(&run(&[
        "--config",
        s(&good),
        "islandize",
        "--input",
        s(&cora()),
        "--out",
        s(&r),
    ]));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&r).unwrap()).unwrap();
    assert!(v["islands"]
        .as_array()
        .unwrap()
        .iter()
        .all(|i| i["nodes"].as_array().unwrap().len() <= 8));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[locator]\nc_maxx = 8\n").unwrap();
    let out = run(&["--config", s(&bad), "islandize", "--input", s(&cora())]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // bad flag value
    assert_eq!(
        run(&["count", "--input", s(&cora()), "--strategy", "sideways"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["islandize", "--input", s(&cora()), "--c-max", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&[
            "infer",
            "--input",
            s(&cora()),
            "--layers",
            "4,2",
            "--k",
            "1"
        ])
        .status
        .code(),
        Some(1)
    );
    // missing and malformed input
    let missing = dir.path().join("missing.edges");
    assert_eq!(
        run(&["islandize", "--input", s(&missing)]).status.code(),
        Some(2)
    );
    let junk = dir.path().join("junk.edges");
    std::fs::write(&junk, "0 1\nzero one\n").unwrap();
    let out = run(&["islandize", "--input", s(&junk)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));
    // features that do not match the graph
    let x = dir.path().join("x.csv");
    std::fs::write(&x, "1,2\n").unwrap();
    let out = run(&[
        "infer",
        "--input",
        s(&cora()),
        "--layers",
        "2,2",
        "--features",
        s(&x),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(run(&["--help"]).status.success());
}
