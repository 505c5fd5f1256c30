use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use relmine_core::embed::{Embv1Entry, Embv1File};
use serde_json::Value;

const QC: &str = "query\tlanguage\tcategory_path\tlabel
Wireless Headphones\ten\tElectronics > Audio > Headphones\t1
wireless  headphones\ten\tElectronics > Audio > Headphones\t1
usb cable\ten\tElectronics > Audio > Headphones\t0
usb cable\ten\tElectronics > Audio > Headphones\t1
2024\ten\tElectronics > Audio > Speakers\t1
12345\ten\tElectronics > Audio > Speakers\t1
casque sans fil\tfr\tElectronics > Audio > Speakers\t1
sofa\ten\tHome > Living > Sofas\t1
lamp\ten\tHome > Living > Lamps\t1
kettle\tes\tHome > Kitchen > Kettles\t0
";

const QI: &str = "query\tlanguage\titem_id\titem_title\tlabel
red shoes\ten\ta\tRed running shoes\t1
blue lamp\ten\tb\tBlue desk lamp\t1
missing\ten\tzz\tNo vector\t1
cable\ten\tc\tCable\t0
sofa\ten\td\tSofa\t0
kettle\ten\te\tKettle\t0
";

fn relmine(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relmine"))
        .current_dir(dir)
        .env_remove("RELMINE_THREADS")
        .args(args)
        .output()
        .unwrap()
}

fn code(output: &Output) -> i32 {
    output.status.code().unwrap()
}

fn fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("qc.tsv"), QC).unwrap();
    fs::write(dir.path().join("qi.tsv"), QI).unwrap();
    fs::write(dir.path().join("allow.txt"), "2024\n").unwrap();
    let v = |x: [f32; 3]| x.to_vec();
    Embv1File {
        dimension: 3,
        entries: vec![
            Embv1Entry {
                language: "en".into(),
                item_id: "a".into(),
                vector: v([1.0, 0.0, 0.0]),
            },
            Embv1Entry {
                language: "en".into(),
                item_id: "b".into(),
                vector: v([0.0, 1.0, 0.0]),
            },
            Embv1Entry {
                language: "en".into(),
                item_id: "c".into(),
                vector: v([0.9, 0.1, 0.0]),
            },
            Embv1Entry {
                language: "en".into(),
                item_id: "d".into(),
                vector: v([-1.0, 0.0, 0.1]),
            },
            Embv1Entry {
                language: "en".into(),
                item_id: "e".into(),
                vector: v([0.5, 0.5, 0.7]),
            },
        ],
    }
    .write(dir.path().join("items.embv1"))
    .unwrap();
    dir
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn exit_codes() {
    let dir = fixture();
    let d = dir.path();
    assert_eq!(code(&relmine(d, &[])), 1);
    assert_eq!(code(&relmine(d, &["frobnicate"])), 1);
    assert_eq!(code(&relmine(d, &["--help"])), 0);
    assert_eq!(
        code(&relmine(d, &["clean", "--in", "qc.tsv", "--out", "x.tsv"])),
        1,
        "missing task"
    );
    assert_eq!(
        code(&relmine(
            d,
            &["clean", "--task", "qx", "--in", "qc.tsv", "--out", "x.tsv"]
        )),
        1
    );
    assert_eq!(
        code(&relmine(
            d,
            &[
                "clean",
                "--task",
                "qc",
                "--in",
                "absent.tsv",
                "--out",
                "x.tsv"
            ]
        )),
        1
    );
    assert_eq!(
        code(&relmine(
            d,
            &[
                "split",
                "--task",
                "qc",
                "--in",
                "qc.tsv",
                "--out-dir",
                "s",
                "--ratios",
                "0.5,0.5"
            ]
        )),
        1
    );
    assert_eq!(
        code(&relmine(
            d,
            &[
                "--config",
                "absent.json",
                "stats",
                "--task",
                "qc",
                "--in",
                "qc.tsv"
            ]
        )),
        1
    );
    fs::write(d.join("bad.json"), r#"{"clean": {"dedupe": true}}"#).unwrap();
    assert_eq!(
        code(&relmine(
            d,
            &["--config", "bad.json", "stats", "--task", "qc", "--in", "qc.tsv"]
        )),
        1
    );
    // Runtime failures: the QC file is not a QI corpus, the translator is down.
    assert_eq!(
        code(&relmine(d, &["stats", "--task", "qi", "--in", "qc.tsv"])),
        2
    );
    let out = relmine(
        d,
        &[
            "augment-plan",
            "--task",
            "qi",
            "--in",
            "qi.tsv",
            "--out",
            "plan.json",
            "--targets",
            "de",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let port = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let url = format!("http://127.0.0.1:{port}");
    let out = relmine(
        d,
        &[
            "augment-run",
            "--in",
            "qi.tsv",
            "--plan",
            "plan.json",
            "--out",
            "aug.tsv",
            "--translator",
            &url,
            "--retries",
            "0",
        ],
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn clean_reports_and_writes() {
    let dir = fixture();
    let d = dir.path();
    let out = relmine(
        d,
        &[
            "clean",
            "--task",
            "qc",
            "--in",
            "qc.tsv",
            "--out",
            "clean.tsv",
            "--allowlist",
            "allow.txt",
            "--report",
            "report.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["input"], 10);
    assert_eq!(report["conflicts_removed"], 2);
    assert_eq!(report["duplicates_removed"], 1);
    assert_eq!(report["numeric_removed"], 1);
    assert_eq!(report["allowlisted_kept"], 1);
    assert_eq!(report["kept"], 6);
    assert_eq!(
        serde_json::from_str::<Value>(&read(d, "report.json")).unwrap(),
        report
    );
    let clean = read(d, "clean.tsv");
    assert!(clean.starts_with("query\tlanguage\tcategory_path\tlabel"));
    assert!(clean.contains("\n2024\t") && !clean.contains("12345") && !clean.contains("usb cable"));
    assert_eq!(clean.lines().count(), 7);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("clean:"));
}

#[test]
fn generated_negatives_are_reproducible() {
    let dir = fixture();
    let d = dir.path();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let name = format!("neg{threads}.tsv");
        let out = relmine(
            d,
            &[
                "--threads",
                threads,
                "gen-negatives",
                "--in",
                "qc.tsv",
                "--out",
                &name,
                "--strategy",
                "cross-root",
                "--seed",
                "9",
            ],
        );
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(read(d, &name));
    }
    assert_eq!(outputs[0], outputs[1]);
    for line in outputs[0].lines().skip(1) {
        let fields: Vec<&str> = line.split('\t').collect();
        assert_eq!(fields[3], "0");
        assert_eq!(fields[4], "generated-negative");
    }
    let out = relmine(
        d,
        &[
            "gen-negatives",
            "--in",
            "qc.tsv",
            "--out",
            "syn.tsv",
            "--strategy",
            "synthetic-query",
            "--generator",
            "stub",
        ],
    );
    assert_eq!(code(&out), 0);
    assert!(read(d, "syn.tsv").contains("lamp unrelated-token\ten\tHome > Living > Lamps\t0"));
    let out = relmine(
        d,
        &[
            "gen-negatives",
            "--in",
            "qc.tsv",
            "--out",
            "syn.tsv",
            "--strategy",
            "synthetic-query",
        ],
    );
    assert_eq!(code(&out), 1, "synthetic-query needs a generator");
}

#[test]
fn mining_with_embeddings_and_config() {
    let dir = fixture();
    let d = dir.path();
    let out = relmine(
        d,
        &[
            "mine",
            "--task",
            "qi",
            "--in",
            "qi.tsv",
            "--embeddings",
            "items.embv1",
            "--out",
            "easy.tsv",
            "--mode",
            "easy",
            "--diagnostics",
            "diag.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let easy = read(d, "easy.tsv");
    assert!(easy.contains("red shoes\ten\td\t"), "{easy}");
    let diag: Value = serde_json::from_str(&read(d, "diag.json")).unwrap();
    assert_eq!(
        diag["mining"].as_array().unwrap().len(),
        4,
        "one unknown item, three non-positives"
    );

    // Config asks for hard mining; a flag overrides the threshold.
    fs::write(
        d.join("config.json"),
        r#"{"task": "qi", "mining": {"mode": "hard", "tau": 0.999, "embeddings": "items.embv1"}}"#,
    )
    .unwrap();
    let out = relmine(
        d,
        &[
            "--config",
            "config.json",
            "mine",
            "--in",
            "qi.tsv",
            "--out",
            "hard.tsv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(read(d, "hard.tsv").contains("red shoes\ten\tc\t"));
    let out = relmine(
        d,
        &[
            "--config",
            "config.json",
            "mine",
            "--in",
            "qi.tsv",
            "--out",
            "hard2.tsv",
            "--tau",
            "0.9",
        ],
    );
    assert_eq!(code(&out), 0);
    assert!(read(d, "hard2.tsv").contains("red shoes\ten\te\t"));
}

#[test]
fn split_and_evaluate() {
    let dir = fixture();
    let d = dir.path();
    let out = relmine(
        d,
        &[
            "split",
            "--task",
            "qc",
            "--in",
            "qc.tsv",
            "--out-dir",
            "parts",
            "--ratios",
            "0.6,0.2,0.2",
            "--seed",
            "3",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: Value = serde_json::from_str(&read(d, "parts/manifest.json")).unwrap();
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["assignments"].as_array().unwrap().len(), 10);
    let rows: usize = ["train", "validation", "test"]
        .iter()
        .map(|s| read(d, &format!("parts/{s}.tsv")).lines().count() - 1)
        .sum();
    assert_eq!(rows, 10);

    let labels = ["1", "1", "0", "1", "1", "1", "1", "1", "1", "0"];
    let preds: String = std::iter::once("index\tlabel".to_string())
        .chain(labels.iter().enumerate().map(|(i, l)| format!("{i}\t{l}")))
        .collect::<Vec<_>>()
        .join("\n");
    fs::write(d.join("pred.tsv"), preds + "\n").unwrap();
    let out = relmine(
        d,
        &[
            "evaluate", "--task", "qc", "--gold", "qc.tsv", "--pred", "pred.tsv", "--out", "m.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let m: Value = serde_json::from_str(&read(d, "m.json")).unwrap();
    assert_eq!(m["micro"]["f1"], 1.0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("en"));

    fs::write(d.join("short.tsv"), "index\tlabel\n0\t1\n11\t0\n").unwrap();
    let out = relmine(
        d,
        &[
            "evaluate",
            "--task",
            "qc",
            "--gold",
            "qc.tsv",
            "--pred",
            "short.tsv",
        ],
    );
    assert_eq!(code(&out), 2);
}
