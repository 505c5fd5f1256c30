#![cfg(unix)]

use std::collections::HashSet;
use std::fs;

use relmine_core::corpus::{CategoryPath, Label, LanguageTag, Origin, PathSeparator, QCRecord};
use relmine_core::taxonomy::{
    gen_neg_synthetic_query, positive_keys, GenerationRequest, NegativeError, ProcessGenerator,
    QueryGenerator,
};

/// Spawns `sh -c script`; the script sees the log path as `$1`.
fn shell(script: &str, log: &std::path::Path) -> ProcessGenerator {
    let args = vec![
        "-c".to_string(),
        script.to_string(),
        "generator".to_string(),
        log.display().to_string(),
    ];
    ProcessGenerator::spawn("sh", &args).unwrap()
}

const NUMBERING: &str = r#"n=0
while IFS= read -r line; do
  printf '%s\n' "$line" >> "$1"
  n=$((n+1))
  printf '{"query":"generated %s"}\n' "$n"
done"#;

fn request(query: &str) -> GenerationRequest {
    GenerationRequest {
        query: query.into(),
        language: LanguageTag::Ko,
        path: "Electronics > Audio".into(),
    }
}

#[test]
fn speaks_one_json_object_per_line() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("requests.ndjson");
    let generator = shell(NUMBERING, &log);
    assert_eq!(
        generator.generate(&request("무선 이어폰"), 0).unwrap(),
        "generated 1"
    );
    assert_eq!(
        generator.generate(&request("tab\there"), 1).unwrap(),
        "generated 2"
    );
    drop(generator);
    let lines: Vec<GenerationRequest> = fs::read_to_string(&log)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines, vec![request("무선 이어폰"), request("tab\there")]);
    let raw = fs::read_to_string(&log).unwrap();
    let first: serde_json::Value = serde_json::from_str(raw.lines().next().unwrap()).unwrap();
    assert_eq!(
        first,
        serde_json::json!({"query": "무선 이어폰", "language": "ko", "path": "Electronics > Audio"})
    );
}

#[test]
fn synthetic_negative_through_process() {
    let dir = tempfile::tempdir().unwrap();
    let generator = shell(NUMBERING, &dir.path().join("log"));
    let path = CategoryPath::parse("Home > Kitchen", PathSeparator::Angle).unwrap();
    let records = vec![
        QCRecord::new("kettle", LanguageTag::En, path.clone(), Label::Positive).unwrap(),
        // Collides with the first generated query.
        QCRecord::new(
            "generated 1",
            LanguageTag::En,
            path.clone(),
            Label::Positive,
        )
        .unwrap(),
    ];
    let positives = positive_keys(&records);
    let neg = gen_neg_synthetic_query(&records[0], &generator, &positives, 5).unwrap();
    assert_eq!(neg.query, "generated 2");
    assert_eq!(neg.path, path);
    assert_eq!(neg.label, Label::Negative);
    assert_eq!(neg.origin, Origin::GeneratedNegative);
}

#[test]
fn failing_generators_are_unavailable() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log");
    let record = QCRecord::new(
        "kettle",
        LanguageTag::En,
        CategoryPath::parse("Home > Kitchen", PathSeparator::Angle).unwrap(),
        Label::Positive,
    )
    .unwrap();

    let exits = shell("exit 0", &log);
    let err = gen_neg_synthetic_query(&record, &exits, &HashSet::new(), 3).unwrap_err();
    assert!(
        matches!(err, NegativeError::GeneratorUnavailable(_)),
        "{err:?}"
    );

    let garbage = shell("while read -r l; do echo nonsense; done", &log);
    assert!(garbage.generate(&request("x"), 0).is_err());

    assert!(ProcessGenerator::spawn("/nonexistent/generator", &[]).is_err());
}
