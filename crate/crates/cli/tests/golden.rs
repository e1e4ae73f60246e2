//! The analyze report's field set is pinned by `golden/analyze_fields.txt`.
//! Regenerate with `UPDATE_GOLDEN=1 cargo test -p homophily-cli --test golden`.

use std::path::PathBuf;

use homophily_cli::report::{analyze, field_paths};
use homophily_cli::AnalyzeOptions;
use homophily_core::{families, random_coloring, Coloring, Profile};

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/analyze_fields.txt")
}

fn fields(g: &homophily_core::Graph, f: &Coloring) -> Vec<String> {
    let report = analyze(g, f, &AnalyzeOptions::default());
    field_paths(&serde_json::to_value(&report).unwrap()).into_iter().collect()
}

#[test]
fn analyze_field_set_is_stable() {
    let p4 = fields(&families::path(4), &Coloring::from_assignment(vec![0, 0, 1, 1]).unwrap());
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(golden_path(), p4.join("\n") + "\n").unwrap();
    }
    let golden: Vec<String> = std::fs::read_to_string(golden_path())
        .unwrap()
        .lines()
        .map(str::to_owned)
        .collect();
    assert_eq!(p4, golden);

    let others = [
        (families::complete(4), Coloring::from_assignment(vec![0, 1, 0, 1]).unwrap()),
        (families::path(3), Coloring::from_assignment(vec![0, 0, 1]).unwrap()),
        (families::matching(3), Coloring::from_assignment(vec![0, 0, 0, 0, 0, 0]).unwrap()),
        (families::gnm(40, 90, 1), random_coloring(&Profile::new(vec![10, 20, 5, 5]).unwrap(), 2)),
    ];
    for (g, f) in &others {
        assert_eq!(fields(g, f), golden);
    }
}
