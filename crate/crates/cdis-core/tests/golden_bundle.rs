//! Freezes the full discovery output for a system where pooling settings
//! naively would fabricate an orientation. The serialized bundle is compared
//! byte for byte; set `UPDATE_GOLDEN=1` to regenerate after a deliberate
//! change and review the diff.

use std::path::Path;

use cdis_core::{cdis, CdisOptions, DagWithSelection, InterventionTarget, Mark, OracleCi, TargetCollection};

#[test]
fn discovery_bundle_matches_golden_file() {
    // 0 -> 1 -> S <- 2, intervening on 0 in the second setting. Conditioning
    // on S couples 2 with both 0 and 1, and only the invariance of 2 keeps
    // the pooled arrows 2 -> 0 and 2 -> 1 out of the final graph.
    let g = DagWithSelection::new(3, 1, &[(0, 1), (1, 3), (2, 3)]).unwrap();
    let targets =
        TargetCollection::with_interventions([InterventionTarget::new([0])]);
    let oracle = OracleCi::new(g, targets).unwrap();
    let result = cdis(&oracle, &CdisOptions::default()).unwrap();

    assert_eq!(result.pag0.graph.mark_at(0, 1), Some(Mark::Circle));
    assert_eq!(result.pag0.graph.mark_at(1, 0), Some(Mark::Circle));
    assert!(result.per_setting[0].graph.has_directed_edge(2, 0));
    assert!(result.per_setting[0].graph.has_directed_edge(2, 1));
    assert_eq!(result.estimated_pseudo_targets, vec![vec![0, 1]]);

    let got = serde_json::to_string_pretty(&result.bundle()).unwrap();
    let path =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/selected_sink_bundle.json");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, format!("{got}\n")).unwrap();
    }
    let want = std::fs::read_to_string(&path)
        .expect("golden file missing; run with UPDATE_GOLDEN=1 to create it");
    assert_eq!(format!("{got}\n"), want);
}
