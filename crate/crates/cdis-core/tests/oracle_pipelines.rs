//! Pipeline-level checks against enumerated ground truth.
//!
//! Models that answer every oracle query identically are indistinguishable,
//! so the pipeline output is correct exactly when every committed mark is
//! shared by the whole bucket of such models, and complete when every mark
//! the whole bucket shares is committed.

use std::collections::BTreeMap;

use cdis_core::{
    apply_knowledge, build_twin, enumerate_models, fas, fci_plus, mag_observational, mag_of_twin,
    CiProvider, DagWithSelection, FasOptions, InterventionTarget, Knowledge, Mark, MixedGraph,
    OracleCi, TargetCollection, VertexKind,
};

fn bits(mask: u32, n: u32) -> Vec<u32> {
    (0..n).filter(|b| mask & (1 << b) != 0).collect()
}

/// Answers to every observational independence query, in a fixed order.
fn observational_fingerprint(g: &DagWithSelection) -> Vec<bool> {
    let d = g.d() as u32;
    let tw = build_twin(g, &InterventionTarget::empty()).unwrap();
    let mut out = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            for mask in 0u32..1 << d {
                if mask & (1 << i | 1 << j) != 0 {
                    continue;
                }
                out.push(tw.implies_ci(&[i], &[j], &bits(mask, d)).unwrap());
            }
        }
    }
    out
}

/// Answers to every pooled independence query over the observed vertices
/// plus the setting indicator, in a fixed order.
fn pooled_fingerprint(g: &DagWithSelection, target: &InterventionTarget) -> Vec<bool> {
    let n = g.d() as u32 + 1;
    let tw = build_twin(g, target).unwrap();
    let mut out = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            for mask in 0u32..1 << n {
                if mask & (1 << u | 1 << v) != 0 {
                    continue;
                }
                out.push(tw.pooled_separated(u, v, &bits(mask, n)).unwrap());
            }
        }
    }
    out
}

struct Bucket {
    representative: DagWithSelection,
    target: InterventionTarget,
    mags: Vec<MixedGraph>,
}

/// Marks carried identically by every graph in the slice, keyed by
/// (endpoint, far endpoint).
fn shared_marks(mags: &[MixedGraph]) -> BTreeMap<(u32, u32), Mark> {
    let mut out = BTreeMap::new();
    for (u, v) in mags[0].adjacencies() {
        for (at, other) in [(u, v), (v, u)] {
            let mark = mags[0].mark_at(at, other).unwrap();
            if mags.iter().all(|m| m.mark_at(at, other) == Some(mark)) {
                out.insert((at, other), mark);
            }
        }
    }
    out
}

fn assert_same_adjacencies(bucket: &Bucket) {
    let adj = bucket.mags[0].adjacencies();
    for m in &bucket.mags {
        assert_eq!(
            m.adjacencies(),
            adj,
            "indistinguishable models disagree on projected adjacency; representative {:?}",
            bucket.representative
        );
    }
}

#[test]
fn observational_pipeline_recovers_exactly_the_shared_marks() {
    for d in 2..=4usize {
        let mut buckets: BTreeMap<Vec<bool>, Bucket> = BTreeMap::new();
        for g in enumerate_models(d, 2).unwrap() {
            let fp = observational_fingerprint(&g);
            let m0 = mag_observational(&g).unwrap();
            buckets
                .entry(fp)
                .or_insert_with(|| Bucket {
                    representative: g.clone(),
                    target: InterventionTarget::empty(),
                    mags: Vec::new(),
                })
                .mags
                .push(m0);
        }
        for bucket in buckets.values() {
            assert_same_adjacencies(bucket);
            let adj = bucket.mags[0].adjacencies();
            let oracle = OracleCi::new(
                bucket.representative.clone(),
                TargetCollection::observational(),
            )
            .unwrap();
            let kinds = vec![VertexKind::Observed; d];
            let mut query = |i: u32, j: u32, c: &[u32]| oracle.ci_within(0, i, j, c);
            let mut pag = fas(&kinds, &mut query, &FasOptions::default()).unwrap();
            fci_plus(&mut pag).unwrap();
            assert_eq!(
                pag.graph.adjacencies(),
                adj,
                "skeleton differs from the projected adjacency; representative {:?}",
                bucket.representative
            );
            let shared = shared_marks(&bucket.mags);
            for (u, v) in &adj {
                for (at, other) in [(*u, *v), (*v, *u)] {
                    let got = pag.graph.mark_at(at, other).unwrap();
                    let want = shared.get(&(at, other)).copied();
                    match (got, want) {
                        (Mark::Circle, None) => {}
                        (Mark::Circle, Some(w)) => panic!(
                            "missed a mark shared by every indistinguishable model: \
                             d={d} endpoint {at} on ({at},{other}) should be {w:?}; \
                             representative {:?}",
                            bucket.representative
                        ),
                        (g, Some(w)) => assert_eq!(
                            g, w,
                            "committed the wrong mark at {at} on ({at},{other}); \
                             representative {:?}",
                            bucket.representative
                        ),
                        (g, None) => panic!(
                            "committed {g:?} at {at} on ({at},{other}) although the \
                             bucket disagrees there; representative {:?}",
                            bucket.representative
                        ),
                    }
                }
            }
        }
    }
}

#[test]
fn pooled_pipeline_commits_only_shared_marks_and_finds_them_all() {
    for d in 2..=3usize {
        let mut buckets: BTreeMap<Vec<bool>, Bucket> = BTreeMap::new();
        for g in enumerate_models(d, 2).unwrap() {
            for mask in 0u32..1 << d {
                let target = InterventionTarget::new(bits(mask, d as u32));
                let fp = pooled_fingerprint(&g, &target);
                let m = mag_of_twin(&g, &target).unwrap();
                buckets
                    .entry(fp)
                    .or_insert_with(|| Bucket {
                        representative: g.clone(),
                        target: target.clone(),
                        mags: Vec::new(),
                    })
                    .mags
                    .push(m);
            }
        }
        for bucket in buckets.values() {
            assert_same_adjacencies(bucket);
            let adj = bucket.mags[0].adjacencies();
            let tw = build_twin(&bucket.representative, &bucket.target).unwrap();
            let zeta = d as u32;
            let mut kinds = vec![VertexKind::Observed; d];
            kinds.push(VertexKind::Zeta);
            let mut query = |u: u32, v: u32, c: &[u32]| tw.pooled_separated(u, v, c);
            let mut pag = fas(&kinds, &mut query, &FasOptions::default()).unwrap();
            apply_knowledge(&mut pag, &Knowledge::exogenous([zeta])).unwrap();
            fci_plus(&mut pag).unwrap();
            assert_eq!(
                pag.graph.adjacencies(),
                adj,
                "pooled skeleton differs from the twin projection; representative {:?} target {:?}",
                bucket.representative,
                bucket.target
            );
            let shared = shared_marks(&bucket.mags);
            for (u, v) in &adj {
                for (at, other) in [(*u, *v), (*v, *u)] {
                    let got = pag.graph.mark_at(at, other).unwrap();
                    let want = shared.get(&(at, other)).copied();
                    match (got, want) {
                        (Mark::Circle, None) => {}
                        (Mark::Circle, Some(w)) => panic!(
                            "missed a shared pooled mark: d={d} endpoint {at} on \
                             ({at},{other}) should be {w:?}; representative {:?} target {:?}",
                            bucket.representative, bucket.target
                        ),
                        (g, Some(w)) => assert_eq!(
                            g, w,
                            "committed the wrong pooled mark at {at} on ({at},{other}); \
                             representative {:?} target {:?}",
                            bucket.representative, bucket.target
                        ),
                        (Mark::Arrow, None) => panic!(
                            "committed an arrow the bucket does not share at {at} on \
                             ({at},{other}); representative {:?} target {:?}",
                            bucket.representative, bucket.target
                        ),
                        (Mark::Tail, None) => {
                            // Directing a circle-arrow edge discards the
                            // two-arrow alternative on purpose, so a committed
                            // tail may dissent, but only opposite a shared
                            // arrow.
                            assert_eq!(
                                shared.get(&(other, at)).copied(),
                                Some(Mark::Arrow),
                                "unshared tail at {at} on ({at},{other}) does not sit \
                                 opposite a shared arrow; representative {:?} target {:?}",
                                bucket.representative,
                                bucket.target
                            );
                        }
                    }
                }
            }
        }
    }
}
