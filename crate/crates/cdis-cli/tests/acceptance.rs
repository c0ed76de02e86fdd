//! Acceptance suite: one test per release criterion, each printing a single
//! pass/fail line (visible with `--nocapture`). Tolerances and sampling
//! strides are pinned here, not configurable.

use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cdis_core::{
    build_twin, cdis, cdis_from_data, ci_signature, enumerate_models,
    enumerate_target_collections, equivalence_key, evaluate, mag_general, mag_observational,
    mag_of_twin, markov_equivalent, pest_scm, sample_interventional, sample_observational,
    simulate_experiment, CdisOptions, CiProvider, DagWithSelection, Dataset, ExperimentConfig,
    FisherZCi, InterventionMechanism, InterventionTarget, Mark, MixedGraph, OracleCi,
    TargetCollection, VertexKind, VertexPartition,
};

fn report(n: usize, ok: bool, detail: &str) -> bool {
    println!("criterion {n}: {} - {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn clinical() -> DagWithSelection {
    DagWithSelection::new(2, 1, &[(0, 2), (1, 2)]).unwrap()
}

fn chain3() -> DagWithSelection {
    DagWithSelection::new(3, 1, &[(0, 1), (1, 2), (2, 3)]).unwrap()
}

fn absorbed() -> DagWithSelection {
    DagWithSelection::new(3, 1, &[(0, 1), (1, 3), (2, 3)]).unwrap()
}

fn target(vs: &[u32]) -> InterventionTarget {
    InterventionTarget::new(vs.iter().copied())
}

fn collection(ts: &[&[u32]]) -> TargetCollection {
    TargetCollection::with_interventions(ts.iter().map(|t| target(t)))
}

fn collections_up_to(d: usize, k_max: usize) -> Vec<TargetCollection> {
    (0..=k_max)
        .flat_map(|k| enumerate_target_collections(d, k).unwrap())
        .collect()
}

fn marked(d: usize, zeta: bool, edges: &[(u32, Mark, Mark, u32)]) -> MixedGraph {
    let mut kinds = vec![VertexKind::Observed; d];
    if zeta {
        kinds.push(VertexKind::Zeta);
    }
    let mut m = MixedGraph::new(kinds);
    for &(i, mi, mj, j) in edges {
        m.add_edge(i, j, mi, mj).unwrap();
    }
    m
}

/// Generic latent projection of the twin graph, relabeled into the pooled
/// layout (observed 0..d, indicator last); the indicator is dropped for the
/// no-intervention setting, where it is isolated.
fn projected(g: &DagWithSelection, t: &InterventionTarget) -> MixedGraph {
    let tw = build_twin(g, t).unwrap();
    let m = mag_general(tw.graph(), &VertexPartition::of_twin(&tw)).unwrap();
    let d = g.d();
    let mut perm = vec![0u32; d + 1];
    perm[0] = d as u32;
    for (i, p) in perm.iter_mut().enumerate().skip(1) {
        *p = (i - 1) as u32;
    }
    let pooled = m.relabel(&perm).unwrap();
    if !t.is_empty() {
        return pooled;
    }
    assert_eq!(pooled.degree(d as u32), 0, "indicator should be isolated");
    let mut out = MixedGraph::new(vec![VertexKind::Observed; d]);
    for e in pooled.edges() {
        out.add_edge(e.i, e.j, e.mark_i, e.mark_j).unwrap();
    }
    out
}

fn closed_form(g: &DagWithSelection, t: &InterventionTarget) -> MixedGraph {
    if t.is_empty() {
        mag_observational(g).unwrap()
    } else {
        mag_of_twin(g, t).unwrap()
    }
}

#[test]
fn criterion_1_worked_examples_project_to_known_ancestral_graphs() {
    use Mark::{Arrow, Tail};
    let start = Instant::now();
    let cases: [(&str, MixedGraph, MixedGraph); 5] = [
        (
            "two-cause selection, no intervention",
            closed_form(&clinical(), &target(&[])),
            marked(2, false, &[(0, Tail, Tail, 1)]),
        ),
        (
            "two-cause selection, first vertex targeted",
            closed_form(&clinical(), &target(&[0])),
            marked(2, true, &[(0, Arrow, Tail, 1), (0, Arrow, Tail, 2)]),
        ),
        (
            "selected chain, no intervention",
            closed_form(&chain3(), &target(&[])),
            marked(3, false, &[(0, Tail, Tail, 1), (1, Tail, Tail, 2)]),
        ),
        (
            "selected chain, root targeted",
            closed_form(&chain3(), &target(&[0])),
            marked(
                3,
                true,
                &[
                    (0, Tail, Arrow, 1),
                    (0, Tail, Arrow, 2),
                    (1, Tail, Arrow, 2),
                    (3, Tail, Arrow, 0),
                    (3, Tail, Arrow, 1),
                    (3, Tail, Arrow, 2),
                ],
            ),
        ),
        (
            "selected chain, sink targeted",
            closed_form(&chain3(), &target(&[2])),
            marked(3, true, &[(0, Tail, Tail, 1), (1, Tail, Arrow, 2), (3, Tail, Arrow, 2)]),
        ),
    ];
    let mut bad = Vec::new();
    for (name, got, want) in &cases {
        if got != want {
            bad.push(*name);
        }
    }
    let elapsed = start.elapsed();
    let ok = bad.is_empty() && elapsed < Duration::from_secs(1);
    assert!(report(
        1,
        ok,
        &format!("5 reference graphs reproduced mark-for-mark in {elapsed:?} (mismatches: {bad:?})")
    ));
}

#[test]
fn criterion_2_closed_form_matches_generic_projection() {
    let start = Instant::now();
    let mut cases = 0usize;
    let mut disagreements = 0usize;
    let mut check = |g: &DagWithSelection, t: &InterventionTarget| {
        cases += 1;
        if closed_form(g, t) != projected(g, t) {
            disagreements += 1;
            eprintln!("disagreement: d={} edges={:?} t={} target={:?}", g.d(), g.edges(), g.t(), t);
        }
    };
    // Exhaustive at two and three vertices, strided above (the full grid at
    // five vertices has ~4.7e8 combinations).
    for d in 2..=3usize {
        for g in enumerate_models(d, 2).unwrap() {
            for mask in 0u32..(1 << d) {
                check(&g, &target(&(0..d as u32).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>()));
            }
        }
    }
    for (stride, d) in [(110usize, 4usize), (40_000, 5)] {
        for (idx, g) in enumerate_models(d, 2).unwrap().enumerate() {
            if idx % stride != 0 {
                continue;
            }
            for mask in 1u32..(1 << d) {
                check(&g, &target(&(0..d as u32).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>()));
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = disagreements == 0 && cases >= 10_000 && elapsed < Duration::from_secs(600);
    assert!(report(
        2,
        ok,
        &format!("{cases} model/target cases, {disagreements} disagreements, {elapsed:?}")
    ));
}

#[test]
fn criterion_3_equivalence_criterion_matches_ci_signatures() {
    let start = Instant::now();
    // Pools of (model, targets, signature), strided per dimension.
    let mut pool: Vec<(DagWithSelection, TargetCollection, cdis_core::CiSignature)> = Vec::new();
    for (d, model_stride, coll_stride) in [(2usize, 1usize, 1usize), (3, 9, 1), (4, 270, 12)] {
        let collections = collections_up_to(d, 2);
        for (idx, g) in enumerate_models(d, 2).unwrap().enumerate() {
            if idx % model_stride != 0 {
                continue;
            }
            for (cidx, tc) in collections.iter().enumerate() {
                if cidx % coll_stride != 0 {
                    continue;
                }
                let sig = ci_signature(&g, tc).unwrap();
                pool.push((g.clone(), tc.clone(), sig));
            }
        }
    }
    // Pairs are only comparable within the same dimension and number of
    // settings.
    let mut strata: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, (g, tc, _)) in pool.iter().enumerate() {
        strata.entry((g.d(), tc.len())).or_default().push(i);
    }
    let mut mismatches = 0usize;
    let mut pairs = 0usize;
    let mut equivalent_pairs = 0usize;
    let mut check_pair = |a: &(DagWithSelection, TargetCollection, cdis_core::CiSignature),
                          b: &(DagWithSelection, TargetCollection, cdis_core::CiSignature)| {
        pairs += 1;
        let verdict = markov_equivalent(&a.0, &a.1, &b.0, &b.1).unwrap();
        if verdict {
            equivalent_pairs += 1;
        }
        if verdict != (a.2 == b.2) {
            mismatches += 1;
            eprintln!(
                "verdict mismatch: {:?} {:?} vs {:?} {:?} (criterion says {verdict})",
                a.0.edges(),
                a.1,
                b.0.edges(),
                b.1
            );
        }
    };
    // All two-vertex pairs, then sampled pairs at three and four vertices.
    for idxs in strata.values() {
        if pool[idxs[0]].0.d() > 2 {
            continue;
        }
        for (p, &i) in idxs.iter().enumerate() {
            for &j in &idxs[p + 1..] {
                check_pair(&pool[i], &pool[j]);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_101);
    let big: Vec<&Vec<usize>> =
        strata.iter().filter(|((d, _), _)| *d > 2).map(|(_, v)| v).collect();
    let weights: Vec<usize> = big.iter().map(|v| v.len()).collect();
    let total: usize = weights.iter().sum();
    for _ in 0..10_000 {
        let mut pick = rng.gen_range(0..total);
        let mut chosen = big[0];
        for (w, v) in weights.iter().zip(&big) {
            if pick < *w {
                chosen = v;
                break;
            }
            pick -= w;
        }
        let i = chosen[rng.gen_range(0..chosen.len())];
        let j = chosen[rng.gen_range(0..chosen.len())];
        check_pair(&pool[i], &pool[j]);
    }
    // Worked-example verdicts: one intervention cannot tell a cause from a
    // selection effect, two can; a downstream extra parent absorbs an edge
    // only when the unknown target may differ.
    let named: [(DagWithSelection, TargetCollection, DagWithSelection, TargetCollection, bool);
        6] = [
        (clinical(), collection(&[&[0]]), cause(), collection(&[&[0]]), true),
        (clinical(), collection(&[&[0], &[1]]), cause(), collection(&[&[0], &[1]]), false),
        (chain3(), collection(&[&[0]]), absorbed(), collection(&[&[0]]), false),
        (chain3(), collection(&[&[1]]), absorbed(), collection(&[&[1]]), false),
        (chain3(), collection(&[&[2]]), absorbed(), collection(&[&[2]]), true),
        (chain3(), collection(&[&[0]]), absorbed(), collection(&[&[0, 2]]), true),
    ];
    let mut named_bad = 0usize;
    for (g, tg, h, th, want) in &named {
        let verdict = markov_equivalent(g, tg, h, th).unwrap();
        let sig = ci_signature(g, tg).unwrap() == ci_signature(h, th).unwrap();
        if verdict != *want || sig != *want {
            named_bad += 1;
        }
    }
    let elapsed = start.elapsed();
    let ok = mismatches == 0 && named_bad == 0 && pairs >= 10_000;
    assert!(report(
        3,
        ok,
        &format!(
            "{pairs} pairs ({equivalent_pairs} equivalent), {mismatches} mismatches, \
             {named_bad} wrong worked-example verdicts, {elapsed:?}"
        )
    ));
}

fn cause() -> DagWithSelection {
    DagWithSelection::new(2, 0, &[(1, 0)]).unwrap()
}

/// Both soundness clauses on one discovery output: directed edges must be
/// true edges into vertices that are not ancestrally selected, undirected
/// edges must join two ancestrally selected vertices.
fn soundness_violations(g: &DagWithSelection, pag0: &MixedGraph) -> usize {
    let asel: BTreeSet<u32> = g.ancestrally_selected().into_iter().collect();
    let true_edges: BTreeSet<(u32, u32)> = g.edges().into_iter().collect();
    let mut violations = 0;
    for e in pag0.edges() {
        match (e.mark_i, e.mark_j) {
            (Mark::Tail, Mark::Arrow)
                if !true_edges.contains(&(e.i, e.j)) || asel.contains(&e.j) =>
            {
                violations += 1;
            }
            (Mark::Arrow, Mark::Tail)
                if !true_edges.contains(&(e.j, e.i)) || asel.contains(&e.i) =>
            {
                violations += 1;
            }
            (Mark::Tail, Mark::Tail)
                if !(asel.contains(&e.i) && asel.contains(&e.j)) =>
            {
                violations += 1;
            }
            _ => {}
        }
    }
    violations
}

#[test]
fn criterion_4_discovery_output_is_sound() {
    let start = Instant::now();
    let mut cases = 0usize;
    let mut violations = 0usize;
    let mut run = |g: &DagWithSelection, tc: &TargetCollection| {
        let oracle = OracleCi::new(g.clone(), tc.clone()).unwrap();
        let result = cdis(&oracle, &CdisOptions::default()).unwrap();
        cases += 1;
        let v = soundness_violations(g, &result.pag0.graph);
        if v > 0 {
            violations += v;
            eprintln!("violation: {:?} t={} {:?}", g.edges(), g.t(), tc);
        }
        result
    };
    for g in enumerate_models(2, 2).unwrap() {
        for tc in &collections_up_to(2, 2) {
            run(&g, tc);
        }
    }
    let colls3 = collections_up_to(3, 2);
    for g in enumerate_models(3, 2).unwrap() {
        for (cidx, tc) in colls3.iter().enumerate() {
            if cidx % 4 == 0 {
                run(&g, tc);
            }
        }
    }
    for (d, stride) in [(4usize, 27usize), (5, 100_000)] {
        let colls = collections_up_to(d, 2);
        for (idx, g) in enumerate_models(d, 2).unwrap().enumerate() {
            if idx % stride != 0 {
                continue;
            }
            run(&g, &colls[(idx / stride * 31) % colls.len()]);
        }
    }
    // The worked example whose naive orientation propagates a false edge:
    // the output must never direct the first adjacency toward the root.
    let trap = run(&absorbed(), &collection(&[&[0]]));
    let trap_ok = !trap.pag0.graph.has_directed_edge(1, 0);
    let elapsed = start.elapsed();
    let ok = violations == 0 && trap_ok && cases >= 10_000;
    assert!(report(
        4,
        ok,
        &format!(
            "{cases} oracle runs, {violations} clause violations, forbidden edge absent: \
             {trap_ok}, {elapsed:?}"
        )
    ));
}

#[test]
fn criterion_5_completeness_probe_reports_missed_class_marks() {
    let start = Instant::now();
    struct Class {
        rep: (DagWithSelection, TargetCollection),
        members: usize,
        shared: BTreeMap<(u32, u32), (Option<Mark>, Option<Mark>)>,
    }
    let mut classes: BTreeMap<cdis_core::equiv::EquivalenceKey, Class> = BTreeMap::new();
    let mut absorb = |g: &DagWithSelection, tc: &TargetCollection| {
        let key = equivalence_key(g, tc).unwrap();
        let mag = closed_form(g, &target(&[]));
        let entry = classes.entry(key).or_insert_with(|| Class {
            rep: (g.clone(), tc.clone()),
            members: 0,
            shared: mag
                .edges()
                .map(|e| ((e.i, e.j), (Some(e.mark_i), Some(e.mark_j))))
                .collect(),
        });
        entry.members += 1;
        for e in mag.edges() {
            let slot = entry
                .shared
                .get_mut(&(e.i, e.j))
                .expect("class members share observational adjacencies");
            if slot.0 != Some(e.mark_i) {
                slot.0 = None;
            }
            if slot.1 != Some(e.mark_j) {
                slot.1 = None;
            }
        }
    };
    // Exhaustive at two and three vertices over all target collections with
    // up to two interventions; at four vertices the probe is scoped to one
    // selection vertex and single-vertex targets.
    for d in 2..=3usize {
        let colls = collections_up_to(d, 2);
        for g in enumerate_models(d, 2).unwrap() {
            for tc in &colls {
                absorb(&g, tc);
            }
        }
    }
    let singletons: Vec<TargetCollection> =
        (0..4u32).map(|v| collection(&[&[v]])).collect();
    for g in enumerate_models(4, 1).unwrap() {
        for tc in &singletons {
            absorb(&g, tc);
        }
    }
    let mut missed = 0usize;
    let mut overcommitted = 0usize;
    let mut witnesses: Vec<String> = Vec::new();
    let class_count = classes.len();
    for class in classes.values() {
        let (g, tc) = &class.rep;
        let oracle = OracleCi::new(g.clone(), tc.clone()).unwrap();
        let pag0 = cdis(&oracle, &CdisOptions::default()).unwrap().pag0.graph;
        for (&(i, j), &(want_i, want_j)) in &class.shared {
            for (at, other, want) in [(i, j, want_i), (j, i, want_j)] {
                let got = pag0.mark_at(at, other).expect("skeleton matches class adjacencies");
                match want {
                    Some(m) if m != Mark::Circle && got == Mark::Circle => {
                        missed += 1;
                        if witnesses.len() < 3 {
                            witnesses.push(format!(
                                "edges={:?} t={} targets={:?}: mark at {at} on ({at},{other}) \
                                 is {m:?} in all {} members but stayed open",
                                g.edges(),
                                g.t(),
                                tc,
                                class.members
                            ));
                        }
                    }
                    Some(m) => {
                        if got != Mark::Circle && got != m {
                            overcommitted += 1;
                        }
                    }
                    None => {
                        if got != Mark::Circle {
                            overcommitted += 1;
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    // A nonzero missed count is a logged finding, not a failure; committing
    // a mark the class disagrees on would be unsound and does fail.
    let ok = overcommitted == 0;
    assert!(report(
        5,
        ok,
        &format!(
            "{class_count} classes probed: {missed} invariant marks uncommitted (research \
             finding), {overcommitted} unsound commitments, {elapsed:?}; witnesses: {witnesses:?}"
        )
    ));
}

#[test]
fn criterion_6_nonlinear_chain_ci_flip_is_detected() {
    let start = Instant::now();
    let scm = pest_scm();
    let mut independent_before = 0usize;
    let mut dependent_after = 0usize;
    let seeds = 50u64;
    for seed in 0..seeds {
        let (x0, eps) = sample_observational(&scm, 5000, seed).unwrap();
        let x1 = sample_interventional(
            &scm,
            &eps,
            0,
            &InterventionMechanism::Shift { mean: 4.0, variance: 1.0 },
            seed + 1000,
        )
        .unwrap();
        let data = Dataset::from_matrices(vec![x0, x1]).unwrap();
        let tester = FisherZCi::rank_gauss(data, 0.05).unwrap();
        if tester.ci_within(0, 0, 2, &[1]).unwrap() {
            independent_before += 1;
        }
        if !tester.ci_within(1, 0, 2, &[1]).unwrap() {
            dependent_after += 1;
        }
    }
    let elapsed = start.elapsed();
    let need = (seeds as f64 * 0.9).ceil() as usize;
    let ok = independent_before >= need && dependent_after >= need;
    assert!(report(
        6,
        ok,
        &format!(
            "independence kept pre-intervention in {independent_before}/{seeds} seeds, \
             dependence found post-intervention in {dependent_after}/{seeds} (need {need} each), \
             {elapsed:?}"
        )
    ));
}

#[test]
fn criterion_7_simulated_precision_exceeds_target() {
    let mut summaries = Vec::new();
    let mut ok = true;
    for d in [5usize, 10] {
        let mut precisions = Vec::new();
        let mut slowest = Duration::ZERO;
        for seed in 0..20u64 {
            let cfg: ExperimentConfig =
                serde_json::from_str(&format!(r#"{{"d": {d}, "seed": {}}}"#, 100 + seed))
                    .unwrap();
            let t0 = Instant::now();
            let run = simulate_experiment(&cfg).unwrap();
            let est = cdis_from_data(run.dataset.clone(), None).unwrap();
            let report = evaluate(&est.pag0.graph, run.scm.dag(), &run.targets).unwrap();
            slowest = slowest.max(t0.elapsed());
            precisions.push(report.arrow_precision);
        }
        let mean: f64 = precisions.iter().sum::<f64>() / precisions.len() as f64;
        ok &= mean > 0.7;
        if d == 10 {
            ok &= slowest < Duration::from_secs(300);
        }
        summaries.push(format!("d={d}: mean arrow precision {mean:.3}, slowest run {slowest:?}"));
    }
    assert!(report(7, ok, &format!("20 seeds each; {}", summaries.join("; "))));
}

#[test]
fn criterion_8_unaffected_columns_replay_bitwise() {
    let start = Instant::now();
    let mut configs = 0usize;
    let mut bad = 0usize;
    for seed in 0..100u64 {
        let d = 3 + (seed % 8) as usize;
        let cfg: ExperimentConfig = serde_json::from_str(&format!(
            r#"{{"d": {d}, "seed": {seed}, "n_selected": 400}}"#
        ))
        .unwrap();
        let run = simulate_experiment(&cfg).unwrap();
        configs += 1;
        let base = run.dataset.setting(0).unwrap();
        for k in 1..run.dataset.num_settings() {
            let t = run.dataset.target(k).unwrap().as_vec();
            let affected: BTreeSet<u32> =
                run.scm.dag().affected_by(&t).unwrap().into_iter().collect();
            let m = run.dataset.setting(k).unwrap();
            let mut column_diverged = false;
            for c in 0..d as u32 {
                let identical = (0..base.nrows()).all(|r| {
                    base[(r, c as usize)].to_bits() == m[(r, c as usize)].to_bits()
                });
                if affected.contains(&c) {
                    column_diverged |= !identical;
                } else if !identical {
                    bad += 1;
                    eprintln!("seed {seed}: untouched column {c} changed in setting {k}");
                }
            }
            if !column_diverged {
                bad += 1;
                eprintln!("seed {seed}: intervention {k} left every affected column intact");
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = bad == 0 && configs == 100;
    assert!(report(
        8,
        ok,
        &format!("{configs} simulated configs, {bad} coupling faults, {elapsed:?}")
    ));
}

#[test]
fn criterion_9_cli_runs_are_deterministic() {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_cdis");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"d": 4, "seed": 17, "n_selected": 250}"#).unwrap();
    let graph = dir.path().join("g.json");
    std::fs::write(&graph, r#"{"d": 3, "t": 1, "edges": [[0, 1], [1, 3], [2, 3]]}"#).unwrap();

    let mut differences = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let st = Command::new(bin)
            .args(["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .status()
            .unwrap();
        assert!(st.success());
        let est = dir.path().join(format!("est_{run}.json"));
        let st = Command::new(bin)
            .args([
                "discover",
                out.join("manifest.json").to_str().unwrap(),
                "--out",
                est.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(st.success());
    }
    let names: Vec<String> = std::fs::read_dir(dir.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    for name in &names {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        if a != b {
            differences.push(format!("simulate:{name}"));
        }
    }
    if std::fs::read(dir.path().join("est_a.json")).unwrap()
        != std::fs::read(dir.path().join("est_b.json")).unwrap()
    {
        differences.push("discover bundle".to_string());
    }
    for args in [
        vec!["twin", graph.to_str().unwrap(), "--target", "0"],
        vec!["mag", graph.to_str().unwrap(), "--target", "0", "--method", "both"],
        vec!["discover", "--oracle", graph.to_str().unwrap(), "--targets", "0"],
        vec!["equiv", "--g1", graph.to_str().unwrap(), "--g2", graph.to_str().unwrap()],
        vec!["enumerate", "--d", "2", "--t-max", "1", "--k-max", "1"],
    ] {
        let first = Command::new(bin).args(&args).output().unwrap();
        let second = Command::new(bin).args(&args).output().unwrap();
        if first.stdout != second.stdout {
            differences.push(args.join(" "));
        }
    }
    let elapsed = start.elapsed();
    let ok = differences.is_empty();
    assert!(report(
        9,
        ok,
        &format!(
            "{} file sets and command outputs compared, differing: {differences:?}, {elapsed:?}",
            names.len() + 6
        )
    ));
}
