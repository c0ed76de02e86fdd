//! Multi-setting structure discovery with unknown intervention targets:
//! an observational pass, per-setting pooled skeletons over the vocabulary
//! extended by the setting indicator, and iterative cross-refinement of the
//! observational graph.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::ci::{default_alpha, CiProvider, Dataset, FisherZCi};
use crate::error::{Error, Result};
use crate::fci::{
    apply_knowledge, fas, fci_plus, ConflictPolicy, FasOptions, Knowledge, Pag, RuleFiring,
};
use crate::graph::VertexKind;
use crate::mixed::{Mark, MixedGraph};

/// Tuning for [`cdis`].
#[derive(Debug, Clone, Copy)]
pub struct CdisOptions {
    pub policy: ConflictPolicy,
    /// Cap on conditioning-set size during skeleton search.
    pub max_cond_size: Option<usize>,
    /// Worker threads for the per-setting skeleton searches.
    pub jobs: usize,
}

impl Default for CdisOptions {
    fn default() -> Self {
        CdisOptions { policy: ConflictPolicy::Strict, max_cond_size: None, jobs: 1 }
    }
}

/// One cross-refinement step applied to the observational graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RefinementAction {
    pub iteration: usize,
    /// "3.2a" | "3.2b" | "3.2c" | "3.2d".
    pub rule: &'static str,
    /// The settings whose graphs triggered the step (1-based).
    pub settings: Vec<usize>,
    pub i: u32,
    pub j: u32,
}

/// Discovery output: the observational graph over the system vertices, one
/// graph per interventional setting over the extended vocabulary, the
/// indicator adjacencies per setting, and the refinement audit trail.
#[derive(Debug, Clone, PartialEq)]
pub struct CdisResult {
    pub pag0: Pag,
    pub per_setting: Vec<Pag>,
    pub estimated_pseudo_targets: Vec<Vec<u32>>,
    pub iteration_log: Vec<RefinementAction>,
}

/// Serializable view of a [`CdisResult`].
#[derive(Debug, Clone, Serialize)]
pub struct CdisBundle {
    pub pag0: MixedGraph,
    pub per_setting: Vec<MixedGraph>,
    pub pseudo_targets: Vec<Vec<u32>>,
    pub iteration_log: Vec<RefinementAction>,
    pub orientation_log_pag0: Vec<RuleFiring>,
    pub orientation_log_per_setting: Vec<Vec<RuleFiring>>,
}

impl CdisResult {
    pub fn bundle(&self) -> CdisBundle {
        CdisBundle {
            pag0: self.pag0.graph.clone(),
            per_setting: self.per_setting.iter().map(|p| p.graph.clone()).collect(),
            pseudo_targets: self.estimated_pseudo_targets.clone(),
            iteration_log: self.iteration_log.clone(),
            orientation_log_pag0: self.pag0.log().to_vec(),
            orientation_log_per_setting: self
                .per_setting
                .iter()
                .map(|p| p.log().to_vec())
                .collect(),
        }
    }
}

/// Orients both endpoint marks of the pag0 edge i-j to tails. An existing
/// arrow is a conflict: strict mode errors, soft mode retreats to the
/// undirected edge because that is the weaker of the two claims.
fn make_undirected(pag0: &mut Pag, i: u32, j: u32, rule: &'static str) -> Result<bool> {
    let mut changed = false;
    for (at, other) in [(i, j), (j, i)] {
        match pag0.graph.mark_at(at, other) {
            Some(Mark::Tail) => {}
            Some(Mark::Circle) => changed |= pag0.orient(at, other, Mark::Tail, rule)?,
            Some(Mark::Arrow) => match pag0.policy() {
                ConflictPolicy::Strict => {
                    return Err(Error::OrientationConflict {
                        i,
                        j,
                        detail: format!("{rule} wants {i} - {j} over an arrow at {at}"),
                    });
                }
                ConflictPolicy::Soft => changed |= pag0.force_mark(at, other, Mark::Tail, rule)?,
            },
            None => return Err(Error::invalid(format!("{rule} on missing edge {i}-{j}"))),
        }
    }
    Ok(changed)
}

fn directed_edges(graph: &MixedGraph) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for e in graph.edges() {
        if e.mark_i == Mark::Tail && e.mark_j == Mark::Arrow {
            out.push((e.i, e.j));
        } else if e.mark_i == Mark::Arrow && e.mark_j == Mark::Tail {
            out.push((e.j, e.i));
        }
    }
    out
}

/// Three-step discovery. Setting 0 of the provider is observational; each
/// further setting k contributes pooled queries over the system vertices
/// plus the indicator vertex d.
///
/// Step 1 recovers the observational graph. Step 2 builds one skeleton per
/// setting from pooled queries, never removing a pair that is adjacent in
/// the observational graph. Step 3 alternates between pushing observational
/// arrows and indicator exogeneity into the per-setting graphs and pulling
/// four kinds of mark evidence back, until nothing changes.
pub fn cdis<P>(provider: &P, opts: &CdisOptions) -> Result<CdisResult>
where
    P: CiProvider + Sync + ?Sized,
{
    let d = provider.d();
    if d == 0 {
        return Err(Error::invalid("provider has no observed vertices"));
    }
    let num_settings = provider.num_settings();
    if num_settings == 0 {
        return Err(Error::invalid("provider has no settings"));
    }
    let settings = num_settings - 1;

    // Step 1: observational skeleton and orientation closure.
    let observed = vec![VertexKind::Observed; d];
    let base_opts = FasOptions {
        protected: BTreeSet::new(),
        max_cond_size: opts.max_cond_size,
        policy: opts.policy,
    };
    let mut q0 = |i: u32, j: u32, c: &[u32]| provider.ci_within(0, i, j, c);
    let mut pag0 = fas(&observed, &mut q0, &base_opts)?;
    fci_plus(&mut pag0)?;

    // Step 2: pooled skeletons, protecting observational adjacencies.
    let mut pooled_kinds = vec![VertexKind::Observed; d];
    pooled_kinds.push(VertexKind::Zeta);
    let pooled_opts = FasOptions { protected: pag0.graph.adjacencies(), ..base_opts.clone() };
    let run_fas = |k: usize| -> Result<Pag> {
        let mut q = |u: u32, v: u32, c: &[u32]| provider.pooled(k, u, v, c);
        fas(&pooled_kinds, &mut q, &pooled_opts)
    };
    let mut per_setting: Vec<Pag> = if opts.jobs > 1 && settings > 1 {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (1..=settings).map(|k| scope.spawn(move || run_fas(k))).collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|e| std::panic::resume_unwind(e)))
                .collect::<Result<Vec<Pag>>>()
        })?
    } else {
        (1..=settings).map(run_fas).collect::<Result<Vec<Pag>>>()?
    };

    for (idx, pagk) in per_setting.iter().enumerate() {
        for &(i, j) in &pooled_opts.protected {
            if !pagk.graph.is_adjacent(i, j) {
                return Err(Error::malformed(format!(
                    "setting {} lost protected adjacency {i}-{j}",
                    idx + 1
                )));
            }
        }
    }

    // Step 3: cross-refinement to a fixpoint.
    let zeta = d as u32;
    let mut iteration_log: Vec<RefinementAction> = Vec::new();
    let max_iterations = 2 * d * d + 2;
    let mut iteration = 0usize;
    loop {
        iteration += 1;
        if iteration > max_iterations {
            return Err(Error::ResourceLimit(format!(
                "refinement exceeded {max_iterations} iterations; mark monotonicity is broken"
            )));
        }

        // 3.1: push knowledge into each setting graph and re-close.
        let knowledge =
            Knowledge::exogenous([zeta]).with_directed(directed_edges(&pag0.graph));
        for pagk in per_setting.iter_mut() {
            apply_knowledge(pagk, &knowledge)?;
            fci_plus(pagk)?;
        }

        // 3.2: pull marks back into the observational graph.
        let mut changed = false;
        let edges: Vec<(u32, u32)> = pag0.graph.adjacencies().into_iter().collect();
        for (i, j) in edges {
            // (a) some setting shows the pair undirected.
            if let Some(k) =
                (1..=settings).find(|&k| per_setting[k - 1].graph.has_undirected_edge(i, j))
            {
                if make_undirected(&mut pag0, i, j, "3.2a")? {
                    changed = true;
                    iteration_log.push(RefinementAction {
                        iteration,
                        rule: "3.2a",
                        settings: vec![k],
                        i,
                        j,
                    });
                }
            }
            for (u, v) in [(i, j), (j, i)] {
                // (b) a directed mark u→v in a setting meets u ∘— v here.
                if pag0.graph.mark_at(u, v) == Some(Mark::Circle)
                    && pag0.graph.mark_at(v, u) == Some(Mark::Tail)
                {
                    if let Some(k) =
                        (1..=settings).find(|&k| per_setting[k - 1].graph.has_directed_edge(u, v))
                    {
                        if pag0.orient(u, v, Mark::Tail, "3.2b")? {
                            changed = true;
                            iteration_log.push(RefinementAction {
                                iteration,
                                rule: "3.2b",
                                settings: vec![k],
                                i: u,
                                j: v,
                            });
                        }
                    }
                }
                // (c) a directed mark u→v in a setting whose marginal of u
                // differs from the observational one.
                let mut fired_k = None;
                for k in 1..=settings {
                    if per_setting[k - 1].graph.has_directed_edge(u, v)
                        && !provider.invariance(k, u, &[])?
                    {
                        fired_k = Some(k);
                        break;
                    }
                }
                if let Some(k) = fired_k {
                    let c1 = pag0.orient(u, v, Mark::Tail, "3.2c")?;
                    let c2 = pag0.orient(v, u, Mark::Arrow, "3.2c")?;
                    if c1 || c2 {
                        changed = true;
                        iteration_log.push(RefinementAction {
                            iteration,
                            rule: "3.2c",
                            settings: vec![k],
                            i: u,
                            j: v,
                        });
                    }
                }
            }
            // (d) two settings disagree on the direction.
            let fwd = (1..=settings).find(|&k| per_setting[k - 1].graph.has_directed_edge(i, j));
            let bwd = (1..=settings).find(|&k| per_setting[k - 1].graph.has_directed_edge(j, i));
            if let (Some(k1), Some(k2)) = (fwd, bwd) {
                if make_undirected(&mut pag0, i, j, "3.2d")? {
                    changed = true;
                    iteration_log.push(RefinementAction {
                        iteration,
                        rule: "3.2d",
                        settings: vec![k1, k2],
                        i,
                        j,
                    });
                }
            }
        }

        // 3.3: re-close the observational graph.
        fci_plus(&mut pag0)?;
        if !changed {
            break;
        }
    }

    let estimated_pseudo_targets = per_setting
        .iter()
        .map(|pagk| pagk.graph.neighbors(zeta).collect())
        .collect();
    Ok(CdisResult { pag0, per_setting, estimated_pseudo_targets, iteration_log })
}

/// [`cdis`] with Fisher-z tests over a dataset. Conflicts retreat to the
/// weaker mark instead of failing, since finite samples contradict
/// themselves routinely.
pub fn cdis_from_data(data: Dataset, alpha: Option<f64>) -> Result<CdisResult> {
    let alpha = alpha.unwrap_or_else(|| default_alpha(data.d()));
    let provider = FisherZCi::new(data, alpha)?;
    cdis(&provider, &CdisOptions { policy: ConflictPolicy::Soft, ..CdisOptions::default() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ci::OracleCi;
    use crate::equiv::{enumerate_models, enumerate_target_collections, TargetCollection};
    use crate::graph::DagWithSelection;
    use crate::twin::InterventionTarget;

    fn oracle(g: &DagWithSelection, targets: &TargetCollection) -> OracleCi {
        OracleCi::new(g.clone(), targets.clone()).unwrap()
    }

    fn false_propagation_model() -> DagWithSelection {
        DagWithSelection::new(3, 1, &[(0, 1), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn observational_only_is_plain_orientation_closure() {
        let g = DagWithSelection::new(3, 1, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let targets = TargetCollection::observational();
        let result = cdis(&oracle(&g, &targets), &CdisOptions::default()).unwrap();
        assert!(result.per_setting.is_empty());
        assert!(result.iteration_log.is_empty());
        assert!(result.estimated_pseudo_targets.is_empty());
        let adj: Vec<(u32, u32)> = result.pag0.graph.adjacencies().into_iter().collect();
        assert_eq!(adj, vec![(0, 1), (1, 2)]);
        for (i, j) in adj {
            assert_eq!(result.pag0.graph.mark_at(i, j), Some(Mark::Circle));
            assert_eq!(result.pag0.graph.mark_at(j, i), Some(Mark::Circle));
        }
    }

    #[test]
    fn false_propagation_is_avoided() {
        // A collider into the selected sink once the head of the short chain
        // is intervened: the naive pooled run would direct 0 ← 1, which is
        // wrong in the generating graph. The output must keep the pair open.
        let g = false_propagation_model();
        let targets = TargetCollection::with_interventions([InterventionTarget::new([0])]);
        let result = cdis(&oracle(&g, &targets), &CdisOptions::default()).unwrap();

        assert_ne!(result.pag0.graph.mark_at(0, 1), Some(Mark::Arrow));
        let adj: Vec<(u32, u32)> = result.pag0.graph.adjacencies().into_iter().collect();
        assert_eq!(adj, vec![(0, 1), (1, 2)]);
        for (i, j) in [(0u32, 1u32), (1, 2)] {
            assert_eq!(result.pag0.graph.mark_at(i, j), Some(Mark::Circle));
            assert_eq!(result.pag0.graph.mark_at(j, i), Some(Mark::Circle));
        }

        let pagk = &result.per_setting[0].graph;
        assert!(pagk.has_directed_edge(3, 0));
        assert!(pagk.has_directed_edge(3, 1));
        assert!(!pagk.is_adjacent(3, 2));
        assert!(pagk.has_directed_edge(2, 0));
        assert!(pagk.has_directed_edge(2, 1));
        assert_eq!(pagk.mark_at(0, 1), Some(Mark::Circle));
        assert_eq!(pagk.mark_at(1, 0), Some(Mark::Circle));
        assert_eq!(result.estimated_pseudo_targets, vec![vec![0, 1]]);
    }

    #[test]
    fn opposing_interventions_reveal_pure_selection() {
        let g = DagWithSelection::new(2, 1, &[(0, 2), (1, 2)]).unwrap();
        let targets = TargetCollection::with_interventions([
            InterventionTarget::new([0]),
            InterventionTarget::new([1]),
        ]);
        let result = cdis(&oracle(&g, &targets), &CdisOptions::default()).unwrap();
        assert!(result.pag0.graph.has_undirected_edge(0, 1));
        assert!(result.iteration_log.iter().any(|a| a.rule == "3.2d"));
        assert_eq!(result.estimated_pseudo_targets, vec![vec![0], vec![1]]);
    }

    #[test]
    fn full_indicator_adjacency_keeps_chain_open() {
        // Intervening on the head of a fully selected chain makes the pooled
        // skeleton complete, which leaves no collider or rule to exploit:
        // the output stays open everywhere except the indicator edges.
        let g = DagWithSelection::new(3, 1, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let targets = TargetCollection::with_interventions([InterventionTarget::new([0])]);
        let result = cdis(&oracle(&g, &targets), &CdisOptions::default()).unwrap();
        assert_eq!(result.estimated_pseudo_targets, vec![vec![0, 1, 2]]);
        for (i, j) in [(0u32, 1u32), (1, 2)] {
            assert_eq!(result.pag0.graph.mark_at(i, j), Some(Mark::Circle));
            assert_eq!(result.pag0.graph.mark_at(j, i), Some(Mark::Circle));
        }
    }

    #[test]
    fn identical_runs_are_identical() {
        let g = false_propagation_model();
        let targets = TargetCollection::with_interventions([InterventionTarget::new([0])]);
        let a = cdis(&oracle(&g, &targets), &CdisOptions::default()).unwrap();
        let b = cdis(&oracle(&g, &targets), &CdisOptions::default()).unwrap();
        assert_eq!(a, b);
        let c = cdis(&oracle(&g, &targets), &CdisOptions { jobs: 4, ..CdisOptions::default() })
            .unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn oracle_soundness_on_small_universe() {
        // Directed output edges must be true edges into vertices that are
        // not ancestrally selected; undirected output edges must join two
        // ancestrally selected vertices.
        for d in 2..=3usize {
            let collections: Vec<TargetCollection> = enumerate_target_collections(d, 0)
                .unwrap()
                .into_iter()
                .chain(enumerate_target_collections(d, 1).unwrap())
                .collect();
            for g in enumerate_models(d, 1).unwrap() {
                let asel = g.ancestrally_selected();
                for targets in &collections {
                    let result = cdis(&oracle(&g, targets), &CdisOptions::default()).unwrap();
                    for e in result.pag0.graph.edges() {
                        let (i, j) = (e.i, e.j);
                        if result.pag0.graph.has_directed_edge(i, j)
                            || result.pag0.graph.has_directed_edge(j, i)
                        {
                            let (from, to) =
                                if result.pag0.graph.has_directed_edge(i, j) { (i, j) } else { (j, i) };
                            assert!(
                                g.dag().has_edge(from, to),
                                "{g:?} {targets:?}: {from}->{to} is not a true edge"
                            );
                            assert!(
                                !asel.contains(&to),
                                "{g:?} {targets:?}: {from}->{to} points at a selected ancestor"
                            );
                        }
                        if result.pag0.graph.has_undirected_edge(i, j) {
                            assert!(
                                asel.contains(&i) && asel.contains(&j),
                                "{g:?} {targets:?}: {i}-{j} joins unselected vertices"
                            );
                        }
                    }
                    for (k, pagk) in result.per_setting.iter().enumerate() {
                        for &(i, j) in &result.pag0.graph.adjacencies() {
                            assert!(
                                pagk.graph.is_adjacent(i, j),
                                "setting {} dropped {i}-{j}",
                                k + 1
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_empty_provider_shapes() {
        let g = DagWithSelection::new(1, 0, &[]).unwrap();
        let targets = TargetCollection::observational();
        let result = cdis(&oracle(&g, &targets), &CdisOptions::default()).unwrap();
        assert_eq!(result.pag0.graph.n(), 1);
        assert_eq!(result.pag0.graph.edge_count(), 0);
    }

    #[test]
    fn bundle_serializes_every_section() {
        let g = false_propagation_model();
        let targets = TargetCollection::with_interventions([InterventionTarget::new([0])]);
        let result = cdis(&oracle(&g, &targets), &CdisOptions::default()).unwrap();
        let value = serde_json::to_value(result.bundle()).unwrap();
        for key in [
            "pag0",
            "per_setting",
            "pseudo_targets",
            "iteration_log",
            "orientation_log_pag0",
            "orientation_log_per_setting",
        ] {
            assert!(value.get(key).is_some(), "bundle is missing {key}");
        }
    }
}
