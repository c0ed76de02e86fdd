//! Maximal ancestral graph construction.
//!
//! Two independent routes produce the same object: [`mag_general`]
//! marginalizes/conditions an arbitrary partitioned DAG through the
//! inducing-path criterion, while [`mag_observational`] and
//! [`mag_of_twin`] apply closed-form rules specific to selection models
//! and their twin graphs. The general route doubles as a test oracle for
//! the fast one.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{Dag, DagWithSelection, VertexKind};
use crate::mixed::{Mark, MixedGraph};
use crate::twin::{InterventionTarget, TwinGraph};

/// Disjoint split of a DAG's vertices into observed, latent, and selected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexPartition {
    observed: BTreeSet<u32>,
    latent: BTreeSet<u32>,
    selected: BTreeSet<u32>,
}

impl VertexPartition {
    pub fn new(
        observed: impl IntoIterator<Item = u32>,
        latent: impl IntoIterator<Item = u32>,
        selected: impl IntoIterator<Item = u32>,
    ) -> Result<Self> {
        let observed: BTreeSet<u32> = observed.into_iter().collect();
        let latent: BTreeSet<u32> = latent.into_iter().collect();
        let selected: BTreeSet<u32> = selected.into_iter().collect();
        if observed.intersection(&latent).next().is_some()
            || observed.intersection(&selected).next().is_some()
            || latent.intersection(&selected).next().is_some()
        {
            return Err(Error::invalid("partition classes overlap"));
        }
        Ok(VertexPartition { observed, latent, selected })
    }

    /// The standard partition of a twin graph: ζ and the reality copies
    /// are observed, basal copies and noises are latent, S* is selected.
    pub fn of_twin(tw: &TwinGraph) -> Self {
        let mut part = VertexPartition {
            observed: BTreeSet::new(),
            latent: BTreeSet::new(),
            selected: tw.s_star().iter().copied().collect(),
        };
        for v in 0..tw.graph().n() as u32 {
            match tw.graph().kind(v).unwrap() {
                VertexKind::Zeta | VertexKind::Observed => {
                    part.observed.insert(v);
                }
                VertexKind::Counterfactual | VertexKind::Noise => {
                    part.latent.insert(v);
                }
                VertexKind::Selection => {}
                VertexKind::Latent => {
                    part.latent.insert(v);
                }
            }
        }
        part
    }

    pub fn observed(&self) -> impl Iterator<Item = u32> + '_ {
        self.observed.iter().copied()
    }

    pub fn latent(&self) -> impl Iterator<Item = u32> + '_ {
        self.latent.iter().copied()
    }

    pub fn selected(&self) -> impl Iterator<Item = u32> + '_ {
        self.selected.iter().copied()
    }

    fn validate_for(&self, n: usize) -> Result<()> {
        let total = self.observed.len() + self.latent.len() + self.selected.len();
        if total != n {
            return Err(Error::invalid(format!(
                "partition covers {total} vertices, graph has {n}"
            )));
        }
        for v in self
            .observed
            .iter()
            .chain(&self.latent)
            .chain(&self.selected)
        {
            if *v as usize >= n {
                return Err(Error::invalid(format!("partition names unknown vertex {v}")));
            }
        }
        Ok(())
    }
}

/// Walk search for an inducing path between `a` and `b` relative to the
/// latent set: non-endpoint non-latent vertices must be colliders, and
/// colliders must satisfy `collider_ok` (ancestor of an endpoint or of
/// the selected set). States are (vertex, entered through an arrowhead).
fn inducing_path_exists(
    g: &Dag,
    a: u32,
    b: u32,
    latent: &[bool],
    collider_ok: &[bool],
) -> bool {
    let mut seen = vec![[false; 2]; g.n()];
    let mut stack: Vec<(u32, bool)> = Vec::new();
    let push = |stack: &mut Vec<(u32, bool)>, seen: &mut Vec<[bool; 2]>, w: u32, by_arrow: bool| {
        if !seen[w as usize][by_arrow as usize] {
            seen[w as usize][by_arrow as usize] = true;
            stack.push((w, by_arrow));
        }
    };
    for &w in g.children(a) {
        if w == b {
            return true;
        }
        push(&mut stack, &mut seen, w, true);
    }
    for &w in g.parents(a) {
        if w == b {
            return true;
        }
        push(&mut stack, &mut seen, w, false);
    }
    while let Some((v, by_arrow)) = stack.pop() {
        let vu = v as usize;
        // Exit through a child edge v→w: tail at v, so v is a non-collider.
        if latent[vu] {
            for &w in g.children(v) {
                if w == b {
                    return true;
                }
                push(&mut stack, &mut seen, w, true);
            }
        }
        // Exit through a parent edge w→v: arrowhead at v, so v is a
        // collider exactly when it was also entered through an arrowhead.
        let ok = if by_arrow { collider_ok[vu] } else { latent[vu] };
        if ok {
            for &w in g.parents(v) {
                if w == b {
                    return true;
                }
                push(&mut stack, &mut seen, w, false);
            }
        }
    }
    false
}

/// Projects a partitioned DAG onto its observed vertices as a MAG.
///
/// Vertex `k` of the result is the k-th smallest member of
/// `part.observed`, keeping its kind. Adjacency holds iff the two
/// vertices are connected by an inducing path (direct edges included);
/// each endpoint mark is a tail iff that endpoint is an ancestor of the
/// other endpoint or of the selected set.
pub fn mag_general(g: &Dag, part: &VertexPartition) -> Result<MixedGraph> {
    part.validate_for(g.n())?;
    let obs: Vec<u32> = part.observed().collect();
    let sel: Vec<u32> = part.selected().collect();
    let anc_sel = g.ancestors(&sel)?;
    let mut latent = vec![false; g.n()];
    for v in part.latent() {
        latent[v as usize] = true;
    }
    let desc: Vec<Vec<u32>> = (0..g.n() as u32)
        .map(|v| g.descendants(&[v]))
        .collect::<Result<_>>()?;
    let in_anc_sel = |v: u32| anc_sel.binary_search(&v).is_ok();
    // v ∈ an({u} ∪ selected)
    let anc_of = |v: u32, u: u32| desc[v as usize].binary_search(&u).is_ok() || in_anc_sel(v);

    let kinds: Vec<VertexKind> = obs.iter().map(|&v| g.kind(v).unwrap()).collect();
    let mut out = MixedGraph::new(kinds);
    for (ai, &a) in obs.iter().enumerate() {
        for (bj, &b) in obs.iter().enumerate().skip(ai + 1) {
            let mut collider_ok = vec![false; g.n()];
            for (v, slot) in collider_ok.iter_mut().enumerate() {
                let v = v as u32;
                *slot = anc_of(v, a) || anc_of(v, b);
            }
            if inducing_path_exists(g, a, b, &latent, &collider_ok) {
                let mark = |v: u32, other: u32| {
                    if anc_of(v, other) {
                        Mark::Tail
                    } else {
                        Mark::Arrow
                    }
                };
                out.add_edge(ai as u32, bj as u32, mark(a, b), mark(b, a))?;
            }
        }
    }
    Ok(out)
}

/// The observational MAG of a selection model, over its observed
/// vertices. Two vertices are adjacent iff they share an edge or a
/// common child that is an ancestor of selection; marks follow the same
/// ancestor rule as [`mag_general`].
pub fn mag_observational(g: &DagWithSelection) -> Result<MixedGraph> {
    let d = g.d();
    let dag = g.dag();
    let sel: Vec<u32> = g.selection().collect();
    let anc_sel = dag.ancestors(&sel)?;
    let in_anc_sel = |v: u32| anc_sel.binary_search(&v).is_ok();
    let desc: Vec<Vec<u32>> = (0..d as u32)
        .map(|v| dag.descendants(&[v]))
        .collect::<Result<_>>()?;
    let anc_of = |v: u32, u: u32| desc[v as usize].binary_search(&u).is_ok() || in_anc_sel(v);

    let mut out = MixedGraph::new(vec![VertexKind::Observed; d]);
    for i in 0..d as u32 {
        for j in (i + 1)..d as u32 {
            let direct = dag.has_edge(i, j) || dag.has_edge(j, i);
            let common_selected_child = dag
                .children(i)
                .iter()
                .any(|&c| dag.children(j).contains(&c) && in_anc_sel(c));
            if direct || common_selected_child {
                let mark = |v: u32, other: u32| {
                    if anc_of(v, other) {
                        Mark::Tail
                    } else {
                        Mark::Arrow
                    }
                };
                out.add_edge(i, j, mark(i, j), mark(j, i))?;
            }
        }
    }
    Ok(out)
}

/// The MAG of the twin graph for one intervention target, built from
/// closed-form rules rather than the projection search. Vertices `0..d`
/// are the observed variables; vertex `d` is ζ.
pub fn mag_of_twin(g: &DagWithSelection, target: &InterventionTarget) -> Result<MixedGraph> {
    let d = g.d();
    let zeta = d as u32;
    let m0 = mag_observational(g)?;
    let aff = g.affected_by(&target.as_vec())?;
    let asel = g.ancestrally_selected();
    let is_aff = |v: u32| aff.binary_search(&v).is_ok();
    let is_asel = |v: u32| asel.binary_search(&v).is_ok();
    let desc: Vec<Vec<u32>> = (0..d as u32)
        .map(|v| g.dag().descendants(&[v]))
        .collect::<Result<_>>()?;
    let anc_in_g = |v: u32, u: u32| desc[v as usize].binary_search(&u).is_ok();

    // Components of the observational skeleton restricted to affected,
    // ancestrally selected vertices; they mediate the induced adjacencies.
    let bridge: Vec<u32> = (0..d as u32).filter(|&v| is_aff(v) && is_asel(v)).collect();
    let mut comp = vec![usize::MAX; d];
    let mut n_comp = 0;
    for &s in &bridge {
        if comp[s as usize] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s as usize] = n_comp;
        while let Some(v) = stack.pop() {
            for w in m0.neighbors(v) {
                if bridge.binary_search(&w).is_ok() && comp[w as usize] == usize::MAX {
                    comp[w as usize] = n_comp;
                    stack.push(w);
                }
            }
        }
        n_comp += 1;
    }
    // touches[v] = set of bridge components adjacent to v in the
    // observational skeleton.
    let touches: Vec<BTreeSet<usize>> = (0..d as u32)
        .map(|v| {
            m0.neighbors(v)
                .filter(|&w| comp[w as usize] != usize::MAX)
                .map(|w| comp[w as usize])
                .collect()
        })
        .collect();

    let mut kinds = vec![VertexKind::Observed; d];
    kinds.push(VertexKind::Zeta);
    let mut out = MixedGraph::new(kinds);
    for i in 0..d as u32 {
        for j in (i + 1)..d as u32 {
            let induced = is_asel(i)
                && is_asel(j)
                && touches[i as usize]
                    .intersection(&touches[j as usize])
                    .next()
                    .is_some();
            if !m0.is_adjacent(i, j) && !induced {
                continue;
            }
            let (mi, mj) = if m0.has_directed_edge(i, j) {
                (Mark::Tail, Mark::Arrow)
            } else if m0.has_directed_edge(j, i) {
                (Mark::Arrow, Mark::Tail)
            } else if !is_aff(i) && !is_aff(j) {
                (Mark::Tail, Mark::Tail)
            } else if is_aff(j) && (!is_aff(i) || anc_in_g(i, j)) {
                (Mark::Tail, Mark::Arrow)
            } else if is_aff(i) && (!is_aff(j) || anc_in_g(j, i)) {
                (Mark::Arrow, Mark::Tail)
            } else {
                (Mark::Arrow, Mark::Arrow)
            };
            out.add_edge(i, j, mi, mj)?;
        }
    }
    for j in 0..d as u32 {
        if target.contains(j) || (is_aff(j) && is_asel(j)) {
            out.add_edge(zeta, j, Mark::Tail, Mark::Arrow)?;
        }
    }
    Ok(out)
}
