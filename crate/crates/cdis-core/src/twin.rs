//! Interventional twin graphs: the coupled reality/basal-world DAG built
//! from a selection model and one intervention target.
//!
//! Only vertices affected by the intervention (descendants of the target)
//! are split into a reality copy X_i and a basal copy X_i* sharing one
//! noise vertex ε_i; selection applies to the basal world. The result is
//! an ordinary kind-tagged [`Dag`], so the standard separation queries
//! apply unchanged.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dag, DagWithSelection, VertexKind};

/// Set of observed vertices whose mechanisms an experiment changes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InterventionTarget {
    members: BTreeSet<u32>,
}

impl InterventionTarget {
    pub fn new(members: impl IntoIterator<Item = u32>) -> Self {
        InterventionTarget { members: members.into_iter().collect() }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn members(&self) -> impl Iterator<Item = u32> + '_ {
        self.members.iter().copied()
    }

    pub fn as_vec(&self) -> Vec<u32> {
        self.members.iter().copied().collect()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.members.contains(&v)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }
}

impl FromIterator<u32> for InterventionTarget {
    fn from_iter<T: IntoIterator<Item = u32>>(iter: T) -> Self {
        Self::new(iter)
    }
}

/// The twin graph for one intervention target.
#[derive(Debug, Clone)]
pub struct TwinGraph {
    base: DagWithSelection,
    target: InterventionTarget,
    affected: Vec<u32>,
    graph: Dag,
    zeta: u32,
    x: Vec<u32>,
    x_star: BTreeMap<u32, u32>,
    noise: BTreeMap<u32, u32>,
    s_star: Vec<u32>,
}

/// Builds the twin graph of `g` under intervention on `target`.
///
/// Vertex layout of the result: ζ first, then the reality copies X_0..X_{d-1},
/// then basal copies X_i* and noises ε_i for affected i (ascending), then
/// the basal selection vertices S_j*.
pub fn build_twin(g: &DagWithSelection, target: &InterventionTarget) -> Result<TwinGraph> {
    for v in target.members() {
        if v as usize >= g.d() {
            return Err(Error::invalid(format!(
                "intervention target {v} is not an observed vertex"
            )));
        }
    }
    let d = g.d();
    let affected = g.affected_by(&target.as_vec())?;
    let is_affected = |v: u32| affected.binary_search(&v).is_ok();

    let mut kinds = vec![VertexKind::Zeta];
    let zeta = 0u32;
    let x: Vec<u32> = (0..d).map(|i| (1 + i) as u32).collect();
    kinds.resize(1 + d, VertexKind::Observed);
    let mut x_star = BTreeMap::new();
    for &a in &affected {
        x_star.insert(a, kinds.len() as u32);
        kinds.push(VertexKind::Counterfactual);
    }
    let mut noise = BTreeMap::new();
    for &a in &affected {
        noise.insert(a, kinds.len() as u32);
        kinds.push(VertexKind::Noise);
    }
    let mut s_star = Vec::with_capacity(g.t());
    for _ in 0..g.t() {
        s_star.push(kinds.len() as u32);
        kinds.push(VertexKind::Selection);
    }

    let mut edges = Vec::new();
    for (p, c) in g.edges() {
        if (c as usize) < d {
            // Causal edge i→j: reality copy always; basal copy if the
            // parent is affected (then so is the child); a reality-to-basal
            // edge when only the child is affected.
            edges.push((x[p as usize], x[c as usize]));
            if is_affected(p) {
                edges.push((x_star[&p], x_star[&c]));
            } else if is_affected(c) {
                edges.push((x[p as usize], x_star[&c]));
            }
        } else {
            // Selection edge i→S_j: selection happens in the basal world.
            let s = s_star[(c as usize) - d];
            if is_affected(p) {
                edges.push((x_star[&p], s));
            } else {
                edges.push((x[p as usize], s));
            }
        }
    }
    for &a in &affected {
        edges.push((noise[&a], x[a as usize]));
        edges.push((noise[&a], x_star[&a]));
    }
    for i in target.members() {
        edges.push((zeta, x[i as usize]));
    }

    let graph = Dag::new(kinds, &edges)?;
    Ok(TwinGraph {
        base: g.clone(),
        target: target.clone(),
        affected,
        graph,
        zeta,
        x,
        x_star,
        noise,
        s_star,
    })
}

impl TwinGraph {
    pub fn base(&self) -> &DagWithSelection {
        &self.base
    }

    pub fn target(&self) -> &InterventionTarget {
        &self.target
    }

    /// Observed descendants of the target in the base graph, sorted.
    pub fn affected(&self) -> &[u32] {
        &self.affected
    }

    pub fn graph(&self) -> &Dag {
        &self.graph
    }

    pub fn zeta(&self) -> u32 {
        self.zeta
    }

    /// Twin-graph vertex of the reality copy X_i.
    pub fn x(&self, i: u32) -> Result<u32> {
        self.x
            .get(i as usize)
            .copied()
            .ok_or_else(|| Error::invalid(format!("unknown observed vertex {i}")))
    }

    /// Twin-graph vertex of the basal copy X_i*, if i is affected.
    pub fn x_star(&self, i: u32) -> Option<u32> {
        self.x_star.get(&i).copied()
    }

    /// Twin-graph vertex of the shared noise ε_i, if i is affected.
    pub fn noise_vertex(&self, i: u32) -> Option<u32> {
        self.noise.get(&i).copied()
    }

    /// Basal selection vertices S_j*.
    pub fn s_star(&self) -> &[u32] {
        &self.s_star
    }

    fn map_observed(&self, set: &[u32]) -> Result<Vec<u32>> {
        set.iter().map(|&v| self.x(v)).collect()
    }

    /// True iff X_a ⊥_d X_b | X_c, S*, ζ in the twin graph; under the model
    /// this implies X_a ⊥ X_b | X_c in the setting's distribution.
    pub fn implies_ci(&self, a: &[u32], b: &[u32], c: &[u32]) -> Result<bool> {
        let (xa, xb) = (self.map_observed(a)?, self.map_observed(b)?);
        let mut cond = self.map_observed(c)?;
        cond.extend_from_slice(&self.s_star);
        cond.push(self.zeta);
        self.graph.d_separated(&xa, &xb, &cond)
    }

    /// True iff ζ ⊥_d X_a | X_c, S* in the twin graph; under the model this
    /// implies the conditional of X_a given X_c is the same in this setting
    /// as in the observational one.
    pub fn implies_invariance(&self, a: &[u32], c: &[u32]) -> Result<bool> {
        let xa = self.map_observed(a)?;
        let mut cond = self.map_observed(c)?;
        cond.extend_from_slice(&self.s_star);
        self.graph.d_separated(&[self.zeta], &xa, &cond)
    }

    /// d-separation between pooled-data variables, always given S*.
    /// Indices `0..d` are the observed variables; index `d` is ζ.
    pub fn pooled_separated(&self, u: u32, v: u32, c: &[u32]) -> Result<bool> {
        let map = |w: u32| -> Result<u32> {
            if w == self.base.d() as u32 {
                Ok(self.zeta)
            } else {
                self.x(w)
            }
        };
        let a = [map(u)?];
        let b = [map(v)?];
        let mut cond: Vec<u32> = c.iter().map(|&w| map(w)).collect::<Result<_>>()?;
        cond.extend_from_slice(&self.s_star);
        self.graph.d_separated(&a, &b, &cond)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 0→S←1 with S at index 2.
    fn clinical() -> DagWithSelection {
        DagWithSelection::new(2, 1, &[(0, 2), (1, 2)]).unwrap()
    }

    /// 0→1→2→S with S at index 3.
    fn pest_chain() -> DagWithSelection {
        DagWithSelection::new(3, 1, &[(0, 1), (1, 2), (2, 3)]).unwrap()
    }

    #[test]
    fn clinical_twin_structure() {
        let tw = build_twin(&clinical(), &InterventionTarget::new([0])).unwrap();
        assert_eq!(tw.affected(), &[0]);
        assert_eq!(tw.graph().n(), 6);
        let (zeta, x0, x1) = (tw.zeta(), tw.x(0).unwrap(), tw.x(1).unwrap());
        let (x0s, e0, s) = (
            tw.x_star(0).unwrap(),
            tw.noise_vertex(0).unwrap(),
            tw.s_star()[0],
        );
        let mut expect = vec![(zeta, x0), (e0, x0), (e0, x0s), (x0s, s), (x1, s)];
        expect.sort_unstable();
        assert_eq!(tw.graph().edges(), expect);
    }

    #[test]
    fn pest_twin_splits_only_descendants() {
        let tw = build_twin(&pest_chain(), &InterventionTarget::new([2])).unwrap();
        assert_eq!(tw.affected(), &[2]);
        assert!(tw.x_star(0).is_none());
        assert!(tw.x_star(1).is_none());
        let (x1, x2) = (tw.x(1).unwrap(), tw.x(2).unwrap());
        let (x2s, e2, s) = (
            tw.x_star(2).unwrap(),
            tw.noise_vertex(2).unwrap(),
            tw.s_star()[0],
        );
        let g = tw.graph();
        for &(p, c) in &[
            (tw.x(0).unwrap(), x1),
            (x1, x2),
            (x1, x2s),
            (e2, x2),
            (e2, x2s),
            (x2s, s),
            (tw.zeta(), x2),
        ] {
            assert!(g.has_edge(p, c), "missing edge ({p},{c})");
        }
        assert_eq!(g.edges().len(), 7);
    }

    #[test]
    fn empty_target_splits_nothing() {
        let g = pest_chain();
        let tw = build_twin(&g, &InterventionTarget::empty()).unwrap();
        assert!(tw.affected().is_empty());
        assert_eq!(tw.graph().n(), 1 + 3 + 1);
        assert_eq!(tw.graph().children(tw.zeta()), &[] as &[u32]);
        // Same structure as the base graph, with S relabeled S*.
        let relabel = |v: u32| {
            if (v as usize) < g.d() {
                tw.x(v).unwrap()
            } else {
                tw.s_star()[(v as usize) - g.d()]
            }
        };
        let mut expect: Vec<(u32, u32)> =
            g.edges().iter().map(|&(p, c)| (relabel(p), relabel(c))).collect();
        expect.sort_unstable();
        assert_eq!(tw.graph().edges(), expect);
    }

    #[test]
    fn target_must_be_observed() {
        let r = build_twin(&clinical(), &InterventionTarget::new([2]));
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn interventional_ci_queries() {
        // Intervening on the last chain vertex keeps X0 ⊥ X2 | X1.
        let tw = build_twin(&pest_chain(), &InterventionTarget::new([2])).unwrap();
        assert!(tw.implies_ci(&[0], &[2], &[1]).unwrap());
        // Intervening on the first breaks it: the path through the shared
        // noises X0 ← ε0 → X0* → X1* → X2* ← ε2 → X2 opens under S*.
        let tw = build_twin(&pest_chain(), &InterventionTarget::new([0])).unwrap();
        assert!(!tw.implies_ci(&[0], &[2], &[1]).unwrap());
        assert!(!tw.implies_invariance(&[2], &[1]).unwrap());
    }

    #[test]
    fn invariance_queries_on_clinical_model() {
        let tw = build_twin(&clinical(), &InterventionTarget::new([0])).unwrap();
        assert!(tw.implies_invariance(&[1], &[]).unwrap());
        assert!(!tw.implies_invariance(&[1], &[0]).unwrap());
    }

    #[test]
    fn disconnected_components_are_independent() {
        let g = DagWithSelection::new(3, 0, &[(0, 1)]).unwrap();
        let tw = build_twin(&g, &InterventionTarget::new([0])).unwrap();
        assert!(tw.implies_ci(&[0], &[2], &[]).unwrap());
        assert!(tw.implies_ci(&[1], &[2], &[0]).unwrap());
    }

    #[test]
    fn pooled_queries_cover_zeta() {
        let g = clinical();
        let tw = build_twin(&g, &InterventionTarget::new([0])).unwrap();
        let zeta_idx = g.d() as u32;
        assert!(tw.pooled_separated(zeta_idx, 1, &[]).unwrap());
        assert!(!tw.pooled_separated(zeta_idx, 1, &[0]).unwrap());
        assert!(!tw.pooled_separated(0, 1, &[zeta_idx]).unwrap());
    }
}
