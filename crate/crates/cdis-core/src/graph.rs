//! Directed acyclic graphs with kind-tagged vertices, reachability, and
//! exact d-separation.
//!
//! Two graph types live here: [`Dag`], the general DAG used for causal
//! models and twin graphs alike, and [`DagWithSelection`], the ground-truth
//! model over `d` observed vertices plus `t` childless selection vertices.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Role of a vertex inside a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    /// A measured system variable (X_i).
    Observed,
    /// A childless binary selection vertex; samples are kept iff all of
    /// these equal one.
    Selection,
    /// Marginalized-out vertex with no special role.
    Latent,
    /// The exogenous intervention indicator.
    Zeta,
    /// Shared exogenous noise of a split vertex.
    Noise,
    /// Basal-world copy of an intervention-affected vertex.
    Counterfactual,
}

/// A vertex handle: dense index plus its immutable kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VertexId {
    pub index: u32,
    pub kind: VertexKind,
}

/// Immutable DAG over kind-tagged vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    kinds: Vec<VertexKind>,
    parents: Vec<Vec<u32>>,
    children: Vec<Vec<u32>>,
}

impl Dag {
    /// Builds a DAG from an edge list, rejecting self-loops, duplicate
    /// edges, out-of-range indices, and cycles.
    pub fn new(kinds: Vec<VertexKind>, edges: &[(u32, u32)]) -> Result<Self> {
        let n = kinds.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(p, c) in edges {
            if p as usize >= n || c as usize >= n {
                return Err(Error::malformed(format!(
                    "edge ({p},{c}) references a vertex outside 0..{n}"
                )));
            }
            if p == c {
                return Err(Error::malformed(format!("self-loop at vertex {p}")));
            }
            if children[p as usize].contains(&c) {
                return Err(Error::malformed(format!("duplicate edge ({p},{c})")));
            }
            children[p as usize].push(c);
            parents[c as usize].push(p);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }
        let dag = Dag { kinds, parents, children };
        dag.try_topological_order()?;
        Ok(dag)
    }

    pub fn n(&self) -> usize {
        self.kinds.len()
    }

    pub fn kind(&self, v: u32) -> Result<VertexKind> {
        self.kinds
            .get(v as usize)
            .copied()
            .ok_or_else(|| Error::invalid(format!("unknown vertex {v}")))
    }

    pub fn kinds(&self) -> &[VertexKind] {
        &self.kinds
    }

    pub fn vertex(&self, v: u32) -> Result<VertexId> {
        Ok(VertexId { index: v, kind: self.kind(v)? })
    }

    pub fn parents(&self, v: u32) -> &[u32] {
        &self.parents[v as usize]
    }

    pub fn children(&self, v: u32) -> &[u32] {
        &self.children[v as usize]
    }

    pub fn has_edge(&self, p: u32, c: u32) -> bool {
        (p as usize) < self.n() && self.children[p as usize].binary_search(&c).is_ok()
    }

    /// All edges as (parent, child), sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for (p, ch) in self.children.iter().enumerate() {
            for &c in ch {
                out.push((p as u32, c));
            }
        }
        out
    }

    fn check_vertices(&self, set: &[u32]) -> Result<()> {
        for &v in set {
            if v as usize >= self.n() {
                return Err(Error::invalid(format!("unknown vertex {v}")));
            }
        }
        Ok(())
    }

    /// Reflexive ancestor closure of `seed`, sorted.
    pub fn ancestors(&self, seed: &[u32]) -> Result<Vec<u32>> {
        self.closure(seed, |v| self.parents(v))
    }

    /// Reflexive descendant closure of `seed`, sorted.
    pub fn descendants(&self, seed: &[u32]) -> Result<Vec<u32>> {
        self.closure(seed, |v| self.children(v))
    }

    fn closure<'a>(&'a self, seed: &[u32], step: impl Fn(u32) -> &'a [u32]) -> Result<Vec<u32>> {
        self.check_vertices(seed)?;
        let mut seen = vec![false; self.n()];
        let mut queue: VecDeque<u32> = VecDeque::new();
        for &v in seed {
            if !seen[v as usize] {
                seen[v as usize] = true;
                queue.push_back(v);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &w in step(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push_back(w);
                }
            }
        }
        Ok(collect_set(&seen))
    }

    fn try_topological_order(&self) -> Result<Vec<u32>> {
        let n = self.n();
        let mut indeg: Vec<usize> = (0..n).map(|v| self.parents[v].len()).collect();
        // Smallest-index-first tie break keeps the order deterministic.
        let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<u32>> = (0..n as u32)
            .filter(|&v| indeg[v as usize] == 0)
            .map(std::cmp::Reverse)
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(std::cmp::Reverse(v)) = ready.pop() {
            order.push(v);
            for &c in self.children(v) {
                indeg[c as usize] -= 1;
                if indeg[c as usize] == 0 {
                    ready.push(std::cmp::Reverse(c));
                }
            }
        }
        if order.len() != n {
            return Err(Error::malformed("graph contains a directed cycle"));
        }
        Ok(order)
    }

    /// Deterministic topological order (ties broken by vertex index).
    pub fn topological_order(&self) -> Vec<u32> {
        self.try_topological_order()
            .expect("constructed Dag is acyclic")
    }

    /// Exact d-separation test between vertex sets `a` and `b` given `c`,
    /// by reachability over (vertex, approach-direction) states.
    pub fn d_separated(&self, a: &[u32], b: &[u32], c: &[u32]) -> Result<bool> {
        self.check_vertices(a)?;
        self.check_vertices(b)?;
        self.check_vertices(c)?;
        check_disjoint(a, b, "a", "b")?;
        check_disjoint(a, c, "a", "c")?;
        check_disjoint(b, c, "b", "c")?;

        let n = self.n();
        let mut in_c = vec![false; n];
        for &v in c {
            in_c[v as usize] = true;
        }
        let mut anc_c = vec![false; n];
        for v in self.ancestors(c)? {
            anc_c[v as usize] = true;
        }
        let mut in_b = vec![false; n];
        for &v in b {
            in_b[v as usize] = true;
        }

        // State (v, dir): dir = 0 approached from a child (moving up),
        // dir = 1 approached from a parent (moving down).
        const UP: usize = 0;
        const DOWN: usize = 1;
        let mut visited = vec![[false; 2]; n];
        let mut queue: VecDeque<(u32, usize)> = a.iter().map(|&v| (v, UP)).collect();
        while let Some((v, dir)) = queue.pop_front() {
            if visited[v as usize][dir] {
                continue;
            }
            visited[v as usize][dir] = true;
            if !in_c[v as usize] && in_b[v as usize] {
                return Ok(false);
            }
            if dir == UP && !in_c[v as usize] {
                for &p in self.parents(v) {
                    queue.push_back((p, UP));
                }
                for &ch in self.children(v) {
                    queue.push_back((ch, DOWN));
                }
            } else if dir == DOWN {
                if !in_c[v as usize] {
                    for &ch in self.children(v) {
                        queue.push_back((ch, DOWN));
                    }
                }
                if anc_c[v as usize] {
                    for &p in self.parents(v) {
                        queue.push_back((p, UP));
                    }
                }
            }
        }
        Ok(true)
    }
}

fn collect_set(flags: &[bool]) -> Vec<u32> {
    flags
        .iter()
        .enumerate()
        .filter_map(|(i, &f)| f.then_some(i as u32))
        .collect()
}

fn check_disjoint(x: &[u32], y: &[u32], xn: &str, yn: &str) -> Result<()> {
    for &v in x {
        if y.contains(&v) {
            return Err(Error::invalid(format!(
                "sets {xn} and {yn} overlap at vertex {v}"
            )));
        }
    }
    Ok(())
}

/// Serialized form of [`DagWithSelection`]: selection vertices occupy the
/// trailing index range `d..d+t`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub d: usize,
    pub t: usize,
    pub edges: Vec<(u32, u32)>,
}

/// Ground-truth causal model: a DAG over `d` observed vertices indexed
/// `0..d` and `t` childless selection vertices indexed `d..d+t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct DagWithSelection {
    dag: Dag,
    d: usize,
    t: usize,
}

impl DagWithSelection {
    pub fn new(d: usize, t: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut kinds = vec![VertexKind::Observed; d];
        kinds.resize(d + t, VertexKind::Selection);
        for &(p, c) in edges {
            if p as usize >= d {
                return Err(Error::malformed(format!(
                    "vertex {p} is not observed and cannot have children (selection vertices are sinks)"
                )));
            }
            let _ = c; // range checked by Dag::new
        }
        let dag = Dag::new(kinds, edges)?;
        Ok(DagWithSelection { dag, d, t })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn n(&self) -> usize {
        self.d + self.t
    }

    pub fn observed(&self) -> impl Iterator<Item = u32> {
        0..self.d as u32
    }

    pub fn selection(&self) -> impl Iterator<Item = u32> {
        self.d as u32..(self.d + self.t) as u32
    }

    pub fn edges(&self) -> Vec<(u32, u32)> {
        self.dag.edges()
    }

    /// Observed vertices with a directed path into some selection vertex
    /// (parents of S included), sorted.
    pub fn ancestrally_selected(&self) -> Vec<u32> {
        let seed: Vec<u32> = self.selection().collect();
        self.dag
            .ancestors(&seed)
            .expect("selection vertices are in range")
            .into_iter()
            .filter(|&v| (v as usize) < self.d)
            .collect()
    }

    /// Observed descendants of `target` (reflexive), sorted.
    pub fn affected_by(&self, target: &[u32]) -> Result<Vec<u32>> {
        for &v in target {
            if v as usize >= self.d {
                return Err(Error::invalid(format!(
                    "intervention target {v} is not an observed vertex"
                )));
            }
        }
        Ok(self
            .dag
            .descendants(target)?
            .into_iter()
            .filter(|&v| (v as usize) < self.d)
            .collect())
    }
}

impl TryFrom<GraphJson> for DagWithSelection {
    type Error = Error;

    fn try_from(j: GraphJson) -> Result<Self> {
        DagWithSelection::new(j.d, j.t, &j.edges)
    }
}

impl From<DagWithSelection> for GraphJson {
    fn from(g: DagWithSelection) -> GraphJson {
        GraphJson { d: g.d, t: g.t, edges: g.edges() }
    }
}
