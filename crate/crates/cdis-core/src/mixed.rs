//! Mixed graphs with endpoint marks: the shared representation for MAGs
//! and PAGs, plus m-separation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::VertexKind;

/// Edge endpoint mark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mark {
    Tail,
    Arrow,
    Circle,
}

/// Undirected-pair edge with one mark per endpoint.
///
/// `mark_i` sits at vertex `i`, `mark_j` at `j`; an edge i→j is
/// `(Tail, Arrow)`, i—j is `(Tail, Tail)`, i↔j is `(Arrow, Arrow)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixedEdge {
    pub i: u32,
    pub j: u32,
    pub mark_i: Mark,
    pub mark_j: Mark,
}

/// Serialization schema for [`MixedGraph`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixedGraphJson {
    pub vertices: Vec<VertexKind>,
    pub edges: Vec<MixedEdge>,
}

/// A graph whose edges carry two endpoint marks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MixedGraphJson", into = "MixedGraphJson")]
pub struct MixedGraph {
    kinds: Vec<VertexKind>,
    // Keyed by (min, max); values are (mark at min, mark at max).
    edges: BTreeMap<(u32, u32), (Mark, Mark)>,
    adj: Vec<BTreeSet<u32>>,
}

impl TryFrom<MixedGraphJson> for MixedGraph {
    type Error = Error;

    fn try_from(json: MixedGraphJson) -> Result<Self> {
        let mut g = MixedGraph::new(json.vertices);
        for e in json.edges {
            g.add_edge(e.i, e.j, e.mark_i, e.mark_j)?;
        }
        Ok(g)
    }
}

impl From<MixedGraph> for MixedGraphJson {
    fn from(g: MixedGraph) -> Self {
        MixedGraphJson { edges: g.edges().collect(), vertices: g.kinds }
    }
}

impl MixedGraph {
    pub fn new(kinds: Vec<VertexKind>) -> Self {
        let n = kinds.len();
        MixedGraph { kinds, edges: BTreeMap::new(), adj: vec![BTreeSet::new(); n] }
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

    fn key(i: u32, j: u32) -> (u32, u32) {
        if i < j {
            (i, j)
        } else {
            (j, i)
        }
    }

    pub fn add_edge(&mut self, i: u32, j: u32, mark_i: Mark, mark_j: Mark) -> Result<()> {
        if i as usize >= self.n() || j as usize >= self.n() {
            return Err(Error::invalid(format!("edge ({i},{j}) out of range")));
        }
        if i == j {
            return Err(Error::malformed(format!("self-loop at vertex {i}")));
        }
        let key = Self::key(i, j);
        if self.edges.contains_key(&key) {
            return Err(Error::malformed(format!("duplicate edge ({i},{j})")));
        }
        let value = if i < j { (mark_i, mark_j) } else { (mark_j, mark_i) };
        self.edges.insert(key, value);
        self.adj[i as usize].insert(j);
        self.adj[j as usize].insert(i);
        Ok(())
    }

    pub fn remove_edge(&mut self, i: u32, j: u32) -> Result<()> {
        let key = Self::key(i, j);
        if self.edges.remove(&key).is_none() {
            return Err(Error::invalid(format!("no edge ({i},{j}) to remove")));
        }
        self.adj[i as usize].remove(&j);
        self.adj[j as usize].remove(&i);
        Ok(())
    }

    pub fn is_adjacent(&self, i: u32, j: u32) -> bool {
        self.edges.contains_key(&Self::key(i, j))
    }

    /// Mark at `v` on the edge between `v` and `other`, if adjacent.
    pub fn mark_at(&self, v: u32, other: u32) -> Option<Mark> {
        let (a, b) = self.edges.get(&Self::key(v, other))?;
        Some(if v < other { *a } else { *b })
    }

    /// Overwrites the mark at `v` on edge {v, other}. Low-level mutator;
    /// refinement policies (monotonicity, conflicts) live in the PAG layer.
    pub fn set_mark(&mut self, v: u32, other: u32, mark: Mark) -> Result<()> {
        let key = Self::key(v, other);
        let entry = self
            .edges
            .get_mut(&key)
            .ok_or_else(|| Error::invalid(format!("no edge ({v},{other})")))?;
        if v < other {
            entry.0 = mark;
        } else {
            entry.1 = mark;
        }
        Ok(())
    }

    pub fn neighbors(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        self.adj[v as usize].iter().copied()
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = MixedEdge> + '_ {
        self.edges.iter().map(|(&(i, j), &(mark_i, mark_j))| MixedEdge {
            i,
            j,
            mark_i,
            mark_j,
        })
    }

    pub fn adjacencies(&self) -> BTreeSet<(u32, u32)> {
        self.edges.keys().copied().collect()
    }

    /// Rebuilds the graph with vertex `v` renamed to `perm[v]`.
    /// `perm` must be a permutation of `0..n`.
    pub fn relabel(&self, perm: &[u32]) -> Result<MixedGraph> {
        if perm.len() != self.n() {
            return Err(Error::invalid("relabeling has wrong length"));
        }
        let mut kinds = vec![None; self.n()];
        for (v, &w) in perm.iter().enumerate() {
            let slot = kinds
                .get_mut(w as usize)
                .ok_or_else(|| Error::invalid(format!("relabel target {w} out of range")))?;
            if slot.is_some() {
                return Err(Error::invalid(format!("relabel target {w} repeated")));
            }
            *slot = Some(self.kinds[v]);
        }
        let mut out = MixedGraph::new(kinds.into_iter().map(Option::unwrap).collect());
        for e in self.edges() {
            out.add_edge(
                perm[e.i as usize],
                perm[e.j as usize],
                e.mark_i,
                e.mark_j,
            )?;
        }
        Ok(out)
    }

    /// True iff the edge is exactly i→j (tail at i, arrow at j).
    pub fn has_directed_edge(&self, i: u32, j: u32) -> bool {
        self.mark_at(i, j) == Some(Mark::Tail) && self.mark_at(j, i) == Some(Mark::Arrow)
    }

    /// True iff the edge is exactly i—j.
    pub fn has_undirected_edge(&self, i: u32, j: u32) -> bool {
        self.mark_at(i, j) == Some(Mark::Tail) && self.mark_at(j, i) == Some(Mark::Tail)
    }

    /// True iff the edge is exactly i↔j.
    pub fn has_bidirected_edge(&self, i: u32, j: u32) -> bool {
        self.mark_at(i, j) == Some(Mark::Arrow) && self.mark_at(j, i) == Some(Mark::Arrow)
    }

    pub fn has_circle(&self) -> bool {
        self.edges
            .values()
            .any(|&(a, b)| a == Mark::Circle || b == Mark::Circle)
    }

    /// Vertices reachable from `seed` by following fully directed edges
    /// forward (reflexive), sorted.
    pub fn directed_descendants(&self, seed: &[u32]) -> Result<Vec<u32>> {
        self.directed_closure(seed, true)
    }

    /// Vertices with a directed path into `seed` (reflexive), sorted.
    pub fn directed_ancestors(&self, seed: &[u32]) -> Result<Vec<u32>> {
        self.directed_closure(seed, false)
    }

    fn directed_closure(&self, seed: &[u32], forward: bool) -> Result<Vec<u32>> {
        for &v in seed {
            if v as usize >= self.n() {
                return Err(Error::invalid(format!("unknown vertex {v}")));
            }
        }
        let mut seen = vec![false; self.n()];
        let mut queue: VecDeque<u32> = VecDeque::new();
        for &v in seed {
            if !seen[v as usize] {
                seen[v as usize] = true;
                queue.push_back(v);
            }
        }
        while let Some(v) = queue.pop_front() {
            for w in self.neighbors(v) {
                let step = if forward {
                    self.has_directed_edge(v, w)
                } else {
                    self.has_directed_edge(w, v)
                };
                if step && !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push_back(w);
                }
            }
        }
        Ok((0..self.n() as u32).filter(|&v| seen[v as usize]).collect())
    }

    /// Unordered v-structure triples (i, mid, j) with i < j: i, j not
    /// adjacent and both edge marks at mid are arrows.
    pub fn v_structures(&self) -> Vec<(u32, u32, u32)> {
        let mut out = Vec::new();
        for mid in 0..self.n() as u32 {
            let nbrs: Vec<u32> = self.neighbors(mid).collect();
            for (a, &i) in nbrs.iter().enumerate() {
                for &j in &nbrs[a + 1..] {
                    if self.is_adjacent(i, j) {
                        continue;
                    }
                    if self.mark_at(mid, i) == Some(Mark::Arrow)
                        && self.mark_at(mid, j) == Some(Mark::Arrow)
                    {
                        out.push((i, mid, j));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Checks the ancestral-graph conditions for a MAG: no circle marks,
    /// no directed or almost-directed cycle, and no arrowhead into an
    /// endpoint of an undirected edge.
    pub fn validate_mag(&self) -> Result<()> {
        if self.has_circle() {
            return Err(Error::malformed("circle marks present; not a MAG"));
        }
        // Directed part must be acyclic.
        let mut suborder: Vec<Vec<u32>> = vec![Vec::new(); self.n()];
        for e in self.edges() {
            if e.mark_i == Mark::Tail && e.mark_j == Mark::Arrow {
                suborder[e.i as usize].push(e.j);
            } else if e.mark_i == Mark::Arrow && e.mark_j == Mark::Tail {
                suborder[e.j as usize].push(e.i);
            }
        }
        let mut state = vec![0u8; self.n()];
        for v in 0..self.n() as u32 {
            if state[v as usize] == 0 && has_cycle_from(v, &suborder, &mut state) {
                return Err(Error::malformed("directed cycle in MAG"));
            }
        }
        for e in self.edges() {
            if e.mark_i == Mark::Arrow && e.mark_j == Mark::Arrow {
                let anc_i = self.directed_ancestors(&[e.i])?;
                if anc_i.contains(&e.j) {
                    return Err(Error::malformed(format!(
                        "almost-directed cycle: {}↔{} with {} an ancestor of {}",
                        e.i, e.j, e.j, e.i
                    )));
                }
                let anc_j = self.directed_ancestors(&[e.j])?;
                if anc_j.contains(&e.i) {
                    return Err(Error::malformed(format!(
                        "almost-directed cycle: {}↔{} with {} an ancestor of {}",
                        e.i, e.j, e.i, e.j
                    )));
                }
            }
            if e.mark_i == Mark::Tail && e.mark_j == Mark::Tail {
                for &(v, o) in &[(e.i, e.j), (e.j, e.i)] {
                    let _ = o;
                    let spouse_or_parent = self
                        .neighbors(v)
                        .any(|w| self.mark_at(v, w) == Some(Mark::Arrow));
                    if spouse_or_parent {
                        return Err(Error::malformed(format!(
                            "undirected edge {}—{} with an arrowhead into {}",
                            e.i, e.j, v
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// m-separation of `i` and `j` given `c` on a MAG: a path is open iff
    /// every non-collider on it is outside `c` and every collider has a
    /// directed descendant in `c` (reflexive).
    pub fn m_separated(&self, i: u32, j: u32, c: &[u32]) -> Result<bool> {
        if self.has_circle() {
            return Err(Error::invalid(
                "m-separation is defined on MAGs; circle marks present",
            ));
        }
        if i as usize >= self.n() || j as usize >= self.n() {
            return Err(Error::invalid("m-separation endpoint out of range"));
        }
        if i == j {
            return Err(Error::invalid("m-separation endpoints must differ"));
        }
        if c.contains(&i) || c.contains(&j) {
            return Err(Error::invalid("conditioning set contains an endpoint"));
        }
        let n = self.n();
        let mut in_c = vec![false; n];
        for &v in c {
            if v as usize >= n {
                return Err(Error::invalid(format!("unknown vertex {v}")));
            }
            in_c[v as usize] = true;
        }
        let mut anc_c = vec![false; n];
        for v in self.directed_ancestors(c)? {
            anc_c[v as usize] = true;
        }

        // States: (vertex, mark at that vertex on the edge we entered by).
        let mark_idx = |m: Mark| match m {
            Mark::Tail => 0usize,
            Mark::Arrow => 1,
            Mark::Circle => unreachable!("validated above"),
        };
        let mut visited = vec![[false; 2]; n];
        let mut queue: VecDeque<(u32, Mark)> = VecDeque::new();
        for w in self.neighbors(i) {
            let m = self.mark_at(w, i).expect("adjacent");
            queue.push_back((w, m));
        }
        while let Some((v, entry)) = queue.pop_front() {
            if v == j {
                return Ok(false);
            }
            if visited[v as usize][mark_idx(entry)] {
                continue;
            }
            visited[v as usize][mark_idx(entry)] = true;
            for w in self.neighbors(v) {
                let out_mark = self.mark_at(v, w).expect("adjacent");
                let collider = entry == Mark::Arrow && out_mark == Mark::Arrow;
                let open = if collider {
                    anc_c[v as usize]
                } else {
                    !in_c[v as usize]
                };
                if open {
                    queue.push_back((w, self.mark_at(w, v).expect("adjacent")));
                }
            }
        }
        Ok(true)
    }
}

fn has_cycle_from(v: u32, order: &[Vec<u32>], state: &mut [u8]) -> bool {
    state[v as usize] = 1;
    for &w in &order[v as usize] {
        match state[w as usize] {
            0 => {
                if has_cycle_from(w, order, state) {
                    return true;
                }
            }
            1 => return true,
            _ => {}
        }
    }
    state[v as usize] = 2;
    false
}
