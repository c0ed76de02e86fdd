//! Constraint-based structure recovery: adjacency search with sepset
//! tracking, orientation rules for partial mixed graphs, and the
//! circle-arrow promotion pass that is sound when bidirected edges
//! cannot occur.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::VertexKind;
use crate::mixed::{Mark, MixedGraph};

/// How a request to overwrite an already-oriented mark is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConflictPolicy {
    /// Conflicting requests are errors.
    Strict,
    /// The existing mark wins; the conflicting request is logged and dropped.
    Soft,
}

/// One recorded orientation step: `mark` was placed at `at` on the edge
/// between `at` and `other`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleFiring {
    pub rule: &'static str,
    pub at: u32,
    pub other: u32,
    pub mark: Mark,
}

/// A partially oriented mixed graph plus the separating sets found while
/// building its skeleton and an audit log of every orientation step.
#[derive(Debug, Clone, PartialEq)]
pub struct Pag {
    pub graph: MixedGraph,
    sepsets: BTreeMap<(u32, u32), Vec<u32>>,
    log: Vec<RuleFiring>,
    policy: ConflictPolicy,
}

fn norm(i: u32, j: u32) -> (u32, u32) {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

impl Pag {
    pub fn new(graph: MixedGraph, policy: ConflictPolicy) -> Self {
        Pag { graph, sepsets: BTreeMap::new(), log: Vec::new(), policy }
    }

    pub fn policy(&self) -> ConflictPolicy {
        self.policy
    }

    pub fn sepset(&self, i: u32, j: u32) -> Option<&[u32]> {
        self.sepsets.get(&norm(i, j)).map(|s| s.as_slice())
    }

    pub fn set_sepset(&mut self, i: u32, j: u32, c: Vec<u32>) {
        self.sepsets.insert(norm(i, j), c);
    }

    pub fn log(&self) -> &[RuleFiring] {
        &self.log
    }

    /// Places `mark` at `at` on the edge to `other`. Returns whether the
    /// graph changed. Circle marks may be overwritten; overwriting a tail
    /// or arrow with a different mark is a conflict resolved per policy.
    pub fn orient(&mut self, at: u32, other: u32, mark: Mark, rule: &'static str) -> Result<bool> {
        let current = self
            .graph
            .mark_at(at, other)
            .ok_or_else(|| Error::invalid(format!("no edge {at}-{other} to orient ({rule})")))?;
        if current == mark {
            return Ok(false);
        }
        if current != Mark::Circle {
            match self.policy {
                ConflictPolicy::Strict => {
                    return Err(Error::OrientationConflict {
                        i: at,
                        j: other,
                        detail: format!("{rule} wants {mark:?} over {current:?} at {at} on {at}-{other}"),
                    });
                }
                ConflictPolicy::Soft => {
                    log::warn!(
                        "dropped conflicting mark {mark:?} at {at} on {at}-{other} ({rule} vs existing {current:?})"
                    );
                    return Ok(false);
                }
            }
        }
        self.graph.set_mark(at, other, mark)?;
        self.log.push(RuleFiring { rule, at, other, mark });
        Ok(true)
    }

    /// Overwrites the mark unconditionally, recording the step. For facts
    /// that outrank inferred marks, such as injected knowledge or a
    /// deliberate retreat to a weaker claim.
    pub fn force_mark(&mut self, at: u32, other: u32, mark: Mark, rule: &'static str) -> Result<bool> {
        let current = self
            .graph
            .mark_at(at, other)
            .ok_or_else(|| Error::invalid(format!("no edge {at}-{other} to orient ({rule})")))?;
        if current == mark {
            return Ok(false);
        }
        if current != Mark::Circle {
            log::warn!("{rule} overwrote {current:?} with {mark:?} at {at} on {at}-{other}");
        }
        self.graph.set_mark(at, other, mark)?;
        self.log.push(RuleFiring { rule, at, other, mark });
        Ok(true)
    }
}

/// Settings for the adjacency search.
#[derive(Debug, Clone)]
pub struct FasOptions {
    /// Pairs that are never tested for removal and stay adjacent.
    pub protected: BTreeSet<(u32, u32)>,
    /// Cap on conditioning-set size; `None` means unbounded.
    pub max_cond_size: Option<usize>,
    pub policy: ConflictPolicy,
}

impl Default for FasOptions {
    fn default() -> Self {
        FasOptions { protected: BTreeSet::new(), max_cond_size: None, policy: ConflictPolicy::Strict }
    }
}

fn combinations(pool: &[u32], k: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if k > pool.len() {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| pool[i]).collect());
        // Advance the index vector lexicographically.
        let mut pos = k;
        while pos > 0 {
            pos -= 1;
            if idx[pos] != pos + pool.len() - k {
                idx[pos] += 1;
                for later in pos + 1..k {
                    idx[later] = idx[later - 1] + 1;
                }
                break;
            }
            if pos == 0 {
                return out;
            }
        }
        if k == 0 {
            return out;
        }
    }
}

/// Vertices reachable from `v` along paths whose every interior vertex is
/// either a collider on the path or the middle of a triangle.
pub fn possible_d_sep(graph: &MixedGraph, v: u32) -> Vec<u32> {
    let mut reached = BTreeSet::new();
    let mut visited: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut queue = VecDeque::new();
    for w in graph.neighbors(v) {
        reached.insert(w);
        visited.insert((v, w));
        queue.push_back((v, w));
    }
    while let Some((prev, cur)) = queue.pop_front() {
        for next in graph.neighbors(cur) {
            if next == prev || next == v || visited.contains(&(cur, next)) {
                continue;
            }
            let collider = graph.mark_at(cur, prev) == Some(Mark::Arrow)
                && graph.mark_at(cur, next) == Some(Mark::Arrow);
            let triangle = graph.is_adjacent(prev, next);
            if collider || triangle {
                reached.insert(next);
                visited.insert((cur, next));
                queue.push_back((cur, next));
            }
        }
    }
    reached.remove(&v);
    reached.into_iter().collect()
}

fn orient_v_structures(pag: &mut Pag) -> Result<()> {
    let n = pag.graph.n() as u32;
    for mid in 0..n {
        let nbrs: Vec<u32> = pag.graph.neighbors(mid).collect();
        for (ai, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[ai + 1..] {
                if pag.graph.is_adjacent(a, b) {
                    continue;
                }
                let Some(sep) = pag.sepsets.get(&norm(a, b)) else {
                    log::debug!("no sepset recorded for nonadjacent {a},{b}; skipping v-structure check");
                    continue;
                };
                if !sep.contains(&mid) {
                    pag.orient(mid, a, Mark::Arrow, "v-structure")?;
                    pag.orient(mid, b, Mark::Arrow, "v-structure")?;
                }
            }
        }
    }
    Ok(())
}

/// Skeleton search: level-wise conditioning on adjacency subsets, collider
/// orientation, then a possible-d-sep refinement pass with final
/// re-orientation. `query(i, j, c)` returns whether i and j are independent
/// given c.
pub fn fas<Q>(kinds: &[VertexKind], query: &mut Q, opts: &FasOptions) -> Result<Pag>
where
    Q: FnMut(u32, u32, &[u32]) -> Result<bool>,
{
    let n = kinds.len() as u32;
    for &(i, j) in &opts.protected {
        if i >= n || j >= n || i == j {
            return Err(Error::invalid(format!("protected pair ({i},{j}) out of range")));
        }
    }
    let mut graph = MixedGraph::new(kinds.to_vec());
    for i in 0..n {
        for j in i + 1..n {
            graph.add_edge(i, j, Mark::Circle, Mark::Circle)?;
        }
    }
    let mut pag = Pag::new(graph, opts.policy);

    let mut level = 0usize;
    loop {
        if let Some(cap) = opts.max_cond_size {
            if level > cap {
                break;
            }
        }
        let mut any_candidates = false;
        let pairs: Vec<(u32, u32)> = pag.graph.adjacencies().into_iter().collect();
        for (i, j) in pairs {
            if !pag.graph.is_adjacent(i, j) || opts.protected.contains(&norm(i, j)) {
                continue;
            }
            let mut cand: BTreeSet<Vec<u32>> = BTreeSet::new();
            for (u, v) in [(i, j), (j, i)] {
                let side: Vec<u32> = pag.graph.neighbors(u).filter(|&w| w != v).collect();
                if side.len() >= level {
                    any_candidates = true;
                    cand.extend(combinations(&side, level));
                }
            }
            for c in cand {
                if query(i, j, &c)? {
                    pag.graph.remove_edge(i, j)?;
                    pag.set_sepset(i, j, c);
                    break;
                }
            }
        }
        if !any_candidates {
            break;
        }
        level += 1;
    }

    orient_v_structures(&mut pag)?;

    // Refinement: retest each surviving edge against subsets drawn from the
    // possible-d-sep sets, which can separate pairs that no adjacency
    // neighborhood can.
    let pairs: Vec<(u32, u32)> = pag.graph.adjacencies().into_iter().collect();
    for (i, j) in pairs {
        if !pag.graph.is_adjacent(i, j) || opts.protected.contains(&norm(i, j)) {
            continue;
        }
        let mut cand: BTreeSet<Vec<u32>> = BTreeSet::new();
        let cap = opts.max_cond_size.unwrap_or(usize::MAX);
        for seed in [i, j] {
            let pool: Vec<u32> = possible_d_sep(&pag.graph, seed)
                .into_iter()
                .filter(|&w| w != i && w != j)
                .collect();
            for size in 1..=pool.len().min(cap) {
                cand.extend(combinations(&pool, size));
            }
        }
        let mut by_size: Vec<Vec<u32>> = cand.into_iter().collect();
        by_size.sort_by_key(|c| (c.len(), c.clone()));
        for c in by_size {
            if query(i, j, &c)? {
                pag.graph.remove_edge(i, j)?;
                pag.set_sepset(i, j, c);
                break;
            }
        }
    }

    // Orientations made before refinement may rest on removed edges; restart
    // from circles and redo the collider pass with the final sepsets.
    let adjacencies = pag.graph.adjacencies();
    for (i, j) in adjacencies {
        pag.graph.set_mark(i, j, Mark::Circle)?;
        pag.graph.set_mark(j, i, Mark::Circle)?;
    }
    pag.log.clear();
    orient_v_structures(&mut pag)?;
    Ok(pag)
}

/// Externally supplied orientation facts.
#[derive(Debug, Clone, Default)]
pub struct Knowledge {
    /// Vertices with no incoming marks: every incident edge points away.
    pub exogenous: BTreeSet<u32>,
    /// Directed edges (i, j) = i→j, applied only where the pair is adjacent.
    pub directed: Vec<(u32, u32)>,
}

impl Knowledge {
    pub fn exogenous(vs: impl IntoIterator<Item = u32>) -> Self {
        Knowledge { exogenous: vs.into_iter().collect(), directed: Vec::new() }
    }

    pub fn with_directed(mut self, edges: impl IntoIterator<Item = (u32, u32)>) -> Self {
        self.directed.extend(edges);
        self
    }
}

/// Knowledge is axiomatic, so it overwrites inferred marks rather than
/// deferring to them; overwrites are logged as warnings by `force_mark`.
pub fn apply_knowledge(pag: &mut Pag, knowledge: &Knowledge) -> Result<()> {
    for &z in &knowledge.exogenous {
        let nbrs: Vec<u32> = pag.graph.neighbors(z).collect();
        for v in nbrs {
            pag.force_mark(z, v, Mark::Tail, "knowledge-exogenous")?;
            pag.force_mark(v, z, Mark::Arrow, "knowledge-exogenous")?;
        }
    }
    for &(i, j) in &knowledge.directed {
        if !pag.graph.is_adjacent(i, j) {
            log::debug!("knowledge edge {i}->{j} skipped: pair not adjacent");
            continue;
        }
        pag.force_mark(i, j, Mark::Tail, "knowledge-directed")?;
        pag.force_mark(j, i, Mark::Arrow, "knowledge-directed")?;
    }
    Ok(())
}

fn rule_r1(pag: &mut Pag) -> Result<bool> {
    let n = pag.graph.n() as u32;
    let mut changed = false;
    for b in 0..n {
        let nbrs: Vec<u32> = pag.graph.neighbors(b).collect();
        for &a in &nbrs {
            if pag.graph.mark_at(b, a) != Some(Mark::Arrow) {
                continue;
            }
            for &c in &nbrs {
                if c == a || pag.graph.is_adjacent(a, c) {
                    continue;
                }
                if pag.graph.mark_at(b, c) == Some(Mark::Circle) {
                    changed |= pag.orient(b, c, Mark::Tail, "R1")?;
                    changed |= pag.orient(c, b, Mark::Arrow, "R1")?;
                }
            }
        }
    }
    Ok(changed)
}

fn rule_r2(pag: &mut Pag) -> Result<bool> {
    let n = pag.graph.n() as u32;
    let mut changed = false;
    for a in 0..n {
        let a_nbrs: Vec<u32> = pag.graph.neighbors(a).collect();
        for &c in &a_nbrs {
            if pag.graph.mark_at(c, a) != Some(Mark::Circle) {
                continue;
            }
            let fire = a_nbrs.iter().any(|&b| {
                b != c
                    && pag.graph.is_adjacent(b, c)
                    && ((pag.graph.has_directed_edge(a, b)
                        && pag.graph.mark_at(c, b) == Some(Mark::Arrow))
                        || (pag.graph.mark_at(b, a) == Some(Mark::Arrow)
                            && pag.graph.has_directed_edge(b, c)))
            });
            if fire {
                changed |= pag.orient(c, a, Mark::Arrow, "R2")?;
            }
        }
    }
    Ok(changed)
}

fn rule_r3(pag: &mut Pag) -> Result<bool> {
    let n = pag.graph.n() as u32;
    let mut changed = false;
    for b in 0..n {
        let nbrs: Vec<u32> = pag.graph.neighbors(b).collect();
        for &d in &nbrs {
            if pag.graph.mark_at(b, d) != Some(Mark::Circle) {
                continue;
            }
            let mut fire = false;
            for (ai, &a) in nbrs.iter().enumerate() {
                if fire {
                    break;
                }
                if a == d || pag.graph.mark_at(b, a) != Some(Mark::Arrow) {
                    continue;
                }
                for &c in &nbrs[ai + 1..] {
                    if c == d || pag.graph.mark_at(b, c) != Some(Mark::Arrow) {
                        continue;
                    }
                    if pag.graph.is_adjacent(a, c) {
                        continue;
                    }
                    if pag.graph.mark_at(d, a) == Some(Mark::Circle)
                        && pag.graph.mark_at(d, c) == Some(Mark::Circle)
                        && pag.graph.is_adjacent(d, a)
                        && pag.graph.is_adjacent(d, c)
                    {
                        fire = true;
                        break;
                    }
                }
            }
            if fire {
                changed |= pag.orient(b, d, Mark::Arrow, "R3")?;
            }
        }
    }
    Ok(changed)
}

/// Searches for a discriminating path ⟨t, .., a, b, c⟩: every vertex
/// strictly between t and b is a collider on the path and a parent of c,
/// and t is not adjacent to c. Returns the far endpoint t if one exists.
fn find_discriminating_endpoint(graph: &MixedGraph, a: u32, b: u32, c: u32) -> Option<u32> {
    if graph.mark_at(a, b) != Some(Mark::Arrow) || !graph.has_directed_edge(a, c) {
        return None;
    }
    let mut visited: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut queue = VecDeque::new();
    for x in graph.neighbors(a) {
        if x != b && x != c && graph.mark_at(a, x) == Some(Mark::Arrow) {
            visited.insert((x, a));
            queue.push_back((x, a));
        }
    }
    while let Some((u, w)) = queue.pop_front() {
        if !graph.is_adjacent(u, c) {
            return Some(u);
        }
        // u stays interior only as a collider on the path and a parent of c.
        if !graph.has_directed_edge(u, c) || graph.mark_at(u, w) != Some(Mark::Arrow) {
            continue;
        }
        for x in graph.neighbors(u) {
            if x == w || x == c || visited.contains(&(x, u)) {
                continue;
            }
            if graph.mark_at(u, x) == Some(Mark::Arrow) {
                visited.insert((x, u));
                queue.push_back((x, u));
            }
        }
    }
    None
}

fn rule_r4(pag: &mut Pag) -> Result<bool> {
    let n = pag.graph.n() as u32;
    let mut changed = false;
    for b in 0..n {
        let nbrs: Vec<u32> = pag.graph.neighbors(b).collect();
        for &c in &nbrs {
            if pag.graph.mark_at(b, c) != Some(Mark::Circle) {
                continue;
            }
            for &a in &nbrs {
                if a == c || !pag.graph.is_adjacent(a, c) {
                    continue;
                }
                let Some(t) = find_discriminating_endpoint(&pag.graph, a, b, c) else {
                    continue;
                };
                let Some(sep) = pag.sepsets.get(&norm(t, c)) else {
                    log::debug!("discriminating path {t}..{b}-{c} found but no sepset for ({t},{c})");
                    continue;
                };
                if sep.contains(&b) {
                    changed |= pag.orient(b, c, Mark::Tail, "R4")?;
                    changed |= pag.orient(c, b, Mark::Arrow, "R4")?;
                } else {
                    changed |= pag.orient(b, a, Mark::Arrow, "R4")?;
                    changed |= pag.orient(b, c, Mark::Arrow, "R4")?;
                    changed |= pag.orient(c, b, Mark::Arrow, "R4")?;
                }
                break;
            }
        }
    }
    Ok(changed)
}

fn circle_circle(graph: &MixedGraph, u: u32, v: u32) -> bool {
    graph.mark_at(u, v) == Some(Mark::Circle) && graph.mark_at(v, u) == Some(Mark::Circle)
}

/// Finds an uncovered all-circle path ⟨a, x1, .., xk, b⟩ with k ≥ 2, x1 not
/// adjacent to b and xk not adjacent to a. Returns the interior vertices.
fn find_uncovered_circle_path(graph: &MixedGraph, a: u32, b: u32) -> Option<Vec<u32>> {
    let starts: Vec<u32> = graph
        .neighbors(a)
        .filter(|&x| x != b && circle_circle(graph, a, x) && !graph.is_adjacent(x, b))
        .collect();
    for s in starts {
        let mut parent: BTreeMap<(u32, u32), (u32, u32)> = BTreeMap::new();
        let mut queue = VecDeque::new();
        queue.push_back((a, s));
        while let Some((prev, cur)) = queue.pop_front() {
            for next in graph.neighbors(cur) {
                if next == prev || graph.is_adjacent(prev, next) {
                    continue;
                }
                if next == b {
                    if graph.is_adjacent(cur, a) {
                        continue;
                    }
                    let mut interior = vec![cur];
                    let mut state = (prev, cur);
                    while state.0 != a {
                        state = parent[&state];
                        interior.push(state.1);
                    }
                    interior.reverse();
                    return Some(interior);
                }
                if next == a || !circle_circle(graph, cur, next) {
                    continue;
                }
                if let Entry::Vacant(slot) = parent.entry((cur, next)) {
                    slot.insert((prev, cur));
                    queue.push_back((cur, next));
                }
            }
        }
    }
    None
}

fn rule_r5(pag: &mut Pag) -> Result<bool> {
    let n = pag.graph.n() as u32;
    let mut changed = false;
    for a in 0..n {
        for b in a + 1..n {
            if !pag.graph.is_adjacent(a, b) || !circle_circle(&pag.graph, a, b) {
                continue;
            }
            let Some(interior) = find_uncovered_circle_path(&pag.graph, a, b) else {
                continue;
            };
            let mut path = vec![a];
            path.extend(interior);
            path.push(b);
            changed |= pag.orient(a, b, Mark::Tail, "R5")?;
            changed |= pag.orient(b, a, Mark::Tail, "R5")?;
            for w in path.windows(2) {
                changed |= pag.orient(w[0], w[1], Mark::Tail, "R5")?;
                changed |= pag.orient(w[1], w[0], Mark::Tail, "R5")?;
            }
        }
    }
    Ok(changed)
}

fn rule_r6(pag: &mut Pag) -> Result<bool> {
    let n = pag.graph.n() as u32;
    let mut changed = false;
    for b in 0..n {
        let nbrs: Vec<u32> = pag.graph.neighbors(b).collect();
        let has_undirected = nbrs.iter().any(|&a| pag.graph.has_undirected_edge(a, b));
        if !has_undirected {
            continue;
        }
        for &c in &nbrs {
            if pag.graph.mark_at(b, c) == Some(Mark::Circle)
                && !pag.graph.has_undirected_edge(b, c)
            {
                changed |= pag.orient(b, c, Mark::Tail, "R6")?;
            }
        }
    }
    Ok(changed)
}

fn rule_r7(pag: &mut Pag) -> Result<bool> {
    let n = pag.graph.n() as u32;
    let mut changed = false;
    for b in 0..n {
        let nbrs: Vec<u32> = pag.graph.neighbors(b).collect();
        for &a in &nbrs {
            if pag.graph.mark_at(a, b) != Some(Mark::Tail)
                || pag.graph.mark_at(b, a) != Some(Mark::Circle)
            {
                continue;
            }
            for &c in &nbrs {
                if c == a || pag.graph.is_adjacent(a, c) {
                    continue;
                }
                if pag.graph.mark_at(b, c) == Some(Mark::Circle) {
                    changed |= pag.orient(b, c, Mark::Tail, "R7")?;
                }
            }
        }
    }
    Ok(changed)
}

fn rule_r8(pag: &mut Pag) -> Result<bool> {
    let n = pag.graph.n() as u32;
    let mut changed = false;
    for a in 0..n {
        let nbrs: Vec<u32> = pag.graph.neighbors(a).collect();
        for &c in &nbrs {
            if pag.graph.mark_at(a, c) != Some(Mark::Circle)
                || pag.graph.mark_at(c, a) != Some(Mark::Arrow)
            {
                continue;
            }
            let fire = nbrs.iter().any(|&b| {
                b != c
                    && pag.graph.has_directed_edge(b, c)
                    && (pag.graph.has_directed_edge(a, b)
                        || (pag.graph.mark_at(a, b) == Some(Mark::Tail)
                            && pag.graph.mark_at(b, a) == Some(Mark::Circle)))
            });
            if fire {
                changed |= pag.orient(a, c, Mark::Tail, "R8")?;
            }
        }
    }
    Ok(changed)
}

fn potentially_directed(graph: &MixedGraph, u: u32, v: u32) -> bool {
    graph.mark_at(u, v) != Some(Mark::Arrow) && graph.mark_at(v, u) != Some(Mark::Tail)
}

/// Depth search for an uncovered potentially-directed path from `a` to
/// `goal` whose first vertex is `first`. Endpoint adjacency along the way
/// follows the uncovered condition only.
fn uncovered_pd_path_reaches(graph: &MixedGraph, a: u32, first: u32, goal: u32) -> bool {
    if first == goal {
        return true;
    }
    let mut visited: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut stack = vec![(a, first)];
    visited.insert((a, first));
    while let Some((prev, cur)) = stack.pop() {
        for next in graph.neighbors(cur) {
            if next == prev || next == a || graph.is_adjacent(prev, next) {
                continue;
            }
            if !potentially_directed(graph, cur, next) {
                continue;
            }
            if next == goal {
                return true;
            }
            if !visited.contains(&(cur, next)) {
                visited.insert((cur, next));
                stack.push((cur, next));
            }
        }
    }
    false
}

fn rule_r9(pag: &mut Pag) -> Result<bool> {
    let n = pag.graph.n() as u32;
    let mut changed = false;
    for a in 0..n {
        let nbrs: Vec<u32> = pag.graph.neighbors(a).collect();
        for &c in &nbrs {
            if pag.graph.mark_at(a, c) != Some(Mark::Circle)
                || pag.graph.mark_at(c, a) != Some(Mark::Arrow)
            {
                continue;
            }
            let fire = nbrs.iter().any(|&b| {
                b != c
                    && !pag.graph.is_adjacent(b, c)
                    && potentially_directed(&pag.graph, a, b)
                    && uncovered_pd_path_reaches(&pag.graph, a, b, c)
            });
            if fire {
                changed |= pag.orient(a, c, Mark::Tail, "R9")?;
            }
        }
    }
    Ok(changed)
}

fn rule_r10(pag: &mut Pag) -> Result<bool> {
    let n = pag.graph.n() as u32;
    let mut changed = false;
    for a in 0..n {
        let nbrs: Vec<u32> = pag.graph.neighbors(a).collect();
        for &c in &nbrs {
            if pag.graph.mark_at(a, c) != Some(Mark::Circle)
                || pag.graph.mark_at(c, a) != Some(Mark::Arrow)
            {
                continue;
            }
            let parents: Vec<u32> = pag
                .graph
                .neighbors(c)
                .filter(|&p| p != a && pag.graph.has_directed_edge(p, c))
                .collect();
            if parents.is_empty() {
                continue;
            }
            // First-step vertices from which some parent of c is reachable
            // along an uncovered potentially-directed path.
            let firsts: Vec<u32> = nbrs
                .iter()
                .copied()
                .filter(|&m| m != c && potentially_directed(&pag.graph, a, m))
                .filter(|&m| {
                    parents.iter().any(|&p| uncovered_pd_path_reaches(&pag.graph, a, m, p))
                })
                .collect();
            let fire = firsts.iter().enumerate().any(|(i, &mu)| {
                firsts[i + 1..]
                    .iter()
                    .any(|&omega| !pag.graph.is_adjacent(mu, omega))
            });
            if fire {
                changed |= pag.orient(a, c, Mark::Tail, "R10")?;
            }
        }
    }
    Ok(changed)
}

/// Applies the ten orientation rules until none fires.
pub fn zhang_rules(pag: &mut Pag) -> Result<bool> {
    let mut ever = false;
    loop {
        let mut changed = false;
        changed |= rule_r1(pag)?;
        changed |= rule_r2(pag)?;
        changed |= rule_r3(pag)?;
        changed |= rule_r4(pag)?;
        changed |= rule_r5(pag)?;
        changed |= rule_r6(pag)?;
        changed |= rule_r7(pag)?;
        changed |= rule_r8(pag)?;
        changed |= rule_r9(pag)?;
        changed |= rule_r10(pag)?;
        if !changed {
            return Ok(ever);
        }
        ever = true;
    }
}

fn promote_circle_arrows(pag: &mut Pag) -> Result<bool> {
    let edges: Vec<(u32, u32)> = pag.graph.adjacencies().into_iter().collect();
    let mut changed = false;
    for (i, j) in edges {
        for (u, v) in [(i, j), (j, i)] {
            if pag.graph.mark_at(u, v) == Some(Mark::Circle)
                && pag.graph.mark_at(v, u) == Some(Mark::Arrow)
            {
                changed |= pag.orient(u, v, Mark::Tail, "promote")?;
            }
        }
    }
    Ok(changed)
}

/// Orientation-rule closure plus promotion of every ∘→ edge to →, repeated
/// until stable. Promotion is sound only when bidirected edges cannot occur,
/// which holds for graphs produced by selection without latent confounding.
pub fn fci_plus(pag: &mut Pag) -> Result<()> {
    loop {
        zhang_rules(pag)?;
        if !promote_circle_arrows(pag)? {
            return Ok(());
        }
    }
}
