//! Markov equivalence of (graph, intervention-target collection) pairs.
//!
//! The graphical criterion compares per-target twin MAGs on adjacencies
//! and v-structures only. A brute-force signature of all implied
//! conditional independencies and invariances serves as the oracle it is
//! tested against, and small-model enumeration provides the universes.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DagWithSelection;
use crate::mag::mag_of_twin;
use crate::twin::{build_twin, InterventionTarget};

/// Ordered collection of intervention targets; the first is always the
/// empty (observational) target.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<InterventionTarget>", into = "Vec<InterventionTarget>")]
pub struct TargetCollection {
    targets: Vec<InterventionTarget>,
}

impl TargetCollection {
    pub fn new(targets: Vec<InterventionTarget>) -> Result<Self> {
        match targets.first() {
            Some(t) if t.is_empty() => Ok(TargetCollection { targets }),
            Some(_) => Err(Error::invalid(
                "the first intervention target must be empty (the observational setting)",
            )),
            None => Err(Error::invalid("a target collection cannot be empty")),
        }
    }

    /// Just the observational setting.
    pub fn observational() -> Self {
        TargetCollection { targets: vec![InterventionTarget::empty()] }
    }

    /// Prepends the observational setting to the given experiments.
    pub fn with_interventions(targets: impl IntoIterator<Item = InterventionTarget>) -> Self {
        let mut all = vec![InterventionTarget::empty()];
        all.extend(targets);
        TargetCollection { targets: all }
    }

    /// Number of settings, observational included.
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of interventional settings.
    pub fn num_interventions(&self) -> usize {
        self.targets.len() - 1
    }

    pub fn get(&self, k: usize) -> Option<&InterventionTarget> {
        self.targets.get(k)
    }

    pub fn iter(&self) -> impl Iterator<Item = &InterventionTarget> {
        self.targets.iter()
    }
}

impl TryFrom<Vec<InterventionTarget>> for TargetCollection {
    type Error = Error;

    fn try_from(targets: Vec<InterventionTarget>) -> Result<Self> {
        TargetCollection::new(targets)
    }
}

impl From<TargetCollection> for Vec<InterventionTarget> {
    fn from(t: TargetCollection) -> Self {
        t.targets
    }
}

/// Everything the model claims about its distributions, spelled out: for
/// each setting the pairwise conditional independencies, and for each
/// setting the invariances of single-variable conditionals relative to
/// the observational setting. Conditioning sets are bitmasks over the
/// observed vertices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CiSignature {
    d: usize,
    settings: usize,
    ci: BTreeSet<(u32, u32, u32, u32)>,
    invariance: BTreeSet<(u32, u32, u32)>,
}

impl CiSignature {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn settings(&self) -> usize {
        self.settings
    }

    pub fn holds_ci(&self, setting: u32, i: u32, j: u32, cond_mask: u32) -> bool {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.ci.contains(&(setting, a, b, cond_mask))
    }

    pub fn holds_invariance(&self, setting: u32, j: u32, cond_mask: u32) -> bool {
        self.invariance.contains(&(setting, j, cond_mask))
    }

    pub fn ci_count(&self) -> usize {
        self.ci.len()
    }
}

fn mask_to_set(mask: u32) -> Vec<u32> {
    (0..32).filter(|b| mask >> b & 1 == 1).collect()
}

/// Enumerates every implied statement of a model. Exponential in the
/// vertex count, so guarded; intended as a ground-truth oracle.
pub fn ci_signature(g: &DagWithSelection, t: &TargetCollection) -> Result<CiSignature> {
    let d = g.d();
    if d > 8 {
        return Err(Error::ResourceLimit(format!(
            "signature enumeration needs 2^D conditioning sets; D = {d} exceeds the guard of 8"
        )));
    }
    let mut sig = CiSignature {
        d,
        settings: t.len(),
        ci: BTreeSet::new(),
        invariance: BTreeSet::new(),
    };
    for (k, target) in t.iter().enumerate() {
        let tw = build_twin(g, target)?;
        let k = k as u32;
        for i in 0..d as u32 {
            for j in (i + 1)..d as u32 {
                let free = (0..d as u32).filter(|&v| v != i && v != j);
                for mask in submasks(free) {
                    if tw.implies_ci(&[i], &[j], &mask_to_set(mask))? {
                        sig.ci.insert((k, i, j, mask));
                    }
                }
            }
            for mask in submasks((0..d as u32).filter(|&v| v != i)) {
                if tw.implies_invariance(&[i], &mask_to_set(mask))? {
                    sig.invariance.insert((k, i, mask));
                }
            }
        }
    }
    Ok(sig)
}

/// All bitmasks over the given bit positions, ascending.
fn submasks(bits: impl Iterator<Item = u32>) -> Vec<u32> {
    let positions: Vec<u32> = bits.collect();
    let mut out = Vec::with_capacity(1 << positions.len());
    for choice in 0u32..(1 << positions.len()) {
        let mut mask = 0;
        for (slot, &bit) in positions.iter().enumerate() {
            if choice >> slot & 1 == 1 {
                mask |= 1 << bit;
            }
        }
        out.push(mask);
    }
    out.sort_unstable();
    out
}

/// Per-setting adjacency and v-structure sets of the twin MAGs; two
/// models are Markov equivalent exactly when their keys agree.
pub type EquivalenceKey = Vec<(Vec<(u32, u32)>, Vec<(u32, u32, u32)>)>;

pub fn equivalence_key(g: &DagWithSelection, t: &TargetCollection) -> Result<EquivalenceKey> {
    let mut key = Vec::with_capacity(t.len());
    for target in t.iter() {
        let mag = mag_of_twin(g, target)?;
        let adjacencies = mag.adjacencies().into_iter().collect();
        let v_structures = mag.v_structures();
        key.push((adjacencies, v_structures));
    }
    Ok(key)
}

/// Markov equivalence of two models under their experiment collections:
/// for every setting, the twin MAGs must share adjacencies and
/// v-structures.
pub fn markov_equivalent(
    g1: &DagWithSelection,
    t1: &TargetCollection,
    g2: &DagWithSelection,
    t2: &TargetCollection,
) -> Result<bool> {
    if g1.d() != g2.d() {
        return Err(Error::invalid(format!(
            "models have different observed vertex counts ({} vs {})",
            g1.d(),
            g2.d()
        )));
    }
    if t1.len() != t2.len() {
        return Err(Error::invalid(format!(
            "target collections have different sizes ({} vs {}); equivalence is only defined for equal sizes",
            t1.len(),
            t2.len()
        )));
    }
    Ok(equivalence_key(g1, t1)? == equivalence_key(g2, t2)?)
}

/// Members of the universe equivalent to (g, t), the representative
/// first. Candidates that are not comparable (different vertex count or
/// collection size) are skipped.
pub fn equivalence_class(
    g: &DagWithSelection,
    t: &TargetCollection,
    universe: impl IntoIterator<Item = (DagWithSelection, TargetCollection)>,
) -> Result<Vec<(DagWithSelection, TargetCollection)>> {
    let key = equivalence_key(g, t)?;
    let mut class = vec![(g.clone(), t.clone())];
    for (h, u) in universe {
        if h.d() != g.d() || u.len() != t.len() {
            continue;
        }
        if (&h, &u) == (g, t) {
            continue;
        }
        if equivalence_key(&h, &u)? == key {
            class.push((h, u));
        }
    }
    Ok(class)
}

/// Lazy exhaustive enumeration of selection models: every labeled DAG
/// over `d` observed vertices, combined with every canonical selection
/// configuration of up to `t_max` selection vertices (a configuration is
/// a set of distinct nonempty parent sets, so relabelings of selection
/// vertices are not distinct models).
pub fn enumerate_models(d: usize, t_max: usize) -> Result<ModelEnumeration> {
    if d > 6 {
        return Err(Error::ResourceLimit(format!(
            "model enumeration is exponential; d = {d} exceeds the guard of 6"
        )));
    }
    if d == 0 {
        return Err(Error::invalid("need at least one observed vertex"));
    }
    let pairs: Vec<(u32, u32)> = (0..d as u32)
        .flat_map(|i| ((i + 1)..d as u32).map(move |j| (i, j)))
        .collect();
    let configs = selection_configs(d, t_max);
    Ok(ModelEnumeration {
        d,
        pairs,
        configs,
        counter: 0,
        current_edges: None,
        config_idx: 0,
    })
}

/// All selection configurations: for t = 0..=t_max, each combination of
/// t distinct nonempty parent masks, masks ascending.
fn selection_configs(d: usize, t_max: usize) -> Vec<Vec<u32>> {
    let masks: Vec<u32> = (1..(1u32 << d)).collect();
    let mut out = vec![vec![]];
    let mut frontier: Vec<Vec<u32>> = vec![vec![]];
    for _ in 1..=t_max {
        let mut next = Vec::new();
        for cfg in &frontier {
            let start = cfg.last().map_or(0, |&m| m as usize);
            for &mask in &masks[start..] {
                let mut bigger = cfg.clone();
                bigger.push(mask);
                next.push(bigger);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub struct ModelEnumeration {
    d: usize,
    pairs: Vec<(u32, u32)>,
    configs: Vec<Vec<u32>>,
    counter: u64,
    current_edges: Option<Vec<(u32, u32)>>,
    config_idx: usize,
}

impl ModelEnumeration {
    fn decode(&self, mut code: u64) -> Vec<(u32, u32)> {
        let mut edges = Vec::new();
        for &(i, j) in &self.pairs {
            match code % 3 {
                1 => edges.push((i, j)),
                2 => edges.push((j, i)),
                _ => {}
            }
            code /= 3;
        }
        edges
    }
}

impl Iterator for ModelEnumeration {
    type Item = DagWithSelection;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(edges) = &self.current_edges {
                if self.config_idx < self.configs.len() {
                    let cfg = &self.configs[self.config_idx];
                    self.config_idx += 1;
                    let mut full = edges.clone();
                    for (s, &mask) in cfg.iter().enumerate() {
                        let sv = (self.d + s) as u32;
                        for b in 0..self.d as u32 {
                            if mask >> b & 1 == 1 {
                                full.push((b, sv));
                            }
                        }
                    }
                    let model = DagWithSelection::new(self.d, cfg.len(), &full)
                        .expect("enumerated model must be valid");
                    return Some(model);
                }
                self.current_edges = None;
            }
            let limit = 3u64.pow(self.pairs.len() as u32);
            loop {
                if self.counter >= limit {
                    return None;
                }
                let edges = self.decode(self.counter);
                self.counter += 1;
                if DagWithSelection::new(self.d, 0, &edges).is_ok() {
                    self.current_edges = Some(edges);
                    self.config_idx = 0;
                    break;
                }
            }
        }
    }
}

/// Every collection of exactly `k` nonempty intervention targets over
/// `d` vertices (observational setting prepended), in lexicographic
/// order of target bitmasks. There are (2^d − 1)^k of them.
pub fn enumerate_target_collections(d: usize, k: usize) -> Result<Vec<TargetCollection>> {
    if d > 16 || k > 4 {
        return Err(Error::ResourceLimit(format!(
            "(2^{d} - 1)^{k} target collections exceed the enumeration guard"
        )));
    }
    let masks: Vec<u32> = (1..(1u32 << d)).collect();
    let mut out = Vec::new();
    let mut stack: Vec<Vec<u32>> = vec![vec![]];
    while let Some(prefix) = stack.pop() {
        if prefix.len() == k {
            let targets = prefix
                .iter()
                .map(|&m| InterventionTarget::new(mask_to_set(m)));
            out.push(TargetCollection::with_interventions(targets));
            continue;
        }
        for &m in masks.iter().rev() {
            let mut next = prefix.clone();
            next.push(m);
            stack.push(next);
        }
    }
    Ok(out)
}
