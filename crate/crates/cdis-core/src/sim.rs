//! Synthetic data generation and estimation metrics.
//!
//! Structural equation models are sampled ancestrally for the basal world;
//! rows whose selection scores fall inside their acceptance intervals stay
//! in the study, and interventional settings replay the retained noise
//! through modified equations. The same individuals therefore appear in
//! every setting, which is what couples the settings counterfactually.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::seq::index;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cdis::{cdis, CdisOptions};
use crate::ci::{default_alpha, Dataset, OracleCi};
use crate::equiv::TargetCollection;
use crate::error::{Error, Result};
use crate::graph::DagWithSelection;
use crate::mixed::MixedGraph;
use crate::twin::InterventionTarget;

/// Rows drawn when calibrating acceptance intervals and when estimating
/// marginal acceptance rates.
const PILOT_ROWS: usize = 100_000;
/// Attempt count after which marginal acceptance rates are inspected.
const RATE_CHECK_ATTEMPTS: u64 = 100_000;
/// Marginal acceptance below this aborts sampling.
const MIN_ACCEPTANCE: f64 = 1e-4;
/// Hard cap on generated rows per call.
const MAX_ATTEMPTS: u64 = 50_000_000;

fn default_n_selected() -> usize {
    5000
}

fn default_intervention_shift() -> (f64, f64) {
    (4.0, 1.0)
}

fn default_acceptance_rate() -> f64 {
    0.5
}

fn default_selection_parent_counts() -> (usize, usize) {
    (1, 2)
}

/// Everything needed to reproduce one synthetic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    pub seed: u64,
    /// Rows retained after selection, per setting.
    #[serde(default = "default_n_selected")]
    pub n_selected: usize,
    /// Number of single-vertex interventional settings; `None` means ⌊d/2⌋.
    #[serde(default)]
    pub num_interventions: Option<usize>,
    /// Number of selection vertices; `None` means ⌊d/5⌋.
    #[serde(default)]
    pub num_selections: Option<usize>,
    /// Test size for discovery on the sampled data; `None` picks by
    /// dimension.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Mean and variance of the additive shift applied to targets.
    #[serde(default = "default_intervention_shift")]
    pub intervention_shift: (f64, f64),
    /// Per-selection acceptance rate the intervals are calibrated to.
    #[serde(default = "default_acceptance_rate")]
    pub acceptance_rate: f64,
    /// Inclusive range for the number of parents per selection vertex.
    #[serde(default = "default_selection_parent_counts")]
    pub selection_parent_counts: (usize, usize),
}

impl ExperimentConfig {
    pub fn new(d: usize, seed: u64) -> Self {
        ExperimentConfig {
            d,
            seed,
            n_selected: default_n_selected(),
            num_interventions: None,
            num_selections: None,
            alpha: None,
            intervention_shift: default_intervention_shift(),
            acceptance_rate: default_acceptance_rate(),
            selection_parent_counts: default_selection_parent_counts(),
        }
    }

    pub fn interventions(&self) -> usize {
        self.num_interventions.unwrap_or(self.d / 2)
    }

    pub fn selections(&self) -> usize {
        self.num_selections.unwrap_or(self.d / 5)
    }

    pub fn test_size(&self) -> f64 {
        self.alpha.unwrap_or_else(|| default_alpha(self.d))
    }
}

/// How a vertex turns its parent sum plus noise into a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    Identity,
    Sigmoid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    Gaussian { variance: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Noise {
    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Noise::Gaussian { variance } => {
                if variance == 0.0 {
                    0.0
                } else {
                    Normal::new(0.0, variance.sqrt()).unwrap().sample(rng)
                }
            }
            Noise::Uniform { lo, hi } => rng.gen_range(lo..=hi),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Noise::Gaussian { variance } if variance.is_finite() && variance >= 0.0 => Ok(()),
            Noise::Uniform { lo, hi } if lo.is_finite() && hi.is_finite() && lo <= hi => Ok(()),
            _ => Err(Error::invalid("degenerate noise specification")),
        }
    }
}

/// One selection vertex: a linear score over observed parents plus noise,
/// accepted when strictly above `lower` and at most `upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionSpec {
    /// Observed parents feeding the score, ascending.
    pub parents: Vec<u32>,
    pub weights: Vec<f64>,
    pub noise_variance: f64,
    pub lower: f64,
    pub upper: f64,
}

impl SelectionSpec {
    fn score(&self, x: &[f64], rng: &mut ChaCha8Rng) -> f64 {
        let mut s = 0.0;
        for (p, w) in self.parents.iter().zip(&self.weights) {
            s += w * x[*p as usize];
        }
        if self.noise_variance > 0.0 {
            s += Normal::new(0.0, self.noise_variance.sqrt()).unwrap().sample(rng);
        }
        s
    }

    fn accepts(&self, score: f64) -> bool {
        score > self.lower && score <= self.upper
    }
}

/// A concrete structural equation model over a [`DagWithSelection`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScmInstance {
    dag: DagWithSelection,
    causal_order: Vec<u32>,
    coefficients: BTreeMap<(u32, u32), f64>,
    links: Vec<Link>,
    noises: Vec<Noise>,
    selections: Vec<SelectionSpec>,
}

impl ScmInstance {
    pub fn new(
        dag: DagWithSelection,
        causal_order: Vec<u32>,
        coefficients: BTreeMap<(u32, u32), f64>,
        links: Vec<Link>,
        noises: Vec<Noise>,
        selections: Vec<SelectionSpec>,
    ) -> Result<Self> {
        let d = dag.d();
        if causal_order.len() != d
            || causal_order.iter().collect::<BTreeSet<_>>().len() != d
            || causal_order.iter().any(|&v| v as usize >= d)
        {
            return Err(Error::invalid(
                "causal order must permute the observed vertices",
            ));
        }
        let mut pos = vec![0usize; d];
        for (idx, &v) in causal_order.iter().enumerate() {
            pos[v as usize] = idx;
        }
        let mut observed_edges = BTreeSet::new();
        for (i, j) in dag.edges() {
            if (j as usize) < d {
                if pos[i as usize] >= pos[j as usize] {
                    return Err(Error::invalid("causal order disagrees with an edge"));
                }
                observed_edges.insert((i, j));
            }
        }
        if coefficients.keys().copied().collect::<BTreeSet<_>>() != observed_edges {
            return Err(Error::invalid(
                "coefficients must cover exactly the observed edges",
            ));
        }
        if coefficients.values().any(|w| !w.is_finite() || *w == 0.0) {
            return Err(Error::invalid("edge coefficients must be finite and nonzero"));
        }
        if links.len() != d || noises.len() != d {
            return Err(Error::invalid("one link and one noise per observed vertex"));
        }
        for noise in &noises {
            noise.validate()?;
        }
        if selections.len() != dag.t() {
            return Err(Error::invalid("one selection spec per selection vertex"));
        }
        for (s, spec) in selections.iter().enumerate() {
            let want: Vec<u32> = dag.dag().parents((d + s) as u32).to_vec();
            let mut sorted = want.clone();
            sorted.sort_unstable();
            if spec.parents != sorted {
                return Err(Error::invalid(format!(
                    "selection {s} parents disagree with the graph"
                )));
            }
            if spec.weights.len() != spec.parents.len() {
                return Err(Error::invalid(format!(
                    "selection {s} needs one weight per parent"
                )));
            }
            if spec.weights.iter().any(|w| !w.is_finite())
                || !spec.noise_variance.is_finite()
                || spec.noise_variance < 0.0
            {
                return Err(Error::invalid(format!("selection {s} has degenerate parameters")));
            }
            if spec.lower.is_nan() || spec.upper.is_nan() || spec.lower >= spec.upper {
                return Err(Error::invalid(format!("selection {s} interval is empty")));
            }
        }
        Ok(ScmInstance { dag, causal_order, coefficients, links, noises, selections })
    }

    pub fn dag(&self) -> &DagWithSelection {
        &self.dag
    }

    /// The order vertices were generated in; a topological order of the
    /// observed subgraph.
    pub fn causal_order(&self) -> &[u32] {
        &self.causal_order
    }

    pub fn coefficients(&self) -> &BTreeMap<(u32, u32), f64> {
        &self.coefficients
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn noises(&self) -> &[Noise] {
        &self.noises
    }

    pub fn selections(&self) -> &[SelectionSpec] {
        &self.selections
    }

    /// Value of vertex `v` given the current row and its noise term, with
    /// incoming coefficients scaled by `scale`.
    fn eval(&self, v: u32, x: &[f64], noise: f64, scale: f64) -> f64 {
        let mut s = noise;
        for &p in self.dag.dag().parents(v) {
            s += scale * self.coefficients[&(p, v)] * x[p as usize];
        }
        match self.links[v as usize] {
            Link::Identity => s,
            Link::Sigmoid => sigmoid(s),
        }
    }

    fn fill_row(&self, x: &mut [f64], eps: &[f64]) {
        for &v in &self.causal_order {
            x[v as usize] = self.eval(v, x, eps[v as usize], 1.0);
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn sample_coefficient(rng: &mut ChaCha8Rng) -> f64 {
    let magnitude = rng.gen_range(0.5..=2.0);
    if rng.gen_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

/// Samples a random model: an Erdős–Rényi DAG with expected average degree
/// two, selection vertices whose parents avoid the late part of the causal
/// order, linear mechanisms, and acceptance intervals calibrated to the
/// configured rate on a pilot sample.
pub fn generate_scm(config: &ExperimentConfig) -> Result<ScmInstance> {
    let d = config.d;
    if d < 2 {
        return Err(Error::invalid("need at least two observed vertices"));
    }
    let (pmin, pmax) = config.selection_parent_counts;
    if pmin < 1 || pmax < pmin {
        return Err(Error::invalid("selection parent count range is empty"));
    }
    if !(config.acceptance_rate > 0.0 && config.acceptance_rate < 1.0) {
        return Err(Error::invalid("acceptance rate must lie strictly inside (0,1)"));
    }
    let t = config.selections();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut order: Vec<u32> = (0..d as u32).collect();
    order.shuffle(&mut rng);
    let mut pos = vec![0usize; d];
    for (idx, &v) in order.iter().enumerate() {
        pos[v as usize] = idx;
    }

    let p_edge = (2.0 / (d as f64 - 1.0)).min(1.0);
    let mut edges = Vec::new();
    for i in 0..d as u32 {
        for j in i + 1..d as u32 {
            if rng.gen_bool(p_edge) {
                if pos[i as usize] < pos[j as usize] {
                    edges.push((i, j));
                } else {
                    edges.push((j, i));
                }
            }
        }
    }
    let observed_edges = edges.clone();

    // Selection parents come from the early part of the causal order; the
    // late ⌊d/2⌋ positions stay out of selection.
    let allowed = &order[..d - d / 2];
    for s in 0..t {
        let want = rng.gen_range(pmin..=pmax).min(allowed.len());
        let mut parents: Vec<u32> =
            index::sample(&mut rng, allowed.len(), want).iter().map(|i| allowed[i]).collect();
        parents.sort_unstable();
        for &p in &parents {
            edges.push((p, (d + s) as u32));
        }
    }
    let dag = DagWithSelection::new(d, t, &edges)?;

    let mut coefficients = BTreeMap::new();
    for &(i, j) in &observed_edges {
        coefficients.insert((i, j), sample_coefficient(&mut rng));
    }
    let links = vec![Link::Identity; d];
    let noises: Vec<Noise> =
        (0..d).map(|_| Noise::Gaussian { variance: rng.gen_range(1.0..=4.0) }).collect();

    let mut selections = Vec::new();
    for s in 0..t {
        let parents: Vec<u32> = dag.dag().parents((d + s) as u32).to_vec();
        let mut sorted = parents.clone();
        sorted.sort_unstable();
        let weights = sorted.iter().map(|_| sample_coefficient(&mut rng)).collect();
        selections.push(SelectionSpec {
            parents: sorted,
            weights,
            noise_variance: rng.gen_range(1.0..=4.0),
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        });
    }

    let mut scm = ScmInstance::new(dag, order, coefficients, links, noises, selections)?;
    calibrate_selection(&mut scm, config.acceptance_rate, &mut rng);
    Ok(scm)
}

/// Sets each acceptance interval to the upper tail of the score's marginal
/// at the requested rate, using empirical quantiles from a pilot sample.
fn calibrate_selection(scm: &mut ScmInstance, rate: f64, rng: &mut ChaCha8Rng) {
    if scm.selections.is_empty() {
        return;
    }
    let d = scm.dag.d();
    let mut scores = vec![Vec::with_capacity(PILOT_ROWS); scm.selections.len()];
    let mut x = vec![0.0; d];
    let mut eps = vec![0.0; d];
    for _ in 0..PILOT_ROWS {
        for (e, noise) in eps.iter_mut().zip(&scm.noises) {
            *e = noise.draw(rng);
        }
        scm.fill_row(&mut x, &eps);
        for (j, spec) in scm.selections.iter().enumerate() {
            scores[j].push(spec.score(&x, rng));
        }
    }
    for (j, spec) in scm.selections.iter_mut().enumerate() {
        let s = &mut scores[j];
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let idx = (((1.0 - rate) * PILOT_ROWS as f64) as usize).min(PILOT_ROWS - 1);
        spec.lower = s[idx];
        spec.upper = f64::INFINITY;
    }
}

/// Fraction of unselected pilot rows each selection accepts.
pub fn marginal_acceptance(scm: &ScmInstance, rows: usize, seed: u64) -> Result<Vec<f64>> {
    if rows == 0 {
        return Err(Error::invalid("need at least one pilot row"));
    }
    let d = scm.dag.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pass = vec![0usize; scm.selections.len()];
    let mut x = vec![0.0; d];
    let mut eps = vec![0.0; d];
    for _ in 0..rows {
        for (e, noise) in eps.iter_mut().zip(&scm.noises) {
            *e = noise.draw(&mut rng);
        }
        scm.fill_row(&mut x, &eps);
        for (j, spec) in scm.selections.iter().enumerate() {
            if spec.accepts(spec.score(&x, &mut rng)) {
                pass[j] += 1;
            }
        }
    }
    Ok(pass.iter().map(|&c| c as f64 / rows as f64).collect())
}

/// Ancestral sampling with rejection: returns the retained rows and their
/// noise terms, both `n_selected × d`.
pub fn sample_observational(
    scm: &ScmInstance,
    n_selected: usize,
    seed: u64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if n_selected == 0 {
        return Err(Error::invalid("need at least one retained row"));
    }
    let d = scm.dag.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(n_selected * d);
    let mut es = Vec::with_capacity(n_selected * d);
    let mut kept = 0usize;
    let mut attempts = 0u64;
    let mut pass = vec![0u64; scm.selections.len()];
    let mut x = vec![0.0; d];
    let mut eps = vec![0.0; d];
    while kept < n_selected {
        attempts += 1;
        for (e, noise) in eps.iter_mut().zip(&scm.noises) {
            *e = noise.draw(&mut rng);
        }
        scm.fill_row(&mut x, &eps);
        let mut ok = true;
        for (j, spec) in scm.selections.iter().enumerate() {
            if spec.accepts(spec.score(&x, &mut rng)) {
                pass[j] += 1;
            } else {
                ok = false;
            }
        }
        if ok {
            xs.extend_from_slice(&x);
            es.extend_from_slice(&eps);
            kept += 1;
        }
        if attempts == RATE_CHECK_ATTEMPTS {
            if let Some((worst, &count)) =
                pass.iter().enumerate().min_by_key(|(_, &c)| c)
            {
                let rate = count as f64 / attempts as f64;
                if rate < MIN_ACCEPTANCE {
                    return Err(Error::SelectionTooStrict { rate, offender: worst });
                }
            }
        }
        if attempts >= MAX_ATTEMPTS {
            return Err(Error::ResourceLimit(format!(
                "gave up after {attempts} rows with {kept}/{n_selected} retained"
            )));
        }
    }
    Ok((
        DMatrix::from_row_slice(n_selected, d, &xs),
        DMatrix::from_row_slice(n_selected, d, &es),
    ))
}

/// How a target's equation changes in an interventional setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterventionMechanism {
    /// Adds a per-row draw from Normal(mean, variance) on top of the
    /// unchanged equation.
    Shift { mean: f64, variance: f64 },
    /// Multiplies the coefficients into the target.
    ScaleCoefficients { factor: f64 },
}

/// Replays the retained noise through the model with the target's equation
/// modified; every other equation, including downstream ones, recomputes
/// with its original noise.
pub fn sample_interventional(
    scm: &ScmInstance,
    retained_noise: &DMatrix<f64>,
    target: u32,
    mechanism: &InterventionMechanism,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let d = scm.dag.d();
    if target as usize >= d {
        return Err(Error::invalid(format!(
            "intervention target {target} is not an observed vertex"
        )));
    }
    if retained_noise.ncols() != d {
        return Err(Error::invalid("noise matrix width disagrees with the model"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = retained_noise.nrows();
    let mut out = DMatrix::zeros(n, d);
    let mut x = vec![0.0; d];
    for r in 0..n {
        for &v in &scm.causal_order {
            let noise = retained_noise[(r, v as usize)];
            x[v as usize] = if v == target {
                match *mechanism {
                    InterventionMechanism::Shift { mean, variance } => {
                        let shift = if variance == 0.0 {
                            mean
                        } else {
                            Normal::new(mean, variance.sqrt()).unwrap().sample(&mut rng)
                        };
                        scm.eval(v, &x, noise, 1.0) + shift
                    }
                    InterventionMechanism::ScaleCoefficients { factor } => {
                        scm.eval(v, &x, noise, factor)
                    }
                }
            } else {
                scm.eval(v, &x, noise, 1.0)
            };
        }
        for v in 0..d {
            out[(r, v)] = x[v];
        }
    }
    Ok(out)
}

/// The nonlinear three-variable model whose selection keeps only rows with
/// a high third variable.
pub fn pest_scm() -> ScmInstance {
    let dag = DagWithSelection::new(3, 1, &[(0, 1), (1, 2), (2, 3)]).unwrap();
    let mut coefficients = BTreeMap::new();
    coefficients.insert((0, 1), 1.0);
    coefficients.insert((1, 2), -2.0);
    ScmInstance::new(
        dag,
        vec![0, 1, 2],
        coefficients,
        vec![Link::Identity, Link::Sigmoid, Link::Sigmoid],
        vec![Noise::Uniform { lo: -1.0, hi: 1.0 }; 3],
        vec![SelectionSpec {
            parents: vec![2],
            weights: vec![1.0],
            noise_variance: 0.0,
            lower: 0.4,
            upper: f64::INFINITY,
        }],
    )
    .unwrap()
}

/// A full synthetic run: the model, the chosen single-vertex targets, the
/// sampled settings, and the retained noise.
#[derive(Debug, Clone)]
pub struct SimulatedExperiment {
    pub scm: ScmInstance,
    pub targets: TargetCollection,
    pub dataset: Dataset,
    pub noise: DMatrix<f64>,
}

/// Samples a model and one observational plus ⌊d/2⌋ interventional
/// settings over distinct random targets, all derived from `config.seed`.
pub fn simulate_experiment(config: &ExperimentConfig) -> Result<SimulatedExperiment> {
    let scm = generate_scm(config)?;
    let d = config.d;
    let m = config.interventions().min(d);
    let (x0, eps) = sample_observational(&scm, config.n_selected, config.seed.wrapping_add(1))?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(2));
    let mut targets: Vec<u32> =
        index::sample(&mut rng, d, m).iter().map(|v| v as u32).collect();
    targets.sort_unstable();

    let (mean, variance) = config.intervention_shift;
    let mechanism = InterventionMechanism::Shift { mean, variance };
    let mut settings = vec![x0];
    let mut per_setting = vec![Some(InterventionTarget::empty())];
    for (k, &tv) in targets.iter().enumerate() {
        settings.push(sample_interventional(
            &scm,
            &eps,
            tv,
            &mechanism,
            config.seed.wrapping_add(3 + k as u64),
        )?);
        per_setting.push(Some(InterventionTarget::new([tv])));
    }
    let names = (0..d).map(|i| format!("X{i}")).collect();
    let dataset = Dataset::new(names, settings, per_setting)?;
    let collection =
        TargetCollection::with_interventions(targets.iter().map(|&v| InterventionTarget::new([v])));
    Ok(SimulatedExperiment { scm, targets: collection, dataset, noise: eps })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub arrow_precision: f64,
    pub arrow_recall: f64,
    pub arrow_f1: f64,
    pub edgemark_accuracy: f64,
    pub skeleton_shd: usize,
}

/// What discovery would output given perfect answers for this model.
pub fn ground_truth_pag(g: &DagWithSelection, targets: &TargetCollection) -> Result<MixedGraph> {
    let oracle = OracleCi::new(g.clone(), targets.clone())?;
    Ok(cdis(&oracle, &CdisOptions::default())?.pag0.graph)
}

fn directed_pairs(g: &MixedGraph) -> BTreeSet<(u32, u32)> {
    let mut out = BTreeSet::new();
    for (u, v) in g.adjacencies() {
        if g.has_directed_edge(u, v) {
            out.insert((u, v));
        }
        if g.has_directed_edge(v, u) {
            out.insert((v, u));
        }
    }
    out
}

/// Scores an estimated graph against another graph's arrows, endpoint
/// marks, and skeleton.
pub fn evaluate_against(est: &MixedGraph, truth: &MixedGraph) -> Result<MetricsReport> {
    if est.n() != truth.n() {
        return Err(Error::invalid(format!(
            "estimate has {} vertices, ground truth {}",
            est.n(),
            truth.n()
        )));
    }
    let got = directed_pairs(est);
    let want = directed_pairs(truth);
    let hits = got.intersection(&want).count() as f64;
    let arrow_precision = if got.is_empty() {
        if want.is_empty() {
            1.0
        } else {
            0.0
        }
    } else {
        hits / got.len() as f64
    };
    let arrow_recall = if want.is_empty() { 1.0 } else { hits / want.len() as f64 };
    let arrow_f1 = if arrow_precision + arrow_recall == 0.0 {
        0.0
    } else {
        2.0 * arrow_precision * arrow_recall / (arrow_precision + arrow_recall)
    };

    let est_adj = est.adjacencies();
    let truth_adj = truth.adjacencies();
    let union: BTreeSet<(u32, u32)> = est_adj.union(&truth_adj).copied().collect();
    let mut matches = 0usize;
    for &(u, v) in &union {
        if est_adj.contains(&(u, v)) && truth_adj.contains(&(u, v)) {
            for (at, other) in [(u, v), (v, u)] {
                if est.mark_at(at, other) == truth.mark_at(at, other) {
                    matches += 1;
                }
            }
        }
    }
    let edgemark_accuracy =
        if union.is_empty() { 1.0 } else { matches as f64 / (2 * union.len()) as f64 };
    let skeleton_shd = est_adj.symmetric_difference(&truth_adj).count();

    Ok(MetricsReport { arrow_precision, arrow_recall, arrow_f1, edgemark_accuracy, skeleton_shd })
}

/// Scores an estimate against what discovery could theoretically identify
/// for the true model and targets.
pub fn evaluate(
    est: &MixedGraph,
    g: &DagWithSelection,
    targets: &TargetCollection,
) -> Result<MetricsReport> {
    let truth = ground_truth_pag(g, targets)?;
    evaluate_against(est, &truth)
}
