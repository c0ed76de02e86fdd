//! Conditional-independence and invariance answer sources.
//!
//! The skeleton and orientation machinery only ever talks to a
//! [`CiProvider`]; the two implementations are a graph-backed oracle
//! (twin-graph separation) and a Fisher-Z tester over multi-setting
//! datasets. Invariance queries are pooled two-setting tests against the
//! binary setting indicator ζ, which lives at column index `d` in the
//! pooled vocabulary.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::equiv::TargetCollection;
use crate::graph::DagWithSelection;
use crate::twin::{build_twin, InterventionTarget, TwinGraph};

/// Samples from every experimental setting, one matrix per setting,
/// sharing the variable axis.
#[derive(Debug, Clone)]
pub struct Dataset {
    names: Vec<String>,
    settings: Vec<DMatrix<f64>>,
    targets: Vec<Option<InterventionTarget>>,
}

impl Dataset {
    pub fn new(
        names: Vec<String>,
        settings: Vec<DMatrix<f64>>,
        targets: Vec<Option<InterventionTarget>>,
    ) -> Result<Self> {
        if settings.is_empty() {
            return Err(Error::invalid("a dataset needs at least one setting"));
        }
        let d = names.len();
        if d == 0 {
            return Err(Error::invalid("a dataset needs at least one variable"));
        }
        for (k, m) in settings.iter().enumerate() {
            if m.ncols() != d {
                return Err(Error::invalid(format!(
                    "setting {k} has {} columns, expected {d}",
                    m.ncols()
                )));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "setting {k} contains non-finite values"
                )));
            }
        }
        if targets.len() != settings.len() {
            return Err(Error::invalid("one target entry per setting required"));
        }
        Ok(Dataset { names, settings, targets })
    }

    /// Matrices with default variable names X0..X{d-1} and unknown targets.
    pub fn from_matrices(settings: Vec<DMatrix<f64>>) -> Result<Self> {
        let d = settings.first().map_or(0, |m| m.ncols());
        let names = (0..d).map(|i| format!("X{i}")).collect();
        let targets = vec![None; settings.len()];
        Dataset::new(names, settings, targets)
    }

    pub fn d(&self) -> usize {
        self.names.len()
    }

    pub fn num_settings(&self) -> usize {
        self.settings.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn setting(&self, k: usize) -> Result<&DMatrix<f64>> {
        self.settings
            .get(k)
            .ok_or_else(|| Error::invalid(format!("unknown setting {k}")))
    }

    pub fn target(&self, k: usize) -> Option<&InterventionTarget> {
        self.targets.get(k).and_then(|t| t.as_ref())
    }

    pub fn n(&self, k: usize) -> Result<usize> {
        Ok(self.setting(k)?.nrows())
    }

    /// Writes one CSV per setting plus a manifest into `dir`, returning
    /// the manifest path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let mut entries = Vec::new();
        for (k, m) in self.settings.iter().enumerate() {
            let file = format!("setting_{k}.csv");
            let mut w = csv::Writer::from_path(dir.join(&file))
                .map_err(|e| Error::Parse(e.to_string()))?;
            w.write_record(&self.names)
                .map_err(|e| Error::Parse(e.to_string()))?;
            for r in 0..m.nrows() {
                let row: Vec<String> = (0..m.ncols()).map(|c| m[(r, c)].to_string()).collect();
                w.write_record(&row).map_err(|e| Error::Parse(e.to_string()))?;
            }
            w.flush()?;
            entries.push(ManifestEntry {
                k,
                path: file,
                target: self.targets[k].as_ref().map(|t| t.as_vec()),
            });
        }
        let manifest = DatasetManifest { settings: entries };
        let path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(&path, json)?;
        Ok(path)
    }

    /// Loads a dataset from its manifest; CSV paths are resolved
    /// relative to the manifest file.
    pub fn load(manifest_path: &Path) -> Result<Dataset> {
        let raw = std::fs::read_to_string(manifest_path)?;
        let manifest: DatasetManifest =
            serde_json::from_str(&raw).map_err(|e| Error::Parse(e.to_string()))?;
        if manifest.settings.is_empty() {
            return Err(Error::Parse("manifest lists no settings".into()));
        }
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        let mut by_k: Vec<Option<(DMatrix<f64>, Option<InterventionTarget>)>> =
            (0..manifest.settings.len()).map(|_| None).collect();
        let mut names: Option<Vec<String>> = None;
        for entry in &manifest.settings {
            let slot = by_k.get_mut(entry.k).ok_or_else(|| {
                Error::Parse(format!(
                    "setting index {} out of range for {} settings",
                    entry.k,
                    manifest.settings.len()
                ))
            })?;
            if slot.is_some() {
                return Err(Error::Parse(format!("setting {} listed twice", entry.k)));
            }
            let (header, matrix) = read_csv_matrix(&base.join(&entry.path))?;
            match &names {
                None => names = Some(header),
                Some(expect) => {
                    if *expect != header {
                        return Err(Error::Parse(format!(
                            "setting {} has mismatched column names",
                            entry.k
                        )));
                    }
                }
            }
            let target = entry
                .target
                .as_ref()
                .map(|t| InterventionTarget::new(t.iter().copied()));
            *slot = Some((matrix, target));
        }
        let mut settings = Vec::new();
        let mut targets = Vec::new();
        for (k, slot) in by_k.into_iter().enumerate() {
            let (m, t) =
                slot.ok_or_else(|| Error::Parse(format!("setting {k} missing from manifest")))?;
            settings.push(m);
            targets.push(t);
        }
        Dataset::new(names.unwrap_or_default(), settings, targets)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetManifest {
    settings: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    k: usize,
    path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<Vec<u32>>,
}

fn read_csv_matrix(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let d = header.len();
    let mut values = Vec::new();
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        if record.len() != d {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {d}",
                rows + 1,
                record.len()
            )));
        }
        for field in record.iter() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad numeric field {field:?}")))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("non-finite value {field:?}")));
            }
            values.push(v);
        }
        rows += 1;
    }
    Ok((header, DMatrix::from_row_slice(rows, d, &values)))
}

/// Default significance level used in the experiments: 0.05 for small
/// systems, 0.01 from fifteen variables up.
pub fn default_alpha(d: usize) -> f64 {
    if d >= 15 {
        0.01
    } else {
        0.05
    }
}

/// Partial correlation of columns `x` and `y` given `z`, through the
/// inverse of their correlation matrix.
fn partial_correlation(data: &DMatrix<f64>, x: usize, y: usize, z: &[usize]) -> Result<f64> {
    let mut vars = vec![x, y];
    vars.extend_from_slice(z);
    let n = data.nrows();
    let k = vars.len();
    let mut centered = DMatrix::zeros(n, k);
    for (c, &v) in vars.iter().enumerate() {
        let col = data.column(v);
        let mean = col.sum() / n as f64;
        let mut norm = 0.0;
        for r in 0..n {
            let cv = col[r] - mean;
            centered[(r, c)] = cv;
            norm += cv * cv;
        }
        if norm <= 0.0 {
            return Err(Error::DegenerateConditioning(format!(
                "column {v} is constant"
            )));
        }
        let scale = norm.sqrt();
        for r in 0..n {
            centered[(r, c)] /= scale;
        }
    }
    let corr = centered.transpose() * &centered;
    if z.is_empty() {
        return Ok(corr[(0, 1)].clamp(-1.0, 1.0));
    }
    let precision = corr.try_inverse().ok_or_else(|| {
        Error::DegenerateConditioning("singular correlation matrix".into())
    })?;
    let denom = precision[(0, 0)] * precision[(1, 1)];
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::DegenerateConditioning(
            "non-positive precision diagonal".into(),
        ));
    }
    let r = -precision[(0, 1)] / denom.sqrt();
    if !r.is_finite() {
        return Err(Error::DegenerateConditioning(
            "partial correlation is not finite".into(),
        ));
    }
    Ok(r.clamp(-1.0, 1.0))
}

fn fisher_statistic(r: f64, n: usize, z_len: usize, alpha: f64) -> Result<(f64, bool)> {
    if !(0.0..1.0).contains(&alpha) || alpha <= 0.0 {
        return Err(Error::invalid(format!("alpha {alpha} not in (0, 1)")));
    }
    if n <= z_len + 3 {
        return Err(Error::InsufficientData(format!(
            "n = {n} is too small for a conditioning set of size {z_len}"
        )));
    }
    let statistic = ((n - z_len - 3) as f64).sqrt() * r.atanh().abs();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let threshold = normal.inverse_cdf(1.0 - alpha / 2.0);
    Ok((statistic, statistic < threshold))
}

/// Fisher-Z conditional independence test: the z-transformed partial
/// correlation of `x` and `y` given the `z` columns, compared to the
/// two-sided normal quantile at level `alpha`. Returns the statistic and
/// the independence decision.
pub fn fisher_z(x: &[f64], y: &[f64], z: &[&[f64]], alpha: f64) -> Result<(f64, bool)> {
    let n = x.len();
    if y.len() != n || z.iter().any(|c| c.len() != n) {
        return Err(Error::invalid("columns have mismatched lengths"));
    }
    let mut values = Vec::with_capacity(n * (2 + z.len()));
    values.extend_from_slice(x);
    values.extend_from_slice(y);
    for c in z {
        values.extend_from_slice(c);
    }
    let data = DMatrix::from_vec(n, 2 + z.len(), values);
    let z_idx: Vec<usize> = (2..2 + z.len()).collect();
    let r = partial_correlation(&data, 0, 1, &z_idx)?;
    fisher_statistic(r, n, z.len(), alpha)
}

/// Answers conditional-independence queries within a setting and
/// invariance queries between a setting and the observational one.
///
/// The pooled vocabulary indexes the observed variables as `0..d` and
/// the setting indicator ζ as `d`.
pub trait CiProvider {
    fn d(&self) -> usize;

    fn num_settings(&self) -> usize;

    /// True iff X_i ⊥ X_j | X_c in setting k's distribution.
    fn ci_within(&self, k: usize, i: u32, j: u32, c: &[u32]) -> Result<bool>;

    /// True iff u ⊥ v | c in the pool of settings 0 and k (k ≥ 1), where
    /// any of u, v, c may be ζ = d.
    fn pooled(&self, k: usize, u: u32, v: u32, c: &[u32]) -> Result<bool>;

    /// True iff the conditional of X_j given X_c is the same in setting
    /// k as in the observational setting.
    fn invariance(&self, k: usize, j: u32, c: &[u32]) -> Result<bool> {
        let d = self.d() as u32;
        if j >= d {
            return Err(Error::invalid(format!("unknown observed vertex {j}")));
        }
        if c.iter().any(|&v| v >= d) {
            return Err(Error::invalid(
                "invariance conditioning sets range over observed vertices",
            ));
        }
        self.pooled(k, d, j, c)
    }
}

fn validate_within_query(d: usize, i: u32, j: u32, c: &[u32]) -> Result<()> {
    if i == j {
        return Err(Error::invalid("query endpoints must differ"));
    }
    for &v in [i, j].iter().chain(c) {
        if v as usize >= d {
            return Err(Error::invalid(format!("unknown observed vertex {v}")));
        }
    }
    if c.contains(&i) || c.contains(&j) {
        return Err(Error::invalid("conditioning set overlaps the endpoints"));
    }
    Ok(())
}

fn validate_pooled_query(d: usize, k: usize, settings: usize, u: u32, v: u32, c: &[u32]) -> Result<()> {
    if k == 0 || k >= settings {
        return Err(Error::invalid(format!(
            "pooled queries need an interventional setting index in 1..{settings}, got {k}"
        )));
    }
    if u == v {
        return Err(Error::invalid("query endpoints must differ"));
    }
    for &w in [u, v].iter().chain(c) {
        if w as usize > d {
            return Err(Error::invalid(format!("unknown pooled variable {w}")));
        }
    }
    if c.contains(&u) || c.contains(&v) {
        return Err(Error::invalid("conditioning set overlaps the endpoints"));
    }
    Ok(())
}

/// Graph-backed provider: delegates every query to twin-graph
/// separation, assuming faithfulness.
pub struct OracleCi {
    g: DagWithSelection,
    targets: TargetCollection,
    twins: Vec<TwinGraph>,
}

impl OracleCi {
    pub fn new(g: DagWithSelection, targets: TargetCollection) -> Result<Self> {
        let twins: Vec<TwinGraph> = targets
            .iter()
            .map(|t| build_twin(&g, t))
            .collect::<Result<_>>()?;
        Ok(OracleCi { g, targets, twins })
    }

    pub fn graph(&self) -> &DagWithSelection {
        &self.g
    }

    pub fn targets(&self) -> &TargetCollection {
        &self.targets
    }
}

impl CiProvider for OracleCi {
    fn d(&self) -> usize {
        self.g.d()
    }

    fn num_settings(&self) -> usize {
        self.targets.len()
    }

    fn ci_within(&self, k: usize, i: u32, j: u32, c: &[u32]) -> Result<bool> {
        validate_within_query(self.d(), i, j, c)?;
        let tw = self
            .twins
            .get(k)
            .ok_or_else(|| Error::invalid(format!("unknown setting {k}")))?;
        tw.implies_ci(&[i], &[j], c)
    }

    fn pooled(&self, k: usize, u: u32, v: u32, c: &[u32]) -> Result<bool> {
        validate_pooled_query(self.d(), k, self.num_settings(), u, v, c)?;
        self.twins[k].pooled_separated(u, v, c)
    }
}

/// Fisher-Z provider over a dataset: within-setting tests run on the
/// setting's matrix, pooled tests on the stacked settings-0-and-k matrix
/// with ζ appended as a final 0/1 column.
pub struct FisherZCi {
    data: Dataset,
    alpha: f64,
    pooled: Vec<DMatrix<f64>>,
}

impl FisherZCi {
    pub fn new(data: Dataset, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("alpha {alpha} not in (0, 1)")));
        }
        let d = data.d();
        for k in 0..data.num_settings() {
            let n = data.n(k)?;
            if n < d + 4 {
                return Err(Error::InsufficientData(format!(
                    "setting {k} has {n} rows; need at least D + 4 = {}",
                    d + 4
                )));
            }
        }
        let mut pooled = Vec::new();
        for k in 1..data.num_settings() {
            let base = data.setting(0)?;
            let interv = data.setting(k)?;
            let rows = base.nrows() + interv.nrows();
            let mut m = DMatrix::zeros(rows, d + 1);
            for r in 0..base.nrows() {
                for c in 0..d {
                    m[(r, c)] = base[(r, c)];
                }
            }
            for r in 0..interv.nrows() {
                for c in 0..d {
                    m[(base.nrows() + r, c)] = interv[(r, c)];
                }
                m[(base.nrows() + r, d)] = 1.0;
            }
            pooled.push(m);
        }
        Ok(FisherZCi { data, alpha, pooled })
    }

    pub fn with_default_alpha(data: Dataset) -> Result<Self> {
        let alpha = default_alpha(data.d());
        FisherZCi::new(data, alpha)
    }

    /// Tester on rank-Gaussianized data: each variable is replaced by the
    /// standard-normal quantile of its rank across the pooled settings.
    ///
    /// Monotone marginal transforms leave conditional independence intact,
    /// so this recovers dependencies that raw correlations miss when a
    /// nonlinear mechanism saturates. Fitting the transform on the pooled
    /// rows (rather than per setting) keeps across-setting shifts visible
    /// to the invariance tests.
    pub fn rank_gauss(data: Dataset, alpha: f64) -> Result<Self> {
        let d = data.d();
        let num = data.num_settings();
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        let mut transformed: Vec<DMatrix<f64>> =
            (0..num).map(|k| data.setting(k).cloned()).collect::<Result<_>>()?;
        let total: usize = transformed.iter().map(|m| m.nrows()).sum();
        for c in 0..d {
            let mut entries: Vec<(f64, usize, usize)> = Vec::with_capacity(total);
            for (k, m) in transformed.iter().enumerate() {
                for r in 0..m.nrows() {
                    entries.push((m[(r, c)], k, r));
                }
            }
            entries.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
            for (rank, &(_, k, r)) in entries.iter().enumerate() {
                transformed[k][(r, c)] =
                    normal.inverse_cdf((rank + 1) as f64 / (total + 1) as f64);
            }
        }
        let names = data.names().to_vec();
        let targets = (0..num).map(|k| data.target(k).cloned()).collect();
        FisherZCi::new(Dataset::new(names, transformed, targets)?, alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    fn decide(&self, m: &DMatrix<f64>, u: usize, v: usize, c: &[usize]) -> Result<bool> {
        match partial_correlation(m, u, v, c) {
            Ok(r) => {
                let (_, independent) = fisher_statistic(r, m.nrows(), c.len(), self.alpha)?;
                Ok(independent)
            }
            Err(Error::DegenerateConditioning(msg)) => {
                log::warn!("degenerate conditioning ({msg}); treating as dependent");
                Ok(false)
            }
            Err(e) => Err(e),
        }
    }
}

impl CiProvider for FisherZCi {
    fn d(&self) -> usize {
        self.data.d()
    }

    fn num_settings(&self) -> usize {
        self.data.num_settings()
    }

    fn ci_within(&self, k: usize, i: u32, j: u32, c: &[u32]) -> Result<bool> {
        validate_within_query(self.d(), i, j, c)?;
        let m = self.data.setting(k)?;
        let z: Vec<usize> = c.iter().map(|&v| v as usize).collect();
        self.decide(m, i as usize, j as usize, &z)
    }

    fn pooled(&self, k: usize, u: u32, v: u32, c: &[u32]) -> Result<bool> {
        validate_pooled_query(self.d(), k, self.num_settings(), u, v, c)?;
        let m = &self.pooled[k - 1];
        let z: Vec<usize> = c.iter().map(|&v| v as usize).collect();
        self.decide(m, u as usize, v as usize, &z)
    }
}
