//! Command-line entry point.
//!
//! One binary, one subcommand per workflow, one seeded generator per run.
//! Every output carries a provenance header (version, seed, input hash) and
//! single-file outputs are written atomically.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use cdis_core::equiv::EquivalenceKey;
use cdis_core::{
    build_twin, cdis, default_alpha, enumerate_models, enumerate_target_collections,
    equivalence_key, evaluate, mag_general, mag_observational, mag_of_twin, markov_equivalent,
    mixed_dot, simulate_experiment, twin_dot, CdisOptions, CdisResult, ConflictPolicy,
    DagWithSelection, Dataset, Error, ExperimentConfig, FisherZCi, InterventionTarget,
    MixedGraph, OracleCi, Result, TargetCollection, TwinGraph, VertexKind, VertexPartition,
};

#[derive(Parser)]
#[command(name = "cdis", version, about = "Causal discovery from interventional data under selection bias")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Specific,
    General,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Build the twin graph of a model under an intervention target.
    Twin {
        /// Model file: {"d": .., "t": .., "edges": [[parent, child], ..]}.
        graph: PathBuf,
        /// Comma-separated observed vertices; empty for no intervention.
        #[arg(long, default_value = "")]
        target: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Project a model onto its ancestral graph for one setting.
    Mag {
        graph: PathBuf,
        #[arg(long, default_value = "")]
        target: String,
        /// Closed form, generic projection of the twin graph, or both with
        /// an agreement check.
        #[arg(long, value_enum, default_value_t = Method::Specific)]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run discovery on a dataset manifest or against a model oracle.
    Discover {
        /// Dataset manifest; optional when --oracle and --targets are given.
        manifest: Option<PathBuf>,
        /// Ground-truth model file; queries are answered exactly.
        #[arg(long)]
        oracle: Option<PathBuf>,
        /// Interventional settings like "0;1,2"; defaults to the manifest's.
        #[arg(long)]
        targets: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Sample a synthetic experiment into a directory.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config file's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Score an estimate against what is theoretically identifiable.
    Eval {
        /// Discovery bundle or a serialized graph with marks.
        #[arg(long)]
        estimate: PathBuf,
        /// {"graph": .., "targets": [[..], ..]} with interventional targets.
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether two models are indistinguishable under their targets.
    Equiv {
        #[arg(long)]
        g1: PathBuf,
        #[arg(long, default_value = "")]
        t1: String,
        #[arg(long)]
        g2: PathBuf,
        #[arg(long, default_value = "")]
        t2: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate models and bucket them into equivalence classes.
    Enumerate {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        t_max: usize,
        #[arg(long, default_value_t = 1)]
        k_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(serde::Serialize)]
struct Provenance {
    version: &'static str,
    seed: Option<u64>,
    input_sha256: String,
}

fn provenance(seed: Option<u64>, input: &[u8]) -> Provenance {
    let mut h = Sha256::new();
    h.update(input);
    Provenance {
        version: env!("CARGO_PKG_VERSION"),
        seed,
        input_sha256: format!("{:x}", h.finalize()),
    }
}

#[derive(serde::Serialize)]
struct Output<T: serde::Serialize> {
    provenance: Provenance,
    result: T,
}

fn json_output<T: serde::Serialize>(prov: Provenance, result: T) -> Result<String> {
    let out = Output { provenance: prov, result };
    serde_json::to_string_pretty(&out)
        .map(|s| format!("{s}\n"))
        .map_err(|e| Error::Parse(e.to_string()))
}

fn header_comment(prefix: &str, prov: &Provenance) -> String {
    let seed = prov.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
    format!(
        "{prefix} version={} seed={seed} input={}\n",
        prov.version, prov.input_sha256
    )
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut f = tempfile::NamedTempFile::new_in(dir)?;
    f.write_all(bytes)?;
    f.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, content.as_bytes()),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn read_graph(path: &Path) -> Result<DagWithSelection> {
    let raw = std::fs::read_to_string(path)?;
    serde_json::from_str(&raw).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn parse_target(s: &str) -> Result<InterventionTarget> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(InterventionTarget::empty());
    }
    let vs = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<u32>()
                .map_err(|_| Error::invalid(format!("bad vertex index {x:?} in target {s:?}")))
        })
        .collect::<Result<Vec<u32>>>()?;
    Ok(InterventionTarget::new(vs))
}

/// "0;1,2" means two interventional settings {0} and {1,2}; the
/// observational setting is implicit.
fn parse_collection(s: &str) -> Result<TargetCollection> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(TargetCollection::observational());
    }
    let ts = s.split(';').map(parse_target).collect::<Result<Vec<_>>>()?;
    if ts.iter().any(|t| t.is_empty()) {
        return Err(Error::invalid(
            "interventional settings must be nonempty (the observational one is implicit)",
        ));
    }
    Ok(TargetCollection::with_interventions(ts))
}

fn targets_string(tc: &TargetCollection) -> String {
    tc.iter()
        .skip(1)
        .map(|t| t.as_vec().iter().map(u32::to_string).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(serde::Serialize)]
struct TwinJson {
    d: usize,
    t: usize,
    target: Vec<u32>,
    kinds: Vec<VertexKind>,
    edges: Vec<(u32, u32)>,
    zeta: u32,
    reality: Vec<u32>,
    basal: Vec<(u32, u32)>,
    noises: Vec<(u32, u32)>,
    selection: Vec<u32>,
}

fn twin_json(tw: &TwinGraph) -> TwinJson {
    let d = tw.base().d();
    let mut basal = Vec::new();
    let mut noises = Vec::new();
    for i in 0..d as u32 {
        if let Some(v) = tw.x_star(i) {
            basal.push((i, v));
        }
        if let Some(v) = tw.noise_vertex(i) {
            noises.push((i, v));
        }
    }
    TwinJson {
        d,
        t: tw.base().t(),
        target: tw.target().as_vec(),
        kinds: tw.graph().kinds().to_vec(),
        edges: tw.graph().edges(),
        zeta: tw.zeta(),
        reality: (0..d as u32).map(|i| tw.x(i).unwrap()).collect(),
        basal,
        noises,
        selection: tw.s_star().to_vec(),
    }
}

/// Relabels the generic twin projection into the pooled layout (observed
/// vertices first, the indicator last).
fn general_pooled_mag(tw: &TwinGraph) -> Result<MixedGraph> {
    let d = tw.base().d();
    let m = mag_general(tw.graph(), &VertexPartition::of_twin(tw))?;
    let mut perm = vec![0u32; d + 1];
    perm[0] = d as u32;
    for (i, p) in perm.iter_mut().enumerate().skip(1) {
        *p = (i - 1) as u32;
    }
    m.relabel(&perm)
}

/// Drops an isolated indicator vertex, leaving the observed block.
fn drop_isolated_indicator(m: &MixedGraph, d: usize) -> Result<MixedGraph> {
    if m.degree(d as u32) != 0 {
        return Err(Error::malformed("indicator vertex unexpectedly adjacent"));
    }
    let mut out = MixedGraph::new(vec![VertexKind::Observed; d]);
    for e in m.edges() {
        out.add_edge(e.i, e.j, e.mark_i, e.mark_j)?;
    }
    Ok(out)
}

fn graph_json_string(m: &MixedGraph) -> Result<String> {
    serde_json::to_string_pretty(m).map_err(|e| Error::Parse(e.to_string()))
}

fn cmd_twin(graph: &Path, target: &str, out: Option<&Path>, format: Format) -> Result<()> {
    let raw = std::fs::read(graph)?;
    let g = read_graph(graph)?;
    let target = parse_target(target)?;
    let tw = build_twin(&g, &target)?;
    let prov = provenance(None, &raw);
    let content = match format {
        Format::Json => json_output(prov, twin_json(&tw))?,
        Format::Dot => format!("{}{}", header_comment("//", &prov), twin_dot(&tw)),
        Format::Csv => return Err(Error::invalid("graphs have no CSV form; use json or dot")),
    };
    emit(out, &content)
}

fn cmd_mag(
    graph: &Path,
    target: &str,
    method: Method,
    out: Option<&Path>,
    format: Format,
) -> Result<()> {
    let raw = std::fs::read(graph)?;
    let g = read_graph(graph)?;
    let target = parse_target(target)?;
    let prov = provenance(None, &raw);

    let specific = |g: &DagWithSelection| -> Result<MixedGraph> {
        if target.is_empty() {
            mag_observational(g)
        } else {
            mag_of_twin(g, &target)
        }
    };
    let general = |g: &DagWithSelection| -> Result<MixedGraph> {
        let tw = build_twin(g, &target)?;
        let pooled = general_pooled_mag(&tw)?;
        if target.is_empty() {
            drop_isolated_indicator(&pooled, g.d())
        } else {
            Ok(pooled)
        }
    };

    match method {
        Method::Specific | Method::General => {
            let m = if matches!(method, Method::Specific) { specific(&g)? } else { general(&g)? };
            let content = match format {
                Format::Json => json_output(prov, &m)?,
                Format::Dot => format!("{}{}", header_comment("//", &prov), mixed_dot(&m)),
                Format::Csv => {
                    return Err(Error::invalid("graphs have no CSV form; use json or dot"))
                }
            };
            emit(out, &content)
        }
        Method::Both => {
            let a = specific(&g)?;
            let b = general(&g)?;
            let agree = graph_json_string(&a)? == graph_json_string(&b)?;
            if !agree {
                eprintln!("constructions disagree");
                eprintln!("closed form:\n{}", graph_json_string(&a)?);
                eprintln!("projection:\n{}", graph_json_string(&b)?);
                return Err(Error::OrientationConflict {
                    i: 0,
                    j: 0,
                    detail: "closed-form and projected ancestral graphs differ".into(),
                });
            }
            #[derive(serde::Serialize)]
            struct BothOut {
                agree: bool,
                graph: MixedGraph,
            }
            let content = match format {
                Format::Json => json_output(prov, BothOut { agree, graph: a })?,
                Format::Dot => format!("{}// agree=true\n{}", header_comment("//", &prov), mixed_dot(&a)),
                Format::Csv => {
                    return Err(Error::invalid("graphs have no CSV form; use json or dot"))
                }
            };
            emit(out, &content)
        }
    }
}

fn cmd_discover(
    manifest: Option<&Path>,
    oracle: Option<&Path>,
    targets: Option<&str>,
    alpha: Option<f64>,
    jobs: usize,
    out: Option<&Path>,
    format: Format,
) -> Result<()> {
    let mut hashed = Vec::new();
    if let Some(m) = manifest {
        hashed.extend_from_slice(&std::fs::read(m)?);
    }
    if let Some(o) = oracle {
        hashed.extend_from_slice(&std::fs::read(o)?);
    }
    if let Some(t) = targets {
        hashed.extend_from_slice(t.as_bytes());
    }

    let result: CdisResult = match (manifest, oracle) {
        (_, Some(graph_path)) => {
            let g = read_graph(graph_path)?;
            let collection = match targets {
                Some(s) => parse_collection(s)?,
                None => {
                    let m = manifest.ok_or_else(|| {
                        Error::invalid("--oracle needs --targets or a manifest to take them from")
                    })?;
                    manifest_targets(m)?
                }
            };
            let provider = OracleCi::new(g, collection)?;
            cdis(&provider, &CdisOptions { policy: ConflictPolicy::Strict, max_cond_size: None, jobs })?
        }
        (Some(m), None) => {
            let data = Dataset::load(m)?;
            let a = alpha.unwrap_or_else(|| default_alpha(data.d()));
            let provider = FisherZCi::new(data, a)?;
            cdis(&provider, &CdisOptions { policy: ConflictPolicy::Soft, max_cond_size: None, jobs })?
        }
        (None, None) => {
            return Err(Error::invalid("give a dataset manifest or --oracle with --targets"))
        }
    };

    let prov = provenance(None, &hashed);
    let content = match format {
        Format::Json => json_output(prov, result.bundle())?,
        Format::Dot => format!("{}{}", header_comment("//", &prov), mixed_dot(&result.pag0.graph)),
        Format::Csv => return Err(Error::invalid("bundles have no CSV form; use json or dot")),
    };
    emit(out, &content)
}

fn manifest_targets(path: &Path) -> Result<TargetCollection> {
    let data = Dataset::load(path)?;
    let mut interventional = Vec::new();
    for k in 1..data.num_settings() {
        match data.target(k) {
            Some(t) if !t.is_empty() => interventional.push(t.clone()),
            _ => {
                return Err(Error::invalid(format!(
                    "setting {k} in the manifest lacks a nonempty target"
                )))
            }
        }
    }
    Ok(TargetCollection::with_interventions(interventional))
}

#[derive(serde::Serialize, serde::Deserialize)]
struct TruthFile {
    graph: DagWithSelection,
    /// Interventional targets; the observational setting is implicit.
    targets: Vec<Vec<u32>>,
}

fn cmd_simulate(config: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let raw = std::fs::read(config)?;
    let mut cfg: ExperimentConfig = serde_json::from_slice(&raw)
        .map_err(|e| Error::Parse(format!("{}: {e}", config.display())))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let effective =
        serde_json::to_vec_pretty(&cfg).map_err(|e| Error::Parse(e.to_string()))?;
    let run = simulate_experiment(&cfg)?;
    std::fs::create_dir_all(out)?;
    run.dataset.save(out)?;
    let truth = TruthFile {
        graph: run.scm.dag().clone(),
        targets: run.targets.iter().skip(1).map(|t| t.as_vec()).collect(),
    };
    let truth_json =
        serde_json::to_string_pretty(&truth).map_err(|e| Error::Parse(e.to_string()))?;
    write_atomic(&out.join("truth.json"), format!("{truth_json}\n").as_bytes())?;
    let prov = provenance(Some(cfg.seed), &effective);
    let prov_json =
        serde_json::to_string_pretty(&prov).map_err(|e| Error::Parse(e.to_string()))?;
    write_atomic(&out.join("provenance.json"), format!("{prov_json}\n").as_bytes())?;
    Ok(())
}

fn parse_estimate(path: &Path) -> Result<MixedGraph> {
    let raw = std::fs::read_to_string(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&raw).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let candidate = value
        .pointer("/result/pag0")
        .or_else(|| value.get("pag0"))
        .unwrap_or(&value);
    serde_json::from_value(candidate.clone())
        .map_err(|e| Error::Parse(format!("{}: not a marked graph: {e}", path.display())))
}

fn cmd_eval(estimate: &Path, truth: &Path, out: Option<&Path>) -> Result<()> {
    let mut hashed = std::fs::read(estimate)?;
    hashed.extend_from_slice(&std::fs::read(truth)?);
    let est = parse_estimate(estimate)?;
    let raw = std::fs::read_to_string(truth)?;
    let truth_file: TruthFile = serde_json::from_str(&raw)
        .map_err(|e| Error::Parse(format!("{}: {e}", truth.display())))?;
    let collection = TargetCollection::with_interventions(
        truth_file.targets.iter().map(|vs| InterventionTarget::new(vs.iter().copied())),
    );
    let report = evaluate(&est, &truth_file.graph, &collection)?;
    let prov = provenance(None, &hashed);
    let mut content = header_comment("#", &prov);
    content.push_str("arrow_precision,arrow_recall,arrow_f1,edgemark_accuracy,skeleton_shd\n");
    content.push_str(&format!(
        "{},{},{},{},{}\n",
        report.arrow_precision,
        report.arrow_recall,
        report.arrow_f1,
        report.edgemark_accuracy,
        report.skeleton_shd
    ));
    emit(out, &content)
}

fn cmd_equiv(g1: &Path, t1: &str, g2: &Path, t2: &str, out: Option<&Path>) -> Result<()> {
    let mut hashed = std::fs::read(g1)?;
    hashed.extend_from_slice(&std::fs::read(g2)?);
    hashed.extend_from_slice(t1.as_bytes());
    hashed.extend_from_slice(t2.as_bytes());
    let a = read_graph(g1)?;
    let b = read_graph(g2)?;
    let ta = parse_collection(t1)?;
    let tb = parse_collection(t2)?;
    let verdict = markov_equivalent(&a, &ta, &b, &tb)?;
    println!("{}", if verdict { "equivalent" } else { "not equivalent" });
    if let Some(path) = out {
        #[derive(serde::Serialize)]
        struct Verdict {
            equivalent: bool,
        }
        let content = json_output(provenance(None, &hashed), Verdict { equivalent: verdict })?;
        write_atomic(path, content.as_bytes())?;
    }
    Ok(())
}

fn count_directed(m: &MixedGraph) -> usize {
    let mut count = 0;
    for (u, v) in m.adjacencies() {
        if m.has_directed_edge(u, v) || m.has_directed_edge(v, u) {
            count += 1;
        }
    }
    count
}

fn cmd_enumerate(d: usize, t_max: usize, k_max: usize, out: Option<&Path>) -> Result<()> {
    if d > 4 || t_max > 2 || k_max > 2 {
        return Err(Error::ResourceLimit(format!(
            "enumeration is desk-scale only (d ≤ 4, t_max ≤ 2, k_max ≤ 2); got d={d} t_max={t_max} k_max={k_max}"
        )));
    }
    let mut collections = Vec::new();
    for k in 0..=k_max {
        collections.extend(enumerate_target_collections(d, k)?);
    }
    let mut instances: Vec<(usize, String, EquivalenceKey)> = Vec::new();
    let mut models = Vec::new();
    for (model_id, g) in enumerate_models(d, t_max)?.enumerate() {
        for tc in &collections {
            let key = equivalence_key(&g, tc)?;
            instances.push((model_id, targets_string(tc), key));
        }
        models.push(g);
    }
    let mut class_ids: BTreeMap<&EquivalenceKey, usize> = BTreeMap::new();
    let mut class_sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for (_, _, key) in &instances {
        let next = class_ids.len();
        let id = *class_ids.entry(key).or_insert(next);
        *class_sizes.entry(id).or_insert(0) += 1;
    }
    // Identifiable arrows are a class property: every member answers the
    // oracle identically.
    let mut arrows_by_class: BTreeMap<usize, usize> = BTreeMap::new();
    let prov = provenance(None, format!("enumerate d={d} t_max={t_max} k_max={k_max}").as_bytes());
    let mut content = header_comment("#", &prov);
    content.push_str("model_id,targets,class_id,class_size,identifiable_arrow_count\n");
    let mut idx = 0usize;
    for (model_id, g) in models.iter().enumerate() {
        for tc in &collections {
            let (_, targets, key) = &instances[idx];
            idx += 1;
            let class_id = class_ids[key];
            let arrows = match arrows_by_class.get(&class_id) {
                Some(&a) => a,
                None => {
                    let oracle = OracleCi::new(g.clone(), tc.clone())?;
                    let result = cdis(&oracle, &CdisOptions::default())?;
                    let a = count_directed(&result.pag0.graph);
                    arrows_by_class.insert(class_id, a);
                    a
                }
            };
            content.push_str(&format!(
                "{model_id},\"{targets}\",{class_id},{},{arrows}\n",
                class_sizes[&class_id]
            ));
        }
    }
    emit(out, &content)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Twin { graph, target, out, format } => {
            cmd_twin(&graph, &target, out.as_deref(), format)
        }
        Command::Mag { graph, target, method, out, format } => {
            cmd_mag(&graph, &target, method, out.as_deref(), format)
        }
        Command::Discover { manifest, oracle, targets, alpha, jobs, out, format } => cmd_discover(
            manifest.as_deref(),
            oracle.as_deref(),
            targets.as_deref(),
            alpha,
            jobs,
            out.as_deref(),
            format,
        ),
        Command::Simulate { config, out, seed } => cmd_simulate(&config, &out, seed),
        Command::Eval { estimate, truth, out } => cmd_eval(&estimate, &truth, out.as_deref()),
        Command::Equiv { g1, t1, g2, t2, out } => cmd_equiv(&g1, &t1, &g2, &t2, out.as_deref()),
        Command::Enumerate { d, t_max, k_max, out } => cmd_enumerate(d, t_max, k_max, out.as_deref()),
    }
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) => 2,
        Error::MalformedGraph(_)
        | Error::Parse(_)
        | Error::Io(_)
        | Error::InsufficientData(_)
        | Error::DegenerateConditioning(_) => 3,
        Error::OrientationConflict { .. } => 4,
        Error::ResourceLimit(_) | Error::SelectionTooStrict { .. } => 5,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("CDIS_LOG")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
