//! Causal discovery from interventional data under selection bias.
//!
//! The crate models selection-biased causal systems as DAGs whose sink
//! vertices represent selection, couples observational and interventional
//! regimes through twin graphs, projects them onto maximal ancestral
//! graphs, and recovers partially oriented structure from conditional
//! independence and invariance queries (oracle or data-driven).

pub mod cdis;
pub mod ci;
pub mod dot;
pub mod equiv;
pub mod error;
pub mod fci;
pub mod graph;
pub mod mag;
pub mod mixed;
pub mod sim;
pub mod twin;

pub use cdis::{cdis, cdis_from_data, CdisBundle, CdisOptions, CdisResult, RefinementAction};
pub use ci::{default_alpha, fisher_z, CiProvider, Dataset, FisherZCi, OracleCi};
pub use dot::{dag_dot, mixed_dot, twin_dot};
pub use equiv::{
    ci_signature, enumerate_models, enumerate_target_collections, equivalence_class,
    equivalence_key, markov_equivalent, CiSignature, TargetCollection,
};
pub use error::{Error, Result};
pub use fci::{
    apply_knowledge, fas, fci_plus, possible_d_sep, zhang_rules, ConflictPolicy, FasOptions,
    Knowledge, Pag, RuleFiring,
};
pub use graph::{Dag, DagWithSelection, VertexId, VertexKind};
pub use mag::{mag_general, mag_observational, mag_of_twin, VertexPartition};
pub use mixed::{Mark, MixedEdge, MixedGraph};
pub use sim::{
    evaluate, evaluate_against, generate_scm, ground_truth_pag, marginal_acceptance, pest_scm,
    sample_interventional, sample_observational, simulate_experiment, ExperimentConfig,
    InterventionMechanism, Link, MetricsReport, Noise, ScmInstance, SelectionSpec,
    SimulatedExperiment,
};
pub use twin::{build_twin, InterventionTarget, TwinGraph};
