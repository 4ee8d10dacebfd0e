//! Data plumbing around the estimators: CSV/TSV ingestion, clinical label
//! derivation with discordance auditing, correlation-network export, and a
//! seeded synthetic data generator for contamination experiments.

pub mod io;
pub mod labels;
pub mod network;
pub mod synthetic;

pub use io::{load_dataset, write_dataset, DataFormat, LoadedData};
pub use labels::{
    derive_label, read_clinical_records, write_labels_csv, write_suspects_csv, ClinicalRecord,
    ClinicalValue, Her2Source, Label, LabelResult,
};
pub use network::{correlation_network, ClassFilter, GeneNetwork, NetworkEdge};
pub use synthetic::{generate_synthetic, generate_two_regime, GroundTruth, SyntheticConfig};
