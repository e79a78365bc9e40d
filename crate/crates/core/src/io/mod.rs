//! Ingestion, persistence, and generation of datasets and models.

pub mod external;
pub mod manifest;
pub mod model;
pub mod synth;
pub mod table;

pub use external::{load_external_column, parse_external_column};
pub use manifest::{ResolvedManifest, ViewManifest, ViewSpec};
pub use model::{load_model, read_model, save_model, write_model};
pub use synth::{generate_synthetic, SynthData, SynthSpec};
pub use table::{load_dataset, load_query_rows, LabelMapping};
