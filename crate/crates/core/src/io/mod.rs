//! Configuration, presets, binary snapshots and CSV output.

mod config;
mod presets;
mod records;
mod snapshot;

pub use config::{
    parse_config, parse_config_with, EvolutionSection, GroundStateSection, Preset, PresetParams, RunConfig,
    TransformKind, TransformSection,
};
pub use presets::{band_limited_noise, ground_state_for, initial_field};
pub use records::{diagnostics_header, read_diagnostics, write_diagnostics, write_table, SCHEMA_LINE};
pub use snapshot::{
    decode_snapshot, encode_snapshot, read_snapshot, read_snapshot_kind, write_snapshot, write_snapshot_kind,
    SnapshotKind, MAGIC, VERSION,
};
