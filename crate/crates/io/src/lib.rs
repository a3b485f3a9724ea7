//! On-disk `TOMO1` containers, plot data and the `tomo` command line.

pub mod cli;
pub mod container;
pub mod export;

pub use container::{
    decode, evolution_tolerances, read_container, recorded_tolerances, tolerance_metadata, write_container, write_quarantined, AxisSpec, Container,
    Dtype, Header, Kind, Loaded, Object, Payload, MAGIC,
};
