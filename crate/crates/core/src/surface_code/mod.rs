//! Rotated surface code layout, memory circuit and decoder graphs.

pub mod circuit;
pub mod faults;
pub mod graph;
pub mod layout;

pub use circuit::{build_memory_circuit, Circuit, OpKind, Operation};
pub use faults::{enumerate_fault_classes, BoundaryKind, FaultClass, FaultLocation, FaultOrigin};
pub use graph::{
    build_decoder_graph, build_decoder_graph_with_row, BoundaryMetadata, BoundaryState,
    DecoderGraph, DetectorId, DetectorKind, Edge, Mechanism,
};
pub use layout::{build_layout, Check, Layout, PauliType};
