//! Evolutionary multi-objective neural architecture search with
//! generation-to-generation policy transfer.
//!
//! Architectures are cell-based genomes ([`search_space`]) scored on reward,
//! parameter count and FLOPs ([`arch_metrics`]). Populations evolve under
//! NSGA-II ranking ([`moea`]), are scored by a pluggable evaluator
//! ([`evaluation`]), and the best network of each generation teaches the next
//! ([`transfer`]). [`orchestrator`] ties the pieces into a resumable run.
//!
//! The `examples/` directory has one runnable program per capability.

pub mod arch_metrics;
pub mod evaluation;
pub mod moea;
pub mod orchestrator;
pub mod search_space;
pub mod transfer;

pub use arch_metrics::{arch_stats, ArchStats, FidelityConfig};
pub use search_space::{CellKind, Chromosome, Gene, Genome, OperatorKind, SearchSpace};
