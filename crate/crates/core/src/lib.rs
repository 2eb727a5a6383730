//! Control flow analysis of LySa protocol models.
//!
//! The pipeline is: [`parser`] reads a `.lysa` model, [`cfa`] computes the
//! least estimate (ρ, κ, ψ), optionally composed with the Dolev-Yao
//! [`attacker`], and [`scenario`] turns estimates into verdicts. [`exec`] runs
//! processes concretely as an independent cross-check.

pub mod attacker;
pub mod exec;
pub mod cfa;
pub mod model;
pub mod parser;
pub mod scenario;

pub use attacker::{attacker_constraints, authentic, confidential, AttackerConfig};
pub use cfa::{analyze, check, solve, AbstractValue, AnalysisOptions, AnalysisResult};
pub use model::{CanonicalName, CryptoPoint, Ident, Name, Process, Term};
pub use parser::{parse, parse_process, pretty};
