//! Flow-logic control flow analysis.
//!
//! A process is numbered by [`ProgramIndex`], turned into set constraints over
//! a finite tree grammar ([`Universe`]) and solved to the least (ρ, κ, ψ).

mod check;
mod constraint;
mod index;
mod result;
mod solver;

pub use check::check;
pub use constraint::{gen_process, gen_term, violation, Conclusion, Constraint, ConstraintSystem, Elem, Premise};
pub use index::{
    Action, EncSite, Node, NodeClass, NodeId, OccId, OccKind, Origin, ProgramIndex, SetRef, SiteId,
    TupleId, TupleNode, Universe, VarId,
};
pub use result::{AbstractValue, AnalysisResult};
pub use solver::{solve, solve_with, SolveError, SolverOptions};

use crate::attacker::{attacker_constraints, AttackerConfig};
use crate::model::{IndexPolicy, Process};

#[derive(Debug, Clone, Default)]
pub struct AnalysisOptions {
    pub policy: IndexPolicy,
    pub attacker: Option<AttackerConfig>,
    pub solver: SolverOptions,
}

/// Constraints for `p`, composed with the attacker when configured.
pub fn constraint_system(p: &Process, policy: &IndexPolicy, attacker: Option<&AttackerConfig>) -> ConstraintSystem {
    let index = ProgramIndex::build(p, policy);
    let universe = Universe::new(&index, attacker);
    let mut constraints = gen_process(&index, &universe);
    if let Some(cfg) = attacker {
        constraints.extend(attacker_constraints(cfg, &index, &universe));
    }
    ConstraintSystem {
        index,
        universe,
        constraints,
    }
}

pub fn analyze(p: &Process, opts: &AnalysisOptions) -> Result<AnalysisResult, SolveError> {
    let cs = constraint_system(p, &opts.policy, opts.attacker.as_ref());
    solve_with(&cs, &opts.solver)
}
