//! Axiom pinpointing for EL+ ontologies.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`ontology`] parses the `.elt` text format into an [`Ontology`].
//! 2. [`normalize`] rewrites it into normal form, remembering where every
//!    normalized axiom came from.
//! 3. [`classify`] computes the subsumption closure with completion rules
//!    and records every rule firing.
//! 4. [`encode`] turns the firings into a Horn formula over selector
//!    variables and builds a partial MaxSAT instance for one query.
//! 5. [`pinpoint`] enumerates all minimal correction subsets of that
//!    instance and dualizes them into the minimal axiom sets (MinAs) that
//!    explain the query.
//!
//! [`satcore`] is the CDCL engine used by the last stage.
//!
//! ```
//! use elpin::{classify, encode, normalize, ontology, pinpoint};
//!
//! let onto = ontology::parse_ontology("A <= B\nB <= C\nA <= C").unwrap();
//! let tbox = normalize::normalize(&onto);
//! let trace = classify::classify(&tbox);
//! let formula = encode::build_pinpoint_formula(&trace);
//! let query = ontology::parse_query("A <= C", &onto.symbols).unwrap();
//! let instance = encode::build_instance(&formula, query).unwrap();
//! let report = pinpoint::enumerate_minas(&instance, &pinpoint::Budget::default());
//! assert!(report.complete);
//! assert_eq!(report.minas.len(), 2);
//! ```

pub mod classify;
pub mod encode;
pub mod gen;
pub mod normalize;
pub mod ontology;
pub mod pinpoint;
pub mod satcore;

use thiserror::Error;

pub use classify::{classify, ClosureTrace};
pub use encode::{build_instance, build_pinpoint_formula, coi_reduce, emit_wcnf, PinpointInstance};
pub use normalize::{normalize, NormId, NormalizedTBox};
pub use ontology::{parse_ontology, parse_query, AxiomId, ConceptId, Ontology, ParseError, RoleId};
pub use pinpoint::{enumerate_minas, Budget, EnumerationReport, Mcs, Mina};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("source axiom id {0} is out of range")]
    AxiomOutOfRange(usize),
    #[error("normalized axiom id {0} is out of range")]
    NormalizedOutOfRange(usize),
    #[error("the query is not entailed by the ontology")]
    QueryNotEntailed,
    #[error("the instance is satisfiable, so the query has no minimal axiom set")]
    InstanceSatisfiable,
    #[error("literal over variable {var} exceeds the solver's {var_count} variables")]
    LiteralOutOfRange { var: u32, var_count: usize },
    #[error("brute force is limited to {max} non-trivial axioms, got {got}")]
    OracleGuard { max: usize, got: usize },
    #[error("budget exhausted")]
    BudgetExhausted,
}
