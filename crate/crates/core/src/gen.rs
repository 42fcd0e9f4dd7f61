//! Synthetic ontologies for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::ontology::{AxiomKind, ConceptExpr, ConceptId, Ontology, RoleId};

/// `A0 <= A1, A1 <= A2, ..., A(n-1) <= An`.
pub fn chain_ontology(n: usize) -> Ontology {
    let mut o = Ontology::default();
    let names: Vec<ConceptId> = (0..=n)
        .map(|i| o.symbols.intern_concept(&format!("A{i}")))
        .collect();
    for w in names.windows(2) {
        o.push(AxiomKind::Gci {
            lhs: ConceptExpr::name(w[0]),
            rhs: ConceptExpr::name(w[1]),
        });
    }
    o
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomParams {
    pub concepts: usize,
    pub roles: usize,
    /// Upper bound on the axiom count after normalization.
    pub normalized_axioms: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            concepts: 10,
            roles: 3,
            normalized_axioms: 15,
        }
    }
}

/// A random ontology over at most `params.concepts` names `C0..` and
/// `params.roles` roles `r0..`.
///
/// Concept edges mostly point from lower to higher indices so that long
/// derivations, and hence several explanations per query, are common.
pub fn random_ontology<R: Rng + ?Sized>(rng: &mut R, params: RandomParams) -> Ontology {
    let mut o = Ontology::default();
    // A smaller pool per ontology makes overlapping derivations likelier.
    let pool = rng.gen_range(params.concepts.clamp(2, 4)..=params.concepts.max(2));
    let concepts: Vec<ConceptId> = (0..pool)
        .map(|i| o.symbols.intern_concept(&format!("C{i}")))
        .collect();
    let roles: Vec<RoleId> = (0..params.roles.max(1))
        .map(|i| o.symbols.intern_role(&format!("r{i}")))
        .collect();

    let n = concepts.len();
    // Two distinct indices, ordered upward most of the time.
    let pair = |rng: &mut R| {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        if rng.gen_bool(0.8) {
            (a.min(b), a.max(b))
        } else {
            (a.max(b), a.min(b))
        }
    };
    let name = |i: usize| ConceptExpr::name(concepts[i]);

    let target = rng.gen_range(params.normalized_axioms.min(4)..=params.normalized_axioms);
    let mut budget = target;
    while budget > 0 {
        let shape = rng.gen_range(0..100);
        let (a, b) = pair(rng);
        let r = *roles.choose(rng).unwrap();
        let (kind, cost) = match shape {
            0..=39 => (
                AxiomKind::Gci {
                    lhs: name(a),
                    rhs: name(b),
                },
                1,
            ),
            40..=54 => (
                AxiomKind::Gci {
                    lhs: name(a),
                    rhs: ConceptExpr::exists(r, name(b)),
                },
                1,
            ),
            55..=69 => (
                AxiomKind::Gci {
                    lhs: ConceptExpr::exists(r, name(a)),
                    rhs: name(b),
                },
                1,
            ),
            70..=81 => {
                let c = rng.gen_range(0..n);
                (
                    AxiomKind::Gci {
                        lhs: ConceptExpr::conj(name(a), name(c)),
                        rhs: name(b),
                    },
                    1,
                )
            }
            82..=87 if budget >= 2 => (
                AxiomKind::Equiv {
                    lhs: name(a),
                    rhs: name(b),
                },
                2,
            ),
            88..=93 => {
                let s = *roles.choose(rng).unwrap();
                (
                    AxiomKind::RoleInc {
                        chain: vec![r],
                        sup: s,
                    },
                    1,
                )
            }
            _ => {
                let s = *roles.choose(rng).unwrap();
                let t = *roles.choose(rng).unwrap();
                (
                    AxiomKind::RoleInc {
                        chain: vec![r, s],
                        sup: t,
                    },
                    1,
                )
            }
        };
        o.push(kind);
        budget -= cost;
    }
    o
}
