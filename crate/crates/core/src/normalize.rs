//! Linear-time normalization of EL+ ontologies.
//!
//! Every normalized axiom has one of six shapes over atomic concepts
//! (names, top, or fresh names) and roles:
//!
//! | form        | shape           |
//! |-------------|-----------------|
//! | `Sub`       | A ⊑ B           |
//! | `Conj`      | A1 ⊓ A2 ⊑ B     |
//! | `Exists`    | A ⊑ ∃r.B        |
//! | `ExistsSub` | ∃r.A ⊑ B        |
//! | `Role`      | r ⊑ s           |
//! | `Chain`     | r1 ∘ r2 ⊑ s     |
//!
//! Fresh concepts are named `_N0, _N1, …` and fresh roles `_r0, _r1, …`,
//! allocated in one left-to-right pass over the source axioms.

use std::collections::BTreeSet;

use crate::ontology::{
    render_kind, AxiomId, AxiomKind, ConceptExpr, ConceptId, Ontology, RoleId, SymbolTable,
};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NormId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormalForm {
    Sub {
        sub: ConceptId,
        sup: ConceptId,
    },
    Conj {
        left: ConceptId,
        right: ConceptId,
        sup: ConceptId,
    },
    Exists {
        sub: ConceptId,
        role: RoleId,
        filler: ConceptId,
    },
    ExistsSub {
        role: RoleId,
        filler: ConceptId,
        sup: ConceptId,
    },
    Role {
        sub: RoleId,
        sup: RoleId,
    },
    Chain {
        first: RoleId,
        second: RoleId,
        sup: RoleId,
    },
}

impl NormalForm {
    /// `C ⊑ C` and `C ⊑ ⊤` hold in every interpretation.
    pub fn is_trivial(&self) -> bool {
        matches!(*self, NormalForm::Sub { sub, sup } if sub == sup || sup.is_top())
    }

    pub fn is_role_inclusion(&self) -> bool {
        matches!(self, NormalForm::Role { .. } | NormalForm::Chain { .. })
    }

    /// The same axiom in source syntax.
    pub fn to_kind(&self) -> AxiomKind {
        let c = ConceptExpr::name;
        match *self {
            NormalForm::Sub { sub, sup } => AxiomKind::Gci {
                lhs: c(sub),
                rhs: c(sup),
            },
            NormalForm::Conj { left, right, sup } => AxiomKind::Gci {
                lhs: ConceptExpr::conj(c(left), c(right)),
                rhs: c(sup),
            },
            NormalForm::Exists { sub, role, filler } => AxiomKind::Gci {
                lhs: c(sub),
                rhs: ConceptExpr::exists(role, c(filler)),
            },
            NormalForm::ExistsSub { role, filler, sup } => AxiomKind::Gci {
                lhs: ConceptExpr::exists(role, c(filler)),
                rhs: c(sup),
            },
            NormalForm::Role { sub, sup } => AxiomKind::RoleInc {
                chain: vec![sub],
                sup,
            },
            NormalForm::Chain { first, second, sup } => AxiomKind::RoleInc {
                chain: vec![first, second],
                sup,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormalAxiom {
    pub id: NormId,
    pub form: NormalForm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedTBox {
    /// Source symbols extended with the fresh names.
    pub symbols: SymbolTable,
    pub axioms: Vec<NormalAxiom>,
    origin: Vec<BTreeSet<AxiomId>>,
    pub fresh_concepts: Vec<ConceptId>,
    pub fresh_roles: Vec<RoleId>,
}

impl NormalizedTBox {
    /// Builds a TBox directly from normal forms; axiom `i` gets origin `{i}`.
    pub fn from_forms(symbols: SymbolTable, forms: impl IntoIterator<Item = NormalForm>) -> Self {
        let axioms: Vec<NormalAxiom> = forms
            .into_iter()
            .enumerate()
            .map(|(i, form)| NormalAxiom {
                id: NormId(i),
                form,
            })
            .collect();
        let origin = (0..axioms.len())
            .map(|i| BTreeSet::from([AxiomId(i)]))
            .collect();
        NormalizedTBox {
            symbols,
            axioms,
            origin,
            fresh_concepts: Vec::new(),
            fresh_roles: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    pub fn form(&self, id: NormId) -> NormalForm {
        self.axioms[id.0].form
    }

    pub fn origin(&self, id: NormId) -> &BTreeSet<AxiomId> {
        &self.origin[id.0]
    }

    pub fn count_gcis(&self) -> usize {
        self.axioms
            .iter()
            .filter(|a| !a.form.is_role_inclusion())
            .count()
    }

    pub fn count_role_inclusions(&self) -> usize {
        self.axioms
            .iter()
            .filter(|a| a.form.is_role_inclusion())
            .count()
    }

    /// Ids of the axioms that get selector variables.
    pub fn non_trivial(&self) -> impl Iterator<Item = NormId> + '_ {
        self.axioms
            .iter()
            .filter(|a| !a.form.is_trivial())
            .map(|a| a.id)
    }

    pub fn render_axiom(&self, id: NormId) -> String {
        render_kind(&self.symbols, &self.form(id).to_kind())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for a in &self.axioms {
            out.push_str(&self.render_axiom(a.id));
            out.push('\n');
        }
        out
    }

    /// Maps normalized axioms back to the source statements they came from.
    pub fn explain_origin(
        &self,
        ids: impl IntoIterator<Item = NormId>,
    ) -> Result<BTreeSet<AxiomId>, Error> {
        let mut out = BTreeSet::new();
        for id in ids {
            let origin = self
                .origin
                .get(id.0)
                .ok_or(Error::NormalizedOutOfRange(id.0))?;
            out.extend(origin.iter().copied());
        }
        Ok(out)
    }
}

/// Free-function form of [`NormalizedTBox::explain_origin`].
pub fn explain_origin(
    t: &NormalizedTBox,
    ids: impl IntoIterator<Item = NormId>,
) -> Result<BTreeSet<AxiomId>, Error> {
    t.explain_origin(ids)
}

struct Normalizer {
    symbols: SymbolTable,
    axioms: Vec<NormalAxiom>,
    origin: Vec<BTreeSet<AxiomId>>,
    fresh_concepts: Vec<ConceptId>,
    fresh_roles: Vec<RoleId>,
    next_concept: usize,
    next_role: usize,
    current: AxiomId,
}

impl Normalizer {
    fn emit(&mut self, form: NormalForm) {
        let id = NormId(self.axioms.len());
        self.axioms.push(NormalAxiom { id, form });
        self.origin.push(BTreeSet::from([self.current]));
    }

    fn fresh_concept(&mut self) -> ConceptId {
        loop {
            let name = format!("_N{}", self.next_concept);
            self.next_concept += 1;
            if self.symbols.concept(&name).is_none() && self.symbols.role(&name).is_none() {
                let id = self.symbols.intern_concept(&name);
                self.fresh_concepts.push(id);
                return id;
            }
        }
    }

    fn fresh_role(&mut self) -> RoleId {
        loop {
            let name = format!("_r{}", self.next_role);
            self.next_role += 1;
            if self.symbols.concept(&name).is_none() && self.symbols.role(&name).is_none() {
                let id = self.symbols.intern_role(&name);
                self.fresh_roles.push(id);
                return id;
            }
        }
    }

    fn axiom(&mut self, kind: &AxiomKind) {
        match kind {
            AxiomKind::Gci { lhs, rhs } => self.gci(lhs, rhs),
            AxiomKind::Equiv { lhs, rhs } => {
                self.gci(lhs, rhs);
                self.gci(rhs, lhs);
            }
            AxiomKind::RoleInc { chain, sup } => self.role_inclusion(chain, *sup),
        }
    }

    fn gci(&mut self, lhs: &ConceptExpr, rhs: &ConceptExpr) {
        match (lhs.as_atom(), rhs.as_atom()) {
            (Some(a), _) => self.below(a, rhs),
            (None, Some(b)) => self.above(lhs, b),
            (None, None) => {
                let f = self.fresh_concept();
                self.above(lhs, f);
                self.below(f, rhs);
            }
        }
    }

    /// Emits axioms for `c ⊑ b` where `b` is atomic.
    fn above(&mut self, c: &ConceptExpr, b: ConceptId) {
        match c {
            ConceptExpr::Top | ConceptExpr::Name(_) => {
                let sub = c.as_atom().unwrap();
                self.emit(NormalForm::Sub { sub, sup: b });
            }
            ConceptExpr::Conj(l, r) => {
                let left = self.name_subsumee(l);
                let right = self.name_subsumee(r);
                self.emit(NormalForm::Conj {
                    left,
                    right,
                    sup: b,
                });
            }
            ConceptExpr::Exists(role, filler) => {
                let filler = self.name_subsumee(filler);
                self.emit(NormalForm::ExistsSub {
                    role: *role,
                    filler,
                    sup: b,
                });
            }
        }
    }

    /// An atomic concept `x` with `c ⊑ x`, introducing a fresh name when
    /// `c` is complex.
    fn name_subsumee(&mut self, c: &ConceptExpr) -> ConceptId {
        match c.as_atom() {
            Some(a) => a,
            None => {
                let f = self.fresh_concept();
                self.above(c, f);
                f
            }
        }
    }

    /// Emits axioms for `a ⊑ d` where `a` is atomic.
    fn below(&mut self, a: ConceptId, d: &ConceptExpr) {
        match d {
            ConceptExpr::Top | ConceptExpr::Name(_) => {
                let sup = d.as_atom().unwrap();
                self.emit(NormalForm::Sub { sub: a, sup });
            }
            ConceptExpr::Conj(l, r) => {
                self.below(a, l);
                self.below(a, r);
            }
            ConceptExpr::Exists(role, filler) => match filler.as_atom() {
                Some(filler) => self.emit(NormalForm::Exists {
                    sub: a,
                    role: *role,
                    filler,
                }),
                None => {
                    let g = self.fresh_concept();
                    self.emit(NormalForm::Exists {
                        sub: a,
                        role: *role,
                        filler: g,
                    });
                    self.below(g, filler);
                }
            },
        }
    }

    fn role_inclusion(&mut self, chain: &[RoleId], sup: RoleId) {
        match chain {
            [] => {}
            [sub] => self.emit(NormalForm::Role { sub: *sub, sup }),
            [first, second] => self.emit(NormalForm::Chain {
                first: *first,
                second: *second,
                sup,
            }),
            [first, second, rest @ ..] => {
                // r1 ∘ r2 ∘ … ∘ rn ⊑ s  ~>  r1 ∘ r2 ⊑ u, u ∘ r3 ∘ … ∘ rn ⊑ s
                let u = self.fresh_role();
                self.emit(NormalForm::Chain {
                    first: *first,
                    second: *second,
                    sup: u,
                });
                let mut tail = Vec::with_capacity(rest.len() + 1);
                tail.push(u);
                tail.extend_from_slice(rest);
                self.role_inclusion(&tail, sup);
            }
        }
    }
}

/// Normalizes `o`. Equivalences are split into two inclusions first.
pub fn normalize(o: &Ontology) -> NormalizedTBox {
    let mut n = Normalizer {
        symbols: o.symbols.clone(),
        axioms: Vec::new(),
        origin: Vec::new(),
        fresh_concepts: Vec::new(),
        fresh_roles: Vec::new(),
        next_concept: 0,
        next_role: 0,
        current: AxiomId(0),
    };
    for a in &o.axioms {
        n.current = a.id;
        n.axiom(&a.kind);
    }
    NormalizedTBox {
        symbols: n.symbols,
        axioms: n.axioms,
        origin: n.origin,
        fresh_concepts: n.fresh_concepts,
        fresh_roles: n.fresh_roles,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::parse_ontology;

    const GALEN: &str = include_str!("../data/galen_mg.elt");

    fn rendered(t: &NormalizedTBox) -> Vec<String> {
        t.axioms.iter().map(|a| t.render_axiom(a.id)).collect()
    }

    #[test]
    fn galen_normalizes_to_eleven_gcis_and_two_ris() {
        let o = parse_ontology(GALEN).unwrap();
        let t = normalize(&o);
        assert_eq!(t.count_gcis(), 11);
        assert_eq!(t.count_role_inclusions(), 2);
        assert_eq!(t.fresh_concepts.len(), 1);
        assert!(t.fresh_roles.is_empty());
        let text = rendered(&t);
        assert!(
            text.contains(&"(hasLoc some Heart) <= _N0".to_string()),
            "{text:?}"
        );
        assert!(text.contains(&"Disease and _N0 <= HeartDisease".to_string()));
        // The fresh name comes from the equivalence, statement 4.
        for (i, a) in t.axioms.iter().enumerate() {
            if text[i].contains("_N0") {
                assert_eq!(t.origin(a.id), &BTreeSet::from([AxiomId(4)]));
            }
        }
    }

    #[test]
    fn already_normal() {
        let o = parse_ontology("A <= B").unwrap();
        let t = normalize(&o);
        assert_eq!(rendered(&t), vec!["A <= B"]);
        assert!(t.fresh_concepts.is_empty());
    }

    #[test]
    fn nested_existential_gets_fresh_filler() {
        let o = parse_ontology("A <= (r some (s some B))").unwrap();
        let t = normalize(&o);
        assert_eq!(rendered(&t), vec!["A <= (r some _N0)", "_N0 <= (s some B)"]);
        assert_eq!(
            t.explain_origin([NormId(0), NormId(1)]).unwrap(),
            BTreeSet::from([AxiomId(0)])
        );
    }

    #[test]
    fn complex_both_sides() {
        let o = parse_ontology("(r some A) <= B and (s some C)").unwrap();
        let t = normalize(&o);
        assert_eq!(
            rendered(&t),
            vec!["(r some A) <= _N0", "_N0 <= B", "_N0 <= (s some C)"]
        );
    }

    #[test]
    fn long_conjunction_on_the_left() {
        let o = parse_ontology("A and B and C <= D").unwrap();
        let t = normalize(&o);
        assert_eq!(rendered(&t), vec!["B and C <= _N0", "A and _N0 <= D"]);
    }

    #[test]
    fn long_role_chain() {
        let o = parse_ontology("p o q o r o s <= t").unwrap();
        let t = normalize(&o);
        assert_eq!(
            rendered(&t),
            vec!["p o q <= _r0", "_r0 o r <= _r1", "_r1 o s <= t"]
        );
        assert_eq!(t.fresh_roles.len(), 2);
    }

    #[test]
    fn fresh_names_skip_user_names() {
        let o = parse_ontology("_N0 <= (r some (s some B))").unwrap();
        let t = normalize(&o);
        assert_eq!(
            rendered(&t),
            vec!["_N0 <= (r some _N1)", "_N1 <= (s some B)"]
        );
    }

    #[test]
    fn equivalence_halves_share_origin() {
        let o = parse_ontology("A <= C\nA == B").unwrap();
        let t = normalize(&o);
        assert_eq!(rendered(&t), vec!["A <= C", "A <= B", "B <= A"]);
        assert_eq!(
            t.explain_origin([NormId(1), NormId(2)]).unwrap(),
            BTreeSet::from([AxiomId(1)])
        );
        assert!(t.explain_origin([]).unwrap().is_empty());
        assert_eq!(
            t.explain_origin([NormId(3)]),
            Err(Error::NormalizedOutOfRange(3))
        );
    }

    #[test]
    fn trivial_forms() {
        let o = parse_ontology("A <= top\nA <= A\ntop <= A\nA <= B").unwrap();
        let t = normalize(&o);
        let trivial: Vec<bool> = t.axioms.iter().map(|a| a.form.is_trivial()).collect();
        assert_eq!(trivial, vec![true, true, false, false]);
        assert_eq!(
            t.non_trivial().collect::<Vec<_>>(),
            vec![NormId(2), NormId(3)]
        );
    }

    #[test]
    fn galen_growth_is_linear() {
        let o = parse_ontology(GALEN).unwrap();
        let t = normalize(&o);
        assert!(t.len() <= 4 * o.size());
    }
}
