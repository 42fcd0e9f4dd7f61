//! Completion-rule classification of a normalized TBox.
//!
//! Rules, over assertions `X ⊑ A` (`Subs`) and `X ⊑ ∃r.Y` (`ExSubs`):
//!
//! - R0: `X ⊑ X` and `X ⊑ ⊤` for every concept `X` of the TBox
//! - R1: `X ⊑ A`, `A ⊑ B` gives `X ⊑ B`
//! - R2: `X ⊑ A1`, `X ⊑ A2`, `A1 ⊓ A2 ⊑ B` gives `X ⊑ B`
//! - R3: `X ⊑ A`, `A ⊑ ∃r.B` gives `X ⊑ ∃r.B`
//! - R4: `X ⊑ ∃r.Y`, `Y ⊑ A`, `∃r.A ⊑ B` gives `X ⊑ B`
//! - R5: `X ⊑ ∃r.Y`, `r ⊑ s` gives `X ⊑ ∃s.Y`
//! - R6: `X ⊑ ∃r1.Y`, `Y ⊑ ∃r2.Z`, `r1 ∘ r2 ⊑ s` gives `X ⊑ ∃s.Z`
//!
//! Every distinct firing is recorded, including those whose consequent was
//! already known; the Horn encoding needs all of them.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::normalize::{NormId, NormalForm, NormalizedTBox};
use crate::ontology::{render_concept, ConceptExpr, ConceptId, RoleId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AssertionId(pub u32);

impl AssertionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AssertionKind {
    Subs(ConceptId, ConceptId),
    ExSubs(ConceptId, RoleId, ConceptId),
}

impl AssertionKind {
    /// Assertions that R0 produces: `X ⊑ X` and `X ⊑ ⊤`.
    pub fn is_trivial(&self) -> bool {
        matches!(*self, AssertionKind::Subs(a, b) if a == b || b.is_top())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Assertion {
    pub id: AssertionId,
    pub kind: AssertionKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    R0,
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleApplication {
    pub rule: Rule,
    pub antecedent_assertions: Vec<AssertionId>,
    pub antecedent_axioms: Vec<NormId>,
    pub consequent: AssertionId,
}

#[derive(Clone, Debug)]
pub struct ClosureTrace<'t> {
    pub tbox: &'t NormalizedTBox,
    /// In derivation order.
    pub assertions: Vec<Assertion>,
    pub applications: Vec<RuleApplication>,
    /// The assertion that each `Sub`/`Exists` axiom states.
    pub axiom_assertions: BTreeMap<NormId, AssertionId>,
    index: HashMap<AssertionKind, AssertionId>,
}

impl<'t> ClosureTrace<'t> {
    pub fn lookup(&self, kind: AssertionKind) -> Option<AssertionId> {
        self.index.get(&kind).copied()
    }

    pub fn kind(&self, id: AssertionId) -> AssertionKind {
        self.assertions[id.index()].kind
    }

    pub fn holds(&self, sub: ConceptId, sup: ConceptId) -> bool {
        sub == sup || sup.is_top() || self.index.contains_key(&AssertionKind::Subs(sub, sup))
    }

    /// All derived `Subs` pairs, as a set.
    pub fn subsumptions(&self) -> HashSet<(ConceptId, ConceptId)> {
        self.assertions
            .iter()
            .filter_map(|a| match a.kind {
                AssertionKind::Subs(x, y) => Some((x, y)),
                _ => None,
            })
            .collect()
    }

    pub fn assertion_set(&self) -> HashSet<AssertionKind> {
        self.index.keys().copied().collect()
    }

    /// `A <= B` or `A <= (r some B)`.
    pub fn render_assertion(&self, id: AssertionId) -> String {
        let sym = &self.tbox.symbols;
        match self.kind(id) {
            AssertionKind::Subs(a, b) => format!(
                "{} <= {}",
                render_concept(sym, &ConceptExpr::name(a)),
                render_concept(sym, &ConceptExpr::name(b))
            ),
            AssertionKind::ExSubs(a, r, b) => format!(
                "{} <= {}",
                render_concept(sym, &ConceptExpr::name(a)),
                render_concept(sym, &ConceptExpr::exists(r, ConceptExpr::name(b)))
            ),
        }
    }
}

pub fn classify(t: &NormalizedTBox) -> ClosureTrace<'_> {
    Engine::new(t, None).run()
}

/// Classifies only the axioms whose flag in `enabled` is set.
pub fn classify_subset<'t>(t: &'t NormalizedTBox, enabled: &[bool]) -> ClosureTrace<'t> {
    assert_eq!(enabled.len(), t.len(), "one flag per normalized axiom");
    Engine::new(t, Some(enabled)).run()
}

pub fn holds(c: &ClosureTrace<'_>, sub: ConceptId, sup: ConceptId) -> bool {
    c.holds(sub, sup)
}

type FiringKey = (Rule, u32, u32, u32, u32);

const NONE: u32 = u32::MAX;

struct Engine<'t> {
    tbox: &'t NormalizedTBox,
    init: Vec<ConceptId>,

    sub_by_lhs: Vec<Vec<(NormId, ConceptId)>>,
    conj_by_operand: Vec<Vec<(NormId, ConceptId, ConceptId)>>,
    exists_by_lhs: Vec<Vec<(NormId, RoleId, ConceptId)>>,
    exists_sub_by_role: Vec<Vec<(NormId, ConceptId, ConceptId)>>,
    exists_sub_by_filler: HashMap<(RoleId, ConceptId), Vec<(NormId, ConceptId)>>,
    role_by_sub: Vec<Vec<(NormId, RoleId)>>,
    chain_by_first: Vec<Vec<(NormId, RoleId, RoleId)>>,
    chain_by_second: Vec<Vec<(NormId, RoleId, RoleId)>>,

    assertions: Vec<Assertion>,
    index: HashMap<AssertionKind, AssertionId>,
    active: Vec<bool>,
    queue: VecDeque<AssertionId>,
    /// Active `X ⊑ ∃r.Y`, keyed by `Y`: `(X, r, id)`.
    links_in: Vec<Vec<(ConceptId, RoleId, AssertionId)>>,
    /// Active `X ⊑ ∃r.Y`, keyed by `(X, r)`: `(Y, id)`.
    links_out: HashMap<(ConceptId, RoleId), Vec<(ConceptId, AssertionId)>>,
    /// Active `X ⊑ ∃r.Y`, keyed by `(Y, r)`: `(X, id)`.
    links_in_role: HashMap<(ConceptId, RoleId), Vec<(ConceptId, AssertionId)>>,

    applications: Vec<RuleApplication>,
    seen: HashSet<FiringKey>,
}

impl<'t> Engine<'t> {
    fn new(tbox: &'t NormalizedTBox, enabled: Option<&[bool]>) -> Self {
        let nc = tbox.symbols.concept_count();
        let nr = tbox.symbols.role_count();
        let mut e = Engine {
            tbox,
            init: Vec::new(),
            sub_by_lhs: vec![Vec::new(); nc],
            conj_by_operand: vec![Vec::new(); nc],
            exists_by_lhs: vec![Vec::new(); nc],
            exists_sub_by_role: vec![Vec::new(); nr],
            exists_sub_by_filler: HashMap::new(),
            role_by_sub: vec![Vec::new(); nr],
            chain_by_first: vec![Vec::new(); nr],
            chain_by_second: vec![Vec::new(); nr],
            assertions: Vec::new(),
            index: HashMap::new(),
            active: Vec::new(),
            queue: VecDeque::new(),
            links_in: vec![Vec::new(); nc],
            links_out: HashMap::new(),
            links_in_role: HashMap::new(),
            applications: Vec::new(),
            seen: HashSet::new(),
        };

        let mut occurs = vec![false; nc];
        let mut mark = |c: ConceptId, init: &mut Vec<ConceptId>| {
            if !occurs[c.index()] {
                occurs[c.index()] = true;
                init.push(c);
            }
        };
        for ax in &tbox.axioms {
            if enabled.is_some_and(|en| !en[ax.id.0]) {
                continue;
            }
            let id = ax.id;
            match ax.form {
                NormalForm::Sub { sub, sup } => {
                    mark(sub, &mut e.init);
                    mark(sup, &mut e.init);
                    e.sub_by_lhs[sub.index()].push((id, sup));
                }
                NormalForm::Conj { left, right, sup } => {
                    mark(left, &mut e.init);
                    mark(right, &mut e.init);
                    mark(sup, &mut e.init);
                    e.conj_by_operand[left.index()].push((id, right, sup));
                    if left != right {
                        e.conj_by_operand[right.index()].push((id, left, sup));
                    }
                }
                NormalForm::Exists { sub, role, filler } => {
                    mark(sub, &mut e.init);
                    mark(filler, &mut e.init);
                    e.exists_by_lhs[sub.index()].push((id, role, filler));
                }
                NormalForm::ExistsSub { role, filler, sup } => {
                    mark(filler, &mut e.init);
                    mark(sup, &mut e.init);
                    e.exists_sub_by_role[role.index()].push((id, filler, sup));
                    e.exists_sub_by_filler
                        .entry((role, filler))
                        .or_default()
                        .push((id, sup));
                }
                NormalForm::Role { sub, sup } => {
                    e.role_by_sub[sub.index()].push((id, sup));
                }
                NormalForm::Chain { first, second, sup } => {
                    e.chain_by_first[first.index()].push((id, second, sup));
                    e.chain_by_second[second.index()].push((id, first, sup));
                }
            }
        }
        e
    }

    fn intern(&mut self, kind: AssertionKind) -> AssertionId {
        if let Some(&id) = self.index.get(&kind) {
            return id;
        }
        let id = AssertionId(self.assertions.len() as u32);
        self.assertions.push(Assertion { id, kind });
        self.index.insert(kind, id);
        self.active.push(false);
        self.queue.push_back(id);
        id
    }

    fn fire(
        &mut self,
        rule: Rule,
        ants: &[AssertionId],
        axiom: Option<NormId>,
        kind: AssertionKind,
    ) {
        let consequent = self.intern(kind);
        let (a0, a1) = match *ants {
            [] => (NONE, NONE),
            [a] => (a.0, NONE),
            [a, b] => (a.0.min(b.0), a.0.max(b.0)),
            _ => unreachable!("rules have at most two assertion antecedents"),
        };
        let ax = axiom.map_or(NONE, |a| a.0 as u32);
        if !self.seen.insert((rule, a0, a1, ax, consequent.0)) {
            return;
        }
        let mut antecedent_assertions = ants.to_vec();
        antecedent_assertions.dedup();
        self.applications.push(RuleApplication {
            rule,
            antecedent_assertions,
            antecedent_axioms: axiom.into_iter().collect(),
            consequent,
        });
    }

    fn active_id(&self, kind: AssertionKind) -> Option<AssertionId> {
        self.index
            .get(&kind)
            .copied()
            .filter(|id| self.active[id.index()])
    }

    fn run(mut self) -> ClosureTrace<'t> {
        for c in std::mem::take(&mut self.init) {
            self.fire(Rule::R0, &[], None, AssertionKind::Subs(c, c));
            self.fire(Rule::R0, &[], None, AssertionKind::Subs(c, ConceptId::TOP));
        }

        while let Some(id) = self.queue.pop_front() {
            self.active[id.index()] = true;
            match self.assertions[id.index()].kind {
                AssertionKind::Subs(x, a) => self.process_subs(id, x, a),
                AssertionKind::ExSubs(x, r, y) => self.process_link(id, x, r, y),
            }
        }

        let mut axiom_assertions = BTreeMap::new();
        for ax in &self.tbox.axioms {
            let kind = match ax.form {
                NormalForm::Sub { sub, sup } => AssertionKind::Subs(sub, sup),
                NormalForm::Exists { sub, role, filler } => {
                    AssertionKind::ExSubs(sub, role, filler)
                }
                _ => continue,
            };
            if let Some(&aid) = self.index.get(&kind) {
                axiom_assertions.insert(ax.id, aid);
            }
        }

        ClosureTrace {
            tbox: self.tbox,
            assertions: self.assertions,
            applications: self.applications,
            axiom_assertions,
            index: self.index,
        }
    }

    fn process_subs(&mut self, id: AssertionId, x: ConceptId, a: ConceptId) {
        // R1
        for k in 0..self.sub_by_lhs[a.index()].len() {
            let (ax, b) = self.sub_by_lhs[a.index()][k];
            self.fire(Rule::R1, &[id], Some(ax), AssertionKind::Subs(x, b));
        }
        // R2
        for k in 0..self.conj_by_operand[a.index()].len() {
            let (ax, other, b) = self.conj_by_operand[a.index()][k];
            if let Some(oid) = self.active_id(AssertionKind::Subs(x, other)) {
                self.fire(Rule::R2, &[id, oid], Some(ax), AssertionKind::Subs(x, b));
            }
        }
        // R3
        for k in 0..self.exists_by_lhs[a.index()].len() {
            let (ax, r, b) = self.exists_by_lhs[a.index()][k];
            self.fire(Rule::R3, &[id], Some(ax), AssertionKind::ExSubs(x, r, b));
        }
        // R4, with this assertion as the filler premise `Y ⊑ A` (Y = x).
        for k in 0..self.links_in[x.index()].len() {
            let (z, r, link) = self.links_in[x.index()][k];
            if let Some(axs) = self.exists_sub_by_filler.get(&(r, a)) {
                for (ax, b) in axs.clone() {
                    self.fire(Rule::R4, &[link, id], Some(ax), AssertionKind::Subs(z, b));
                }
            }
        }
    }

    fn process_link(&mut self, id: AssertionId, x: ConceptId, r: RoleId, y: ConceptId) {
        self.links_in[y.index()].push((x, r, id));
        self.links_out.entry((x, r)).or_default().push((y, id));
        self.links_in_role.entry((y, r)).or_default().push((x, id));

        // R4
        for k in 0..self.exists_sub_by_role[r.index()].len() {
            let (ax, a, b) = self.exists_sub_by_role[r.index()][k];
            if let Some(sid) = self.active_id(AssertionKind::Subs(y, a)) {
                self.fire(Rule::R4, &[id, sid], Some(ax), AssertionKind::Subs(x, b));
            }
        }
        // R5
        for k in 0..self.role_by_sub[r.index()].len() {
            let (ax, s) = self.role_by_sub[r.index()][k];
            self.fire(Rule::R5, &[id], Some(ax), AssertionKind::ExSubs(x, s, y));
        }
        // R6, this link first: x -r-> y -r2-> z
        for k in 0..self.chain_by_first[r.index()].len() {
            let (ax, r2, s) = self.chain_by_first[r.index()][k];
            let next = self.links_out.get(&(y, r2)).cloned().unwrap_or_default();
            for (z, nid) in next {
                self.fire(
                    Rule::R6,
                    &[id, nid],
                    Some(ax),
                    AssertionKind::ExSubs(x, s, z),
                );
            }
        }
        // R6, this link second: w -r1-> x -r-> y
        for k in 0..self.chain_by_second[r.index()].len() {
            let (ax, r1, s) = self.chain_by_second[r.index()][k];
            let prev = self
                .links_in_role
                .get(&(x, r1))
                .cloned()
                .unwrap_or_default();
            for (w, pid) in prev {
                self.fire(
                    Rule::R6,
                    &[pid, id],
                    Some(ax),
                    AssertionKind::ExSubs(w, s, y),
                );
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::normalize;
    use crate::ontology::parse_ontology;

    const GALEN: &str = include_str!("../data/galen_mg.elt");

    fn concept(t: &NormalizedTBox, name: &str) -> ConceptId {
        t.symbols.concept(name).unwrap()
    }

    #[test]
    fn galen_closure_contains_table_entries() {
        let o = parse_ontology(GALEN).unwrap();
        let t = normalize(&o);
        let c = classify(&t);
        let rendered: HashSet<String> = c
            .assertions
            .iter()
            .map(|a| c.render_assertion(a.id))
            .collect();
        let expected = [
            "Endocarditis <= Inflammation",
            "Inflammation <= Disease",
            "Endocardium <= Tissue",
            "HeartDisease <= Disease",
            "Endocarditis <= (hasLoc some Endocardium)",
            "Inflammation <= (actsOn some Tissue)",
            "Endocardium <= (contIn some HeartValve)",
            "HeartValve <= (contIn some Heart)",
            "HeartDisease <= (hasLoc some Heart)",
            "Endocarditis <= Disease",
            "Endocarditis <= (actsOn some Tissue)",
            "Endocarditis <= (hasLoc some HeartValve)",
            "Endocardium <= (contIn some Heart)",
            "HeartDisease <= _N0",
            "Endocarditis <= (hasLoc some Heart)",
            "Endocarditis <= _N0",
            "Endocarditis <= HeartDisease",
        ];
        for e in expected {
            assert!(rendered.contains(e), "missing {e}");
        }
        assert!(c.holds(concept(&t, "Endocarditis"), concept(&t, "HeartDisease")));
        assert!(!c.holds(concept(&t, "Tissue"), concept(&t, "Endocarditis")));
    }

    #[test]
    fn galen_records_alternative_derivations() {
        let o = parse_ontology(GALEN).unwrap();
        let t = normalize(&o);
        let c = classify(&t);
        let endo = concept(&t, "Endocarditis");
        let heart = concept(&t, "Heart");
        let has_loc = t.symbols.role("hasLoc").unwrap();
        let target = c
            .lookup(AssertionKind::ExSubs(endo, has_loc, heart))
            .unwrap();
        let firings = c
            .applications
            .iter()
            .filter(|a| a.consequent == target)
            .count();
        // via hasLoc.HeartValve + contIn.Heart, via hasLoc.Endocardium +
        // contIn.Heart, and via HeartDisease once that is derived.
        assert!(firings >= 3, "{firings}");
    }

    #[test]
    fn empty_tbox() {
        let o = parse_ontology("").unwrap();
        let t = normalize(&o);
        let c = classify(&t);
        assert!(c.assertions.is_empty());
        assert!(c.applications.is_empty());
    }

    #[test]
    fn chain_of_four() {
        let o = parse_ontology("A0 <= A1\nA1 <= A2\nA2 <= A3\nA3 <= A4").unwrap();
        let t = normalize(&o);
        let c = classify(&t);
        let subs = c.subsumptions();
        let ids: Vec<ConceptId> = (0..5).map(|i| concept(&t, &format!("A{i}"))).collect();
        let mut strict = 0;
        for i in 0..5 {
            assert!(subs.contains(&(ids[i], ids[i])));
            assert!(subs.contains(&(ids[i], ConceptId::TOP)));
            for j in 0..5 {
                if i < j {
                    assert!(subs.contains(&(ids[i], ids[j])));
                    strict += 1;
                } else if i > j {
                    assert!(!subs.contains(&(ids[i], ids[j])));
                }
            }
        }
        assert_eq!(strict, 10);
        // 10 strict + 5 reflexive + 5 top
        assert_eq!(subs.len(), 20);
    }

    #[test]
    fn reflexive_holds_everywhere() {
        let o = parse_ontology("A <= B").unwrap();
        let t = normalize(&o);
        let c = classify(&t);
        let a = concept(&t, "A");
        assert!(holds(&c, a, a));
        assert!(holds(&c, a, ConceptId::TOP));
    }

    #[test]
    fn firings_are_unique() {
        let o = parse_ontology(GALEN).unwrap();
        let t = normalize(&o);
        let c = classify(&t);
        let mut seen = HashSet::new();
        for app in &c.applications {
            let mut ants = app.antecedent_assertions.clone();
            ants.sort();
            assert!(seen.insert((
                app.rule,
                ants,
                app.antecedent_axioms.clone(),
                app.consequent
            )));
            if app.rule != Rule::R0 {
                assert!(!app.antecedent_axioms.is_empty());
            }
        }
    }

    #[test]
    fn self_composition() {
        // r o r <= r over a loop X -r-> X.
        let o = parse_ontology("X <= (r some X)\nr o r <= r\n(r some X) <= B").unwrap();
        let t = normalize(&o);
        let c = classify(&t);
        assert!(c.holds(concept(&t, "X"), concept(&t, "B")));
        assert!(c.applications.iter().any(|a| a.rule == Rule::R6));
    }

    #[test]
    fn subset_classification() {
        let o = parse_ontology("A <= B\nB <= C").unwrap();
        let t = normalize(&o);
        let a = concept(&t, "A");
        let cc = concept(&t, "C");
        assert!(classify_subset(&t, &[true, true]).holds(a, cc));
        assert!(!classify_subset(&t, &[true, false]).holds(a, cc));
        assert!(!classify_subset(&t, &[false, true]).holds(a, cc));
    }
}
