//! Horn encoding of a classification trace and the partial MaxSAT instance
//! for one subsumption query.
//!
//! Each non-trivial normalized axiom gets a selector variable; axioms that
//! are themselves assertions (`A ⊑ B`, `A ⊑ ∃r.B`) share that variable with
//! the assertion. Every other derived assertion gets its own variable, and
//! every rule firing becomes the clause `antecedents → consequent`. Trivial
//! axioms and R0 assertions are constant true and vanish from the clauses.
//!
//! For a query `C ⊑ D` the hard part is that formula plus `¬s[C ⊑ D]`, and
//! the soft part is one positive unit per axiom selector. Its minimal
//! unsatisfiable subsets of soft units are exactly the minimal axiom sets.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use crate::classify::{AssertionId, AssertionKind, ClosureTrace};
use crate::normalize::NormId;
use crate::ontology::ConceptId;
use crate::satcore::Lit;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Binding {
    /// An axiom selector, possibly shared with the assertion it states.
    Axiom(NormId, Option<AssertionId>),
    Derived(AssertionId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelectorVar {
    pub index: u32,
    pub binds: Binding,
}

/// `body → head`, or `¬body` when there is no head.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HornClause {
    pub body: Vec<u32>,
    pub head: Option<u32>,
}

impl HornClause {
    pub fn to_lits(&self) -> Vec<Lit> {
        let mut lits: Vec<Lit> = self.body.iter().map(|&v| Lit::neg(v)).collect();
        lits.extend(self.head.map(Lit::pos));
        lits
    }
}

#[derive(Clone, Debug)]
pub struct PinpointFormula<'a> {
    pub clauses: Vec<HornClause>,
    /// Indexed by `variable - 1`.
    pub selectors: Vec<SelectorVar>,
    pub trace: &'a ClosureTrace<'a>,
    axiom_var: Vec<Option<u32>>,
    assertion_var: Vec<Option<u32>>,
}

impl<'a> PinpointFormula<'a> {
    pub fn var_count(&self) -> usize {
        self.selectors.len()
    }

    /// `None` for trivial axioms (constant true).
    pub fn axiom_var(&self, id: NormId) -> Option<u32> {
        self.axiom_var[id.0]
    }

    /// `None` for R0 assertions (constant true).
    pub fn assertion_var(&self, id: AssertionId) -> Option<u32> {
        self.assertion_var[id.index()]
    }

    /// Axiom selector variables with their axioms, in variable order.
    pub fn axiom_selectors(&self) -> impl Iterator<Item = (u32, NormId)> + '_ {
        self.selectors.iter().filter_map(|s| match s.binds {
            Binding::Axiom(ax, _) => Some((s.index, ax)),
            Binding::Derived(_) => None,
        })
    }

    /// Variable of `sub ⊑ sup`: `Ok(None)` when it is trivially true,
    /// `Err(QueryNotEntailed)` when it was never derived.
    pub fn query_var(&self, sub: ConceptId, sup: ConceptId) -> Result<Option<u32>, Error> {
        if sub == sup || sup.is_top() {
            return Ok(None);
        }
        let aid = self
            .trace
            .lookup(AssertionKind::Subs(sub, sup))
            .ok_or(Error::QueryNotEntailed)?;
        Ok(self.assertion_var(aid))
    }
}

pub fn build_pinpoint_formula<'a>(c: &'a ClosureTrace<'a>) -> PinpointFormula<'a> {
    let tbox = c.tbox;
    let mut selectors = Vec::new();
    let mut axiom_var = vec![None; tbox.len()];
    let mut assertion_var: Vec<Option<u32>> = vec![None; c.assertions.len()];
    let mut clauses = Vec::new();
    let mut seen: HashSet<HornClause> = HashSet::new();

    let mut push_clause = |clause: HornClause, clauses: &mut Vec<HornClause>| {
        if seen.insert(clause.clone()) {
            clauses.push(clause);
        }
    };

    for ax in &tbox.axioms {
        if ax.form.is_trivial() {
            continue;
        }
        let v = selectors.len() as u32 + 1;
        axiom_var[ax.id.0] = Some(v);
        let stated = c.axiom_assertions.get(&ax.id).copied();
        let mut merged = None;
        if let Some(aid) = stated {
            match assertion_var[aid.index()] {
                None => {
                    assertion_var[aid.index()] = Some(v);
                    merged = Some(aid);
                }
                // A duplicate axiom: the first copy owns the assertion.
                Some(owner) => push_clause(
                    HornClause {
                        body: vec![v],
                        head: Some(owner),
                    },
                    &mut clauses,
                ),
            }
        }
        selectors.push(SelectorVar {
            index: v,
            binds: Binding::Axiom(ax.id, merged),
        });
    }

    for a in &c.assertions {
        if a.kind.is_trivial() || assertion_var[a.id.index()].is_some() {
            continue;
        }
        let v = selectors.len() as u32 + 1;
        assertion_var[a.id.index()] = Some(v);
        selectors.push(SelectorVar {
            index: v,
            binds: Binding::Derived(a.id),
        });
    }

    for app in &c.applications {
        let Some(head) = assertion_var[app.consequent.index()] else {
            continue;
        };
        let mut body: Vec<u32> = app
            .antecedent_assertions
            .iter()
            .filter_map(|a| assertion_var[a.index()])
            .chain(app.antecedent_axioms.iter().filter_map(|x| axiom_var[x.0]))
            .collect();
        body.sort_unstable();
        body.dedup();
        if body.contains(&head) {
            continue;
        }
        push_clause(
            HornClause {
                body,
                head: Some(head),
            },
            &mut clauses,
        );
    }

    PinpointFormula {
        clauses,
        selectors,
        trace: c,
        axiom_var,
        assertion_var,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoftUnit {
    pub var: u32,
    pub axiom: NormId,
    /// Rendered axiom, used for WCNF comments and reports.
    pub label: String,
}

/// The pair of hard clauses and soft axiom units for one query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PinpointInstance {
    pub hard: Vec<Vec<Lit>>,
    pub soft: Vec<SoftUnit>,
    /// Query assertion; `None` when the query is trivially true, in which
    /// case `hard` holds the empty clause.
    pub query: Option<AssertionId>,
    pub query_var: Option<u32>,
    pub var_count: usize,
}

impl PinpointInstance {
    pub fn clause_count(&self) -> usize {
        self.hard.len() + self.soft.len()
    }

    pub fn soft_index(&self, axiom: NormId) -> Option<usize> {
        self.soft.iter().position(|s| s.axiom == axiom)
    }
}

/// Builds the instance for `query = (sub, sup)`. Fails with
/// `QueryNotEntailed` if the subsumption was never derived.
pub fn build_instance(
    f: &PinpointFormula<'_>,
    query: (ConceptId, ConceptId),
) -> Result<PinpointInstance, Error> {
    let (sub, sup) = query;
    let query_var = f.query_var(sub, sup)?;
    let query_id = if query_var.is_some() {
        f.trace.lookup(AssertionKind::Subs(sub, sup))
    } else {
        None
    };

    let mut hard: Vec<Vec<Lit>> = f.clauses.iter().map(HornClause::to_lits).collect();
    match query_var {
        Some(q) => hard.push(vec![Lit::neg(q)]),
        // ¬true
        None => hard.push(Vec::new()),
    }

    let tbox = f.trace.tbox;
    let soft = f
        .axiom_selectors()
        .map(|(var, axiom)| SoftUnit {
            var,
            axiom,
            label: tbox.render_axiom(axiom),
        })
        .collect();

    Ok(PinpointInstance {
        hard,
        soft,
        query: query_id,
        query_var,
        var_count: f.var_count(),
    })
}

/// Keeps only the clauses and selectors that can influence the query:
/// the backward closure from the goal clauses through clause bodies.
pub fn coi_reduce(i: &PinpointInstance) -> PinpointInstance {
    let mut by_head: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    let mut goals = Vec::new();
    for (k, c) in i.hard.iter().enumerate() {
        let heads: Vec<u32> = c
            .iter()
            .filter(|l| l.is_positive())
            .map(|l| l.var())
            .collect();
        if heads.is_empty() {
            goals.push(k);
        }
        for h in heads {
            by_head.entry(h).or_default().push(k);
        }
    }

    let mut keep = vec![false; i.hard.len()];
    let mut marked = vec![false; i.var_count + 1];
    let mut stack: Vec<usize> = goals;
    while let Some(k) = stack.pop() {
        if keep[k] {
            continue;
        }
        keep[k] = true;
        for l in &i.hard[k] {
            if l.is_positive() || marked[l.var() as usize] {
                continue;
            }
            marked[l.var() as usize] = true;
            if let Some(ks) = by_head.get(&l.var()) {
                stack.extend(ks.iter().copied().filter(|&k| !keep[k]));
            }
        }
    }

    PinpointInstance {
        hard: i
            .hard
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(c, _)| c.clone())
            .collect(),
        soft: i
            .soft
            .iter()
            .filter(|s| marked[s.var as usize])
            .cloned()
            .collect(),
        query: i.query,
        query_var: i.query_var,
        var_count: i.var_count,
    }
}

/// Weighted CNF with the `p wcnf` header; hard clauses weigh
/// `soft count + 1`, soft units weigh 1.
pub fn emit_wcnf(i: &PinpointInstance) -> String {
    let top = i.soft.len() + 1;
    let mut out = String::new();
    for s in &i.soft {
        writeln!(out, "c s{} := {}", s.var, s.label).unwrap();
    }
    writeln!(out, "p wcnf {} {} {}", i.var_count, i.clause_count(), top).unwrap();
    for c in &i.hard {
        write!(out, "{top}").unwrap();
        for l in c {
            write!(out, " {}", l.to_dimacs()).unwrap();
        }
        out.push_str(" 0\n");
    }
    for s in &i.soft {
        writeln!(out, "1 {} 0", s.var).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify;
    use crate::normalize::{normalize, NormalizedTBox};
    use crate::ontology::parse_ontology;
    use crate::satcore::{SolveResult, Solver};

    const GALEN: &str = include_str!("../data/galen_mg.elt");

    fn norm(text: &str) -> NormalizedTBox {
        normalize(&parse_ontology(text).unwrap())
    }

    fn axiom_named(t: &NormalizedTBox, text: &str) -> NormId {
        t.axioms
            .iter()
            .find(|a| t.render_axiom(a.id) == text)
            .unwrap_or_else(|| panic!("no axiom {text}"))
            .id
    }

    fn q(t: &NormalizedTBox, a: &str, b: &str) -> (ConceptId, ConceptId) {
        (t.symbols.concept(a).unwrap(), t.symbols.concept(b).unwrap())
    }

    #[test]
    fn galen_contains_heart_disease_clause() {
        let t = norm(GALEN);
        let c = classify(&t);
        let f = build_pinpoint_formula(&c);
        let s_loc = f
            .axiom_var(axiom_named(&t, "HeartDisease <= (hasLoc some Heart)"))
            .unwrap();
        let s_n = f
            .axiom_var(axiom_named(&t, "(hasLoc some Heart) <= _N0"))
            .unwrap();
        let hd = t.symbols.concept("HeartDisease").unwrap();
        let n0 = t.symbols.concept("_N0").unwrap();
        let target = f
            .assertion_var(c.lookup(AssertionKind::Subs(hd, n0)).unwrap())
            .unwrap();
        let mut body = vec![s_loc, s_n];
        body.sort();
        assert!(f.clauses.contains(&HornClause {
            body,
            head: Some(target)
        }));
        // 13 axiom selectors come first.
        assert_eq!(f.axiom_selectors().count(), 13);
        assert!(f.axiom_selectors().map(|(v, _)| v).eq(1..=13));
    }

    #[test]
    fn formula_is_horn_and_duplicate_free() {
        let t = norm(GALEN);
        let c = classify(&t);
        let f = build_pinpoint_formula(&c);
        let set: HashSet<_> = f.clauses.iter().collect();
        assert_eq!(set.len(), f.clauses.len());
        for cl in &f.clauses {
            assert!(cl.head.is_some());
            assert!(!cl.body.contains(&cl.head.unwrap()));
        }
        // All-true satisfies every implication.
        let mut s = Solver::new(f.var_count());
        for cl in &f.clauses {
            s.add_clause(&cl.to_lits()).unwrap();
        }
        assert!(s.solve_under(&[]).unwrap().is_sat());
    }

    #[test]
    fn empty_trace_gives_empty_formula() {
        let t = norm("");
        let c = classify(&t);
        let f = build_pinpoint_formula(&c);
        assert!(f.clauses.is_empty());
        assert_eq!(f.var_count(), 0);
    }

    #[test]
    fn short_chain() {
        let t = norm("A0 <= A1\nA1 <= A2");
        let c = classify(&t);
        let f = build_pinpoint_formula(&c);
        // s1 = A0 <= A1, s2 = A1 <= A2, s3 = A0 <= A2
        assert_eq!(f.var_count(), 3);
        assert_eq!(
            f.clauses,
            vec![HornClause {
                body: vec![1, 2],
                head: Some(3)
            }]
        );
    }

    #[test]
    fn galen_instance_shape() {
        let t = norm(GALEN);
        let c = classify(&t);
        let f = build_pinpoint_formula(&c);
        let i = build_instance(&f, q(&t, "Endocarditis", "HeartDisease")).unwrap();
        assert_eq!(i.soft.len(), 13);
        assert_eq!(
            i.hard.last().unwrap(),
            &vec![Lit::neg(i.query_var.unwrap())]
        );
        assert_eq!(i.hard.len(), f.clauses.len() + 1);
    }

    #[test]
    fn trivial_and_unentailed_queries() {
        let t = norm(GALEN);
        let c = classify(&t);
        let f = build_pinpoint_formula(&c);
        let i = build_instance(&f, q(&t, "Heart", "Heart")).unwrap();
        assert_eq!(i.query_var, None);
        assert!(i.hard.contains(&Vec::new()));
        assert_eq!(
            build_instance(&f, q(&t, "Tissue", "Endocarditis")),
            Err(Error::QueryNotEntailed)
        );
    }

    #[test]
    fn coi_on_empty_cone() {
        let i = PinpointInstance {
            hard: vec![vec![Lit::neg(3)], vec![Lit::neg(1), Lit::pos(2)]],
            soft: vec![SoftUnit {
                var: 1,
                axiom: NormId(0),
                label: "A <= B".into(),
            }],
            query: None,
            query_var: Some(3),
            var_count: 3,
        };
        let r = coi_reduce(&i);
        assert_eq!(r.hard, vec![vec![Lit::neg(3)]]);
        assert!(r.soft.is_empty());
    }

    #[test]
    fn coi_keeps_whole_chain() {
        let t = norm("A0 <= A1\nA1 <= A2\nA2 <= A3\nB <= C");
        let c = classify(&t);
        let f = build_pinpoint_formula(&c);
        let i = build_instance(&f, q(&t, "A0", "A3")).unwrap();
        let r = coi_reduce(&i);
        let axioms: Vec<NormId> = r.soft.iter().map(|s| s.axiom).collect();
        assert_eq!(axioms, vec![NormId(0), NormId(1), NormId(2)]);
        assert!(r.hard.len() <= i.hard.len());
    }

    #[test]
    fn galen_full_tbox_is_unsat() {
        let t = norm(GALEN);
        let c = classify(&t);
        let f = build_pinpoint_formula(&c);
        let i = build_instance(&f, q(&t, "Endocarditis", "HeartDisease")).unwrap();
        let mut s = Solver::new(i.var_count);
        for h in &i.hard {
            s.add_clause(h).unwrap();
        }
        let all: Vec<Lit> = i.soft.iter().map(|u| Lit::pos(u.var)).collect();
        assert!(matches!(
            s.solve_under(&all).unwrap(),
            SolveResult::Unsat(_)
        ));
        assert_eq!(s.stats().branches, 0);
    }

    #[test]
    fn wcnf_format() {
        let empty = PinpointInstance {
            hard: vec![],
            soft: vec![],
            query: None,
            query_var: None,
            var_count: 0,
        };
        assert_eq!(emit_wcnf(&empty), "p wcnf 0 0 1\n");

        let t = norm("A <= B\nB <= C");
        let c = classify(&t);
        let f = build_pinpoint_formula(&c);
        let i = build_instance(&f, q(&t, "A", "C")).unwrap();
        assert_eq!(
            emit_wcnf(&i),
            "c s1 := A <= B\nc s2 := B <= C\np wcnf 3 4 3\n3 -1 -2 3 0\n3 -3 0\n1 1 0\n1 2 0\n"
        );
    }

    #[test]
    fn duplicate_axioms_get_their_own_selectors() {
        let t = norm("A <= B\nA <= B");
        let c = classify(&t);
        let f = build_pinpoint_formula(&c);
        assert_eq!(f.axiom_selectors().count(), 2);
        assert!(f.clauses.contains(&HornClause {
            body: vec![2],
            head: Some(1)
        }));
    }
}
