//! Independent reference implementations used by the test suites.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeSet, HashMap, HashSet};

use elpin::normalize::NormalizedTBox;
use elpin::ontology::{AxiomKind, ConceptExpr, ConceptId, Ontology, RoleId, SymbolTable};
use rand::seq::SliceRandom;
use rand::Rng;

/// Named subsumptions entailed by `axioms`, computed by a naive fixpoint
/// over every subexpression. Works on unnormalized input.
///
/// Returns pairs `(A, B)` for concept names (or top) occurring in the
/// axioms, including the reflexive and top pairs.
pub fn el_closure(axioms: &[AxiomKind]) -> BTreeSet<(ConceptId, ConceptId)> {
    let mut nodes: Vec<ConceptExpr> = Vec::new();
    let mut index: HashMap<ConceptExpr, usize> = HashMap::new();
    fn add(
        e: &ConceptExpr,
        nodes: &mut Vec<ConceptExpr>,
        index: &mut HashMap<ConceptExpr, usize>,
    ) -> usize {
        match e {
            ConceptExpr::Conj(l, r) => {
                add(l, nodes, index);
                add(r, nodes, index);
            }
            ConceptExpr::Exists(_, f) => {
                add(f, nodes, index);
            }
            _ => {}
        }
        if let Some(&k) = index.get(e) {
            return k;
        }
        nodes.push(e.clone());
        index.insert(e.clone(), nodes.len() - 1);
        nodes.len() - 1
    }

    let top = add(&ConceptExpr::Top, &mut nodes, &mut index);
    let mut gcis: Vec<(usize, usize)> = Vec::new();
    let mut chains: Vec<(Vec<RoleId>, RoleId)> = Vec::new();
    let mut named: BTreeSet<usize> = BTreeSet::new();
    for a in axioms {
        match a {
            AxiomKind::Gci { lhs, rhs } => {
                let l = add(lhs, &mut nodes, &mut index);
                let r = add(rhs, &mut nodes, &mut index);
                gcis.push((l, r));
            }
            AxiomKind::Equiv { lhs, rhs } => {
                let l = add(lhs, &mut nodes, &mut index);
                let r = add(rhs, &mut nodes, &mut index);
                gcis.push((l, r));
                gcis.push((r, l));
            }
            AxiomKind::RoleInc { chain, sup } => chains.push((chain.clone(), *sup)),
        }
    }
    for (k, n) in nodes.iter().enumerate() {
        if matches!(n, ConceptExpr::Name(_)) {
            named.insert(k);
        }
    }
    let top_occurs = axioms.iter().any(|a| match a {
        AxiomKind::Gci { lhs, rhs } | AxiomKind::Equiv { lhs, rhs } => {
            mentions_top(lhs) || mentions_top(rhs)
        }
        AxiomKind::RoleInc { .. } => false,
    });
    if top_occurs {
        named.insert(top);
    }

    let n = nodes.len();
    let mut s = vec![vec![false; n]; n];
    let mut r: HashMap<RoleId, HashSet<(usize, usize)>> = HashMap::new();
    let mut changed = true;
    let set = |s: &mut Vec<Vec<bool>>, x: usize, c: usize, changed: &mut bool| {
        if !s[x][c] {
            s[x][c] = true;
            *changed = true;
        }
    };
    while changed {
        changed = false;
        for x in 0..n {
            set(&mut s, x, x, &mut changed);
            set(&mut s, x, top, &mut changed);
            for c in 0..n {
                match &nodes[c] {
                    ConceptExpr::Conj(a, b) => {
                        let (a, b) = (index[&**a], index[&**b]);
                        if s[x][c] {
                            set(&mut s, x, a, &mut changed);
                            set(&mut s, x, b, &mut changed);
                        } else if s[x][a] && s[x][b] {
                            set(&mut s, x, c, &mut changed);
                        }
                    }
                    ConceptExpr::Exists(role, f) => {
                        let f = index[&**f];
                        if s[x][c] && r.entry(*role).or_default().insert((x, f)) {
                            changed = true;
                        }
                    }
                    _ => {}
                }
            }
            for &(l, rr) in &gcis {
                if s[x][l] {
                    set(&mut s, x, rr, &mut changed);
                }
            }
        }
        for c in 0..n {
            if let ConceptExpr::Exists(role, f) = &nodes[c] {
                let f = index[&**f];
                let edges: Vec<(usize, usize)> = r
                    .get(role)
                    .map(|e| e.iter().copied().collect())
                    .unwrap_or_default();
                for (x, y) in edges {
                    if s[y][f] {
                        set(&mut s, x, c, &mut changed);
                    }
                }
            }
        }
        for (chain, sup) in &chains {
            let mut acc: HashSet<(usize, usize)> = r.get(&chain[0]).cloned().unwrap_or_default();
            for role in &chain[1..] {
                let step = r.get(role).cloned().unwrap_or_default();
                acc = acc
                    .iter()
                    .flat_map(|&(x, y)| {
                        step.iter()
                            .filter(move |&&(y2, _)| y2 == y)
                            .map(move |&(_, z)| (x, z))
                    })
                    .collect();
            }
            let target = r.entry(*sup).or_default();
            for e in acc {
                if target.insert(e) {
                    changed = true;
                }
            }
        }
    }

    let id = |k: usize| nodes[k].as_atom().unwrap();
    let mut out = BTreeSet::new();
    for &a in &named {
        for &b in &named {
            if s[a][b] {
                out.insert((id(a), id(b)));
            }
        }
        out.insert((id(a), ConceptId::TOP));
    }
    out
}

fn mentions_top(e: &ConceptExpr) -> bool {
    match e {
        ConceptExpr::Top => true,
        ConceptExpr::Name(_) => false,
        ConceptExpr::Conj(l, r) => mentions_top(l) || mentions_top(r),
        ConceptExpr::Exists(_, f) => mentions_top(f),
    }
}

/// Oracle closure of the enabled normalized axioms.
pub fn normalized_closure(
    t: &NormalizedTBox,
    enabled: &[bool],
) -> BTreeSet<(ConceptId, ConceptId)> {
    let kinds: Vec<AxiomKind> = t
        .axioms
        .iter()
        .filter(|a| enabled[a.id.0])
        .map(|a| a.form.to_kind())
        .collect();
    el_closure(&kinds)
}

pub fn source_kinds(o: &Ontology) -> Vec<AxiomKind> {
    o.axioms.iter().map(|a| a.kind.clone()).collect()
}

/// Names of the form `C<i>` and roles `r<i>` that a generated ontology uses.
pub fn fixed_symbols(concepts: usize, roles: usize) -> SymbolTable {
    let mut s = SymbolTable::new();
    for i in 0..concepts {
        s.intern_concept(&format!("C{i}"));
    }
    for i in 0..roles {
        s.intern_role(&format!("r{i}"));
    }
    s
}

fn random_expr<R: Rng>(rng: &mut R, concepts: usize, roles: usize, depth: usize) -> ConceptExpr {
    let leaf = depth == 0 || rng.gen_bool(0.5);
    if leaf {
        if rng.gen_bool(0.05) {
            ConceptExpr::Top
        } else {
            ConceptExpr::Name(ConceptId(rng.gen_range(1..=concepts as u32)))
        }
    } else if rng.gen_bool(0.5) {
        ConceptExpr::conj(
            random_expr(rng, concepts, roles, depth - 1),
            random_expr(rng, concepts, roles, depth - 1),
        )
    } else {
        ConceptExpr::exists(
            RoleId(rng.gen_range(0..roles as u32)),
            random_expr(rng, concepts, roles, depth - 1),
        )
    }
}

/// Random ontology with nested expressions and chains up to length 3.
pub fn random_complex_ontology<R: Rng>(rng: &mut R, axioms: usize) -> Ontology {
    let (concepts, roles) = (5, 2);
    let mut o = Ontology {
        symbols: fixed_symbols(concepts, roles),
        axioms: Vec::new(),
    };
    for _ in 0..axioms {
        let kind = match rng.gen_range(0..10) {
            0..=6 => AxiomKind::Gci {
                lhs: random_expr(rng, concepts, roles, 2),
                rhs: random_expr(rng, concepts, roles, 2),
            },
            7 => AxiomKind::Equiv {
                lhs: random_expr(rng, concepts, roles, 1),
                rhs: random_expr(rng, concepts, roles, 2),
            },
            _ => {
                let len = rng.gen_range(1..=3);
                AxiomKind::RoleInc {
                    chain: (0..len)
                        .map(|_| RoleId(rng.gen_range(0..roles as u32)))
                        .collect(),
                    sup: RoleId(rng.gen_range(0..roles as u32)),
                }
            }
        };
        o.push(kind);
    }
    o
}

/// A copy of `o` with its axioms in a shuffled order.
pub fn shuffled<R: Rng>(rng: &mut R, o: &Ontology) -> Ontology {
    let mut kinds = source_kinds(o);
    kinds.shuffle(rng);
    let mut out = Ontology {
        symbols: o.symbols.clone(),
        axioms: Vec::new(),
    };
    for k in kinds {
        out.push(k);
    }
    out
}

/// Satisfiability by enumerating every assignment. Clauses use DIMACS
/// literals over variables `1..=vars`.
pub fn truth_table_sat(vars: usize, clauses: &[Vec<i32>], assumptions: &[i32]) -> bool {
    (0u64..1 << vars).any(|bits| {
        let val = |l: i32| {
            let v = (bits >> (l.unsigned_abs() - 1)) & 1 == 1;
            if l > 0 {
                v
            } else {
                !v
            }
        };
        assumptions.iter().all(|&l| val(l)) && clauses.iter().all(|c| c.iter().any(|&l| val(l)))
    })
}

/// Plain recursive DPLL with unit propagation.
pub fn dpll_sat(vars: usize, clauses: &[Vec<i32>], assumptions: &[i32]) -> bool {
    let mut assign = vec![0i8; vars + 1];
    for &a in assumptions {
        let want = if a > 0 { 1 } else { -1 };
        let slot = &mut assign[a.unsigned_abs() as usize];
        if *slot == -want {
            return false;
        }
        *slot = want;
    }
    dpll(clauses, &mut assign)
}

fn lit_value(assign: &[i8], l: i32) -> i8 {
    let v = assign[l.unsigned_abs() as usize];
    if l > 0 {
        v
    } else {
        -v
    }
}

fn dpll(clauses: &[Vec<i32>], assign: &mut Vec<i8>) -> bool {
    let saved = assign.clone();
    loop {
        let mut unit = None;
        let mut all_sat = true;
        for c in clauses {
            let mut open = Vec::new();
            let mut sat = false;
            for &l in c {
                match lit_value(assign, l) {
                    1 => {
                        sat = true;
                        break;
                    }
                    0 => open.push(l),
                    _ => {}
                }
            }
            if sat {
                continue;
            }
            all_sat = false;
            match open.len() {
                0 => {
                    *assign = saved;
                    return false;
                }
                1 => {
                    unit = Some(open[0]);
                    break;
                }
                _ => {}
            }
        }
        if all_sat {
            return true;
        }
        match unit {
            Some(l) => assign[l.unsigned_abs() as usize] = if l > 0 { 1 } else { -1 },
            None => break,
        }
    }
    let var = (1..assign.len())
        .find(|&v| assign[v] == 0)
        .expect("an open clause has a free variable");
    for value in [1i8, -1] {
        let mut branch = assign.clone();
        branch[var] = value;
        if dpll(clauses, &mut branch) {
            *assign = branch;
            return true;
        }
    }
    *assign = saved;
    false
}

/// Inclusion-minimal hitting sets by subset enumeration.
pub fn brute_hitting_sets<T: Ord + Clone>(family: &[BTreeSet<T>]) -> Vec<BTreeSet<T>> {
    let universe: Vec<T> = family
        .iter()
        .flatten()
        .cloned()
        .collect::<BTreeSet<T>>()
        .into_iter()
        .collect();
    assert!(universe.len() <= 20);
    let mut masks: Vec<u32> = (0..1u32 << universe.len()).collect();
    masks.sort_by_key(|m| m.count_ones());
    let mut found: Vec<u32> = Vec::new();
    for m in masks {
        if found.iter().any(|&f| f & !m == 0) {
            continue;
        }
        let set: BTreeSet<T> = (0..universe.len())
            .filter(|b| m & (1 << b) != 0)
            .map(|b| universe[b].clone())
            .collect();
        if family.iter().all(|s| !s.is_disjoint(&set)) {
            found.push(m);
        }
    }
    let mut out: Vec<BTreeSet<T>> = found
        .into_iter()
        .map(|m| {
            (0..universe.len())
                .filter(|b| m & (1 << b) != 0)
                .map(|b| universe[b].clone())
                .collect()
        })
        .collect();
    out.sort();
    out
}
