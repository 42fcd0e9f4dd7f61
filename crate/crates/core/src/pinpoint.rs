//! MinA extraction and enumeration over a [`PinpointInstance`].
//!
//! All MinAs are computed MCS-first: enumerate every minimal correction
//! subset of the soft axiom units by growing maximal satisfiable subsets
//! and blocking each found MCS, then take the minimal hitting sets of the
//! MCS family. Each candidate is re-checked with [`verify_mina`] before it
//! is reported.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use crate::classify::classify_subset;
use crate::encode::PinpointInstance;
use crate::normalize::{NormId, NormalizedTBox};
use crate::ontology::ConceptId;
use crate::satcore::{Lit, SolveResult, Solver};
use crate::Error;

/// A minimal axiom set: a MUS over the soft units of an instance.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mina {
    pub axioms: BTreeSet<NormId>,
}

/// A minimal correction subset of the soft units.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mcs {
    pub axioms: BTreeSet<NormId>,
}

impl Mina {
    pub fn new(axioms: impl IntoIterator<Item = NormId>) -> Self {
        Mina {
            axioms: axioms.into_iter().collect(),
        }
    }
}

impl Mcs {
    pub fn new(axioms: impl IntoIterator<Item = NormId>) -> Self {
        Mcs {
            axioms: axioms.into_iter().collect(),
        }
    }
}

/// Limits checked between solver calls. `None` means unlimited.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Budget {
    pub timeout: Option<Duration>,
    pub max_solver_calls: Option<u64>,
    pub max_mcses: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EnumerationStats {
    pub solver_calls: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub branches: u64,
    /// Hitting-set candidates that failed verification.
    pub rejected: u64,
    pub wall_time: Duration,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EnumerationReport {
    /// Sorted lexicographically.
    pub minas: Vec<Mina>,
    /// In discovery order.
    pub mcses: Vec<Mcs>,
    /// True iff the MCS family was proven complete and every reported
    /// MinA verified; then `minas` is the full family.
    pub complete: bool,
    pub stats: EnumerationStats,
}

struct Exhausted;

/// A solver over the hard clauses plus budget bookkeeping.
struct Oracle<'i> {
    inst: &'i PinpointInstance,
    solver: Solver,
    deadline: Option<Instant>,
    max_calls: Option<u64>,
}

impl<'i> Oracle<'i> {
    fn new(inst: &'i PinpointInstance, budget: &Budget, start: Instant, calls_so_far: u64) -> Self {
        let mut solver = Solver::new(inst.var_count);
        for c in &inst.hard {
            solver
                .add_clause(c)
                .expect("instance literals are within its variable count");
        }
        Oracle {
            inst,
            solver,
            deadline: budget.timeout.map(|t| start + t),
            max_calls: budget
                .max_solver_calls
                .map(|m| m.saturating_sub(calls_so_far)),
        }
    }

    fn calls(&self) -> u64 {
        self.solver.stats().solves
    }

    /// Solves with the given soft units asserted.
    fn solve(&mut self, softs: &[usize]) -> Result<SolveResult, Exhausted> {
        if self.max_calls.is_some_and(|m| self.calls() >= m)
            || self.deadline.is_some_and(|d| Instant::now() >= d)
        {
            return Err(Exhausted);
        }
        let assumptions: Vec<Lit> = softs
            .iter()
            .map(|&k| Lit::pos(self.inst.soft[k].var))
            .collect();
        Ok(self
            .solver
            .solve_under(&assumptions)
            .expect("instance literals are within its variable count"))
    }

    /// Soft indices of the core literals, in the order of `softs`.
    fn core_softs(&self, softs: &[usize], core: &[Lit]) -> Vec<usize> {
        softs
            .iter()
            .copied()
            .filter(|&k| core.contains(&Lit::pos(self.inst.soft[k].var)))
            .collect()
    }

    fn block(&mut self, mcs: &[usize]) {
        let clause: Vec<Lit> = mcs
            .iter()
            .map(|&k| Lit::pos(self.inst.soft[k].var))
            .collect();
        self.solver
            .add_clause(&clause)
            .expect("soft variables are in range");
    }

    fn add_stats(&self, stats: &mut EnumerationStats) {
        let s = self.solver.stats();
        stats.solver_calls += s.solves;
        stats.propagations += s.propagations;
        stats.conflicts += s.conflicts;
        stats.branches += s.branches;
    }
}

fn to_axioms(inst: &PinpointInstance, softs: &[usize]) -> BTreeSet<NormId> {
    softs.iter().map(|&k| inst.soft[k].axiom).collect()
}

/// Deletion-based extraction of one MinA, starting from the core of all
/// soft units.
pub fn extract_one_mina(i: &PinpointInstance) -> Result<Mina, Error> {
    extract_one_mina_with(i, &Budget::default()).map(|(m, _)| m)
}

pub fn extract_one_mina_with(
    i: &PinpointInstance,
    budget: &Budget,
) -> Result<(Mina, EnumerationStats), Error> {
    let start = Instant::now();
    let mut oracle = Oracle::new(i, budget, start, 0);
    let result = shrink(&mut oracle);
    let mut stats = EnumerationStats::default();
    oracle.add_stats(&mut stats);
    stats.wall_time = start.elapsed();
    match result {
        Ok(Some(set)) => Ok((
            Mina {
                axioms: to_axioms(i, &set),
            },
            stats,
        )),
        Ok(None) => Err(Error::InstanceSatisfiable),
        Err(Exhausted) => Err(Error::BudgetExhausted),
    }
}

fn shrink(oracle: &mut Oracle<'_>) -> Result<Option<Vec<usize>>, Exhausted> {
    let all: Vec<usize> = (0..oracle.inst.soft.len()).collect();
    let mut working = match oracle.solve(&all)? {
        SolveResult::Sat(_) => return Ok(None),
        SolveResult::Unsat(core) => oracle.core_softs(&all, &core),
    };
    // Everything before `k` is known to be necessary.
    let mut k = 0;
    while k < working.len() {
        let mut candidate = working.clone();
        candidate.remove(k);
        match oracle.solve(&candidate)? {
            SolveResult::Unsat(core) => working = oracle.core_softs(&candidate, &core),
            SolveResult::Sat(_) => k += 1,
        }
    }
    Ok(Some(working))
}

struct McsSearch {
    mcses: Vec<Vec<usize>>,
    complete: bool,
    /// Hard clauses and all soft units are jointly satisfiable.
    satisfiable: bool,
}

fn search_mcses(oracle: &mut Oracle<'_>, budget: &Budget) -> McsSearch {
    let n = oracle.inst.soft.len();
    let mut out = McsSearch {
        mcses: Vec::new(),
        complete: false,
        satisfiable: false,
    };
    let soft_values = |oracle: &Oracle<'_>, m: &crate::satcore::Model| -> Vec<bool> {
        oracle.inst.soft.iter().map(|s| m.value(s.var)).collect()
    };

    loop {
        if budget.max_mcses.is_some_and(|m| out.mcses.len() >= m) {
            return out;
        }
        let mut satisfied = match oracle.solve(&[]) {
            Err(Exhausted) => return out,
            Ok(SolveResult::Unsat(_)) => {
                out.complete = true;
                return out;
            }
            Ok(SolveResult::Sat(m)) => soft_values(oracle, &m),
        };
        // Grow to a maximal satisfiable subset.
        for k in 0..n {
            if satisfied[k] {
                continue;
            }
            let mut assumptions: Vec<usize> = (0..n).filter(|&j| satisfied[j]).collect();
            assumptions.push(k);
            match oracle.solve(&assumptions) {
                Err(Exhausted) => return out,
                Ok(SolveResult::Sat(m)) => satisfied = soft_values(oracle, &m),
                Ok(SolveResult::Unsat(_)) => {}
            }
        }
        let mcs: Vec<usize> = (0..n).filter(|&k| !satisfied[k]).collect();
        if mcs.is_empty() {
            out.satisfiable = true;
            out.complete = true;
            return out;
        }
        oracle.block(&mcs);
        out.mcses.push(mcs);
    }
}

/// Enumerates MCSes; the flag is false if the budget ran out first.
pub fn enumerate_mcses(i: &PinpointInstance, budget: &Budget) -> (Vec<Mcs>, bool) {
    let mut oracle = Oracle::new(i, budget, Instant::now(), 0);
    let found = search_mcses(&mut oracle, budget);
    let mcses = found
        .mcses
        .iter()
        .map(|m| Mcs {
            axioms: to_axioms(i, m),
        })
        .collect();
    (mcses, found.complete)
}

/// All inclusion-minimal hitting sets of `family`, sorted.
///
/// The empty family has the single hitting set `{}`; a family containing
/// the empty set has none.
pub fn minimal_hitting_sets_of<T: Ord + Clone>(family: &[BTreeSet<T>]) -> Vec<BTreeSet<T>> {
    let universe: Vec<T> = family
        .iter()
        .flatten()
        .cloned()
        .collect::<BTreeSet<T>>()
        .into_iter()
        .collect();
    let dense: Vec<Vec<usize>> = family
        .iter()
        .map(|s| {
            s.iter()
                .map(|e| universe.binary_search(e).unwrap())
                .collect()
        })
        .collect();
    let mut containing = vec![Vec::new(); universe.len()];
    for (k, s) in dense.iter().enumerate() {
        for &e in s {
            containing[e].push(k);
        }
    }

    let mut hs = HittingSets {
        sets: &dense,
        containing: &containing,
        excluded: vec![false; universe.len()],
        current: Vec::new(),
        found: Vec::new(),
    };
    let uncovered: Vec<usize> = (0..dense.len()).collect();
    hs.search(&uncovered);

    let mut out: Vec<BTreeSet<T>> = hs
        .found
        .into_iter()
        .map(|h| h.into_iter().map(|e| universe[e].clone()).collect())
        .collect();
    out.sort();
    out
}

struct HittingSets<'a> {
    sets: &'a [Vec<usize>],
    containing: &'a [Vec<usize>],
    excluded: Vec<bool>,
    current: Vec<usize>,
    found: Vec<Vec<usize>>,
}

impl HittingSets<'_> {
    /// Every element of `current` still hits some set no other element hits.
    fn each_critical(&self) -> bool {
        self.current.iter().all(|&e| {
            self.containing[e].iter().any(|&k| {
                self.sets[k]
                    .iter()
                    .all(|&f| f == e || !self.current.contains(&f))
            })
        })
    }

    fn search(&mut self, uncovered: &[usize]) {
        if uncovered.is_empty() {
            self.found.push(self.current.clone());
            return;
        }
        let mut count: Vec<usize> = vec![0; self.excluded.len()];
        for &k in uncovered {
            let mut open = false;
            for &e in &self.sets[k] {
                if !self.excluded[e] {
                    count[e] += 1;
                    open = true;
                }
            }
            if !open {
                return;
            }
        }
        let mut best = 0;
        for e in 1..count.len() {
            if count[e] > count[best] {
                best = e;
            }
        }

        self.current.push(best);
        if self.each_critical() {
            let rest: Vec<usize> = uncovered
                .iter()
                .copied()
                .filter(|&k| !self.sets[k].contains(&best))
                .collect();
            self.search(&rest);
        }
        self.current.pop();

        self.excluded[best] = true;
        self.search(uncovered);
        self.excluded[best] = false;
    }
}

/// Minimal hitting sets of an MCS family, as MinA candidates.
pub fn minimal_hitting_sets(mcses: &[Mcs]) -> Vec<Mina> {
    let family: Vec<BTreeSet<NormId>> = mcses.iter().map(|m| m.axioms.clone()).collect();
    minimal_hitting_sets_of(&family)
        .into_iter()
        .map(|axioms| Mina { axioms })
        .collect()
}

fn verify_with(oracle: &mut Oracle<'_>, m: &Mina) -> Result<bool, Exhausted> {
    let mut softs = Vec::with_capacity(m.axioms.len());
    for ax in &m.axioms {
        match oracle.inst.soft_index(*ax) {
            Some(k) => softs.push(k),
            None => return Ok(false),
        }
    }
    if oracle.solve(&softs)?.is_sat() {
        return Ok(false);
    }
    for k in 0..softs.len() {
        let mut fewer = softs.clone();
        fewer.remove(k);
        if !oracle.solve(&fewer)?.is_sat() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks that the hard clauses with exactly `m`'s soft units are
/// unsatisfiable and that dropping any one unit makes them satisfiable.
pub fn verify_mina(i: &PinpointInstance, m: &Mina) -> bool {
    let mut oracle = Oracle::new(i, &Budget::default(), Instant::now(), 0);
    verify_with(&mut oracle, m).unwrap_or(false)
}

/// MCS enumeration followed by hitting-set dualization.
pub fn enumerate_minas(i: &PinpointInstance, budget: &Budget) -> EnumerationReport {
    let start = Instant::now();
    let mut stats = EnumerationStats::default();

    let mut oracle = Oracle::new(i, budget, start, 0);
    let found = search_mcses(&mut oracle, budget);
    oracle.add_stats(&mut stats);
    let mcses: Vec<Mcs> = found
        .mcses
        .iter()
        .map(|m| Mcs {
            axioms: to_axioms(i, m),
        })
        .collect();

    let mut complete = found.complete;
    let candidates = if found.satisfiable || (!found.complete && mcses.is_empty()) {
        Vec::new()
    } else {
        minimal_hitting_sets(&mcses)
    };

    // Blocking clauses live in the enumeration solver, so verification
    // needs a fresh one.
    let mut checker = Oracle::new(i, budget, start, stats.solver_calls);
    let mut minas = Vec::with_capacity(candidates.len());
    for m in candidates {
        match verify_with(&mut checker, &m) {
            Ok(true) => minas.push(m),
            Ok(false) => {
                stats.rejected += 1;
                complete = false;
            }
            Err(Exhausted) => {
                complete = false;
                break;
            }
        }
    }
    checker.add_stats(&mut stats);
    stats.wall_time = start.elapsed();

    EnumerationReport {
        minas,
        mcses,
        complete,
        stats,
    }
}

/// Largest number of non-trivial axioms [`brute_force_minas`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Test oracle: re-classifies every sub-TBox and keeps the inclusion-minimal
/// ones that entail `sub ⊑ sup`. Trivial axioms are always present.
pub fn brute_force_minas(
    t: &NormalizedTBox,
    query: (ConceptId, ConceptId),
) -> Result<Vec<Mina>, Error> {
    let (sub, sup) = query;
    let candidates: Vec<NormId> = t.non_trivial().collect();
    if candidates.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::OracleGuard {
            max: BRUTE_FORCE_LIMIT,
            got: candidates.len(),
        });
    }
    if sub == sup || sup.is_top() {
        return Ok(vec![Mina::default()]);
    }

    let mut masks: Vec<u32> = (0..1u32 << candidates.len()).collect();
    masks.sort_by_key(|m| m.count_ones());

    let mut enabled: Vec<bool> = t.axioms.iter().map(|a| a.form.is_trivial()).collect();
    let base = enabled.clone();
    let mut found: Vec<u32> = Vec::new();
    for mask in masks {
        if found.iter().any(|&f| f & !mask == 0) {
            continue;
        }
        enabled.copy_from_slice(&base);
        for (bit, id) in candidates.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                enabled[id.0] = true;
            }
        }
        if classify_subset(t, &enabled).holds(sub, sup) {
            found.push(mask);
        }
    }

    let mut minas: Vec<Mina> = found
        .into_iter()
        .map(|mask| {
            Mina::new(
                candidates
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| mask & (1 << bit) != 0)
                    .map(|(_, id)| *id),
            )
        })
        .collect();
    minas.sort();
    Ok(minas)
}
