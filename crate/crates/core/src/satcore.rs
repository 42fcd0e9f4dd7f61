//! A small CDCL solver with assumptions.
//!
//! Two watched literals, first-UIP learning, no restarts, and a fixed
//! branching order (lowest unassigned variable first, negative polarity).
//! When every problem clause is Horn the solver never branches: once the
//! assumptions are propagated without conflict, setting every remaining
//! variable to false is a model.

use std::fmt;

use crate::Error;

/// A literal over a 1-based variable index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: u32, positive: bool) -> Lit {
        debug_assert!(var >= 1);
        Lit(((var - 1) << 1) | u32::from(!positive))
    }

    pub fn pos(var: u32) -> Lit {
        Lit::new(var, true)
    }

    pub fn neg(var: u32) -> Lit {
        Lit::new(var, false)
    }

    /// Parses a DIMACS-style signed integer.
    pub fn from_dimacs(v: i32) -> Lit {
        Lit::new(v.unsigned_abs(), v > 0)
    }

    pub fn var(self) -> u32 {
        (self.0 >> 1) + 1
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn to_dimacs(self) -> i32 {
        let v = self.var() as i32;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    fn code(self) -> usize {
        self.0 as usize
    }

    fn vidx(self) -> usize {
        (self.0 >> 1) as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    pub fn value(&self, var: u32) -> bool {
        self.values[var as usize - 1]
    }

    pub fn satisfies(&self, lit: Lit) -> bool {
        self.value(lit.var()) == lit.is_positive()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Model),
    /// A subset of the assumptions that is already inconsistent with the
    /// clauses. Not necessarily minimal.
    Unsat(Vec<Lit>),
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub solves: u64,
    /// Search decisions, not counting assumptions.
    pub branches: u64,
    pub conflicts: u64,
    pub propagations: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Value {
    True,
    False,
    Undef,
}

#[derive(Clone, Debug)]
pub struct Solver {
    var_count: usize,
    clauses: Vec<Vec<Lit>>,
    learnt: Vec<bool>,
    /// Clauses watching each literal, indexed by literal code.
    watches: Vec<Vec<usize>>,
    assigns: Vec<Value>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    seen: Vec<bool>,
    horn: bool,
    ok: bool,
    stats: SolverStats,
}

impl Solver {
    pub fn new(var_count: usize) -> Self {
        Solver {
            var_count,
            clauses: Vec::new(),
            learnt: Vec::new(),
            watches: vec![Vec::new(); 2 * var_count],
            assigns: vec![Value::Undef; var_count],
            level: vec![0; var_count],
            reason: vec![None; var_count],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            seen: vec![false; var_count],
            horn: true,
            ok: true,
            stats: SolverStats::default(),
        }
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    /// Whether every clause added so far has at most one positive literal.
    pub fn is_horn(&self) -> bool {
        self.horn
    }

    fn check(&self, lit: Lit) -> Result<(), Error> {
        if lit.var() as usize > self.var_count {
            Err(Error::LiteralOutOfRange {
                var: lit.var(),
                var_count: self.var_count,
            })
        } else {
            Ok(())
        }
    }

    fn value(&self, lit: Lit) -> Value {
        match self.assigns[lit.vidx()] {
            Value::Undef => Value::Undef,
            Value::True if lit.is_positive() => Value::True,
            Value::False if !lit.is_positive() => Value::True,
            _ => Value::False,
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    /// Adds a clause. The empty clause makes the solver permanently unsat.
    pub fn add_clause(&mut self, lits: &[Lit]) -> Result<(), Error> {
        for &l in lits {
            self.check(l)?;
        }
        debug_assert_eq!(self.decision_level(), 0);
        if !self.ok {
            return Ok(());
        }
        if lits.iter().filter(|l| l.is_positive()).count() > 1 {
            self.horn = false;
        }

        let mut c: Vec<Lit> = lits.to_vec();
        c.sort();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return Ok(());
        }
        // Root-level simplification.
        if c.iter().any(|&l| self.value(l) == Value::True) {
            return Ok(());
        }
        c.retain(|&l| self.value(l) != Value::False);

        match c.len() {
            0 => self.ok = false,
            1 => self.enqueue(c[0], None),
            _ => {
                let cref = self.clauses.len();
                self.watches[c[0].code()].push(cref);
                self.watches[c[1].code()].push(cref);
                self.clauses.push(c);
                self.learnt.push(false);
            }
        }
        Ok(())
    }

    fn enqueue(&mut self, lit: Lit, reason: Option<usize>) {
        let v = lit.vidx();
        self.assigns[v] = if lit.is_positive() {
            Value::True
        } else {
            Value::False
        };
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    fn new_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let start = self.trail_lim[level];
        for &l in &self.trail[start..] {
            self.assigns[l.vidx()] = Value::Undef;
            self.reason[l.vidx()] = None;
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(level);
        self.qhead = self.qhead.min(start);
    }

    /// Unit propagation; returns the conflicting clause if any.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let cref = ws[i];
                i += 1;
                let c = &mut self.clauses[cref];
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                let first = c[0];
                if self.value(first) == Value::True {
                    ws[j] = cref;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..self.clauses[cref].len() {
                    let l = self.clauses[cref][k];
                    if self.value(l) != Value::False {
                        self.clauses[cref].swap(1, k);
                        self.watches[l.code()].push(cref);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = cref;
                j += 1;
                if self.value(first) == Value::False {
                    conflict = Some(cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.enqueue(first, Some(cref));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, confl: usize) -> (Vec<Lit>, usize) {
        let mut learnt = vec![Lit(0)];
        let mut pending = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let mut cref = confl;
        let current = self.decision_level() as u32;

        loop {
            let lits = self.clauses[cref].clone();
            let skip = usize::from(p.is_some());
            for &q in &lits[skip..] {
                let v = q.vidx();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].vidx()] {
                    break;
                }
            }
            let lit = self.trail[idx];
            self.seen[lit.vidx()] = false;
            pending -= 1;
            p = Some(lit);
            if pending == 0 {
                break;
            }
            cref = self.reason[lit.vidx()].expect("implied literal has a reason");
            // Reason clauses keep the implied literal in position 0.
            debug_assert_eq!(self.clauses[cref][0], lit);
        }
        learnt[0] = !p.unwrap();
        for l in &learnt[1..] {
            self.seen[l.vidx()] = false;
        }

        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].vidx()] > self.level[learnt[max_i].vidx()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[learnt[1].vidx()] as usize;
        }
        (learnt, bt)
    }

    /// Collects the decisions (all of them assumptions) that imply the
    /// given literals being false.
    fn assumption_core(&mut self, start: &[Lit]) -> Vec<Lit> {
        let mut core = Vec::new();
        for &l in start {
            if self.level[l.vidx()] > 0 {
                self.seen[l.vidx()] = true;
            }
        }
        let bottom = self.trail_lim.first().copied().unwrap_or(self.trail.len());
        for i in (bottom..self.trail.len()).rev() {
            let lit = self.trail[i];
            let v = lit.vidx();
            if !self.seen[v] {
                continue;
            }
            self.seen[v] = false;
            match self.reason[v] {
                None => core.push(lit),
                Some(cref) => {
                    for k in 1..self.clauses[cref].len() {
                        let q = self.clauses[cref][k];
                        if self.level[q.vidx()] > 0 {
                            self.seen[q.vidx()] = true;
                        }
                    }
                }
            }
        }
        core.reverse();
        core
    }

    /// The current assignment with unassigned variables read as false.
    fn model(&self) -> Model {
        Model {
            values: self.assigns.iter().map(|v| *v == Value::True).collect(),
        }
    }

    /// Decides the clauses under the given assumptions. The solver is back
    /// at decision level 0 afterwards and can be reused.
    pub fn solve_under(&mut self, assumptions: &[Lit]) -> Result<SolveResult, Error> {
        for &l in assumptions {
            self.check(l)?;
        }
        self.stats.solves += 1;
        let result = self.search(assumptions);
        self.cancel_until(0);
        Ok(result)
    }

    fn search(&mut self, assumptions: &[Lit]) -> SolveResult {
        if !self.ok {
            return SolveResult::Unsat(Vec::new());
        }
        let mut next_var = 0usize;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SolveResult::Unsat(Vec::new());
                }
                if self.decision_level() <= assumptions.len() {
                    let lits = self.clauses[confl].clone();
                    return SolveResult::Unsat(self.assumption_core(&lits));
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                next_var = 0;
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let cref = self.clauses.len();
                    self.watches[learnt[0].code()].push(cref);
                    self.watches[learnt[1].code()].push(cref);
                    let lit = learnt[0];
                    self.clauses.push(learnt);
                    self.learnt.push(true);
                    self.enqueue(lit, Some(cref));
                }
                continue;
            }

            let dl = self.decision_level();
            if dl < assumptions.len() {
                let p = assumptions[dl];
                match self.value(p) {
                    Value::True => self.new_level(),
                    Value::False => {
                        let mut core = self.assumption_core(&[!p]);
                        core.push(p);
                        return SolveResult::Unsat(core);
                    }
                    Value::Undef => {
                        self.new_level();
                        self.enqueue(p, None);
                    }
                }
                continue;
            }

            if self.horn {
                // Propagation is complete and conflict-free, so each open
                // clause has a free negative literal.
                return SolveResult::Sat(self.model());
            }

            while next_var < self.var_count && self.assigns[next_var] != Value::Undef {
                next_var += 1;
            }
            if next_var == self.var_count {
                return SolveResult::Sat(self.model());
            }
            self.stats.branches += 1;
            self.new_level();
            self.enqueue(Lit::neg(next_var as u32 + 1), None);
        }
    }

    /// DIMACS CNF dump of the problem clauses, for debugging.
    pub fn to_dimacs(&self) -> String {
        let mut units: Vec<Lit> =
            self.trail[..self.trail_lim.first().copied().unwrap_or(self.trail.len())].to_vec();
        units.sort();
        let problem: Vec<&Vec<Lit>> = self
            .clauses
            .iter()
            .zip(&self.learnt)
            .filter(|(_, &learnt)| !learnt)
            .map(|(c, _)| c)
            .collect();
        let mut out = format!("p cnf {} {}\n", self.var_count, problem.len() + units.len());
        for u in units {
            out.push_str(&format!("{} 0\n", u.to_dimacs()));
        }
        for c in problem {
            for l in c {
                out.push_str(&format!("{} ", l.to_dimacs()));
            }
            out.push_str("0\n");
        }
        out
    }
}
