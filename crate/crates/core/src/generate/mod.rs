//! Size-ordered enumeration of hypotheses, pruned by learned constraints.

mod space;
mod table;

use std::collections::{HashMap, HashSet};

use crate::constraints::{assign, ConstraintKind, ConstraintStore};
use crate::logic::{clause_key, theta_subsumes, Clause, ClauseKey, Hypothesis};
use crate::taskio::Bias;

pub use space::{count_space, space_ratio, SpaceParams};
pub use table::{build_table, TableClause};

use table::pred_mask;

struct PatternClause {
    clause: Clause,
    preds: u64,
}

struct SpecEntry {
    /// Pattern clause id at each position of the pattern.
    positions: Vec<u32>,
    magic: u64,
}

/// Mirrors the constraints of a store in a form that can be checked against
/// table index sequences without building hypotheses.
#[derive(Default)]
struct Index {
    synced: usize,
    patterns: Vec<PatternClause>,
    ids: HashMap<ClauseKey, u32>,
    /// Per table clause: pattern ids that subsume it, and (for magic-free
    /// clauses) pattern ids it subsumes, computed for ids below `done`.
    sub: Vec<Vec<u32>>,
    sup: Vec<Vec<u32>>,
    done: Vec<usize>,
    spec: Vec<SpecEntry>,
    spec_by_pattern: HashMap<u32, Vec<u32>>,
    gen: Vec<Vec<u32>>,
    gen_by_pattern: HashMap<u32, Vec<u32>>,
    red: HashSet<u32>,
    banished: HashSet<Vec<usize>>,
    by_key: HashMap<ClauseKey, usize>,
    stamp: Vec<u32>,
    generation: u32,
}

impl Index {
    fn new(table: &[TableClause]) -> Self {
        Index {
            sub: vec![vec![]; table.len()],
            sup: vec![vec![]; table.len()],
            done: vec![0; table.len()],
            by_key: table.iter().enumerate().map(|(i, t)| (t.key.clone(), i)).collect(),
            ..Index::default()
        }
    }

    fn pattern_id(&mut self, c: &Clause) -> u32 {
        let key = clause_key(c);
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let id = self.patterns.len() as u32;
        self.patterns.push(PatternClause { clause: c.clone(), preds: pred_mask(c) });
        self.ids.insert(key, id);
        id
    }

    fn sync(&mut self, store: &ConstraintStore) {
        for c in &store.constraints()[self.synced..] {
            let clauses = c.pattern.clauses();
            let positions: Vec<u32> = clauses.iter().map(|cl| self.pattern_id(cl)).collect();
            match c.kind {
                ConstraintKind::Specialisation => {
                    let magic = clauses.iter().enumerate().filter(|(_, cl)| cl.has_magic()).fold(0u64, |m, (i, _)| m | 1 << i);
                    let n = self.spec.len() as u32;
                    let mut distinct = positions.clone();
                    distinct.dedup();
                    for p in distinct {
                        self.spec_by_pattern.entry(p).or_default().push(n);
                    }
                    self.spec.push(SpecEntry { positions, magic });
                }
                ConstraintKind::Generalisation => {
                    let mut distinct = positions;
                    distinct.sort_unstable();
                    distinct.dedup();
                    let n = self.gen.len() as u32;
                    for &p in &distinct {
                        self.gen_by_pattern.entry(p).or_default().push(n);
                    }
                    self.gen.push(distinct);
                }
                ConstraintKind::Redundancy => self.red.extend(positions),
                ConstraintKind::Banish => {
                    let seq: Option<Vec<usize>> = clauses.iter().map(|cl| self.by_key.get(&clause_key(cl)).copied()).collect();
                    // A pattern outside the table can never equal a candidate.
                    if let Some(seq) = seq {
                        self.banished.insert(seq);
                    }
                }
            }
        }
        self.synced = store.len();
    }

    fn refresh(&mut self, table: &[TableClause], t: usize) {
        let tc = &table[t];
        for p in self.done[t]..self.patterns.len() {
            let pc = &self.patterns[p];
            if pc.preds & !tc.preds == 0 && theta_subsumes(&pc.clause, &tc.clause) {
                self.sub[t].push(p as u32);
            }
            if !tc.magic && tc.preds & !pc.preds == 0 && theta_subsumes(&tc.clause, &pc.clause) {
                self.sup[t].push(p as u32);
            }
        }
        self.done[t] = self.patterns.len();
    }

    fn next_generation(&mut self) -> u32 {
        self.generation += 1;
        if self.stamp.len() < self.spec.len().max(self.gen.len()) {
            self.stamp.resize(self.spec.len().max(self.gen.len()), 0);
        }
        self.generation
    }

    fn violated(&mut self, table: &[TableClause], seq: &[usize], recursive: bool) -> bool {
        for &t in seq {
            self.refresh(table, t);
        }
        if self.banished.contains(seq) {
            return true;
        }
        if !recursive && seq.iter().any(|&t| self.sub[t].iter().any(|p| self.red.contains(p))) {
            return true;
        }
        if self.spec_violated(seq) {
            return true;
        }
        !recursive && self.gen_violated(seq)
    }

    fn spec_violated(&mut self, seq: &[usize]) -> bool {
        let g = self.next_generation();
        for &p in &self.sub[seq[0]] {
            let Some(list) = self.spec_by_pattern.get(&p) else { continue };
            for &ci in list {
                if self.stamp[ci as usize] == g {
                    continue;
                }
                self.stamp[ci as usize] = g;
                let entry = &self.spec[ci as usize];
                let options: Vec<u64> = seq
                    .iter()
                    .map(|&t| {
                        entry
                            .positions
                            .iter()
                            .enumerate()
                            .filter(|(_, p)| self.sub[t].binary_search(p).is_ok())
                            .fold(0u64, |m, (i, _)| m | 1 << i)
                    })
                    .collect();
                if options.iter().all(|&m| m != 0) && assign(&options, entry.magic, 0) {
                    return true;
                }
            }
        }
        false
    }

    fn gen_violated(&mut self, seq: &[usize]) -> bool {
        let g = self.next_generation();
        let covered: HashSet<u32> = seq.iter().flat_map(|&t| self.sup[t].iter().copied()).collect();
        for p in &covered {
            let Some(list) = self.gen_by_pattern.get(p) else { continue };
            for &ci in list {
                if self.stamp[ci as usize] == g {
                    continue;
                }
                self.stamp[ci as usize] = g;
                if self.gen[ci as usize].iter().all(|q| covered.contains(q)) {
                    return true;
                }
            }
        }
        false
    }
}

/// Enumerates hypotheses in order of size, skipping those that violate the
/// constraints of the store passed to [`Generator::next_candidate`].
///
/// A hypothesis is a non-decreasing sequence of table indices; an index may
/// repeat only for clauses with magic literals, since two copies of such a
/// clause can be bound to different constants.
pub struct Generator {
    table: Vec<TableClause>,
    max_clauses: usize,
    max_level: usize,
    /// First table index of each clause size.
    size_start: Vec<usize>,
    level: usize,
    seq: Vec<usize>,
    sum: usize,
    started: bool,
    index: Index,
    enumerated: u64,
}

impl Generator {
    pub fn new(bias: &Bias) -> Self {
        Generator::from_table(build_table(bias), bias.max_clauses, bias.max_body)
    }

    fn from_table(table: Vec<TableClause>, max_clauses: usize, max_body: usize) -> Self {
        let max_size = 1 + max_body;
        let size_start = (0..=max_size + 1).map(|s| table.partition_point(|t| t.size < s)).collect();
        let index = Index::new(&table);
        Generator {
            table,
            max_clauses,
            max_level: max_clauses * max_size,
            size_start,
            level: 1,
            seq: Vec::new(),
            sum: 0,
            started: false,
            index,
            enumerated: 0,
        }
    }

    pub fn table(&self) -> &[TableClause] {
        &self.table
    }

    /// Size of the hypotheses currently being enumerated.
    pub fn current_size(&self) -> usize {
        self.level
    }

    /// Hypotheses reached so far, including pruned ones.
    pub fn enumerated(&self) -> u64 {
        self.enumerated
    }

    /// Next hypothesis that satisfies every constraint in `store`, or `None`
    /// when the space is exhausted.
    pub fn next_candidate(&mut self, store: &ConstraintStore) -> Option<Hypothesis> {
        self.index.sync(store);
        while let Some(seq) = self.next_sequence() {
            self.enumerated += 1;
            let recursive = seq.iter().any(|&t| self.table[t].recursive);
            if self.index.violated(&self.table, &seq, recursive) {
                continue;
            }
            let clauses = seq.iter().map(|&t| self.table[t].clause.clone()).collect();
            return Some(Hypothesis::from_canonical(clauses));
        }
        None
    }

    /// Lowest index allowed after the current last element.
    fn lowest(&self) -> usize {
        match self.seq.last() {
            None => 0,
            Some(&p) if self.table[p].magic => p,
            Some(&p) => p + 1,
        }
    }

    /// First index at or after `from` that fits in the remaining size.
    fn fit(&self, from: usize) -> Option<usize> {
        let rem = self.level - self.sum;
        let mut j = from;
        if self.seq.len() + 1 == self.max_clauses {
            // The last slot must fill the level exactly.
            j = j.max(self.size_start[rem.min(self.size_start.len() - 1)]);
        }
        (j < self.table.len() && self.table[j].size <= rem).then_some(j)
    }

    fn push(&mut self, j: usize) {
        self.seq.push(j);
        self.sum += self.table[j].size;
    }

    fn pop(&mut self) -> usize {
        let j = self.seq.pop().expect("nonempty");
        self.sum -= self.table[j].size;
        j
    }

    /// Lexicographic depth-first walk over sequences whose sizes sum to the
    /// current level, advancing levels as each is exhausted.
    fn next_sequence(&mut self) -> Option<Vec<usize>> {
        loop {
            if self.level > self.max_level || self.table.is_empty() {
                return None;
            }
            let moved = if !self.started {
                self.started = true;
                self.descend()
            } else if self.sum < self.level && self.seq.len() < self.max_clauses && self.descend() {
                true
            } else {
                self.sibling()
            };
            if !moved {
                self.level += 1;
                self.started = false;
                self.seq.clear();
                self.sum = 0;
                continue;
            }
            if self.sum == self.level && self.valid() {
                return Some(self.seq.clone());
            }
        }
    }

    fn descend(&mut self) -> bool {
        match self.fit(self.lowest()) {
            Some(j) => {
                self.push(j);
                true
            }
            None => false,
        }
    }

    /// Replaces the last element by its next alternative, backtracking as
    /// needed. False when the level is exhausted.
    fn sibling(&mut self) -> bool {
        while !self.seq.is_empty() {
            let last = self.pop();
            if let Some(j) = self.fit(last + 1) {
                self.push(j);
                return true;
            }
        }
        false
    }

    /// A recursive hypothesis needs a base case.
    fn valid(&self) -> bool {
        let rec = self.seq.iter().filter(|&&t| self.table[t].recursive).count();
        rec == 0 || rec < self.seq.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::Constraint;
    use crate::taskio::{parse_bias, parse_clause};

    fn h(src: &[&str]) -> Hypothesis {
        Hypothesis::new(src.iter().map(|s| parse_clause(s).unwrap()).collect())
    }

    const LIST: &str = "head_pred(f,1).\nbody_pred(head,2).\nbody_pred(tail,2).\nbody_pred(odd,1).\n\
        max_vars(3).\nmax_body(2).\nmax_clauses(2).\nmax_magic(1).\nenable_recursion.\n";

    fn drain(g: &mut Generator, store: &ConstraintStore) -> Vec<Hypothesis> {
        std::iter::from_fn(|| g.next_candidate(store)).collect()
    }

    #[test]
    fn sizes_non_decreasing_and_distinct() {
        let bias = parse_bias(LIST).unwrap();
        let mut g = Generator::new(&bias);
        let all = drain(&mut g, &ConstraintStore::new());
        assert!(all.windows(2).all(|w| w[0].size() <= w[1].size()));
        let distinct: HashSet<&Hypothesis> = all.iter().collect();
        assert_eq!(distinct.len(), all.len());
        assert_eq!(g.enumerated(), all.len() as u64);
        for hyp in &all {
            assert_eq!(*hyp, Hypothesis::new(hyp.clauses().to_vec()));
            assert!(hyp.len() <= 2);
            if hyp.is_recursive() {
                assert!(hyp.clauses().iter().any(|c| !c.is_recursive()));
            }
        }
        assert!(all.contains(&h(&["f(A):-head(A,B),@magic(B).", "f(A):-tail(A,B),f(B)."])));
        assert!(all.contains(&h(&["f(A):-head(A,B),@magic(B).", "f(A):-head(A,C),@magic(C)."])));
    }

    #[test]
    fn index_agrees_with_store() {
        let bias = parse_bias(LIST).unwrap();
        let all = drain(&mut Generator::new(&bias), &ConstraintStore::new());
        let kinds = [
            ConstraintKind::Specialisation,
            ConstraintKind::Generalisation,
            ConstraintKind::Redundancy,
            ConstraintKind::Banish,
        ];
        // Deterministic pseudo-random choice of patterns from the space.
        let mut x = 12345u64;
        for round in 0..6 {
            let mut store = ConstraintStore::new();
            for _ in 0..4 {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let pat = all[(x >> 33) as usize % all.len()].clone();
                store.add([Constraint::new(kinds[(x >> 20) as usize % 4], pat)]);
            }
            let expected: Vec<&Hypothesis> = all.iter().filter(|c| !store.violates(c)).collect();
            let got = drain(&mut Generator::new(&bias), &store);
            assert_eq!(got.iter().collect::<Vec<_>>(), expected, "round {round}\n{}", store.dump());
        }
    }

    #[test]
    fn constraints_added_midway_apply() {
        let bias = parse_bias(LIST).unwrap();
        let mut g = Generator::new(&bias);
        let mut store = ConstraintStore::new();
        let first = g.next_candidate(&store).unwrap();
        store.add([Constraint::new(ConstraintKind::Specialisation, first.clone())]);
        for c in drain(&mut g, &store) {
            assert!(!store.violates(&c));
        }
    }
}
