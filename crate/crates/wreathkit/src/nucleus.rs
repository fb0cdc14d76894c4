//! (Possibly infinite) nuclei: state closure, the N² contraction check and the
//! augmentation loop that adds restriction cycles until the check passes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::word::{Family, Pattern, Word};
use crate::wreath::WreathRecursion;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NucleusError {
    #[error("state closure exceeded {0} states")]
    StateBound(usize),
    #[error("no contracting candidate after {0} augmentation rounds")]
    Rounds(usize),
}

#[derive(Clone, Debug)]
pub struct NucleusConfig {
    /// Family exponents sampled in `[-window, window]`.
    pub window: i64,
    pub state_bound: usize,
    pub max_rounds: usize,
    pub max_depth: usize,
}

impl Default for NucleusConfig {
    fn default() -> Self {
        NucleusConfig { window: 8, state_bound: 10_000, max_rounds: 16, max_depth: 64 }
    }
}

/// Concrete words plus families, kept closed under inversion.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NucleusSet {
    words: BTreeSet<Word>,
    families: BTreeSet<Family>,
}

impl NucleusSet {
    pub fn from_patterns<I: IntoIterator<Item = Pattern>>(items: I) -> NucleusSet {
        let mut n = NucleusSet::default();
        for p in items {
            n.insert(p);
        }
        n.normalize(12);
        n
    }

    pub fn words(&self) -> &BTreeSet<Word> {
        &self.words
    }

    pub fn families(&self) -> &BTreeSet<Family> {
        &self.families
    }

    pub fn len(&self) -> usize {
        self.words.len() + self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty() && self.families.is_empty()
    }

    /// Inserts `p` and its inverse; returns whether anything was new.
    pub fn insert(&mut self, p: Pattern) -> bool {
        let inv = p.invert();
        let mut fresh = false;
        for q in [p, inv] {
            fresh |= match q {
                Pattern::Word(w) => self.words.insert(w),
                Pattern::Family(f) => self.families.insert(f),
            };
        }
        fresh
    }

    pub fn contains_word(&self, w: &Word) -> bool {
        self.words.contains(w) || self.families.iter().any(|f| f.match_word(w).is_some())
    }

    /// Words exactly; families by their members with exponent in `[-window, window]`.
    pub fn contains(&self, p: &Pattern, window: i64) -> bool {
        match p {
            Pattern::Word(w) => self.contains_word(w),
            Pattern::Family(f) => {
                self.families.contains(f) || (-window..=window).all(|n| self.contains_word(&f.instance(n)))
            }
        }
    }

    /// Drops words and families already covered by some family.
    pub fn normalize(&mut self, window: i64) {
        let fams: Vec<Family> = self.families.iter().cloned().collect();
        let covered =
            |f: &Family, g: &Family| f != g && (-window..=window).all(|n| g.match_word(&f.instance(n)).is_some());
        self.families = fams
            .iter()
            .filter(|f| !fams.iter().any(|g| covered(f, g) && !(covered(g, f) && g > *f)))
            .cloned()
            .collect();
        let fams = &self.families;
        self.words.retain(|w| !fams.iter().any(|f| f.match_word(w).is_some()));
    }

    pub fn members(&self) -> Vec<Pattern> {
        self.words
            .iter()
            .cloned()
            .map(Pattern::Word)
            .chain(self.families.iter().cloned().map(Pattern::Family))
            .collect()
    }

    /// All members with family exponents in `[-window, window]`.
    pub fn instances(&self, window: i64) -> BTreeSet<Word> {
        let mut out = self.words.clone();
        for f in &self.families {
            out.extend((-window..=window).map(|n| f.instance(n)));
        }
        out
    }

    /// Same words and, as sets, the same families.
    pub fn same_as(&self, other: &NucleusSet) -> bool {
        self.words == other.words && self.families == other.families
    }
}

impl fmt::Display for NucleusSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut words: Vec<&Word> = self.words.iter().collect();
        words.sort_by(|a, b| a.shortlex_cmp(b));
        let items: Vec<String> =
            words.into_iter().map(|w| w.to_string()).chain(self.families.iter().map(|x| x.to_string())).collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContractionStatus {
    /// Every product lands in the set after at most `k` restrictions.
    Contracts,
    /// Restriction cycles outside the set were found.
    Cycles,
    /// The explored graph outgrew the state bound or depth limit.
    Exhausted,
}

#[derive(Clone, Debug)]
pub struct ContractionReport {
    pub status: ContractionStatus,
    pub k: usize,
    pub cycles: Vec<Vec<Pattern>>,
    /// Restriction edges between elements outside the set.
    pub edges: Vec<(Pattern, Pattern)>,
}

impl ContractionReport {
    pub fn contracts(&self) -> bool {
        self.status == ContractionStatus::Contracts
    }
}

fn promotable(rec: &WreathRecursion, n: &NucleusSet) -> Vec<Family> {
    // perm-trivial words lying on a restriction cycle of perm-trivial words
    let inner: BTreeSet<&Word> = n.words.iter().filter(|w| !w.is_identity() && !rec.perm_of(w)).collect();
    let mut out = Vec::new();
    for &g in &inner {
        let mut seen: BTreeSet<Word> = BTreeSet::new();
        let mut queue: VecDeque<Word> = rec.restrictions(g).into_iter().collect();
        let mut found = false;
        while let Some(w) = queue.pop_front() {
            if &w == g {
                found = true;
                break;
            }
            if !inner.contains(&w) || !seen.insert(w.clone()) {
                continue;
            }
            queue.extend(rec.restrictions(&w));
        }
        if found {
            if let Some(f) = Family::power(g.clone()) {
                if !n.families.contains(&f) {
                    out.push(f);
                }
            }
        }
    }
    out
}

/// Smallest inversion-closed, restriction-closed set containing `seeds`, with
/// perm-trivial self-restricting words promoted to power families.
pub fn state_closure(
    rec: &WreathRecursion,
    seeds: &[Pattern],
    cfg: &NucleusConfig,
) -> Result<NucleusSet, NucleusError> {
    let mut n = NucleusSet::default();
    let mut queue: VecDeque<Pattern> = VecDeque::new();
    for s in seeds {
        queue.push_back(s.clone());
        queue.push_back(s.invert());
    }
    queue.push_back(Pattern::Word(Word::identity()));
    loop {
        while let Some(p) = queue.pop_front() {
            if n.contains(&p, cfg.window) {
                continue;
            }
            n.insert(p.clone());
            if n.len() > cfg.state_bound {
                return Err(NucleusError::StateBound(cfg.state_bound));
            }
            for q in [p.clone(), p.invert()] {
                for x in 0..2 {
                    queue.extend(rec.restrict_pattern(&q, x));
                }
            }
        }
        let promos = promotable(rec, &n);
        if promos.is_empty() {
            break;
        }
        queue.extend(promos.into_iter().map(Pattern::Family));
    }
    n.normalize(cfg.window);
    Ok(n)
}

fn products(n: &NucleusSet, window: i64) -> Vec<Pattern> {
    let members = n.members();
    let mut out = BTreeSet::new();
    for p in &members {
        for q in &members {
            match (p, q) {
                (Pattern::Word(u), _) => {
                    out.insert(q.left_mul(u));
                }
                (Pattern::Family(f), Pattern::Word(v)) => {
                    out.insert(Pattern::Family(f.right_mul(v)));
                }
                (Pattern::Family(f), Pattern::Family(_)) => {
                    for i in -window..=window {
                        out.insert(q.left_mul(&f.instance(i)));
                    }
                }
            }
        }
    }
    out.into_iter().filter(|p| !n.contains(p, window)).collect()
}

/// Follows every restriction path of every product in `N²` until it lands in `N`.
pub fn contraction_check(rec: &WreathRecursion, n: &NucleusSet, cfg: &NucleusConfig) -> ContractionReport {
    let starts = products(n, cfg.window);
    let mut graph: BTreeMap<Pattern, Vec<Pattern>> = BTreeMap::new();
    let mut stack = starts.clone();
    let mut exhausted = false;
    while let Some(p) = stack.pop() {
        if graph.contains_key(&p) {
            continue;
        }
        if graph.len() >= cfg.state_bound {
            exhausted = true;
            break;
        }
        let mut kids: Vec<Pattern> = Vec::new();
        for x in 0..2 {
            for q in rec.restrict_pattern(&p, x) {
                if !n.contains(&q, cfg.window) && !kids.contains(&q) {
                    kids.push(q);
                }
            }
        }
        stack.extend(kids.iter().cloned());
        graph.insert(p, kids);
    }
    let edges: Vec<(Pattern, Pattern)> =
        graph.iter().flat_map(|(p, ks)| ks.iter().map(move |q| (p.clone(), q.clone()))).collect();
    if exhausted {
        return ContractionReport { status: ContractionStatus::Exhausted, k: 0, cycles: Vec::new(), edges };
    }
    let cycles = cyclic_components(&graph);
    if !cycles.is_empty() {
        return ContractionReport { status: ContractionStatus::Cycles, k: 0, cycles, edges };
    }
    let mut depth: BTreeMap<Pattern, usize> = BTreeMap::new();
    let mut k = 0;
    for s in &starts {
        k = k.max(depth_of(s, &graph, &mut depth));
    }
    let status = if k > cfg.max_depth { ContractionStatus::Exhausted } else { ContractionStatus::Contracts };
    ContractionReport { status, k, cycles: Vec::new(), edges }
}

fn depth_of(p: &Pattern, graph: &BTreeMap<Pattern, Vec<Pattern>>, memo: &mut BTreeMap<Pattern, usize>) -> usize {
    if let Some(&d) = memo.get(p) {
        return d;
    }
    let d = 1 + graph[p].iter().map(|q| depth_of(q, graph, memo)).max().unwrap_or(0);
    memo.insert(p.clone(), d);
    d
}

/// Strongly connected components that contain a cycle (Tarjan).
fn cyclic_components(graph: &BTreeMap<Pattern, Vec<Pattern>>) -> Vec<Vec<Pattern>> {
    struct Tarjan<'a> {
        graph: &'a BTreeMap<Pattern, Vec<Pattern>>,
        index: BTreeMap<&'a Pattern, usize>,
        low: BTreeMap<&'a Pattern, usize>,
        stack: Vec<&'a Pattern>,
        on: BTreeSet<&'a Pattern>,
        out: Vec<Vec<Pattern>>,
    }
    impl<'a> Tarjan<'a> {
        fn visit(&mut self, v: &'a Pattern) {
            let i = self.index.len();
            self.index.insert(v, i);
            self.low.insert(v, i);
            self.stack.push(v);
            self.on.insert(v);
            for w in &self.graph[v] {
                if !self.index.contains_key(w) {
                    self.visit(w);
                    let lw = self.low[w];
                    let lv = self.low.get_mut(v).unwrap();
                    *lv = (*lv).min(lw);
                } else if self.on.contains(w) {
                    let iw = self.index[w];
                    let lv = self.low.get_mut(v).unwrap();
                    *lv = (*lv).min(iw);
                }
            }
            if self.low[v] == self.index[v] {
                let mut comp = Vec::new();
                loop {
                    let x = self.stack.pop().unwrap();
                    self.on.remove(x);
                    comp.push(x.clone());
                    if x == v {
                        break;
                    }
                }
                if comp.len() > 1 || self.graph[v].contains(v) {
                    comp.sort();
                    self.out.push(comp);
                }
            }
        }
    }
    let mut t = Tarjan {
        graph,
        index: BTreeMap::new(),
        low: BTreeMap::new(),
        stack: Vec::new(),
        on: BTreeSet::new(),
        out: Vec::new(),
    };
    for v in graph.keys() {
        if !t.index.contains_key(v) {
            t.visit(v);
        }
    }
    t.out.sort();
    t.out
}

#[derive(Clone, Debug)]
pub struct NucleusResult {
    pub nucleus: NucleusSet,
    pub report: ContractionReport,
    pub rounds: usize,
}

/// Closure, contraction check, and augmentation by the cycles found, repeated
/// until the check passes.
pub fn compute_nucleus(
    rec: &WreathRecursion,
    seeds: &[Pattern],
    cfg: &NucleusConfig,
) -> Result<NucleusResult, NucleusError> {
    let mut n = state_closure(rec, seeds, cfg)?;
    for round in 0..cfg.max_rounds {
        let report = contraction_check(rec, &n, cfg);
        match report.status {
            ContractionStatus::Contracts => {
                return Ok(NucleusResult { nucleus: n, report, rounds: round });
            }
            ContractionStatus::Exhausted => return Err(NucleusError::StateBound(cfg.state_bound)),
            ContractionStatus::Cycles => {
                let mut grown = n.members();
                grown.extend(report.cycles.iter().flatten().cloned());
                n = state_closure(rec, &grown, cfg)?;
            }
        }
    }
    Err(NucleusError::Rounds(cfg.max_rounds))
}

/// Seeds `{α, β}`, falling back to `{α, γ}` and then `{α, δ}` when `β` is not
/// in the resulting nucleus.
pub fn compute_nucleus_auto(rec: &WreathRecursion, cfg: &NucleusConfig) -> Result<NucleusResult, NucleusError> {
    let mut last = None;
    for second in [Word::b(), Word::gamma(), Word::delta()] {
        let seeds = [Pattern::Word(Word::a()), Pattern::Word(second.clone())];
        let res = compute_nucleus(rec, &seeds, cfg)?;
        if res.nucleus.contains_word(&Word::b()) || second == Word::delta() {
            return Ok(res);
        }
        // keep the β-seeded answer unless a fallback keeps β out as well
        last.get_or_insert(res);
    }
    Ok(last.expect("at least one seed set"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Pattern {
        Pattern::parse(s).unwrap()
    }

    fn set(items: &[&str]) -> NucleusSet {
        NucleusSet::from_patterns(items.iter().map(|s| w(s)))
    }

    #[test]
    fn closure_row1_promotes_powers() {
        let rec = WreathRecursion::parse("<1,1>s", "<a,b>").unwrap();
        let n = state_closure(&rec, &[w("a"), w("b")], &NucleusConfig::default()).unwrap();
        assert!(n.same_as(&set(&["1", "a^n", "b^n"])), "{n}");
    }

    #[test]
    fn degenerate_recursion() {
        let rec = WreathRecursion::parse("<1,1>s", "<1,1>").unwrap();
        let cfg = NucleusConfig::default();
        let n = state_closure(&rec, &[w("a"), w("b")], &cfg).unwrap();
        assert!(n.same_as(&set(&["1", "a", "b"])), "{n}");
        let r = compute_nucleus(&rec, &[w("a"), w("b")], &cfg).unwrap();
        assert!(r.nucleus.same_as(&set(&["1", "a", "b"])));
    }

    #[test]
    fn trivial_set_contracts_immediately() {
        let rec = WreathRecursion::parse("<1,1>s", "<a,b>").unwrap();
        let n = set(&["1"]);
        let rep = contraction_check(&rec, &n, &NucleusConfig::default());
        assert!(rep.contracts());
        assert_eq!(rep.k, 0);
    }

    #[test]
    fn inversion_symmetry() {
        let n = set(&["a b^n", "aB"]);
        assert!(n.contains(&w("B^n A"), 8));
        assert!(n.contains_word(&Word::parse("bA").unwrap()));
    }
}
