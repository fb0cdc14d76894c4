//! The twisting problem: the virtual endomorphism φ, its total extension φ̄
//! and the φ̄-attractor on N ∪ αN.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::nucleus::NucleusSet;
use crate::word::{Family, ParseError, Pattern, Word};
use crate::wreath::WreathRecursion;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TwistError {
    #[error("no φ̄ cycle within {0} iterations")]
    IterationCap(usize),
    #[error("family {family} is periodic only for some sampled exponents (first failure at n = {witness})")]
    FamilyMismatch { family: String, witness: i64 },
}

/// Restriction at a fixed coordinate on the perm-trivial subgroup.
#[derive(Clone, Debug)]
pub struct VirtualEndomorphism {
    pub rec: WreathRecursion,
    /// Tree letter 0 or 1 (printed as coordinate 1 or 2).
    pub coord: usize,
}

impl VirtualEndomorphism {
    pub fn new(rec: WreathRecursion, coord: usize) -> VirtualEndomorphism {
        assert!(coord < 2);
        VirtualEndomorphism { rec, coord }
    }

    pub fn in_domain(&self, w: &Word) -> bool {
        !self.rec.perm_of(w)
    }

    pub fn phi(&self, w: &Word) -> Option<Word> {
        self.in_domain(w).then(|| self.rec.restrict(w, self.coord))
    }

    /// `φ(w)` on the domain, `α·φ(wα⁻¹)` on the other coset.
    pub fn phibar(&self, w: &Word) -> Word {
        match self.phi(w) {
            Some(x) => x,
            None => {
                let shifted = w.multiply(&Word::a().invert());
                Word::a().multiply(&self.rec.restrict(&shifted, self.coord))
            }
        }
    }

    /// φ̄ through the four-case formula in terms of the restrictions of `h`,
    /// where `w = h` or `w = αh`. Agrees with `phibar` on the first coordinate,
    /// where the restriction of `α` is trivial.
    pub fn phibar_by_cases(&self, w: &Word) -> Word {
        let a = Word::a();
        let starts_alpha = w.letters().first() == a.letters().first();
        let (with_alpha, h) = if starts_alpha { (true, a.invert().multiply(w)) } else { (false, w.clone()) };
        let [h1, h2] = self.rec.restrictions(&h);
        let swap = self.rec.perm_of(&h);
        match (with_alpha, swap) {
            (false, false) => h1,
            (true, false) => a.multiply(&h2),
            (false, true) => a.multiply(&h1),
            (true, true) => h2,
        }
    }

    /// Iterates φ̄ from `w`; returns the pre-periodic tail and the cycle.
    pub fn phibar_orbit(&self, w: &Word, max_iter: usize) -> Result<(Vec<Word>, Vec<Word>), TwistError> {
        let mut seen: BTreeMap<Word, usize> = BTreeMap::new();
        let mut path = vec![w.clone()];
        seen.insert(w.clone(), 0);
        for _ in 0..max_iter {
            let next = self.phibar(path.last().unwrap());
            if let Some(&i) = seen.get(&next) {
                let cycle = path.split_off(i);
                return Ok((path, cycle));
            }
            seen.insert(next.clone(), path.len());
            path.push(next);
        }
        Err(TwistError::IterationCap(max_iter))
    }
}

/// Periodic part of φ̄ on N ∪ αN.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AttractorSet {
    /// Cycles in orbit order, each rotated to start at its least element.
    pub cycles: Vec<Vec<Word>>,
    /// Families whose members are all φ̄-fixed.
    pub fixed_families: Vec<Family>,
    /// Cycles of families: φ̄ carries each member of one family to a member
    /// of the next, and every sampled member is periodic.
    pub family_cycles: Vec<Vec<Family>>,
}

impl AttractorSet {
    /// The family containing `w`, with exponent, or the cycle containing it.
    pub fn locate(&self, w: &Word) -> Option<TwistLabel> {
        for f in &self.fixed_families {
            if let Some(n) = f.match_word(w) {
                return Some(TwistLabel::Family { family: f.clone(), n, element: w.clone() });
            }
        }
        if let Some(c) = self.cycles.iter().find(|c| c.contains(w)) {
            return Some(TwistLabel::Cycle { cycle: c.clone(), element: w.clone() });
        }
        for c in &self.family_cycles {
            for f in c {
                if let Some(n) = f.match_word(w) {
                    return Some(TwistLabel::FamilyCycle {
                        cycle: c.clone(),
                        family: f.clone(),
                        n,
                        element: w.clone(),
                    });
                }
            }
        }
        None
    }
}

impl fmt::Display for AttractorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.cycles.iter().map(|c| cycle_text(c)).collect();
        parts.extend(self.fixed_families.iter().map(|x| format!("{x} (fixed)")));
        parts.extend(self.family_cycles.iter().map(|c| family_cycle_text(c)));
        write!(f, "{}", parts.join("; "))
    }
}

fn cycle_text(c: &[Word]) -> String {
    let items: Vec<String> = c.iter().map(|w| w.to_string()).collect();
    if c.len() == 1 {
        format!("{} (fixed)", items[0])
    } else {
        items.join(" -> ")
    }
}

fn family_cycle_text(c: &[Family]) -> String {
    c.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" -> ")
}

/// Published attractor: cycles and fixed families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttractorSpec {
    pub cycles: Vec<Vec<Word>>,
    pub fixed_families: Vec<Family>,
}

impl AttractorSpec {
    /// `;`-separated items; a cycle is `x -> y -> z`, a family item is fixed.
    pub fn parse(s: &str) -> Result<AttractorSpec, ParseError> {
        let mut cycles = Vec::new();
        let mut fixed_families = Vec::new();
        for item in s.split(';') {
            let item = item.trim();
            if item.contains("^n") {
                fixed_families.push(Family::parse(item)?);
            } else {
                let c = item.split("->").map(|x| Word::parse(x.trim())).collect::<Result<Vec<_>, _>>()?;
                cycles.push(rotate_min(c));
            }
        }
        cycles.sort();
        fixed_families.sort();
        Ok(AttractorSpec { cycles, fixed_families })
    }

    pub fn matches(&self, a: &AttractorSet) -> bool {
        let mut fams = a.fixed_families.clone();
        fams.sort();
        self.cycles == a.cycles && self.fixed_families == fams && a.family_cycles.is_empty()
    }
}

pub fn rotate_min(mut c: Vec<Word>) -> Vec<Word> {
    if let Some(i) = (0..c.len()).min_by(|&i, &j| c[i].shortlex_cmp(&c[j])) {
        c.rotate_left(i);
    }
    c
}

#[derive(Clone, Debug)]
pub struct AttractorConfig {
    pub window: i64,
    pub verify_window: i64,
    pub max_iter: usize,
}

impl Default for AttractorConfig {
    fn default() -> Self {
        AttractorConfig { window: 8, verify_window: 12, max_iter: 256 }
    }
}

/// All φ̄-periodic elements of N ∪ αN. Families are tested member by member
/// on the sampling window and confirmed at `±verify_window`.
pub fn compute_attractor(
    ve: &VirtualEndomorphism,
    n: &NucleusSet,
    cfg: &AttractorConfig,
) -> Result<AttractorSet, TwistError> {
    let a = Word::a();
    let mut candidates: BTreeSet<Word> = BTreeSet::new();
    let mut families: BTreeSet<Family> = BTreeSet::new();
    for p in n.members() {
        for q in [p.clone(), p.left_mul(&a)] {
            match q {
                Pattern::Word(w) => {
                    candidates.insert(w);
                }
                Pattern::Family(f) => {
                    candidates.extend((-cfg.window..=cfg.window).map(|k| f.instance(k)));
                    families.insert(f);
                }
            }
        }
    }
    let mut fixed_families = Vec::new();
    for f in &families {
        let fixed_at = |k: i64| ve.phibar(&f.instance(k)) == f.instance(k);
        let sample: Vec<i64> = (-cfg.window..=cfg.window).chain([-cfg.verify_window, cfg.verify_window]).collect();
        let hits = sample.iter().filter(|&&k| fixed_at(k)).count();
        if hits == sample.len() {
            fixed_families.push(f.clone());
        } else if hits > sample.len() / 2 {
            let witness = *sample.iter().find(|&&k| !fixed_at(k)).unwrap();
            return Err(TwistError::FamilyMismatch { family: f.to_string(), witness });
        }
    }
    // drop fixed families contained in another fixed family
    let all = fixed_families.clone();
    fixed_families.retain(|f| {
        !all.iter()
            .any(|g| g != f && (-cfg.verify_window..=cfg.verify_window).all(|k| g.match_word(&f.instance(k)).is_some()))
    });
    fixed_families.sort();
    let sample: Vec<i64> = (-cfg.window..=cfg.window).chain([-cfg.verify_window, cfg.verify_window]).collect();
    let mut family_cycles: BTreeSet<Vec<Family>> = BTreeSet::new();
    for f in families.iter().filter(|f| !fixed_families.contains(f)) {
        if let Some(c) = family_cycle(ve, f, &families, &sample) {
            family_cycles.insert(c);
        }
    }
    let covered = |w: &Word| family_cycles.iter().flatten().any(|f| f.match_word(w).is_some());
    let mut cycles: BTreeSet<Vec<Word>> = BTreeSet::new();
    for w in &candidates {
        let (_, cycle) = ve.phibar_orbit(w, cfg.max_iter)?;
        let in_family = cycle.len() == 1 && fixed_families.iter().any(|f| f.match_word(&cycle[0]).is_some());
        if !in_family && !cycle.iter().all(covered) {
            cycles.insert(rotate_min(cycle));
        }
    }
    Ok(AttractorSet {
        cycles: cycles.into_iter().collect(),
        fixed_families,
        family_cycles: family_cycles.into_iter().collect(),
    })
}

const MAX_FAMILY_PERIOD: usize = 8;

/// `Some(cycle)` when every sampled member of `f` is periodic with one common
/// period and each step of the orbit stays inside one candidate family.
fn family_cycle(
    ve: &VirtualEndomorphism,
    f: &Family,
    families: &BTreeSet<Family>,
    sample: &[i64],
) -> Option<Vec<Family>> {
    let mut orbits = Vec::with_capacity(sample.len());
    let mut period = None;
    for &k in sample {
        let start = f.instance(k);
        let mut orbit = vec![start.clone()];
        let mut cur = start.clone();
        let p = (1..=MAX_FAMILY_PERIOD).find(|_| {
            cur = ve.phibar(&cur);
            orbit.push(cur.clone());
            cur == start
        })?;
        if *period.get_or_insert(p) != p {
            return None;
        }
        orbits.push(orbit);
    }
    let p = period?;
    let mut members = vec![f.clone()];
    for j in 1..p {
        let g = families.iter().find(|g| orbits.iter().all(|o| g.match_word(&o[j]).is_some()))?;
        members.push(g.clone());
    }
    let i = (0..p).min_by(|&i, &j| members[i].cmp(&members[j]))?;
    members.rotate_left(i);
    Some(members)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TwistLabel {
    Cycle { cycle: Vec<Word>, element: Word },
    Family { family: Family, n: i64, element: Word },
    FamilyCycle { cycle: Vec<Family>, family: Family, n: i64, element: Word },
}

impl fmt::Display for TwistLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TwistLabel::Cycle { cycle, element } if cycle.len() == 1 => write!(f, "{element} (fixed)"),
            TwistLabel::Cycle { cycle, element } => write!(f, "{element} in cycle {}", cycle_text(cycle)),
            TwistLabel::Family { family, n, element } => write!(f, "{element} in fixed family {family} at n = {n}"),
            TwistLabel::FamilyCycle { cycle, family, n, element } => {
                write!(f, "{element} in family {family} at n = {n}, cycle {}", family_cycle_text(cycle))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct TwistSolution {
    pub trace: Vec<Word>,
    pub label: TwistLabel,
}

/// Iterates φ̄ from `prefix·h` until the orbit reaches the attractor.
pub fn twist_solve(
    ve: &VirtualEndomorphism,
    attractor: &AttractorSet,
    h: &Word,
    prefix: Option<&Word>,
) -> Result<TwistSolution, TwistError> {
    let start = match prefix {
        Some(p) => p.multiply(h),
        None => h.clone(),
    };
    let cap = 4 * start.len() + 64;
    let mut trace = vec![start];
    for _ in 0..=cap {
        let cur = trace.last().unwrap();
        if let Some(label) = attractor.locate(cur) {
            return Ok(TwistSolution { trace, label });
        }
        let next = ve.phibar(cur);
        trace.push(next);
    }
    Err(TwistError::IterationCap(cap))
}

/// Checks `f·u ≃ f·v` through `c² = ⟨y, y⟩`: then `f·c² = y·f`, so
/// `f·(c²·v·y⁻¹) = y·(f·v)·y⁻¹ ≃ f·v`.
pub fn equivalence_identity_check(rec: &WreathRecursion, u: &Word, v: &Word, c: &Word) -> bool {
    let c2 = c.multiply(c);
    if rec.perm_of(&c2) {
        return false;
    }
    let [y1, y2] = rec.restrictions(&c2);
    y1 == y2 && *u == c2.multiply(v).multiply(&y1.invert())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn ve(a: &str, b: &str) -> VirtualEndomorphism {
        VirtualEndomorphism::new(WreathRecursion::parse(a, b).unwrap(), 0)
    }

    #[test]
    fn phi_spot_values() {
        let v = ve("<1,1>s", "<a,b>");
        assert_eq!(v.phi(&w("aa")), Some(Word::identity()));
        assert_eq!(v.phi(&w("b")), Some(w("a")));
        assert_eq!(v.phi(&w("Aba")), Some(w("b")));
        assert_eq!(v.phi(&w("a")), None);
        let v14 = ve("<1,d>s", "<a,1>");
        assert_eq!(v14.phi(&w("aa")), Some(w("d")));
        assert_eq!(v14.phi(&w("b")), Some(w("a")));
        assert_eq!(v14.phi(&w("Aba")), Some(Word::identity()));
    }

    #[test]
    fn phibar_dynamics_row1() {
        let v = ve("<1,1>s", "<a,b>");
        assert_eq!(v.phibar(&w("b^3")), w("a^3"));
        for n in -5..=5 {
            let x = w("a").multiply(&w("b").pow(n));
            assert_eq!(v.phibar(&x), x);
        }
        assert_eq!(v.phibar(&Word::identity()), Word::identity());
        let (tail, cycle) = v.phibar_orbit(&w("b^4"), 10).unwrap();
        assert_eq!(tail, vec![w("b^4"), w("a^4")]);
        assert_eq!(cycle, vec![Word::identity()]);
    }

    #[test]
    fn phibar_two_cycle_row3() {
        let v = ve("<1,1>s", "<a,c>");
        let (_, cycle) = v.phibar_orbit(&w("C"), 10).unwrap();
        assert_eq!(rotate_min(cycle), rotate_min(vec![w("C"), w("ac")]));
    }

    #[test]
    fn identity_checks() {
        let z2 = WreathRecursion::parse("<1,a>s", "<b,1>").unwrap();
        assert!(equivalence_identity_check(&z2, &w("a^2 b^3 A"), &w("b^3"), &w("a")));
        let plus = WreathRecursion::parse("<1,b>s", "<a,1>").unwrap();
        assert!(equivalence_identity_check(&plus, &w("a^2 B"), &Word::identity(), &w("a")));
        let row1 = WreathRecursion::parse("<1,1>s", "<a,b>").unwrap();
        assert!(equivalence_identity_check(&row1, &w("a^2 b"), &w("b"), &w("a")));
        assert!(!equivalence_identity_check(&row1, &w("b"), &w("a"), &w("a")));
    }

    #[test]
    fn attractor_spec_parse() {
        let s = AttractorSpec::parse("1; a b^n").unwrap();
        assert_eq!(s.cycles, vec![vec![Word::identity()]]);
        assert_eq!(s.fixed_families.len(), 1);
    }
}
