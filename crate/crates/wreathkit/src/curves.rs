//! Essential curves as exact parabolic elements `w⁻¹xw`, the pullback μ via
//! φ̂, finite global attractors and obstruction certificates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::nucleus::NucleusSet;
use crate::twist::VirtualEndomorphism;
use crate::word::{cyclic_decompose, Family, ParseError, Pattern, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("{0} is not parabolic of core type")]
    NotParabolic(Word),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A curve `w⁻¹xw` with `x ∈ {a, b, BA}` and `w` minimal, or `⊙`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CurveClass {
    Null,
    Curve { core: Word, conj: Word },
}

impl CurveClass {
    pub fn from_word(u: &Word) -> Result<CurveClass, CurveError> {
        let (conj, core) = cyclic_decompose(u).ok_or_else(|| CurveError::NotParabolic(u.clone()))?;
        let (root, _) = core.root();
        let g = Word::gamma();
        let positive = if root == Word::a() || root == Word::a().invert() {
            Word::a()
        } else if root == Word::b() || root == Word::b().invert() {
            Word::b()
        } else if root == g || root == g.invert() {
            g
        } else {
            return Err(CurveError::NotParabolic(u.clone()));
        };
        Ok(CurveClass::Curve { core: positive, conj })
    }

    pub fn element(&self) -> Option<Word> {
        match self {
            CurveClass::Null => None,
            CurveClass::Curve { core, conj } => Some(core.conjugate(conj)),
        }
    }

    /// Sort key: ⊙ first, then by conjugator length and core.
    fn key(&self) -> (usize, Word, Word) {
        match self {
            CurveClass::Null => (0, Word::identity(), Word::identity()),
            CurveClass::Curve { core, conj } => (1 + conj.len(), conj.clone(), core.clone()),
        }
    }
}

impl fmt::Display for CurveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveClass::Null => write!(f, "o"),
            CurveClass::Curve { core, conj } => {
                let x = if *core == Word::gamma() { "c".to_string() } else { core.to_string() };
                if conj.is_identity() {
                    write!(f, "{x}")
                } else if *core == Word::gamma() && *conj == Word::a() {
                    write!(f, "d")
                } else {
                    write!(f, "{x}@{conj}")
                }
            }
        }
    }
}

/// A curve as written in a table: `o`, a parabolic word, or `x @ w` with the
/// conjugator `w` possibly a family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurveSpec {
    Curve(CurveClass),
    Family { core: Word, conj: Family },
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveSpec::Curve(c) => write!(f, "{c}"),
            CurveSpec::Family { core, conj } => write!(f, "{core} @ {conj}"),
        }
    }
}

impl CurveSpec {
    pub fn parse(s: &str) -> Result<CurveSpec, CurveError> {
        let s = s.trim();
        if s == "o" || s == "⊙" {
            return Ok(CurveSpec::Curve(CurveClass::Null));
        }
        if let Some((x, w)) = s.split_once('@') {
            let core = Word::parse(x)?;
            return match Pattern::parse(w)? {
                Pattern::Word(w) => Ok(CurveSpec::Curve(CurveClass::from_word(&core.conjugate(&w))?)),
                Pattern::Family(conj) => Ok(CurveSpec::Family { core, conj }),
            };
        }
        Ok(CurveSpec::Curve(CurveClass::from_word(&Word::parse(s)?)?))
    }

    /// Only exponents whose conjugator length is within reach of the curve's
    /// own conjugator length are tried.
    pub fn matches(&self, c: &CurveClass) -> bool {
        match self {
            CurveSpec::Curve(x) => x == c,
            CurveSpec::Family { core, conj } => {
                let CurveClass::Curve { core: x, conj: w } = c else { return false };
                let Ok(CurveClass::Curve { core: x0, conj: w0 }) = CurveClass::from_word(core) else { return false };
                if x0 != *x {
                    return false;
                }
                let slack = (w0.len() + conj.prefix().len() + conj.suffix().len() + 2) as i64;
                let step = conj.base().len() as i64;
                let target = w.len() as i64;
                let lo = (target - slack).max(0) / step;
                let hi = (target + slack) / step + 1;
                // same curve iff the conjugators differ by a power of the core
                (lo..=hi).flat_map(|n| [n, -n]).any(|n| {
                    let d = w.multiply(&w0.multiply(&conj.instance(n)).invert());
                    let r = d.root().0;
                    d.is_identity() || r == *x || r == x.invert()
                })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PullbackResult {
    pub image: CurveClass,
    /// 1 when the core acts trivially on the first level, else 2.
    pub n: u32,
}

impl PullbackResult {
    /// Contribution `1/n` of the selected preimage component, as (num, den).
    pub fn multiplier(&self) -> (u32, u32) {
        (1, self.n)
    }
}

/// `φ(w)` on the domain, `φ(αw)` on the other coset.
pub fn phihat(ve: &VirtualEndomorphism, w: &Word) -> Word {
    match ve.phi(w) {
        Some(x) => x,
        None => ve.rec.restrict(&Word::a().multiply(w), ve.coord),
    }
}

pub fn pullback_curve(ve: &VirtualEndomorphism, c: &CurveClass) -> Result<PullbackResult, CurveError> {
    let (core, conj) = match c {
        CurveClass::Null => return Ok(PullbackResult { image: CurveClass::Null, n: 1 }),
        CurveClass::Curve { core, conj } => (core, conj),
    };
    let n = if ve.rec.perm_of(core) { 2 } else { 1 };
    let h = core.pow(n as i64).conjugate(conj);
    let y = ve.phi(&h).expect("even power lies in the domain");
    let image = if y.is_identity() { CurveClass::Null } else { CurveClass::from_word(&y)? };
    Ok(PullbackResult { image, n })
}

#[derive(Clone, Debug)]
pub struct FgaConfig {
    pub bound: usize,
    pub iterations: usize,
    pub window: i64,
    /// Windows tried in turn: `window`, `2·window`, ... up to this many.
    pub max_widenings: usize,
}

impl Default for FgaConfig {
    fn default() -> Self {
        FgaConfig { bound: 512, iterations: 64, window: 8, max_widenings: 6 }
    }
}

#[derive(Clone, Debug)]
pub enum FgaResult {
    Closed {
        cycles: Vec<Vec<CurveClass>>,
    },
    /// Periodic curves seen before the bound was hit.
    NotClosed {
        periodic: Vec<CurveClass>,
        visited: usize,
    },
}

/// φ̂-periodic members of `N`, families sampled on `[-window, window]`.
pub fn periodic_part(ve: &VirtualEndomorphism, n: &NucleusSet, window: i64, max_iter: usize) -> BTreeSet<Word> {
    let mut per = BTreeSet::new();
    for p in n.members() {
        for w in p.instances(-window..=window) {
            let mut seen = vec![w.clone()];
            let mut cur = w;
            for _ in 0..max_iter {
                cur = phihat(ve, &cur);
                if let Some(i) = seen.iter().position(|x| *x == cur) {
                    per.extend(seen.drain(i..));
                    break;
                }
                seen.push(cur.clone());
            }
        }
    }
    per
}

fn rotate_min(mut c: Vec<CurveClass>) -> Vec<CurveClass> {
    if let Some(i) = (0..c.len()).min_by(|&i, &j| c[i].key().cmp(&c[j].key())) {
        c.rotate_left(i);
    }
    c
}

struct Sweep {
    cycles: BTreeSet<Vec<CurveClass>>,
    visited: BTreeSet<CurveClass>,
    overflow: bool,
}

fn sweep(ve: &VirtualEndomorphism, seeds: &BTreeSet<Word>, cfg: &FgaConfig) -> Result<Sweep, CurveError> {
    let mut out = Sweep { cycles: BTreeSet::new(), visited: BTreeSet::new(), overflow: false };
    out.cycles.insert(vec![CurveClass::Null]);
    let mut memo: BTreeMap<CurveClass, CurveClass> = BTreeMap::new();
    for w in seeds {
        for x in [Word::a(), Word::b(), Word::gamma()] {
            let mut c = CurveClass::from_word(&x.conjugate(w))?;
            let mut path = vec![c.clone()];
            let mut closed = false;
            for _ in 0..cfg.iterations {
                let next = match memo.get(&c) {
                    Some(n) => n.clone(),
                    None => {
                        let n = pullback_curve(ve, &c)?.image;
                        memo.insert(c.clone(), n.clone());
                        n
                    }
                };
                if let Some(i) = path.iter().position(|p| *p == next) {
                    out.cycles.insert(rotate_min(path[i..].to_vec()));
                    closed = true;
                    break;
                }
                path.push(next.clone());
                c = next;
            }
            out.visited.extend(path);
            if !closed || out.visited.len() > cfg.bound {
                out.overflow = true;
                return Ok(out);
            }
        }
    }
    Ok(out)
}

/// Pulls back the curves `x^w` for `x ∈ {a, b, BA}` and `w` in the φ̂-periodic
/// part of `N`; the window on family members is doubled until the cycles stop
/// changing or the curve bound is exceeded.
pub fn compute_fga(ve: &VirtualEndomorphism, n: &NucleusSet, cfg: &FgaConfig) -> Result<FgaResult, CurveError> {
    let mut window = cfg.window;
    let mut previous: Option<BTreeSet<Vec<CurveClass>>> = None;
    let has_families = !n.families().is_empty();
    for _ in 0..=cfg.max_widenings {
        let seeds = periodic_part(ve, n, window, cfg.iterations);
        let s = sweep(ve, &seeds, cfg)?;
        if s.overflow {
            let periodic: BTreeSet<CurveClass> = s.cycles.iter().flatten().cloned().collect();
            return Ok(FgaResult::NotClosed { periodic: periodic.into_iter().collect(), visited: s.visited.len() });
        }
        if !has_families || previous.as_ref() == Some(&s.cycles) {
            let mut cycles: Vec<Vec<CurveClass>> = s.cycles.into_iter().collect();
            cycles.sort_by_key(|c| c.iter().map(|x| x.key()).collect::<Vec<_>>());
            return Ok(FgaResult::Closed { cycles });
        }
        previous = Some(s.cycles);
        window *= 2;
    }
    let periodic: BTreeSet<CurveClass> = previous.unwrap_or_default().into_iter().flatten().collect();
    Ok(FgaResult::NotClosed { periodic: periodic.into_iter().collect(), visited: 0 })
}

/// Curves visited by the FGA sweep: the candidates for obstruction search.
pub fn fga_candidates(
    ve: &VirtualEndomorphism,
    n: &NucleusSet,
    cfg: &FgaConfig,
) -> Result<Vec<CurveClass>, CurveError> {
    let seeds = periodic_part(ve, n, cfg.window, cfg.iterations);
    let s = sweep(ve, &seeds, cfg)?;
    Ok(s.visited.into_iter().collect())
}

/// An obstructing curve with its multiplier as (num, den).
pub type Certificate = (CurveClass, (u32, u32));

/// First candidate (⊙ excluded) fixed by μ with multiplier at least 1.
pub fn check_obstruction(
    ve: &VirtualEndomorphism,
    candidates: &[CurveClass],
) -> Result<Option<Certificate>, CurveError> {
    let mut sorted: Vec<&CurveClass> = candidates.iter().filter(|c| **c != CurveClass::Null).collect();
    sorted.sort_by_key(|c| c.key());
    for c in sorted {
        let r = pullback_curve(ve, c)?;
        let (num, den) = r.multiplier();
        if r.image == *c && num >= den {
            return Ok(Some((c.clone(), (num, den))));
        }
    }
    Ok(None)
}

/// Compares computed cycles with published ones as sets of directed cycles.
pub fn same_cycles(published: &[Vec<CurveClass>], computed: &[Vec<CurveClass>]) -> bool {
    let norm =
        |cs: &[Vec<CurveClass>]| -> BTreeSet<Vec<CurveClass>> { cs.iter().map(|c| rotate_min(c.clone())).collect() };
    norm(published) == norm(computed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wreath::WreathRecursion;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn ve(a: &str, b: &str) -> VirtualEndomorphism {
        VirtualEndomorphism::new(WreathRecursion::parse(a, b).unwrap(), 0)
    }

    fn curve(s: &str) -> CurveClass {
        CurveClass::from_word(&w(s)).unwrap()
    }

    #[test]
    fn curve_from_word_examples() {
        assert_eq!(curve("d"), CurveClass::Curve { core: w("c"), conj: w("a") });
        assert_eq!(curve("Aba"), CurveClass::Curve { core: w("b"), conj: w("a") });
        assert!(CurveClass::from_word(&w("aB")).is_err());
        assert_eq!(curve("ab"), curve("BA"));
        assert_eq!(curve("b^3"), curve("b"));
        assert_ne!(curve("c"), curve("d"));
    }

    #[test]
    fn phihat_examples() {
        let v = ve("<1,1>s", "<a,b>");
        assert_eq!(phihat(&v, &w("b")), w("a"));
        assert_eq!(phihat(&v, &w("a")), Word::identity());
        assert_eq!(phihat(&v, &Word::identity()), Word::identity());
    }

    #[test]
    fn three_cycle_row14() {
        let v = ve("<1,d>s", "<a,1>");
        let step = |c: &CurveClass| pullback_curve(&v, c).unwrap().image;
        assert_eq!(step(&curve("a")), curve("d"));
        assert_eq!(step(&curve("d")), curve("b"));
        assert_eq!(step(&curve("b")), curve("a"));
        assert_eq!(step(&CurveClass::Null), CurveClass::Null);
    }

    #[test]
    fn row1_pullbacks() {
        let v = ve("<1,1>s", "<a,b>");
        let r = pullback_curve(&v, &curve("b")).unwrap();
        assert_eq!((r.image.clone(), r.n), (curve("a"), 1));
        let r = pullback_curve(&v, &curve("a")).unwrap();
        assert_eq!((r.image, r.n), (CurveClass::Null, 2));
    }

    #[test]
    fn obstruction_threshold() {
        let z2 = ve("<1,a>s", "<b,1>");
        let found = check_obstruction(&z2, &[curve("a"), curve("b")]).unwrap();
        assert_eq!(found, Some((curve("b"), (1, 1))));
        // α is fixed too, but with n = 2
        assert_eq!(check_obstruction(&z2, &[curve("a")]).unwrap(), None);
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(CurveSpec::parse("o").unwrap(), CurveSpec::Curve(CurveClass::Null));
        let s = CurveSpec::parse("a @ b^n").unwrap();
        assert!(s.matches(&curve("B^3 a b^3")));
        assert!(!s.matches(&curve("b")));
    }
}
