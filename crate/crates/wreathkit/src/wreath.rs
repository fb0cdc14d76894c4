//! Self-similar actions of the free group on the binary rooted tree.
//!
//! Tree letters are `0` and `1` internally (printed as 1 and 2). Products act
//! on the right: `(gh)|x = g|x · h|_{π_g(x)}`, so `act(gh, v) = act(h, act(g, v))`.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::word::{Family, Letter, ParseError, Pattern, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WreathError {
    #[error("restriction closure exceeded {0} states")]
    StateBound(usize),
    #[error("bad recursion text: {0}")]
    Syntax(String),
    #[error(transparent)]
    Word(#[from] ParseError),
}

/// `g = ⟨g|1, g|2⟩π_g`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GenRecursion {
    pub restrictions: [Word; 2],
    pub swap: bool,
}

impl GenRecursion {
    pub fn parse(s: &str) -> Result<GenRecursion, WreathError> {
        let s = s.trim();
        let open = s.find('<').ok_or_else(|| WreathError::Syntax(s.into()))?;
        let close = s.rfind('>').ok_or_else(|| WreathError::Syntax(s.into()))?;
        if open != 0 || close < open {
            return Err(WreathError::Syntax(s.into()));
        }
        let inner = &s[open + 1..close];
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 2 {
            return Err(WreathError::Syntax(s.into()));
        }
        let swap = match s[close + 1..].trim() {
            "" | "id" => false,
            "s" | "σ" => true,
            other => return Err(WreathError::Syntax(other.into())),
        };
        Ok(GenRecursion { restrictions: [Word::parse(parts[0])?, Word::parse(parts[1])?], swap })
    }
}

impl fmt::Display for GenRecursion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}>", self.restrictions[0], self.restrictions[1])?;
        if self.swap {
            write!(f, "s")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WreathRecursion {
    pub alpha: GenRecursion,
    pub beta: GenRecursion,
    // per letter a, A, b, B: (restriction at 0, restriction at 1, swap)
    table: [(Word, Word, bool); 4],
}

impl WreathRecursion {
    pub fn new(alpha: GenRecursion, beta: GenRecursion) -> WreathRecursion {
        let entry = |g: &GenRecursion| (g.restrictions[0].clone(), g.restrictions[1].clone(), g.swap);
        // (g⁻¹)|x = (g|_{π_g⁻¹(x)})⁻¹
        let inv = |g: &GenRecursion| {
            let [r0, r1] = &g.restrictions;
            if g.swap {
                (r1.invert(), r0.invert(), true)
            } else {
                (r0.invert(), r1.invert(), false)
            }
        };
        let table = [entry(&alpha), inv(&alpha), entry(&beta), inv(&beta)];
        WreathRecursion { alpha, beta, table }
    }

    pub fn parse(alpha: &str, beta: &str) -> Result<WreathRecursion, WreathError> {
        Ok(WreathRecursion::new(GenRecursion::parse(alpha)?, GenRecursion::parse(beta)?))
    }

    fn letter(&self, l: Letter) -> &(Word, Word, bool) {
        &self.table[letter_index(l)]
    }

    /// `true` when the word acts by σ on the first level.
    pub fn perm_of(&self, w: &Word) -> bool {
        w.letters().iter().filter(|&&l| self.letter(l).2).count() % 2 == 1
    }

    /// Image of tree letter `x` under the first-level permutation of `w`.
    pub fn perm_apply(&self, w: &Word, x: usize) -> usize {
        if self.perm_of(w) {
            1 - x
        } else {
            x
        }
    }

    pub fn restrict(&self, w: &Word, x: usize) -> Word {
        assert!(x < 2, "tree letter must be 0 or 1");
        let mut out = Word::identity();
        let mut cur = x;
        for &l in w.letters() {
            let (r0, r1, swap) = self.letter(l);
            out = out.multiply(if cur == 0 { r0 } else { r1 });
            if *swap {
                cur = 1 - cur;
            }
        }
        out
    }

    pub fn restrictions(&self, w: &Word) -> [Word; 2] {
        [self.restrict(w, 0), self.restrict(w, 1)]
    }

    /// Action on a tree vertex given as letters in {0, 1}; the first letter is
    /// the top level.
    pub fn act(&self, w: &Word, v: &[u8]) -> Vec<u8> {
        let mut cur = w.clone();
        let mut out = Vec::with_capacity(v.len());
        for &x in v {
            let x = x as usize;
            out.push(self.perm_apply(&cur, x) as u8);
            cur = self.restrict(&cur, x);
        }
        out
    }

    /// Coinductive triviality: `w` acts trivially iff every state reachable
    /// by restriction has trivial permutation.
    pub fn acts_trivially(&self, w: &Word, bound: usize) -> Result<bool, WreathError> {
        let mut seen: HashSet<Word> = HashSet::new();
        let mut queue = VecDeque::from([w.clone()]);
        while let Some(s) = queue.pop_front() {
            if !seen.insert(s.clone()) {
                continue;
            }
            if seen.len() > bound {
                return Err(WreathError::StateBound(bound));
            }
            if self.perm_of(&s) {
                return Ok(false);
            }
            for r in self.restrictions(&s) {
                if !seen.contains(&r) {
                    queue.push_back(r);
                }
            }
        }
        Ok(true)
    }

    /// Least `k ≤ bound` with `w^k` acting trivially; `None` when none is found.
    pub fn faithful_order(&self, w: &Word, bound: u32, states: usize) -> Result<Option<u32>, WreathError> {
        assert!(bound >= 1);
        for k in 1..=bound {
            if self.acts_trivially(&w.pow(k as i64), states)? {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }

    /// Restriction of every member of a pattern at `x`, as patterns.
    ///
    /// `(u bⁿ v)|x = u|x · (b|y)ⁿ · v|y` with `y = π_u(x)` when `b` fixes the
    /// first level; otherwise the family is split by the parity of `n`.
    pub fn restrict_pattern(&self, p: &Pattern, x: usize) -> Vec<Pattern> {
        match p {
            Pattern::Word(w) => vec![Pattern::Word(self.restrict(w, x))],
            Pattern::Family(f) => {
                let b = f.base();
                if !self.perm_of(b) {
                    vec![self.restrict_even(f.prefix(), b, f.suffix(), x)]
                } else {
                    let b2 = b.multiply(b);
                    vec![
                        self.restrict_even(f.prefix(), &b2, f.suffix(), x),
                        self.restrict_even(&f.prefix().multiply(b), &b2, f.suffix(), x),
                    ]
                }
            }
        }
    }

    fn restrict_even(&self, u: &Word, b: &Word, v: &Word, x: usize) -> Pattern {
        let y = self.perm_apply(u, x);
        let u1 = self.restrict(u, x);
        let z = self.restrict(b, y);
        let v1 = self.restrict(v, y);
        match Family::new(u1.clone(), z, v1.clone()) {
            Some(f) => Pattern::Family(f),
            None => Pattern::Word(u1.multiply(&v1)),
        }
    }
}

fn letter_index(l: Letter) -> usize {
    match l {
        Letter::A => 0,
        Letter::A_INV => 1,
        Letter::B => 2,
        _ => 3,
    }
}

impl fmt::Display for WreathRecursion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a = {}; b = {}", self.alpha, self.beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn row1() -> WreathRecursion {
        WreathRecursion::parse("<1,1>s", "<a,b>").unwrap()
    }

    fn z2() -> WreathRecursion {
        WreathRecursion::parse("<1,a>s", "<b,1>").unwrap()
    }

    #[test]
    fn perms() {
        let r = row1();
        assert!(r.perm_of(&w("a")));
        assert!(!r.perm_of(&w("b")));
        assert!(r.perm_of(&w("ab")));
        assert!(!r.perm_of(&w("aa")));
    }

    #[test]
    fn restrictions_follow_product_rule() {
        let r = row1();
        assert_eq!(r.restrict(&w("b"), 0), w("a"));
        assert_eq!(r.restrict(&w("ab"), 0), w("b"));
        assert_eq!(r.restrict(&w("ab"), 1), w("a"));
        assert_eq!(r.restrict(&Word::identity(), 0), Word::identity());
    }

    #[test]
    fn adding_machine() {
        let r = z2();
        assert_eq!(r.act(&w("a"), &[0]), vec![1]);
        assert_eq!(r.act(&w("a"), &[0, 0, 0]), vec![1, 0, 0]);
        assert_eq!(r.act(&w("a"), &[1, 0, 0]), vec![0, 1, 0]);
        assert_eq!(r.act(&Word::identity(), &[1, 0, 1]), vec![1, 0, 1]);
    }

    #[test]
    fn triviality_and_order() {
        assert!(z2().acts_trivially(&w("b"), 100).unwrap());
        assert!(row1().acts_trivially(&w("aa"), 100).unwrap());
        assert!(!row1().acts_trivially(&w("a"), 100).unwrap());
        assert_eq!(row1().faithful_order(&w("a"), 8, 100).unwrap(), Some(2));
        assert_eq!(z2().faithful_order(&w("b"), 8, 100).unwrap(), Some(1));
        assert_eq!(row1().faithful_order(&Word::identity(), 8, 100).unwrap(), Some(1));
        assert_eq!(z2().faithful_order(&w("a"), 8, 100).unwrap(), None);
    }

    #[test]
    fn pattern_restriction_matches_instances() {
        let r = row1();
        let f = Pattern::Family(Family::parse("a b^n").unwrap());
        for x in 0..2 {
            let images = r.restrict_pattern(&f, x);
            for n in -6..=6 {
                let inst = r.restrict(&Family::parse("a b^n").unwrap().instance(n), x);
                assert!(images.iter().any(|p| p.contains(&inst)));
            }
        }
    }

    #[test]
    fn parse_display_round_trip() {
        let r = WreathRecursion::parse("<1, d>s", "<1, Aba>").unwrap();
        assert_eq!(r.to_string(), "a = <1, AB>s; b = <1, Aba>");
    }
}
