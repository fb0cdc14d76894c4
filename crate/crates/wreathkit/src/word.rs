//! Reduced words in the free group on `a`, `b` and one-slot integer families.
//!
//! Letters are ordered `a < A < b < B`; upper case is the inverse.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u8);

impl Letter {
    pub const A: Letter = Letter(0);
    pub const A_INV: Letter = Letter(1);
    pub const B: Letter = Letter(2);
    pub const B_INV: Letter = Letter(3);

    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }

    pub fn is_a(self) -> bool {
        self.0 < 2
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn to_char(self) -> char {
        ['a', 'A', 'b', 'B'][self.0 as usize]
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a' => Some(Letter::A),
            'A' => Some(Letter::A_INV),
            'b' => Some(Letter::B),
            'B' => Some(Letter::B_INV),
            _ => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected character {0:?} at position {1}")]
    BadChar(char, usize),
    #[error("unbalanced parenthesis at position {0}")]
    Paren(usize),
    #[error("bad exponent at position {0}")]
    Exponent(usize),
    #[error("family slot `^n` is not allowed in a plain word")]
    UnexpectedSlot,
    #[error("a family needs exactly one `^n` slot, found {0}")]
    SlotCount(usize),
    #[error("family base reduces to the identity")]
    TrivialBase,
}

/// A freely reduced word. The empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Word {
        Word(Vec::new())
    }

    pub fn a() -> Word {
        Word(vec![Letter::A])
    }

    pub fn b() -> Word {
        Word(vec![Letter::B])
    }

    /// γ = BA
    pub fn gamma() -> Word {
        Word(vec![Letter::B_INV, Letter::A_INV])
    }

    /// δ = AB
    pub fn delta() -> Word {
        Word(vec![Letter::A_INV, Letter::B_INV])
    }

    pub fn reduce<I: IntoIterator<Item = Letter>>(raw: I) -> Word {
        let mut out: Vec<Letter> = Vec::new();
        for l in raw {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn multiply(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        for &l in &other.0 {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    fn push_word(&mut self, other: &Word) {
        for &l in &other.0 {
            if self.0.last() == Some(&l.inverse()) {
                self.0.pop();
            } else {
                self.0.push(l);
            }
        }
    }

    pub fn invert(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.invert() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..n.unsigned_abs() {
            out.push_word(&base);
        }
        out
    }

    /// `c⁻¹ self c`
    pub fn conjugate(&self, c: &Word) -> Word {
        c.invert().multiply(self).multiply(c)
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(f), Some(l)) => self.0.len() == 1 || *f != l.inverse(),
            _ => true,
        }
    }

    /// Exponent sums in `a` and `b`.
    pub fn exponent_sums(&self) -> (i64, i64) {
        let mut s = (0, 0);
        for l in &self.0 {
            let d = if l.is_inverse() { -1 } else { 1 };
            if l.is_a() {
                s.0 += d;
            } else {
                s.1 += d;
            }
        }
        s
    }

    /// Splits `self = p m p⁻¹` with `m` cyclically reduced; returns `(p, m)`.
    pub fn cyclic_reduction(&self) -> (Word, Word) {
        let w = &self.0;
        let mut i = 0;
        while i + 1 < w.len() - i && w[i] == w[w.len() - 1 - i].inverse() {
            i += 1;
        }
        (Word(w[..i].to_vec()), Word(w[i..w.len() - i].to_vec()))
    }

    pub fn rotation(&self, k: usize) -> Word {
        let mut v = self.0[k..].to_vec();
        v.extend_from_slice(&self.0[..k]);
        Word(v)
    }

    /// Shortest `r` with `self = r^k`, and `k`.
    pub fn root(&self) -> (Word, usize) {
        let n = self.0.len();
        for d in 1..=n {
            if n.is_multiple_of(d) && (d..n).all(|i| self.0[i] == self.0[i - d]) {
                return (Word(self.0[..d].to_vec()), n / d);
            }
        }
        (self.clone(), 1)
    }

    /// Length first, then lexicographic in `a < A < b < B`.
    pub fn shortlex_cmp(&self, other: &Word) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }

    pub fn parse(s: &str) -> Result<Word, ParseError> {
        let terms = parse_terms(s)?;
        if terms.slot_count > 0 {
            return Err(ParseError::UnexpectedSlot);
        }
        Ok(terms.before)
    }
}

/// Preferred cyclic rotation of a cyclically reduced word: powers of `a`, `b`,
/// `BA` (γ) and `ab` (γ⁻¹) keep those shapes, anything else takes its least
/// rotation.
pub fn canonical_rotation(m: &Word) -> Word {
    let (root, _) = m.root();
    let g = Word::gamma();
    let gi = g.invert();
    let rots: Vec<Word> = (0..m.len()).map(|k| m.rotation(k)).collect();
    if root.len() == 2 {
        for target in [&g, &gi] {
            if (0..2).any(|k| &root.rotation(k) == target) {
                let k = m.len() / 2;
                return target.pow(k as i64);
            }
        }
    }
    rots.into_iter().min().unwrap_or_default()
}

/// Writes `u = w⁻¹ · core · w` with `core` the preferred rotation of the
/// cyclic reduction and `w` of minimal length (ties broken lexicographically).
pub fn cyclic_decompose(u: &Word) -> Option<(Word, Word)> {
    if u.is_identity() {
        return None;
    }
    let (p, m) = u.cyclic_reduction();
    let w0 = p.invert();
    let core = canonical_rotation(&m);
    let (root, k) = core.root();
    let mut best: Option<Word> = None;
    for i in 0..m.len() {
        if m.rotation(i) != core {
            continue;
        }
        // m = P·S, core = S·P = P⁻¹ m P, so u = (P⁻¹w0)⁻¹ core (P⁻¹w0)
        let pinv = Word(m.0[..i].to_vec()).invert();
        let base = pinv.multiply(&w0);
        let span = (k + 2 + base.len() / root.len().max(1)) as i64;
        let mut cand = root.pow(-span).multiply(&base);
        for _ in -span..=span {
            if best.as_ref().is_none_or(|b| cand.shortlex_cmp(b) == Ordering::Less) {
                best = Some(cand.clone());
            }
            cand = root.multiply(&cand);
        }
    }
    best.map(|w| (w, core))
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Word::parse(s)
    }
}

/// The set `{ prefix · baseⁿ · suffix : n ∈ ℤ }`, kept in a canonical
/// representation so that equal sets compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Family {
    prefix: Word,
    base: Word,
    suffix: Word,
}

impl Family {
    /// Returns `None` when `base` is trivial (the set is a single element).
    pub fn new(prefix: Word, base: Word, suffix: Word) -> Option<Family> {
        if base.is_identity() {
            return None;
        }
        let (p, s) = base.cyclic_reduction();
        // base = p s p⁻¹
        let u = prefix.multiply(&p);
        let v = p.invert().multiply(&suffix);
        let mut best: Option<(usize, Word, Word, Word)> = None;
        for s0 in [s.clone(), s.invert()] {
            for i in 0..s0.len() {
                let pre = Word(s0.0[..i].to_vec());
                let rot = s0.rotation(i);
                let u1 = u.multiply(&pre);
                let v1 = pre.invert().multiply(&v);
                // u·sⁿ·v = (u·sʲ)·sⁿ⁻ʲ⁺ᵏ·(s⁻ᵏ·v): both ends shift freely
                let span = ((u1.len() + v1.len()) / rot.len() + 2) as i64;
                let shortest =
                    |f: &dyn Fn(i64) -> Word| (-span..=span).map(f).min_by(|x, y| x.shortlex_cmp(y)).unwrap();
                let uj = shortest(&|j| u1.multiply(&rot.pow(j)));
                let vj = shortest(&|j| rot.pow(j).multiply(&v1));
                let key = (uj.len() + vj.len(), uj, vj, rot.clone());
                if best.as_ref().is_none_or(|b| key < *b) {
                    best = Some(key);
                }
            }
        }
        let (_, prefix, suffix, base) = best?;
        Some(Family { prefix, base, suffix })
    }

    pub fn power(base: Word) -> Option<Family> {
        Family::new(Word::identity(), base, Word::identity())
    }

    pub fn prefix(&self) -> &Word {
        &self.prefix
    }

    pub fn base(&self) -> &Word {
        &self.base
    }

    pub fn suffix(&self) -> &Word {
        &self.suffix
    }

    pub fn instance(&self, n: i64) -> Word {
        self.prefix.multiply(&self.base.pow(n)).multiply(&self.suffix)
    }

    /// The unique `n` with `instance(n) == u`, if any.
    pub fn match_word(&self, u: &Word) -> Option<i64> {
        let t = self.prefix.invert().multiply(u).multiply(&self.suffix.invert());
        if t.is_identity() {
            return Some(0);
        }
        if !t.len().is_multiple_of(self.base.len()) {
            return None;
        }
        let k = (t.len() / self.base.len()) as i64;
        if self.base.pow(k) == t {
            Some(k)
        } else if self.base.pow(-k) == t {
            Some(-k)
        } else {
            None
        }
    }

    pub fn invert(&self) -> Family {
        Family::new(self.suffix.invert(), self.base.clone(), self.prefix.invert()).expect("nontrivial base")
    }

    pub fn left_mul(&self, w: &Word) -> Family {
        Family::new(w.multiply(&self.prefix), self.base.clone(), self.suffix.clone()).expect("nontrivial base")
    }

    pub fn right_mul(&self, w: &Word) -> Family {
        Family::new(self.prefix.clone(), self.base.clone(), self.suffix.multiply(w)).expect("nontrivial base")
    }

    pub fn parse(s: &str) -> Result<Family, ParseError> {
        let t = parse_terms(s)?;
        if t.slot_count != 1 {
            return Err(ParseError::SlotCount(t.slot_count));
        }
        Family::new(t.before, t.slot, t.after).ok_or(ParseError::TrivialBase)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.prefix.is_identity() {
            parts.push(self.prefix.to_string());
        }
        if self.base.len() == 1 {
            parts.push(format!("{}^n", self.base));
        } else {
            parts.push(format!("({})^n", self.base));
        }
        if !self.suffix.is_identity() {
            parts.push(self.suffix.to_string());
        }
        write!(f, "{}", parts.join(" "))
    }
}

impl FromStr for Family {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::parse(s)
    }
}

/// A single word or a one-slot family.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Word(Word),
    Family(Family),
}

impl Pattern {
    pub fn invert(&self) -> Pattern {
        match self {
            Pattern::Word(w) => Pattern::Word(w.invert()),
            Pattern::Family(f) => Pattern::Family(f.invert()),
        }
    }

    pub fn contains(&self, u: &Word) -> bool {
        match self {
            Pattern::Word(w) => w == u,
            Pattern::Family(f) => f.match_word(u).is_some(),
        }
    }

    /// Members for `n` in `window` (a single word yields itself).
    pub fn instances(&self, window: std::ops::RangeInclusive<i64>) -> Vec<Word> {
        match self {
            Pattern::Word(w) => vec![w.clone()],
            Pattern::Family(f) => window.map(|n| f.instance(n)).collect(),
        }
    }

    pub fn left_mul(&self, w: &Word) -> Pattern {
        match self {
            Pattern::Word(x) => Pattern::Word(w.multiply(x)),
            Pattern::Family(f) => Pattern::Family(f.left_mul(w)),
        }
    }

    pub fn right_mul(&self, w: &Word) -> Pattern {
        match self {
            Pattern::Word(x) => Pattern::Word(x.multiply(w)),
            Pattern::Family(f) => Pattern::Family(f.right_mul(w)),
        }
    }

    pub fn is_family(&self) -> bool {
        matches!(self, Pattern::Family(_))
    }

    pub fn parse(s: &str) -> Result<Pattern, ParseError> {
        if s.contains("^n") {
            Family::parse(s).map(Pattern::Family)
        } else {
            Word::parse(s).map(Pattern::Word)
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Word(w) => write!(f, "{w}"),
            Pattern::Family(x) => write!(f, "{x}"),
        }
    }
}

impl From<Word> for Pattern {
    fn from(w: Word) -> Pattern {
        Pattern::Word(w)
    }
}

impl From<Family> for Pattern {
    fn from(f: Family) -> Pattern {
        Pattern::Family(f)
    }
}

struct Terms {
    before: Word,
    slot: Word,
    after: Word,
    slot_count: usize,
}

// Grammar: term* with term = atom [ '^' (int | 'n') ], atom = letter | '1' | '(' ... ')'.
// Aliases: c = γ = BA, C = γ⁻¹, d = δ = AB, D = δ⁻¹.
fn parse_terms(s: &str) -> Result<Terms, ParseError> {
    let chars: Vec<char> = s.chars().collect();
    let mut pos = 0;
    let mut t = Terms { before: Word::identity(), slot: Word::identity(), after: Word::identity(), slot_count: 0 };
    parse_seq(&chars, &mut pos, 0, &mut t)?;
    if pos < chars.len() {
        return Err(ParseError::Paren(pos));
    }
    Ok(t)
}

fn parse_seq(chars: &[char], pos: &mut usize, depth: usize, t: &mut Terms) -> Result<Word, ParseError> {
    let mut acc = Word::identity();
    while *pos < chars.len() {
        let c = chars[*pos];
        let start = *pos;
        let atom = match c {
            ' ' | '\t' | '*' | '.' => {
                *pos += 1;
                continue;
            }
            ')' => {
                if depth == 0 {
                    return Err(ParseError::Paren(*pos));
                }
                return Ok(acc);
            }
            '(' => {
                *pos += 1;
                let inner = parse_seq(chars, pos, depth + 1, t)?;
                if *pos >= chars.len() || chars[*pos] != ')' {
                    return Err(ParseError::Paren(start));
                }
                *pos += 1;
                inner
            }
            '1' => {
                *pos += 1;
                Word::identity()
            }
            'c' => {
                *pos += 1;
                Word::gamma()
            }
            'C' => {
                *pos += 1;
                Word::gamma().invert()
            }
            'd' => {
                *pos += 1;
                Word::delta()
            }
            'D' => {
                *pos += 1;
                Word::delta().invert()
            }
            _ => match Letter::from_char(c) {
                Some(l) => {
                    *pos += 1;
                    Word(vec![l])
                }
                None => return Err(ParseError::BadChar(c, *pos)),
            },
        };
        if *pos < chars.len() && chars[*pos] == '^' {
            *pos += 1;
            if *pos < chars.len() && chars[*pos] == 'n' {
                *pos += 1;
                if depth != 0 {
                    return Err(ParseError::Exponent(*pos - 1));
                }
                t.slot_count += 1;
                if t.slot_count == 1 {
                    t.before = acc;
                    t.slot = atom;
                    acc = Word::identity();
                }
                continue;
            }
            let es = *pos;
            if *pos < chars.len() && (chars[*pos] == '-' || chars[*pos] == '+') {
                *pos += 1;
            }
            while *pos < chars.len() && chars[*pos].is_ascii_digit() {
                *pos += 1;
            }
            let txt: String = chars[es..*pos].iter().collect();
            let e: i64 = txt.parse().map_err(|_| ParseError::Exponent(es))?;
            acc = acc.multiply(&atom.pow(e));
        } else {
            acc = acc.multiply(&atom);
        }
    }
    if depth > 0 {
        return Err(ParseError::Paren(*pos));
    }
    if t.slot_count == 0 {
        t.before = acc.clone();
    } else {
        t.after = acc.clone();
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(Word::reduce([Letter::A, Letter::A_INV]), Word::identity());
        assert_eq!(w("BA"), Word::gamma());
        assert_eq!(w("abBa"), w("aa"));
    }

    #[test]
    fn multiply_and_invert() {
        assert!(w("a").multiply(&w("A")).is_identity());
        assert_eq!(w("c").multiply(&w("a")), w("B"));
        assert_eq!(w("d").multiply(&w("b")), w("A"));
        assert_eq!(w("c").invert(), w("ab"));
        assert_eq!(w("ab^2").invert(), w("BBA"));
        assert_eq!(w("1").invert(), Word::identity());
    }

    #[test]
    fn parse_exponents_and_aliases() {
        assert_eq!(w("b^3"), w("bbb"));
        assert_eq!(w("(ab)^-2"), w("BABA"));
        assert_eq!(w("d"), w("a^-1 b^-1"));
        assert!(Word::parse("x").is_err());
        assert!(Word::parse("b^n").is_err());
        assert!(Word::parse("(ab").is_err());
    }

    #[test]
    fn cyclic_decompose_examples() {
        assert_eq!(cyclic_decompose(&w("Aba")), Some((w("a"), w("b"))));
        assert_eq!(cyclic_decompose(&w("d")), Some((w("a"), w("c"))));
        assert_eq!(cyclic_decompose(&w("b")), Some((Word::identity(), w("b"))));
        assert_eq!(cyclic_decompose(&Word::identity()), None);
    }

    #[test]
    fn family_matching() {
        let f = Family::parse("b^n").unwrap();
        assert_eq!(f.match_word(&w("b^5")), Some(5));
        let g = Family::parse("a b^n").unwrap();
        assert_eq!(g.match_word(&w("ab^3")), Some(3));
        assert_eq!(f.match_word(&w("ab^3")), None);
        assert_eq!(g.match_word(&w("a")), Some(0));
    }

    #[test]
    fn family_canonical_form() {
        let f = Family::parse("b a^n B").unwrap();
        let g = Family::parse("b (a^-1)^n aB").unwrap();
        assert_eq!(f, g);
        assert_eq!(f.to_string(), "b a^n B");
        assert_eq!(Family::parse("a b^n").unwrap(), Family::parse("ab b^n").unwrap());
        assert_eq!(Family::parse("(BA)^n").unwrap().to_string(), "(ab)^n");
        assert_eq!(Family::parse("(ab)^n").unwrap(), Family::parse("(BA)^n").unwrap());
    }
}
