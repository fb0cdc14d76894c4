//! Postcritical portraits of maps `M ∘ g`, where `g` has postcritical set in
//! `{0, 1, ∞}` and `M` swaps a marked fixed point `•` of `g` into one of
//! those three slots.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C;
use thiserror::Error;

use crate::moduli::RationalMap;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PortraitError {
    #[error("bad portrait edge `{0}` (expected `v -d-> w`)")]
    Edge(String),
    #[error("unknown point label `{0}`")]
    Label(String),
    #[error("vertex {0} has two outgoing edges")]
    Duplicate(String),
    #[error("bad slot `{0}` (expected 0, 1 or inf)")]
    Slot(String),
    #[error("image of {0} is not one of 0, 1/2, 1, inf")]
    Image(String),
    #[error("postcritical set has {0} points, expected 4")]
    PostcriticalSize(usize),
}

/// Marked points that can occur in a portrait.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    Half,
    Zero,
    One,
    Inf,
    Bullet,
}

impl Point {
    pub const ALL: [Point; 5] = [Point::Half, Point::Zero, Point::One, Point::Inf, Point::Bullet];

    fn value(self) -> Option<Option<C>> {
        match self {
            Point::Half => Some(Some(C::new(0.5, 0.0))),
            Point::Zero => Some(Some(C::new(0.0, 0.0))),
            Point::One => Some(Some(C::new(1.0, 0.0))),
            Point::Inf => Some(None),
            Point::Bullet => None,
        }
    }

    fn from_value(v: Option<C>) -> Option<Point> {
        [Point::Half, Point::Zero, Point::One, Point::Inf].into_iter().find(|p| match (p.value().unwrap(), v) {
            (None, None) => true,
            (Some(a), Some(b)) => (a - b).norm() < 1e-9,
            (None, Some(b)) => b.norm() > 1e9,
            _ => false,
        })
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Point::Half => "1/2",
            Point::Zero => "0",
            Point::One => "1",
            Point::Inf => "inf",
            Point::Bullet => "o",
        })
    }
}

impl FromStr for Point {
    type Err = PortraitError;

    fn from_str(s: &str) -> Result<Point, PortraitError> {
        match s.trim() {
            "1/2" | "½" => Ok(Point::Half),
            "0" => Ok(Point::Zero),
            "1" => Ok(Point::One),
            "inf" | "∞" => Ok(Point::Inf),
            "o" | "•" | "bullet" => Ok(Point::Bullet),
            other => Err(PortraitError::Label(other.into())),
        }
    }
}

/// Which of `0, 1, ∞` the marked point is swapped with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Zero,
    One,
    Inf,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::Zero, Slot::One, Slot::Inf];

    /// The double transposition of `{•, 0, 1, ∞}`.
    pub fn permute(self, p: Point) -> Point {
        use Point::*;
        let pairs = match self {
            Slot::Zero => [(Bullet, Zero), (One, Inf)],
            Slot::One => [(Bullet, One), (Zero, Inf)],
            Slot::Inf => [(Bullet, Inf), (Zero, One)],
        };
        for (x, y) in pairs {
            if p == x {
                return y;
            }
            if p == y {
                return x;
            }
        }
        p
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Slot::Zero => "0",
            Slot::One => "1",
            Slot::Inf => "inf",
        })
    }
}

impl FromStr for Slot {
    type Err = PortraitError;

    fn from_str(s: &str) -> Result<Slot, PortraitError> {
        match s.trim() {
            "0" => Ok(Slot::Zero),
            "1" => Ok(Slot::One),
            "inf" | "∞" => Ok(Slot::Inf),
            other => Err(PortraitError::Slot(other.into())),
        }
    }
}

/// A functional graph on marked points with local degrees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Portrait {
    edges: BTreeMap<Point, (u8, Point)>,
}

impl Portrait {
    pub fn parse(s: &str) -> Result<Portrait, PortraitError> {
        let mut edges = BTreeMap::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let err = || PortraitError::Edge(part.into());
            let (from, rest) = part.split_once('-').ok_or_else(err)?;
            let (deg, to) = rest.split_once("->").ok_or_else(err)?;
            let deg: u8 = deg.trim().parse().map_err(|_| err())?;
            if deg == 0 || deg > 2 {
                return Err(err());
            }
            let from: Point = from.parse()?;
            if edges.insert(from, (deg, to.parse()?)).is_some() {
                return Err(PortraitError::Duplicate(from.to_string()));
            }
        }
        if edges.is_empty() {
            return Err(PortraitError::Edge(s.into()));
        }
        Ok(Portrait { edges })
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, u8, Point)> + '_ {
        self.edges.iter().map(|(&v, &(d, w))| (v, d, w))
    }

    pub fn vertices(&self) -> BTreeSet<Point> {
        self.edges.iter().flat_map(|(&v, &(_, w))| [v, w]).collect()
    }

    pub fn critical(&self) -> Vec<Point> {
        self.edges.iter().filter(|(_, &(d, _))| d == 2).map(|(&v, _)| v).collect()
    }

    /// Forward orbits of the critical values.
    pub fn postcritical(&self) -> BTreeSet<Point> {
        let mut out = BTreeSet::new();
        for c in self.critical() {
            let mut p = self.edges[&c].1;
            while out.insert(p) {
                match self.edges.get(&p) {
                    Some(&(_, w)) => p = w,
                    None => break,
                }
            }
        }
        out
    }
}

impl fmt::Display for Portrait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.edges().map(|(v, d, w)| format!("{v} -{d}-> {w}")).collect();
        f.write_str(&parts.join(", "))
    }
}

/// A bijection of vertices carrying edges to edges with equal degree.
pub fn portraits_equivalent(p: &Portrait, q: &Portrait) -> Option<BTreeMap<Point, Point>> {
    let pv: Vec<Point> = p.vertices().into_iter().collect();
    let qv: Vec<Point> = q.vertices().into_iter().collect();
    if pv.len() != qv.len() || p.edges.len() != q.edges.len() {
        return None;
    }
    let mut map = BTreeMap::new();
    let mut used = BTreeSet::new();
    if extend(p, q, &pv, &qv, 0, &mut map, &mut used) {
        Some(map)
    } else {
        None
    }
}

fn extend(
    p: &Portrait,
    q: &Portrait,
    pv: &[Point],
    qv: &[Point],
    i: usize,
    map: &mut BTreeMap<Point, Point>,
    used: &mut BTreeSet<Point>,
) -> bool {
    if i == pv.len() {
        return p.edges().all(|(v, d, w)| q.edges.get(&map[&v]) == Some(&(d, map[&w])));
    }
    for &t in qv {
        if used.contains(&t) {
            continue;
        }
        let v = pv[i];
        let (pe, qe) = (p.edges.get(&v), q.edges.get(&t));
        if pe.is_some() != qe.is_some() || pe.map(|e| e.0) != qe.map(|e| e.0) {
            continue;
        }
        map.insert(v, t);
        used.insert(t);
        // edges whose ends are both assigned must already agree
        let consistent = p.edges().all(|(a, d, b)| match (map.get(&a), map.get(&b)) {
            (Some(x), Some(y)) => q.edges.get(x) == Some(&(d, *y)),
            _ => true,
        });
        if consistent && extend(p, q, pv, qv, i + 1, map, used) {
            return true;
        }
        map.remove(&v);
        used.remove(&t);
    }
    false
}

/// `f` on every marked point, before restricting to the postcritical orbit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointMap {
    images: BTreeMap<Point, (u8, Point)>,
}

impl PointMap {
    /// `M_s ∘ g`; `g` is evaluated at its critical points and `0, 1, ∞`, and
    /// fixes `•` formally.
    pub fn compose(g: &RationalMap, slot: Slot) -> Result<PointMap, PortraitError> {
        let mut images = BTreeMap::new();
        let crit: Vec<Point> = g
            .critical_points()
            .into_iter()
            .map(|c| Point::from_value(c).ok_or_else(|| PortraitError::Label(crate::moduli::format_point(c))))
            .collect::<Result<_, _>>()?;
        let mut domain: Vec<Point> = crit.clone();
        for p in [Point::Zero, Point::One, Point::Inf] {
            if !domain.contains(&p) {
                domain.push(p);
            }
        }
        for v in domain {
            let img = g.eval_sphere(v.value().unwrap());
            let w = Point::from_value(img).ok_or_else(|| PortraitError::Image(v.to_string()))?;
            let d = if crit.contains(&v) { 2 } else { 1 };
            images.insert(v, (d, slot.permute(w)));
        }
        images.insert(Point::Bullet, (1, slot.permute(Point::Bullet)));
        Ok(PointMap { images })
    }

    /// Postcomposition with a permutation of the marked points.
    pub fn postcompose(&self, perm: impl Fn(Point) -> Point) -> PointMap {
        PointMap { images: self.images.iter().map(|(&v, &(d, w))| (v, (d, perm(w)))).collect() }
    }

    /// Restriction to the critical points and the forward orbits of the
    /// critical values.
    pub fn portrait(&self) -> Result<Portrait, PortraitError> {
        let full = Portrait { edges: self.images.clone() };
        let post = full.postcritical();
        if post.len() != 4 {
            return Err(PortraitError::PostcriticalSize(post.len()));
        }
        let keep: BTreeSet<Point> = post.iter().copied().chain(full.critical()).collect();
        Ok(Portrait { edges: self.images.iter().filter(|(v, _)| keep.contains(v)).map(|(&v, &e)| (v, e)).collect() })
    }
}

pub fn compose_portrait(g: &RationalMap, slot: Slot) -> Result<Portrait, PortraitError> {
    PointMap::compose(g, slot)?.portrait()
}

/// One equivalence class found by `enumerate_q4`.
#[derive(Clone, Debug)]
pub struct PortraitClass {
    pub portrait: Portrait,
    /// `(index into the input maps, slot)` of every composition in the class.
    pub members: Vec<(usize, Slot)>,
}

/// All compositions `M_s ∘ g` with a four-point postcritical set, grouped up
/// to portrait equivalence, in order of first appearance.
pub fn enumerate_q4(maps: &[RationalMap]) -> Vec<PortraitClass> {
    let mut classes: Vec<PortraitClass> = Vec::new();
    for (i, g) in maps.iter().enumerate() {
        for slot in Slot::ALL {
            let Ok(p) = compose_portrait(g, slot) else { continue };
            match classes.iter_mut().find(|c| portraits_equivalent(&c.portrait, &p).is_some()) {
                Some(c) => c.members.push((i, slot)),
                None => classes.push(PortraitClass { portrait: p, members: vec![(i, slot)] }),
            }
        }
    }
    classes
}

/// The cyclic permutation `0 → 1 → ∞ → 0` fixing `•` and `1/2`.
pub fn rotate_three(p: Point) -> Point {
    match p {
        Point::Zero => Point::One,
        Point::One => Point::Inf,
        Point::Inf => Point::Zero,
        other => other,
    }
}

/// The transposition `0 ↔ ∞` fixing `•`, `1` and `1/2`.
pub fn swap_zero_inf(p: Point) -> Point {
    match p {
        Point::Zero => Point::Inf,
        Point::Inf => Point::Zero,
        other => other,
    }
}

/// For each row, the row whose portrait is equivalent to the portrait of the
/// postcomposed map, or `None` when there is none.
pub fn postcompose_action(rows: &[(PointMap, Portrait)], perm: impl Fn(Point) -> Point + Copy) -> Vec<Option<usize>> {
    rows.iter()
        .map(|(pm, _)| {
            let moved = pm.postcompose(perm).portrait().ok()?;
            rows.iter().position(|(_, q)| portraits_equivalent(&moved, q).is_some())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    fn z_sq() -> RationalMap {
        RationalMap::new(vec![c(0.), c(0.), c(1.)], vec![c(1.)]).unwrap()
    }

    fn g1() -> RationalMap {
        RationalMap::new(vec![c(1.), c(-4.), c(4.)], vec![c(1.)]).unwrap()
    }

    #[test]
    fn parse_and_display() {
        let p = Portrait::parse("½ -2-> 0, 0 -1-> 1, 1 -1-> 1, ∞ -2-> ∞").unwrap();
        assert_eq!(p.to_string(), "1/2 -2-> 0, 0 -1-> 1, 1 -1-> 1, inf -2-> inf");
        assert_eq!(p.postcritical().len(), 3);
        assert!(Portrait::parse("0 -> 1").is_err());
        assert!(Portrait::parse("0 -1-> 1, 0 -1-> 0").is_err());
        assert!(Portrait::parse("x -1-> 1").is_err());
    }

    #[test]
    fn slot_permutations_are_involutions() {
        for s in Slot::ALL {
            for p in Point::ALL {
                assert_eq!(s.permute(s.permute(p)), p);
            }
            assert_ne!(s.permute(Point::Bullet), Point::Bullet);
        }
        assert!("2".parse::<Slot>().is_err());
    }

    #[test]
    fn z_squared_slot_inf() {
        let p = compose_portrait(&z_sq(), Slot::Inf).unwrap();
        let want = Portrait::parse("0 -2-> 1, 1 -1-> 0, inf -2-> o, o -1-> inf").unwrap();
        assert_eq!(p, want);
    }

    #[test]
    fn g1_slot_zero() {
        let p = compose_portrait(&g1(), Slot::Zero).unwrap();
        let want = Portrait::parse("1/2 -2-> o, o -1-> 0, 0 -1-> inf, inf -2-> 1, 1 -1-> inf").unwrap();
        assert_eq!(p, want);
    }

    #[test]
    fn equivalence_ignores_labels_not_degrees() {
        let p = Portrait::parse("0 -2-> 1, 1 -1-> 0, inf -2-> o, o -1-> inf").unwrap();
        let q = Portrait::parse("inf -2-> 0, 0 -1-> inf, 1 -2-> o, o -1-> 1").unwrap();
        assert!(portraits_equivalent(&p, &q).is_some());
        let r = Portrait::parse("0 -2-> 1, 1 -1-> 0, inf -2-> o, o -2-> inf").unwrap();
        assert!(portraits_equivalent(&p, &r).is_none());
    }
}
