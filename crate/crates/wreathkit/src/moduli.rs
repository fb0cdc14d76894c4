//! Quadratic rational maps on moduli space, path lifting and numerical
//! derivation of wreath recursions.
//!
//! Points of the Riemann sphere are `Option<Complex64>` with `None` for ∞.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C;
use thiserror::Error;

use crate::portraits::Slot;
use crate::word::{Letter, Word};
use crate::wreath::{GenRecursion, WreathRecursion};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModuliError {
    #[error("bad complex number `{0}` (expected re,im)")]
    Complex(String),
    #[error("degenerate rational map: {0}")]
    Degenerate(String),
    #[error("degenerate bullet value {0}")]
    Bullet(C),
    #[error("fixed points {0} and {1} collide within tolerance")]
    RootCollision(C, C),
    #[error("lift start {start} is not over the path start (residual {residual:e})")]
    LiftStart { start: C, residual: f64 },
    #[error("branch ambiguity while lifting near {0} (step refinement exhausted)")]
    Branch(C),
    #[error("lift residual {0:e} exceeds tolerance")]
    Residual(f64),
    #[error("loop passes through a puncture near {0}")]
    Tangential(C),
    #[error("loop is not closed at the basepoint")]
    NotClosed,
    #[error("map is not a Möbius image of (1-2z)^2 or z^2")]
    UnknownBase,
    #[error("no fixed point within {tol} of {approx}")]
    NoFixedPoint { approx: C, tol: f64 },
    #[error("lift of the generator ends at {0}, which is not a preimage label")]
    Endpoint(C),
}

/// `re,im` or a bare real number.
pub fn parse_complex(s: &str) -> Result<C, ModuliError> {
    let err = || ModuliError::Complex(s.to_string());
    let mut parts = s.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| err()));
    let re = parts.next().ok_or_else(err)??;
    let im = parts.next().transpose()?.unwrap_or(0.0);
    if parts.next().is_some() {
        return Err(err());
    }
    Ok(C::new(re, im))
}

pub fn format_point(p: Option<C>) -> String {
    match p {
        None => "inf".into(),
        Some(z) => format!("{:.6},{:.6}", z.re + 0.0, z.im + 0.0),
    }
}

fn horner(c: &[C; 3], z: C) -> C {
    (c[2] * z + c[1]) * z + c[0]
}

fn degree(c: &[C; 3]) -> Option<usize> {
    (0..3).rev().find(|&i| c[i].norm() > 1e-14)
}

/// Roots of `c0 + c1 z + c2 z²`; missing roots (degree drop) are ∞.
fn quadratic_roots(c: [C; 3]) -> [Option<C>; 2] {
    let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1e-300);
    let [c0, c1, c2] = c;
    if c2.norm() <= 1e-14 * scale {
        if c1.norm() <= 1e-14 * scale {
            return [None, None];
        }
        return [Some(-c0 / c1), None];
    }
    let disc = (c1 * c1 - 4.0 * c2 * c0).sqrt();
    // stable form: q = -(b + sign·√disc)/2
    let s = if (c1.conj() * disc).re >= 0.0 { disc } else { -disc };
    let q = -(c1 + s) / 2.0;
    if q.norm() == 0.0 {
        return [Some(C::new(0.0, 0.0)), Some(C::new(0.0, 0.0))];
    }
    [Some(q / c2), Some(c0 / q)]
}

/// Roots of a cubic `c0 + c1 z + c2 z² + c3 z³` by Cardano, polished by Newton.
fn cubic_roots(c: [C; 4]) -> Vec<C> {
    let [d, cc, b, a] = c;
    let (b, cc, d) = (b / a, cc / a, d / a);
    let p = cc - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * cc / 3.0 + d;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let mut u3 = -q / 2.0 + disc;
    if u3.norm() < 1e-14 {
        u3 = -q / 2.0 - disc;
    }
    let omega = C::new(-0.5, 3f64.sqrt() / 2.0);
    let mut out = Vec::with_capacity(3);
    for k in 0..3 {
        let u = if u3.norm() < 1e-300 { C::new(0.0, 0.0) } else { u3.powf(1.0 / 3.0) * omega.powu(k) };
        let v = if u.norm() < 1e-300 { C::new(0.0, 0.0) } else { -p / (3.0 * u) };
        out.push(u + v - b / 3.0);
    }
    let f = |z: C| ((z + b) * z + cc) * z + d;
    let df = |z: C| (3.0 * z + 2.0 * b) * z + cc;
    for z in &mut out {
        for _ in 0..8 {
            let dz = df(*z);
            if dz.norm() < 1e-300 {
                break;
            }
            *z -= f(*z) / dz;
        }
    }
    out
}

/// `num/den` with coefficient triples, constant term first.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap {
    num: [C; 3],
    den: [C; 3],
}

impl RationalMap {
    pub fn new(num: Vec<C>, den: Vec<C>) -> Result<RationalMap, ModuliError> {
        let pad = |v: Vec<C>, what: &str| -> Result<[C; 3], ModuliError> {
            if v.is_empty() || v.len() > 3 {
                return Err(ModuliError::Degenerate(format!("{what} needs 1 to 3 coefficients")));
            }
            let mut out = [C::new(0.0, 0.0); 3];
            out[..v.len()].copy_from_slice(&v);
            Ok(out)
        };
        let m = RationalMap { num: pad(num, "numerator")?, den: pad(den, "denominator")? };
        let (Some(_), Some(_)) = (degree(&m.num), degree(&m.den)) else {
            return Err(ModuliError::Degenerate("zero numerator or denominator".into()));
        };
        if m.resultant().norm() < 1e-12 {
            return Err(ModuliError::Degenerate("numerator and denominator share a root".into()));
        }
        Ok(m)
    }

    /// Resultant of the two quadratics (formal degree 2 each).
    fn resultant(&self) -> C {
        let [a0, a1, a2] = self.num;
        let [b0, b1, b2] = self.den;
        // Sylvester determinant
        let m = [
            [a2, a1, a0, C::new(0.0, 0.0)],
            [C::new(0.0, 0.0), a2, a1, a0],
            [b2, b1, b0, C::new(0.0, 0.0)],
            [C::new(0.0, 0.0), b2, b1, b0],
        ];
        det4(m)
    }

    pub fn degree(&self) -> usize {
        degree(&self.num).unwrap().max(degree(&self.den).unwrap())
    }

    pub fn eval(&self, z: C) -> Option<C> {
        let d = horner(&self.den, z);
        let n = horner(&self.num, z);
        if d.norm() <= 1e-300 {
            None
        } else {
            Some(n / d)
        }
    }

    pub fn eval_sphere(&self, p: Option<C>) -> Option<C> {
        match p {
            Some(z) => self.eval(z),
            None => {
                let dn = degree(&self.num).unwrap();
                let dd = degree(&self.den).unwrap();
                match dn.cmp(&dd) {
                    std::cmp::Ordering::Greater => None,
                    std::cmp::Ordering::Equal => Some(self.num[dn] / self.den[dd]),
                    std::cmp::Ordering::Less => Some(C::new(0.0, 0.0)),
                }
            }
        }
    }

    /// Both solutions of `g(z) = t`.
    pub fn preimages(&self, t: C) -> [Option<C>; 2] {
        let c = [self.num[0] - t * self.den[0], self.num[1] - t * self.den[1], self.num[2] - t * self.den[2]];
        quadratic_roots(c)
    }

    /// Zeros of `N'D − ND'`; a degree drop puts the missing ones at ∞.
    pub fn critical_points(&self) -> Vec<Option<C>> {
        let [a0, a1, a2] = self.num;
        let [b0, b1, b2] = self.den;
        let w = [a1 * b0 - a0 * b1, 2.0 * (a2 * b0 - a0 * b2), a2 * b1 - a1 * b2];
        let mut out: Vec<Option<C>> = quadratic_roots(w).into_iter().collect();
        out.sort_by(|x, y| sphere_key(*x).partial_cmp(&sphere_key(*y)).unwrap());
        out
    }

    /// All solutions of `g(z) = z` on the sphere with multiplicity.
    pub fn fixed_points(&self) -> Result<Vec<Option<C>>, ModuliError> {
        let z = C::new(0.0, 0.0);
        // N(z) − z·D(z)
        let poly = [self.num[0], self.num[1] - self.den[0], self.num[2] - self.den[1], -self.den[2]];
        let deg = (0..4).rev().find(|&i| poly[i].norm() > 1e-14);
        let mut out: Vec<Option<C>> = match deg {
            Some(3) => cubic_roots(poly).into_iter().map(Some).collect(),
            Some(_) => quadratic_roots([poly[0], poly[1], poly[2]]).into_iter().filter(Option::is_some).collect(),
            None => return Err(ModuliError::Degenerate("identity map".into())),
        };
        if self.eval_sphere(None).is_none() {
            out.push(None);
        }
        let _ = z;
        for i in 0..out.len() {
            for j in i + 1..out.len() {
                if let (Some(a), Some(b)) = (out[i], out[j]) {
                    if (a - b).norm() < 1e-9 {
                        return Err(ModuliError::RootCollision(a, b));
                    }
                }
            }
        }
        out.sort_by(|x, y| sphere_key(*x).partial_cmp(&sphere_key(*y)).unwrap());
        Ok(out)
    }

    /// The finite fixed point nearest to `approx`, at distance at most `tol`.
    pub fn nearest_fixed_point(&self, approx: C, tol: f64) -> Result<C, ModuliError> {
        self.fixed_points()?
            .into_iter()
            .flatten()
            .map(|z| (z, (z - approx).norm()))
            .filter(|&(_, d)| d <= tol)
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .map(|(z, _)| z)
            .ok_or(ModuliError::NoFixedPoint { approx, tol })
    }

    /// `|g(z) − z|`, relative for large values; 0 at a fixed ∞.
    pub fn fixed_residual(&self, p: Option<C>) -> f64 {
        match (p, self.eval_sphere(p)) {
            (None, None) => 0.0,
            (Some(z), Some(w)) => (w - z).norm() / z.norm().max(1.0),
            _ => f64::INFINITY,
        }
    }
}

fn det4(m: [[C; 4]; 4]) -> C {
    let mut total = C::new(0.0, 0.0);
    for col in 0..4 {
        let mut minor = [[C::new(0.0, 0.0); 3]; 3];
        for r in 1..4 {
            let rest = (0..4).filter(|&c| c != col).map(|c| m[r][c]);
            for (slot, v) in minor[r - 1].iter_mut().zip(rest) {
                *slot = v;
            }
        }
        let d3 = minor[0][0] * (minor[1][1] * minor[2][2] - minor[1][2] * minor[2][1])
            - minor[0][1] * (minor[1][0] * minor[2][2] - minor[1][2] * minor[2][0])
            + minor[0][2] * (minor[1][0] * minor[2][1] - minor[1][1] * minor[2][0]);
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * m[0][col] * d3;
    }
    total
}

fn sphere_key(p: Option<C>) -> (u8, f64, f64) {
    match p {
        Some(z) => (0, z.re, z.im),
        None => (1, 0.0, 0.0),
    }
}

fn close(p: Option<C>, q: Option<C>, tol: f64) -> bool {
    match (p, q) {
        (None, None) => true,
        (Some(a), Some(b)) => (a - b).norm() < tol,
        (Some(a), None) | (None, Some(a)) => a.norm() > 1.0 / tol,
    }
}

/// `z ↦ (az + b)/(cz + d)`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    pub a: C,
    pub b: C,
    pub c: C,
    pub d: C,
}

impl Mobius {
    pub fn identity() -> Mobius {
        let (o, l) = (C::new(0.0, 0.0), C::new(1.0, 0.0));
        Mobius { a: l, b: o, c: o, d: l }
    }

    pub fn apply(&self, z: C) -> C {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    pub fn apply_sphere(&self, p: Option<C>) -> Option<C> {
        let (num, den) = match p {
            Some(z) => (self.a * z + self.b, self.c * z + self.d),
            None => (self.a, self.c),
        };
        if den.norm() <= 1e-14 * num.norm().max(1e-300) {
            None
        } else {
            Some(num / den)
        }
    }

    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn compose(&self, inner: &Mobius) -> Mobius {
        Mobius {
            a: self.a * inner.a + self.b * inner.c,
            b: self.a * inner.b + self.b * inner.d,
            c: self.c * inner.a + self.d * inner.c,
            d: self.c * inner.b + self.d * inner.d,
        }
    }

    /// Sends `(z1, z2, z3)` to `(0, 1, ∞)`.
    fn to_standard(p: [Option<C>; 3]) -> Mobius {
        let l = C::new(1.0, 0.0);
        let o = C::new(0.0, 0.0);
        match p {
            [Some(z1), Some(z2), Some(z3)] => {
                // (z − z1)(z2 − z3) / ((z − z3)(z2 − z1))
                Mobius { a: z2 - z3, b: -z1 * (z2 - z3), c: z2 - z1, d: -z3 * (z2 - z1) }
            }
            [None, Some(z2), Some(z3)] => Mobius { a: o, b: z2 - z3, c: l, d: -z3 },
            [Some(z1), None, Some(z3)] => Mobius { a: l, b: -z1, c: l, d: -z3 },
            [Some(z1), Some(z2), None] => Mobius { a: l, b: -z1, c: o, d: z2 - z1 },
            _ => Mobius::identity(),
        }
    }

    pub fn from_three(p: [Option<C>; 3], q: [Option<C>; 3]) -> Mobius {
        Mobius::to_standard(q).inverse().compose(&Mobius::to_standard(p))
    }
}

/// The Möbius map for a slot: `(• 0)(1 ∞)`, `(• 1)(0 ∞)` or `(• ∞)(0 1)`.
pub fn mobius_from_spec(bullet: C, slot: Slot) -> Result<Mobius, ModuliError> {
    let zero = Some(C::new(0.0, 0.0));
    let one = Some(C::new(1.0, 0.0));
    if bullet.norm() < 1e-9 || (bullet - C::new(1.0, 0.0)).norm() < 1e-9 || !bullet.is_finite() {
        return Err(ModuliError::Bullet(bullet));
    }
    let b = Some(bullet);
    let (src, dst, check) = match slot {
        Slot::Zero => ([b, zero, one], [zero, b, None], (None, one)),
        Slot::One => ([b, one, zero], [one, b, None], (None, zero)),
        Slot::Inf => ([b, zero, one], [None, one, zero], (None, b)),
    };
    let m = Mobius::from_three(src, dst);
    if !close(m.apply_sphere(check.0), check.1, 1e-9) {
        return Err(ModuliError::Bullet(bullet));
    }
    Ok(m)
}

/// One analytic or sampled piece of a path, parametrised by `[0, 1]`.
#[derive(Clone, Debug)]
pub enum Piece {
    Line(C, C),
    Arc {
        center: C,
        radius: f64,
        theta0: f64,
        sweep: f64,
    },
    /// The piece drawn in the chart `w = 1/z`.
    Chart(Box<Piece>),
    Mobius(Mobius, Box<Piece>),
    Reverse(Box<Piece>),
    Samples(Vec<C>),
}

impl Piece {
    pub fn eval(&self, s: f64) -> C {
        match self {
            Piece::Line(a, b) => a + (b - a) * s,
            Piece::Arc { center, radius, theta0, sweep } => center + C::from_polar(*radius, theta0 + sweep * s),
            Piece::Chart(p) => 1.0 / p.eval(s),
            Piece::Mobius(m, p) => m.apply(p.eval(s)),
            Piece::Reverse(p) => p.eval(1.0 - s),
            Piece::Samples(v) => {
                let x = s * (v.len() - 1) as f64;
                let i = (x.floor() as usize).min(v.len() - 2);
                v[i] + (v[i + 1] - v[i]) * (x - i as f64)
            }
        }
    }

    fn sample(&self, n: usize) -> Vec<C> {
        match self {
            Piece::Samples(v) => v.clone(),
            Piece::Reverse(p) => {
                let mut v = p.sample(n);
                v.reverse();
                v
            }
            _ => (0..=n).map(|k| self.eval(k as f64 / n as f64)).collect(),
        }
    }

    fn reversed(&self) -> Piece {
        match self {
            Piece::Samples(v) => Piece::Samples(v.iter().rev().cloned().collect()),
            Piece::Reverse(p) => (**p).clone(),
            p => Piece::Reverse(Box::new(p.clone())),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ComplexPath {
    pub pieces: Vec<Piece>,
}

const ANALYTIC_SAMPLES: usize = 2048;

impl ComplexPath {
    pub fn new(pieces: Vec<Piece>) -> ComplexPath {
        ComplexPath { pieces }
    }

    pub fn constant(z: C) -> ComplexPath {
        ComplexPath::new(vec![Piece::Line(z, z)])
    }

    pub fn start(&self) -> C {
        self.pieces[0].eval(0.0)
    }

    pub fn end(&self) -> C {
        self.pieces.last().unwrap().eval(1.0)
    }

    pub fn then(mut self, other: &ComplexPath) -> ComplexPath {
        self.pieces.extend(other.pieces.iter().cloned());
        self
    }

    pub fn reversed(&self) -> ComplexPath {
        ComplexPath::new(self.pieces.iter().rev().map(Piece::reversed).collect())
    }

    pub fn map_mobius(&self, m: &Mobius) -> ComplexPath {
        ComplexPath::new(self.pieces.iter().map(|p| Piece::Mobius(*m, Box::new(p.clone()))).collect())
    }

    /// Dense polyline through the path.
    pub fn samples(&self) -> Vec<C> {
        let mut out: Vec<C> = Vec::new();
        for p in &self.pieces {
            let v = p.sample(ANALYTIC_SAMPLES);
            let skip = usize::from(!out.is_empty());
            out.extend(v.into_iter().skip(skip));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct LiftConfig {
    pub initial_step: f64,
    pub min_step: f64,
    /// The chosen root must be nearer than this fraction of the root gap.
    pub separation: f64,
    /// Roots closer than this are treated as ambiguous.
    pub min_gap: f64,
    pub residual: f64,
}

impl Default for LiftConfig {
    fn default() -> Self {
        LiftConfig { initial_step: 1.0 / 256.0, min_step: 1e-12, separation: 0.25, min_gap: 1e-6, residual: 1e-9 }
    }
}

#[derive(Clone, Debug)]
pub struct Lift {
    pub path: ComplexPath,
    pub max_residual: f64,
}

impl Lift {
    pub fn end(&self) -> C {
        self.path.end()
    }
}

fn residual(g: &RationalMap, z: C, t: C) -> f64 {
    match g.eval(z) {
        Some(w) => (w - t).norm() / t.norm().max(1.0),
        None => f64::INFINITY,
    }
}

/// Continuation of a branch of `g⁻¹` along `target` from `start`.
pub fn lift_path(g: &RationalMap, target: &ComplexPath, start: C, cfg: &LiftConfig) -> Result<Lift, ModuliError> {
    let r0 = residual(g, start, target.start());
    if r0 > 1e-6 {
        return Err(ModuliError::LiftStart { start, residual: r0 });
    }
    let mut z = start;
    let mut out = vec![z];
    let mut max_res: f64 = 0.0;
    for piece in &target.pieces {
        let mut s = 0.0;
        let mut h = cfg.initial_step;
        while s < 1.0 {
            let s1 = (s + h).min(1.0);
            let t = piece.eval(s1);
            let roots = g.preimages(t);
            let pick = |r: Option<C>| r.map_or(f64::INFINITY, |w| (w - z).norm());
            let (d0, d1) = (pick(roots[0]), pick(roots[1]));
            let (near, dn, df) = if d0 <= d1 { (roots[0], d0, d1) } else { (roots[1], d1, d0) };
            let gap = match roots {
                [Some(a), Some(b)] => (a - b).norm(),
                _ => f64::INFINITY,
            };
            let ok =
                near.is_some() && gap > cfg.min_gap && dn < cfg.separation * gap && dn < cfg.separation * df.max(gap);
            if !ok {
                h /= 2.0;
                if h < cfg.min_step {
                    return Err(ModuliError::Branch(z));
                }
                continue;
            }
            let mut w = near.unwrap();
            // one Newton polish step on N − tD
            let f = horner(&g.num, w) - t * horner(&g.den, w);
            let df_ = (2.0 * g.num[2] * w + g.num[1]) - t * (2.0 * g.den[2] * w + g.den[1]);
            if df_.norm() > 1e-300 {
                let step = f / df_;
                if step.norm() < 0.1 * gap {
                    w -= step;
                }
            }
            max_res = max_res.max(residual(g, w, t));
            z = w;
            out.push(z);
            s = s1;
            h = (h * 2.0).min(cfg.initial_step);
        }
    }
    if max_res > cfg.residual {
        return Err(ModuliError::Residual(max_res));
    }
    Ok(Lift { path: ComplexPath::new(vec![Piece::Samples(out)]), max_residual: max_res })
}

/// Orientation choices for the reference generators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Calibration {
    pub flip_alpha: bool,
    pub flip_beta: bool,
}

impl fmt::Display for Calibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = |flip: bool| if flip { "clockwise" } else { "counterclockwise" };
        write!(f, "alpha {}, beta {}", o(self.flip_alpha), o(self.flip_beta))
    }
}

pub const BASEPOINT: f64 = 0.25;

/// Reference loop around 0 based at ¼.
pub fn alpha_hat(cal: Calibration) -> ComplexPath {
    let sweep = if cal.flip_alpha { -2.0 * PI } else { 2.0 * PI };
    ComplexPath::new(vec![Piece::Arc { center: C::new(0.0, 0.0), radius: BASEPOINT, theta0: 0.0, sweep }])
}

/// Reference loop around 1 based at ¼.
pub fn beta_hat(cal: Calibration) -> ComplexPath {
    let sweep = if cal.flip_beta { -2.0 * PI } else { 2.0 * PI };
    ComplexPath::new(vec![Piece::Arc { center: C::new(1.0, 0.0), radius: 1.0 - BASEPOINT, theta0: PI, sweep }])
}

/// Word of a loop at `basepoint` read from its crossings of the cuts
/// `(−∞, 0)` and `(1, ∞)`. Points on the real axis count as upper half-plane.
pub fn loop_to_word(path: &ComplexPath, basepoint: C, cal: Calibration) -> Result<Word, ModuliError> {
    let pts = path.samples();
    encode_samples(&pts, basepoint, cal)
}

fn encode_samples(pts: &[C], basepoint: C, cal: Calibration) -> Result<Word, ModuliError> {
    let tol = 1e-9;
    if (pts[0] - basepoint).norm() > 1e-6 || (pts[pts.len() - 1] - basepoint).norm() > 1e-6 {
        return Err(ModuliError::NotClosed);
    }
    let upper = |z: C| z.im >= -1e-13;
    let mut letters = Vec::new();
    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        if upper(p) == upper(q) {
            continue;
        }
        // crossing point, in the chart w = 1/z far from the origin
        let x = if p.norm().max(q.norm()) > 10.0 {
            let (wp, wq) = (1.0 / p, 1.0 / q);
            let t = wp.im / (wp.im - wq.im);
            let xw = wp.re + (wq.re - wp.re) * t;
            if xw.abs() < tol {
                return Err(ModuliError::Tangential(p));
            }
            1.0 / xw
        } else {
            let t = p.im / (p.im - q.im);
            p.re + (q.re - p.re) * t
        };
        if x.abs() < tol || (x - 1.0).abs() < tol {
            return Err(ModuliError::Tangential(p));
        }
        let down = upper(p);
        if x < 0.0 {
            let l = if down != cal.flip_alpha { Letter::A } else { Letter::A_INV };
            letters.push(l);
        } else if x > 1.0 {
            let l = if !down != cal.flip_beta { Letter::B } else { Letter::B_INV };
            letters.push(l);
        }
    }
    Ok(Word::reduce(letters))
}

/// `g = M ∘ base` with base `(1−2z)²` or `z²`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub base_is_z2: bool,
    pub mobius: Mobius,
}

pub fn decompose(g: &RationalMap) -> Result<Decomposition, ModuliError> {
    let crit = g.critical_points();
    let half = Some(C::new(0.5, 0.0));
    let zero = Some(C::new(0.0, 0.0));
    let one = Some(C::new(1.0, 0.0));
    let has = |p: Option<C>| crit.iter().any(|c| close(*c, p, 1e-9));
    let (base_is_z2, pre) = if has(half) && has(None) {
        // (1−2z)² sends ½, 0, ∞ to 0, 1, ∞
        (false, [half, zero, None])
    } else if has(zero) && has(None) {
        (true, [zero, one, None])
    } else {
        return Err(ModuliError::UnknownBase);
    };
    let imgs = [g.eval_sphere(pre[0]), g.eval_sphere(pre[1]), g.eval_sphere(pre[2])];
    // either base sends its three reference points to 0, 1, ∞
    let mobius = Mobius::from_three([zero, one, None], imgs);
    let base = |z: C| if base_is_z2 { z * z } else { (1.0 - 2.0 * z) * (1.0 - 2.0 * z) };
    for z in [C::new(0.3, 0.7), C::new(-1.2, 0.4), C::new(2.5, -0.9)] {
        match g.eval(z) {
            Some(w) if (mobius.apply(base(z)) - w).norm() < 1e-9 * w.norm().max(1.0) => {}
            _ => return Err(ModuliError::UnknownBase),
        }
    }
    Ok(Decomposition { base_is_z2, mobius })
}

/// Connecting path from `z0` to `m`: the segment when it keeps 1e−3 away
/// from 0 and 1, otherwise the real route through exactly one of 0, 1, ∞,
/// detouring to its left around that point.
pub fn connecting_path(z0: C, m: C) -> ComplexPath {
    let margin = 1e-3;
    let seg_dist = |p: C| {
        let d = m - z0;
        let t = (((p - z0) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
        (z0 + d * t - p).norm()
    };
    if (m - z0).norm() < 1e-15 {
        return ComplexPath::constant(z0);
    }
    if seg_dist(C::new(0.0, 0.0)) > margin && seg_dist(C::new(1.0, 0.0)) > margin {
        return ComplexPath::new(vec![Piece::Line(z0, m)]);
    }
    let (a, b) = (z0.re, m.re);
    let inside: Vec<f64> = [0.0, 1.0].into_iter().filter(|p| (a.min(b)..=a.max(b)).contains(p)).collect();
    if inside.len() == 1 {
        detour_line(a, b, inside[0], margin, false)
    } else {
        // through ∞: a segment through 0 in the chart w = 1/z
        detour_line(1.0 / a, 1.0 / b, 0.0, margin, true)
    }
}

fn detour_line(a: f64, b: f64, p: f64, r: f64, chart: bool) -> ComplexPath {
    let d = if b > a { 1.0 } else { -1.0 };
    let c = |x: f64| C::new(x, 0.0);
    // left of travel: upper half when moving right, lower when moving left
    let (theta0, sweep) = if d > 0.0 { (PI, -PI) } else { (0.0, -PI) };
    let pieces = vec![
        Piece::Line(c(a), c(p - d * r)),
        Piece::Arc { center: c(p), radius: r, theta0, sweep },
        Piece::Line(c(p + d * r), c(b)),
    ];
    let pieces = if chart { pieces.into_iter().map(|x| Piece::Chart(Box::new(x))).collect() } else { pieces };
    ComplexPath::new(pieces)
}

#[derive(Clone, Debug)]
pub struct Derivation {
    pub recursion: WreathRecursion,
    pub max_residual: f64,
    pub calibration: Calibration,
    pub basepoint: C,
    pub preimages: [C; 2],
}

/// Wreath recursion of `g` at the fixed point `z0` (or the formal setup for
/// `z²` when `z0` is `None`).
pub fn derive_recursion(
    g: &RationalMap,
    z0: Option<C>,
    cal: Calibration,
    cfg: &LiftConfig,
) -> Result<Derivation, ModuliError> {
    let dec = decompose(g)?;
    let quarter = C::new(BASEPOINT, 0.0);
    let (base, ell, mob, p, conn): (C, ComplexPath, Mobius, [C; 2], [ComplexPath; 2]);
    let gens_hat = [alpha_hat(cal), beta_hat(cal)];
    let mut max_res: f64 = 0.0;
    let targets: [ComplexPath; 2];
    match z0 {
        None => {
            if !dec.base_is_z2 {
                return Err(ModuliError::UnknownBase);
            }
            base = quarter;
            ell = ComplexPath::constant(quarter);
            mob = dec.mobius;
            p = [C::new(0.5, 0.0), C::new(-0.5, 0.0)];
            targets = [gens_hat[0].map_mobius(&mob), gens_hat[1].map_mobius(&mob)];
            conn = [
                ComplexPath::new(vec![Piece::Line(quarter, p[0])]),
                ComplexPath::new(vec![Piece::Arc {
                    center: C::new(-0.125, 0.0),
                    radius: 0.375,
                    theta0: 0.0,
                    sweep: PI,
                }]),
            ];
        }
        Some(z) => {
            base = z;
            mob = dec.mobius;
            let m = mob.apply(quarter);
            ell = connecting_path(z, m);
            targets = [
                ell.clone().then(&gens_hat[0].map_mobius(&mob)).then(&ell.reversed()),
                ell.clone().then(&gens_hat[1].map_mobius(&mob)).then(&ell.reversed()),
            ];
            let other = g
                .preimages(z)
                .into_iter()
                .flatten()
                .max_by(|x, y| (x - z).norm().partial_cmp(&(y - z).norm()).unwrap())
                .ok_or(ModuliError::UnknownBase)?;
            p = [z, other];
            let lift_a = lift_path(g, &targets[0], z, cfg)?;
            max_res = max_res.max(lift_a.max_residual);
            if (lift_a.end() - other).norm() > 1e-6 {
                return Err(ModuliError::Endpoint(lift_a.end()));
            }
            conn = [ComplexPath::constant(z), lift_a.path];
        }
    }
    // loops at `base` in the domain are read through ℓ̄ · L · ℓ and M⁻¹
    let inv = mob.inverse();
    let encode = |l: &ComplexPath| -> Result<Word, ModuliError> {
        let full = ell.reversed().then(l).then(&ell);
        let pts: Vec<C> = full.samples().into_iter().map(|z| inv.apply(z)).collect();
        encode_samples(&pts, quarter, cal)
    };
    let mut gens = Vec::with_capacity(2);
    for target in &targets {
        let mut restrictions = [Word::identity(), Word::identity()];
        let mut swap = false;
        for x in 0..2 {
            let lift = lift_path(g, target, p[x], cfg)?;
            max_res = max_res.max(lift.max_residual);
            let end = lift.end();
            let y = (0..2).find(|&y| (end - p[y]).norm() < 1e-6).ok_or(ModuliError::Endpoint(end))?;
            if x == 0 {
                swap = y == 1;
            }
            let l = conn[x].clone().then(&lift.path).then(&conn[y].reversed());
            restrictions[x] = encode(&l)?;
        }
        gens.push(GenRecursion { restrictions, swap });
    }
    let beta = gens.pop().unwrap();
    let alpha = gens.pop().unwrap();
    Ok(Derivation {
        recursion: WreathRecursion::new(alpha, beta),
        max_residual: max_res,
        calibration: cal,
        basepoint: base,
        preimages: p,
    })
}

/// The orientation choice under which `(1−2z)²` at ¼ gives
/// `α = ⟨1, 1⟩σ, β = ⟨α, β⟩`.
pub fn calibrate(cfg: &LiftConfig) -> Result<Calibration, ModuliError> {
    let g = RationalMap::new(vec![C::new(1.0, 0.0), C::new(-4.0, 0.0), C::new(4.0, 0.0)], vec![C::new(1.0, 0.0)])?;
    let want = WreathRecursion::parse("<1,1>s", "<a,b>").expect("anchor recursion parses");
    let mut last = None;
    for flip_alpha in [false, true] {
        for flip_beta in [false, true] {
            let cal = Calibration { flip_alpha, flip_beta };
            let d = derive_recursion(&g, Some(C::new(BASEPOINT, 0.0)), cal, cfg)?;
            if d.recursion == want {
                return Ok(cal);
            }
            last = Some(d.recursion);
        }
    }
    Err(ModuliError::Degenerate(format!("no orientation reproduces the anchor row (last: {})", last.unwrap())))
}

/// For `f = M_{•,0} ∘ (1/z²)`: the quadratic with critical points 0 and ∞
/// sending `0 ↦ ∞, 1 ↦ 1, ∞ ↦ 0` is `1/z²`, so the marked point `x` goes to
/// `y = 1/x²`. Returns `(y, |y − 1/x²|)`.
pub fn moduli_map_example(x: C) -> (C, f64) {
    // F(z) = k / z² with F(1) = 1
    let k = C::new(1.0, 0.0);
    let y = k / (x * x);
    let g = RationalMap::new(vec![C::new(1.0, 0.0)], vec![C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)])
        .expect("1/z^2 is nondegenerate");
    let direct = g.eval(x).unwrap_or(C::new(f64::INFINITY, 0.0));
    (y, (y - direct).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn g1() -> RationalMap {
        RationalMap::new(vec![c(1., 0.), c(-4., 0.), c(4., 0.)], vec![c(1., 0.)]).unwrap()
    }

    #[test]
    fn parse_complex_forms() {
        assert_eq!(parse_complex("0.25,0").unwrap(), c(0.25, 0.0));
        assert_eq!(parse_complex("-1").unwrap(), c(-1.0, 0.0));
        assert!(parse_complex("x").is_err());
        assert!(parse_complex("1,2,3").is_err());
    }

    #[test]
    fn degenerate_maps_rejected() {
        // z/z
        assert!(RationalMap::new(vec![c(0., 0.), c(1., 0.)], vec![c(0., 0.), c(1., 0.)]).is_err());
        assert!(RationalMap::new(vec![], vec![c(1., 0.)]).is_err());
    }

    #[test]
    fn fixed_points_of_g1() {
        let f = g1().fixed_points().unwrap();
        assert_eq!(f.len(), 3);
        assert!(close(f[0], Some(c(0.25, 0.0)), 1e-12));
        assert!(close(f[1], Some(c(1.0, 0.0)), 1e-12));
        assert_eq!(f[2], None);
    }

    #[test]
    fn critical_points_of_g1() {
        let cp = g1().critical_points();
        assert!(close(cp[0], Some(c(0.5, 0.0)), 1e-12));
        assert_eq!(cp[1], None);
    }

    #[test]
    fn mobius_spec_swaps() {
        let m = mobius_from_spec(c(0.25, 0.0), Slot::Inf).unwrap();
        assert!(close(m.apply_sphere(Some(c(0.0, 0.0))), Some(c(1.0, 0.0)), 1e-12));
        assert!(close(m.apply_sphere(Some(c(0.25, 0.0))), None, 1e-9));
        let twice = m.compose(&m);
        let z = c(0.3, 0.4);
        assert!((twice.apply(z) - z).norm() < 1e-12);
        assert!(mobius_from_spec(c(0.0, 0.0), Slot::Zero).is_err());
    }

    #[test]
    fn square_root_lift() {
        let sq = RationalMap::new(vec![c(0., 0.), c(0., 0.), c(1., 0.)], vec![c(1., 0.)]).unwrap();
        let circle =
            ComplexPath::new(vec![Piece::Arc { center: c(0., 0.), radius: 1.0, theta0: 0.0, sweep: 2.0 * PI }]);
        let lift = lift_path(&sq, &circle, c(1.0, 0.0), &LiftConfig::default()).unwrap();
        assert!((lift.end() - c(-1.0, 0.0)).norm() < 1e-9);
        assert!(lift.max_residual < 1e-9);
        let constant = ComplexPath::constant(c(0.25, 0.0));
        let fixed = lift_path(&g1(), &constant, c(0.25, 0.0), &LiftConfig::default()).unwrap();
        assert!((fixed.end() - c(0.25, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn reference_loops_encode() {
        let cal = Calibration::default();
        let q = c(BASEPOINT, 0.0);
        assert_eq!(loop_to_word(&alpha_hat(cal), q, cal).unwrap(), Word::a());
        assert_eq!(loop_to_word(&alpha_hat(cal).reversed(), q, cal).unwrap(), Word::a().invert());
        assert_eq!(loop_to_word(&beta_hat(cal), q, cal).unwrap(), Word::b());
        let tenth =
            ComplexPath::new(vec![Piece::Arc { center: c(0.0, 0.0), radius: 0.1, theta0: 0.0, sweep: 2.0 * PI }]);
        assert_eq!(loop_to_word(&tenth, c(0.1, 0.0), cal).unwrap(), Word::a());
        let small =
            ComplexPath::new(vec![Piece::Arc { center: c(0.3, 0.0), radius: 0.05, theta0: PI, sweep: 2.0 * PI }]);
        assert_eq!(loop_to_word(&small, c(0.25, 0.0), cal).unwrap(), Word::identity());
    }

    #[test]
    fn inverse_square_lift_ends_at_other_root() {
        let g = RationalMap::new(vec![c(1., 0.)], vec![c(0., 0.), c(0., 0.), c(1., 0.)]).unwrap();
        let start = c(2.0, 0.0);
        let lift = lift_path(&g, &alpha_hat(Calibration::default()), start, &LiftConfig::default()).unwrap();
        assert!((lift.end() + start).norm() < 1e-9);
        assert!((g.eval(lift.end()).unwrap() - c(BASEPOINT, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn passing_through_a_puncture_is_refused() {
        let through = ComplexPath::new(vec![
            Piece::Line(c(0.25, 0.0), c(-0.5, 0.5)),
            Piece::Line(c(-0.5, 0.5), c(0.0, 0.0)),
            Piece::Line(c(0.0, 0.0), c(-0.5, -0.5)),
            Piece::Line(c(-0.5, -0.5), c(0.25, 0.0)),
        ]);
        assert!(matches!(
            loop_to_word(&through, c(0.25, 0.0), Calibration::default()),
            Err(ModuliError::Tangential(_))
        ));
    }

    #[test]
    fn derivation_anchor_rows() {
        let cfg = LiftConfig::default();
        let cal = calibrate(&cfg).unwrap();
        assert_eq!(cal, Calibration::default());
        let inv_sq = RationalMap::new(vec![c(1., 0.)], vec![c(0., 0.), c(0., 0.), c(1., 0.)]).unwrap();
        let z0 = inv_sq.nearest_fixed_point(c(-0.5, -0.866), 1e-3).unwrap();
        let d = derive_recursion(&inv_sq, Some(z0), cal, &cfg).unwrap();
        assert_eq!(d.recursion, WreathRecursion::parse("<1, BA>s", "<1, b>").unwrap());
        assert!(d.max_residual < 1e-9);
        let sq = RationalMap::new(vec![c(0., 0.), c(0., 0.), c(1., 0.)], vec![c(1., 0.)]).unwrap();
        let d = derive_recursion(&sq, None, cal, &cfg).unwrap();
        assert_eq!(d.recursion, WreathRecursion::parse("<1, a>s", "<b, 1>").unwrap());
        assert!(inv_sq.nearest_fixed_point(c(5.0, 5.0), 1e-3).is_err());
    }

    #[test]
    fn moduli_example() {
        let (y, err) = moduli_map_example(c(0.3, 0.8));
        assert!(err < 1e-12);
        assert!((y - 1.0 / (c(0.3, 0.8) * c(0.3, 0.8))).norm() < 1e-12);
    }
}
