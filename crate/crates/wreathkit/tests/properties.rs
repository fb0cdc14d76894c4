mod common;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use common::*;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use wreathkit::cli::config::Config;
use wreathkit::cli::verify::computed_nucleus;
use wreathkit::curves::{compute_fga, pullback_curve, CurveClass, FgaResult};
use wreathkit::moduli::{alpha_hat, loop_to_word, Calibration, ComplexPath, Piece, BASEPOINT};
use wreathkit::portraits::{portraits_equivalent, Point, Portrait};
use wreathkit::twist::{compute_attractor, AttractorSet, VirtualEndomorphism};
use wreathkit::Word;

/// Attractors of the rows that have one, on the first coordinate.
fn attractors() -> &'static Vec<(VirtualEndomorphism, AttractorSet)> {
    static A: OnceLock<Vec<(VirtualEndomorphism, AttractorSet)>> = OnceLock::new();
    A.get_or_init(|| {
        let cfg = Config::default();
        let fx = fixtures();
        fx.attractors
            .iter()
            .filter(|a| a.attractor.is_some())
            .map(|a| {
                let row = fx.row(&a.row).unwrap();
                let n = computed_nucleus(row, &cfg).unwrap();
                let ve = VirtualEndomorphism::new(row.recursion.clone(), 0);
                let att = compute_attractor(&ve, &n.nucleus, &cfg.attractor).unwrap();
                (ve, att)
            })
            .collect()
    })
}

/// Finite global attractors, as sets of curves, for the rows where pullback closes up.
fn fgas() -> &'static Vec<(VirtualEndomorphism, BTreeSet<CurveClass>)> {
    static F: OnceLock<Vec<(VirtualEndomorphism, BTreeSet<CurveClass>)>> = OnceLock::new();
    F.get_or_init(|| {
        let cfg = Config::default();
        fixtures()
            .recursions
            .iter()
            .filter_map(|row| {
                let n = computed_nucleus(row, &cfg).unwrap();
                let ve = VirtualEndomorphism::new(row.recursion.clone(), 0);
                match compute_fga(&ve, &n.nucleus, &cfg.fga).unwrap() {
                    FgaResult::Closed { cycles } => Some((ve, cycles.into_iter().flatten().collect())),
                    FgaResult::NotClosed { .. } => None,
                }
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn word_group_laws(u in word(16), v in word(16), w in word(16)) {
        prop_assert_eq!(u.multiply(&v).multiply(&w), u.multiply(&v.multiply(&w)));
        prop_assert!(u.multiply(&u.invert()).is_identity());
        prop_assert_eq!(u.multiply(&v).invert(), v.invert().multiply(&u.invert()));
        prop_assert_eq!(Word::reduce(u.letters().iter().copied()), u.clone());
        let (ua, ub) = u.exponent_sums();
        let (va, vb) = v.exponent_sums();
        prop_assert_eq!(u.multiply(&v).exponent_sums(), (ua + va, ub + vb));
    }

    #[test]
    fn word_text_round_trip(u in word(24)) {
        prop_assert_eq!(Word::parse(&u.to_string()).unwrap(), u);
    }

    #[test]
    fn cyclic_reduction_is_conjugacy(u in word(20)) {
        let (conj, core) = u.cyclic_reduction();
        prop_assert!(core.is_cyclically_reduced());
        prop_assert_eq!(core.conjugate(&conj.invert()), u);
    }

    #[test]
    fn restriction_product_rule(i in row_index(), u in word(12), v in word(12), x in 0usize..2) {
        product_rule(i, &u, &v, x)?;
    }

    #[test]
    fn action_is_compatible_with_restriction(i in row_index(), u in word(10), v in word(10), p in vertex(5), q in vertex(5)) {
        action_restriction(i, &u, &v, &p, &q)?;
    }

    #[test]
    fn phibar_four_cases(i in row_index(), u in word(16)) {
        four_cases(i, &u)?;
    }

    #[test]
    fn phibar_orbits_reach_the_nucleus(i in row_index(), u in word(20)) {
        phibar_lands(i, &u)?;
    }

    #[test]
    fn phihat_orbits_reach_the_nucleus(i in row_index(), u in word(20)) {
        phihat_lands(i, &u)?;
    }

    #[test]
    fn phibar_orbits_land_in_the_attractor(k in 0usize..7, u in word(14)) {
        let all = attractors();
        let (ve, att) = &all[k % all.len()];
        let (_, cycle) = ve.phibar_orbit(&u, 10_000).unwrap();
        for w in &cycle {
            prop_assert!(att.locate(w).is_some(), "{} not in {}", w, att);
        }
    }

    #[test]
    fn pullback_orbits_land_in_the_fga(k in 0usize..14, conj in word(8), core in 0usize..3) {
        let all = fgas();
        let (ve, fga) = &all[k % all.len()];
        let x = [Word::a(), Word::b(), Word::gamma()][core].conjugate(&conj);
        let mut c = CurveClass::from_word(&x).unwrap();
        let mut steps = 0;
        while !fga.contains(&c) {
            c = pullback_curve(ve, &c).unwrap().image;
            steps += 1;
            prop_assert!(steps < 500, "no landing from {}", x);
        }
    }

    #[test]
    fn portrait_equivalence_is_relabeling_invariant(k in 0usize..13, perm in Just(Point::ALL.to_vec()).prop_shuffle()) {
        let p = &fixtures().portraits[k].portrait;
        let relabel = |x: Point| perm[Point::ALL.iter().position(|&y| y == x).unwrap()];
        let text: Vec<String> = p.edges().map(|(v, d, w)| format!("{} -{}-> {}", relabel(v), d, relabel(w))).collect();
        let q = Portrait::parse(&text.join(", ")).unwrap();
        let map = portraits_equivalent(p, &q).expect("relabeled portrait is equivalent");
        for (v, d, w) in p.edges() {
            prop_assert!(q.edges().any(|e| e == (map[&v], d, map[&w])));
        }
        let images: BTreeSet<Point> = map.values().copied().collect();
        prop_assert_eq!(images.len(), map.len());
    }

    #[test]
    fn circles_encode_their_winding(theta in 0.0..std::f64::consts::TAU, r in 0.01f64..3.0, ccw in any::<bool>()) {
        let base = C::new(BASEPOINT, 0.0);
        let center = base - C::from_polar(r, theta);
        let d0 = center.norm() - r;
        let d1 = (center - 1.0).norm() - r;
        prop_assume!(d0.abs() > 1e-3 && d1.abs() > 1e-3);
        let sweep = if ccw { std::f64::consts::TAU } else { -std::f64::consts::TAU };
        let path = ComplexPath::new(vec![Piece::Arc { center, radius: r, theta0: theta, sweep }]);
        let w = loop_to_word(&path, base, Calibration::default()).unwrap();
        let s = if ccw { 1 } else { -1 };
        let expect = (if d0 < 0.0 { s } else { 0 }, if d1 < 0.0 { s } else { 0 });
        prop_assert_eq!(w.exponent_sums(), expect);
        if d0 > 0.0 && d1 > 0.0 {
            prop_assert!(w.is_identity());
        } else {
            prop_assert_eq!(w.len() as i64, expect.0.abs() + expect.1.abs());
        }
    }
}

#[test]
fn alpha_loop_is_a() {
    assert_eq!(
        loop_to_word(&alpha_hat(Calibration::default()), C::new(BASEPOINT, 0.0), Calibration::default()).unwrap(),
        Word::a()
    );
}
