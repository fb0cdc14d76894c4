//! Fixtures, strategies and the algebraic property checks shared by the
//! property and acceptance targets.
#![allow(dead_code)]

use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::test_runner::{Config as RunnerConfig, TestCaseError, TestRunner};
use wreathkit::cli::config::Config;
use wreathkit::cli::fixtures::Fixtures;
use wreathkit::cli::verify::computed_nucleus;
use wreathkit::curves::phihat;
use wreathkit::nucleus::{contraction_check, NucleusSet};
use wreathkit::twist::VirtualEndomorphism;
use wreathkit::{Letter, Word, WreathRecursion};

pub const CASES: u32 = 1000;

pub fn fixtures() -> &'static Fixtures {
    static FX: OnceLock<Fixtures> = OnceLock::new();
    FX.get_or_init(Fixtures::builtin)
}

pub fn letter() -> impl Strategy<Value = Letter> {
    prop::sample::select(vec!['a', 'A', 'b', 'B']).prop_map(|c| Letter::from_char(c).unwrap())
}

pub fn word(max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(letter(), 0..=max).prop_map(Word::reduce)
}

pub fn row_index() -> impl Strategy<Value = usize> {
    0..fixtures().recursions.len()
}

pub fn rec(i: usize) -> &'static WreathRecursion {
    &fixtures().recursions[i].recursion
}

pub fn vertex(max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..2, 0..=max)
}

/// Per row: first-coordinate virtual endomorphism, computed nucleus and contraction depth.
pub fn nuclei() -> &'static Vec<(VirtualEndomorphism, NucleusSet, usize)> {
    static N: OnceLock<Vec<(VirtualEndomorphism, NucleusSet, usize)>> = OnceLock::new();
    N.get_or_init(|| {
        let cfg = Config::default();
        fixtures()
            .recursions
            .iter()
            .map(|row| {
                let n = computed_nucleus(row, &cfg).unwrap().nucleus;
                let report = contraction_check(&row.recursion, &n, &cfg.nucleus);
                assert!(report.contracts(), "row {}", row.id);
                (VirtualEndomorphism::new(row.recursion.clone(), 0), n, report.k)
            })
            .collect()
    })
}

pub fn product_rule(i: usize, u: &Word, v: &Word, x: usize) -> Result<(), TestCaseError> {
    let r = rec(i);
    let y = r.perm_apply(u, x);
    prop_assert_eq!(r.restrict(&u.multiply(v), x), r.restrict(u, x).multiply(&r.restrict(v, y)));
    prop_assert_eq!(r.perm_of(&u.multiply(v)), r.perm_of(u) ^ r.perm_of(v));
    Ok(())
}

/// Vertices `p·q` up to depth 10: prefixes go to prefixes, the tail is moved
/// by the state at `p`, and products act in order.
pub fn action_restriction(i: usize, u: &Word, v: &Word, p: &[u8], q: &[u8]) -> Result<(), TestCaseError> {
    let r = rec(i);
    let pq: Vec<u8> = p.iter().chain(q).copied().collect();
    let image = r.act(u, &pq);
    let state = p.iter().fold(u.clone(), |s, &x| r.restrict(&s, x as usize));
    prop_assert_eq!(&image[..p.len()], &r.act(u, p)[..]);
    prop_assert_eq!(&image[p.len()..], &r.act(&state, q)[..]);
    prop_assert_eq!(r.act(&u.multiply(v), &pq), r.act(v, &image));
    Ok(())
}

pub fn four_cases(i: usize, u: &Word) -> Result<(), TestCaseError> {
    let ve = VirtualEndomorphism::new(rec(i).clone(), 0);
    prop_assert_eq!(ve.phibar(u), ve.phibar_by_cases(u));
    Ok(())
}

/// The φ̄-orbit of `u` meets `N ∪ αN` within `|u| + k₀` steps.
pub fn phibar_lands(i: usize, u: &Word) -> Result<(), TestCaseError> {
    let (ve, n, k0) = &nuclei()[i];
    let ainv = Word::a().invert();
    let mut x = u.clone();
    let mut steps = 0;
    while !(n.contains_word(&x) || n.contains_word(&ainv.multiply(&x))) {
        prop_assert!(steps < u.len() + k0, "{} still outside after {} steps", u, steps);
        x = ve.phibar(&x);
        steps += 1;
    }
    Ok(())
}

/// The φ̂-orbit of `u` meets `N` within `|u| + k₀` steps.
pub fn phihat_lands(i: usize, u: &Word) -> Result<(), TestCaseError> {
    let (ve, n, k0) = &nuclei()[i];
    let mut x = u.clone();
    let mut steps = 0;
    while !n.contains_word(&x) {
        prop_assert!(steps < u.len() + k0, "{} still outside after {} steps", u, steps);
        x = phihat(ve, &x);
        steps += 1;
    }
    Ok(())
}

/// Runs the algebraic suites in-process; one result per suite.
pub fn run_suites(cases: u32) -> Vec<(&'static str, Result<(), String>)> {
    fn runner(cases: u32) -> TestRunner {
        TestRunner::new(RunnerConfig { cases, failure_persistence: None, ..RunnerConfig::default() })
    }
    fn err<T: std::fmt::Debug>(e: proptest::test_runner::TestError<T>) -> String {
        e.to_string()
    }
    vec![
        (
            "restriction product rule",
            runner(cases)
                .run(&(row_index(), word(12), word(12), 0usize..2), |(i, u, v, x)| product_rule(i, &u, &v, x))
                .map_err(err),
        ),
        (
            "action/restriction compatibility to depth 10",
            runner(cases)
                .run(&(row_index(), word(10), word(10), vertex(5), vertex(5)), |(i, u, v, p, q)| {
                    action_restriction(i, &u, &v, &p, &q)
                })
                .map_err(err),
        ),
        (
            "phibar four-case formula",
            runner(cases).run(&(row_index(), word(16)), |(i, u)| four_cases(i, &u)).map_err(err),
        ),
        (
            "phibar orbits reach N and aN",
            runner(cases).run(&(row_index(), word(20)), |(i, u)| phibar_lands(i, &u)).map_err(err),
        ),
        (
            "phihat orbits reach N",
            runner(cases).run(&(row_index(), word(20)), |(i, u)| phihat_lands(i, &u)).map_err(err),
        ),
    ]
}
