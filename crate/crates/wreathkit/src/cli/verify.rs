//! Table reproductions shared by `verify-tables` and the acceptance suite.

use std::collections::BTreeSet;

use num_complex::Complex64;

use super::config::Config;
use super::fixtures::{Fixtures, RecursionRecord};
use crate::curves::{check_obstruction, compute_fga, fga_candidates, same_cycles, CurveClass, CurveSpec, FgaResult};
use crate::moduli::{calibrate, derive_recursion, Calibration, ModuliError};
use crate::nucleus::{compute_nucleus, contraction_check, NucleusResult, NucleusSet};
use crate::portraits::{
    compose_portrait, enumerate_q4, portraits_equivalent, postcompose_action, rotate_three, swap_zero_inf, PointMap,
    Portrait,
};
use crate::twist::{compute_attractor, VirtualEndomorphism};
use crate::word::{Family, Pattern, Word};

/// Outcome of one reproduction check.
#[derive(Clone, Debug)]
pub struct Check {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub details: Vec<String>,
}

impl Check {
    fn new(id: impl Into<String>, title: impl Into<String>) -> Check {
        Check { id: id.into(), title: title.into(), passed: true, details: Vec::new() }
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.passed = false;
        self.details.push(msg.into());
    }

    fn note(&mut self, msg: impl Into<String>) {
        self.details.push(msg.into());
    }
}

pub fn published_nucleus(row: &RecursionRecord, cfg: &Config) -> NucleusSet {
    let mut n = NucleusSet::from_patterns(row.nucleus.clone());
    n.normalize(cfg.nucleus.window);
    n
}

pub fn computed_nucleus(row: &RecursionRecord, cfg: &Config) -> Result<NucleusResult, String> {
    let mut r = compute_nucleus(&row.recursion, &row.seeds, &cfg.nucleus).map_err(|e| e.to_string())?;
    r.nucleus.normalize(cfg.nucleus.window);
    Ok(r)
}

/// Members present on one side only: `(missing from computed, extra in computed)`.
pub fn nucleus_diff(published: &NucleusSet, computed: &NucleusSet) -> (Vec<Pattern>, Vec<Pattern>) {
    let p: BTreeSet<Pattern> = published.members().into_iter().collect();
    let c: BTreeSet<Pattern> = computed.members().into_iter().collect();
    (p.difference(&c).cloned().collect(), c.difference(&p).cloned().collect())
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

pub fn check_nuclei(fx: &Fixtures, cfg: &Config) -> Check {
    let mut c = Check::new("1", "nucleus sets of all recursion rows");
    for row in &fx.recursions {
        let published = published_nucleus(row, cfg);
        match computed_nucleus(row, cfg) {
            Err(e) => c.fail(format!("row {} ({}): {e}", row.index, row.id)),
            Ok(r) if r.nucleus.same_as(&published) => {}
            Ok(r) => {
                let (missing, extra) = nucleus_diff(&published, &r.nucleus);
                c.fail(format!(
                    "row {} ({}): missing [{}] extra [{}]",
                    row.index,
                    row.id,
                    join(&missing),
                    join(&extra)
                ));
            }
        }
    }
    if c.passed {
        c.note(format!("{} rows match", fx.recursions.len()));
    }
    c
}

fn pat(s: &str) -> Pattern {
    Pattern::parse(s).expect("built-in pattern")
}

/// The published out-of-nucleus restriction chains for `1/z²` at
/// `(−1−√3 i)/2`, together with their inverses.
fn published_chains() -> BTreeSet<(Pattern, Pattern)> {
    let chains = [("a C", "c b"), ("c b", "C b"), ("c^-2", "c b"), ("b^n a", "b^n c"), ("c b^n", "a b b^n")];
    let mut out = BTreeSet::new();
    for (p, q) in chains {
        let (p, q) = (pat(p), pat(q));
        out.insert((p.invert(), q.invert()));
        out.insert((p, q));
    }
    out
}

pub fn check_contraction_example(fx: &Fixtures, cfg: &Config) -> Check {
    let mut c = Check::new("2", "contraction chains for 1/z^2 at (-1-sqrt3 i)/2");
    let Some(row) = fx.row("q4-inv-z-sq-down") else {
        c.fail("row q4-inv-z-sq-down missing from fixtures");
        return c;
    };
    let n = published_nucleus(row, cfg);
    let report = contraction_check(&row.recursion, &n, &cfg.nucleus);
    let edges: BTreeSet<(Pattern, Pattern)> = report.edges.iter().cloned().collect();
    let want = published_chains();
    if !report.contracts() {
        c.fail(format!("contraction check did not pass: {:?}", report.status));
    }
    if report.k != 3 {
        c.fail(format!("k = {}, expected 3", report.k));
    }
    for (p, q) in want.difference(&edges) {
        c.fail(format!("missing edge {p} -> {q}"));
    }
    for (p, q) in edges.difference(&want) {
        c.fail(format!("unexpected edge {p} -> {q}"));
    }
    if c.passed {
        c.note(format!("k = 3, {} edges (chains and their inverses)", edges.len()));
    }
    c
}

pub fn check_attractors(fx: &Fixtures, cfg: &Config) -> Check {
    let mut c = Check::new("3", "twisting attractors");
    let mut count = 0;
    for rec in &fx.attractors {
        let Some(spec) = &rec.attractor else { continue };
        count += 1;
        let row = fx.row(&rec.row).expect("fixture rows are cross-checked");
        let res = computed_nucleus(row, cfg).and_then(|n| {
            let ve = VirtualEndomorphism::new(row.recursion.clone(), 0);
            compute_attractor(&ve, &n.nucleus, &cfg.attractor).map_err(|e| e.to_string())
        });
        match res {
            Err(e) => c.fail(format!("row {}: {e}", row.index)),
            Ok(a) if spec.matches(&a) => {}
            Ok(a) => c.fail(format!("row {} ({}): computed {a}", row.index, row.id)),
        }
    }
    if c.passed {
        c.note(format!("{count} attractor rows match"));
    }
    c
}

fn spec_curves(cycles: &[Vec<CurveSpec>]) -> Option<Vec<Vec<CurveClass>>> {
    cycles
        .iter()
        .map(|cyc| {
            cyc.iter()
                .map(|s| match s {
                    CurveSpec::Curve(x) => Some(x.clone()),
                    CurveSpec::Family { .. } => None,
                })
                .collect()
        })
        .collect()
}

pub fn cycles_text(cycles: &[Vec<CurveClass>]) -> String {
    let parts: Vec<String> = cycles.iter().map(|c| join(c).replace(", ", " -> ")).collect();
    parts.join("; ")
}

pub fn check_fgas(fx: &Fixtures, cfg: &Config) -> Check {
    let mut c = Check::new("4", "finite global attractors of curve pullback");
    let mut count = 0;
    for rec in &fx.attractors {
        let row = fx.row(&rec.row).expect("fixture rows are cross-checked");
        let ve = VirtualEndomorphism::new(row.recursion.clone(), 0);
        let res =
            computed_nucleus(row, cfg).and_then(|n| compute_fga(&ve, &n.nucleus, &cfg.fga).map_err(|e| e.to_string()));
        let res = match res {
            Ok(r) => r,
            Err(e) => {
                c.fail(format!("row {}: {e}", row.index));
                continue;
            }
        };
        match (&rec.fga, res) {
            (Some(published), FgaResult::Closed { cycles }) => {
                count += 1;
                let Some(want) = spec_curves(published) else {
                    c.fail(format!("row {}: published entry uses families", row.index));
                    continue;
                };
                if !same_cycles(&want, &cycles) {
                    c.fail(format!(
                        "row {} ({}): computed {} published {}",
                        row.index,
                        row.id,
                        cycles_text(&cycles),
                        cycles_text(&want)
                    ));
                }
            }
            (Some(_), FgaResult::NotClosed { visited, .. }) => {
                count += 1;
                c.fail(format!("row {}: no closure within the bound ({visited} curves)", row.index));
            }
            (None, FgaResult::Closed { cycles }) => {
                c.fail(format!("row {}: expected non-closure, computed {}", row.index, cycles_text(&cycles)));
            }
            (None, FgaResult::NotClosed { periodic, visited }) => {
                let stray: Vec<&CurveClass> =
                    periodic.iter().filter(|x| !rec.infinite.iter().any(|s| s.matches(x))).collect();
                if stray.is_empty() {
                    c.note(format!(
                        "row {}: not closed ({visited} curves visited); {} periodic curves all match the published patterns",
                        row.index,
                        periodic.len()
                    ));
                } else {
                    c.fail(format!(
                        "row {}: periodic curves outside the published patterns: {}",
                        row.index,
                        join(&stray)
                    ));
                }
            }
        }
    }
    c.note(format!("{count} finite entries compared"));
    c
}

pub fn check_spot_values(fx: &Fixtures) -> Check {
    let mut c = Check::new("5", "virtual endomorphism spot values");
    let w = |s: &str| Word::parse(s).expect("built-in word");
    let cases = [
        ("q4-1m2z-sq", [("aa", "1"), ("b", "a"), ("Aba", "b")]),
        ("q4-inv1mz-sq-down", [("aa", "d"), ("b", "a"), ("Aba", "1")]),
    ];
    for (id, values) in cases {
        let Some(row) = fx.row(id) else {
            c.fail(format!("row {id} missing"));
            continue;
        };
        let ve = VirtualEndomorphism::new(row.recursion.clone(), 0);
        for (x, y) in values {
            match ve.phi(&w(x)) {
                Some(v) if v == w(y) => c.note(format!("row {}: phi({x}) = {v}", row.index)),
                other => c.fail(format!("row {}: phi({x}) = {other:?}, expected {y}", row.index)),
            }
        }
    }
    c
}

/// Generators of the cyclic subgroups lying wholly in a nucleus: the bases
/// of families `p·bⁿ·p⁻¹`, conjugated by `p`.
fn cyclic_generators(n: &NucleusSet) -> Vec<(Family, Word)> {
    n.families()
        .iter()
        .filter(|f| f.prefix().invert() == *f.suffix())
        .map(|f| (f.clone(), f.base().conjugate(&f.suffix().clone())))
        .collect()
}

pub fn check_subhyperbolic(fx: &Fixtures, cfg: &Config) -> Check {
    let mut c = Check::new("6", "orders of cyclic subgroups inside the nuclei");
    let ok = [1u32, 2, 4];
    let mut checked = 0;
    for row in &fx.recursions {
        let n = published_nucleus(row, cfg);
        for (fam, g) in cyclic_generators(&n) {
            for k in -cfg.nucleus.window..=cfg.nucleus.window {
                let w = fam.instance(k);
                checked += 1;
                match row.recursion.faithful_order(&w, cfg.order_bound, cfg.nucleus.state_bound) {
                    Ok(Some(o)) if ok.contains(&o) => {}
                    other => c.fail(format!("row {}: {w} (from {fam}) has order {other:?}", row.index)),
                }
            }
            if let Ok(Some(o)) = row.recursion.faithful_order(&g, cfg.order_bound, cfg.nucleus.state_bound) {
                c.note(format!("row {}: {fam} generated by {g} of order {o}", row.index));
            }
        }
    }
    c.note(format!("{checked} family members checked"));
    c
}

pub fn check_portraits(fx: &Fixtures) -> Check {
    let mut c = Check::new("7", "portrait enumeration and group actions");
    let maps: Vec<_> = fx.gmaps.iter().map(|g| g.map.clone()).collect();
    let classes = enumerate_q4(&maps);
    let one = classes.iter().filter(|k| fx.gmaps[k.members[0].0].one_critical_postcritical).count();
    let two = classes.len() - one;
    if classes.len() != 13 || one != 9 || two != 4 {
        c.fail(format!("{} classes ({one} + {two}), expected 13 (9 + 4)", classes.len()));
    } else {
        c.note("13 classes (9 + 4)".to_string());
    }
    for p in &fx.portraits {
        let g = &fx.gmap(&p.gmap).expect("cross-checked").map;
        match compose_portrait(g, p.slot) {
            Ok(q) if q == p.portrait => {}
            Ok(q) => c.fail(format!("{}: composed {q}, table {}", p.id, p.portrait)),
            Err(e) => c.fail(format!("{}: {e}", p.id)),
        }
        let hits = classes.iter().filter(|k| portraits_equivalent(&k.portrait, &p.portrait).is_some()).count();
        if hits != 1 {
            c.fail(format!("{}: equivalent to {hits} enumerated classes", p.id));
        }
    }
    for (table, len, shift) in [(2u8, 9usize, 3usize), (3, 4, 2)] {
        let rows: Vec<(PointMap, Portrait)> = fx
            .portraits
            .iter()
            .filter(|p| p.table == table)
            .filter_map(|p| {
                let g = &fx.gmap(&p.gmap)?.map;
                Some((PointMap::compose(g, p.slot).ok()?, p.portrait.clone()))
            })
            .collect();
        let action =
            if table == 2 { postcompose_action(&rows, rotate_three) } else { postcompose_action(&rows, swap_zero_inf) };
        let want: Vec<Option<usize>> = (0..len).map(|i| Some((i + shift) % len)).collect();
        if rows.len() != len || action != want {
            c.fail(format!("table {table} action {action:?}, expected row i -> i+{shift} mod {len}"));
        } else {
            c.note(format!("table {table}: row i -> row i+{shift} mod {len}"));
        }
    }
    c
}

pub fn check_fixed_points(fx: &Fixtures, cfg: &Config) -> Check {
    let mut c = Check::new("8", "fixed points of the maps on moduli space");
    let mut count = 0;
    for g in &fx.gmaps {
        let computed = match g.map.fixed_points() {
            Ok(f) => f,
            Err(e) => {
                c.fail(format!("{}: {e}", g.label));
                continue;
            }
        };
        for p in &computed {
            let r = g.map.fixed_residual(*p);
            if r >= 1e-9 {
                c.fail(format!("{}: residual {r:e} at {}", g.label, crate::moduli::format_point(*p)));
            }
        }
        for want in &g.fixed {
            count += 1;
            let hit = computed.iter().any(|p| match (p, want) {
                (None, None) => true,
                (Some(a), Some(b)) => (a - b).norm() <= cfg.fixed_point_tolerance,
                _ => false,
            });
            if !hit {
                let w = want.unwrap_or_default();
                let nearest =
                    computed.iter().flatten().min_by(|a, b| (*a - w).norm().total_cmp(&(*b - w).norm())).copied();
                c.fail(format!(
                    "{}: no computed fixed point within {} of {} (nearest {})",
                    g.label,
                    cfg.fixed_point_tolerance,
                    crate::moduli::format_point(*want),
                    crate::moduli::format_point(nearest)
                ));
            }
        }
    }
    if c.passed {
        c.note(format!("{count} tabulated fixed points matched"));
    }
    c
}

/// A tabulated fixed point further than this from every computed one is
/// rejected even when selecting the point to derive from.
pub const SELECTION_TOLERANCE: f64 = 0.05;

/// Derives the recursion of one row; the fixture value locates the exact fixed
/// point. The second value is the distance between the two when it exceeds
/// the configured tolerance.
pub fn derive_row(
    fx: &Fixtures,
    row: &RecursionRecord,
    cal: Calibration,
    cfg: &Config,
) -> Result<(crate::moduli::Derivation, Option<f64>), ModuliError> {
    let g = &fx.gmap(&row.gmap).expect("cross-checked").map;
    let (z0, off) = match row.fixed {
        None => (None, None),
        Some(z) => {
            let p = g.nearest_fixed_point(z, cfg.fixed_point_tolerance.max(SELECTION_TOLERANCE))?;
            let d = (p - z).norm();
            (Some(p), (d > cfg.fixed_point_tolerance).then_some(d))
        }
    };
    Ok((derive_recursion(g, z0, cal, &cfg.lift)?, off))
}

pub fn check_derivations(fx: &Fixtures, cfg: &Config) -> Check {
    let mut c = Check::new("9", "numerical derivation of the recursions");
    let cal = match calibrate(&cfg.lift) {
        Ok(cal) => cal,
        Err(e) => {
            c.fail(format!("calibration: {e}"));
            return c;
        }
    };
    c.note(format!("calibration: {cal}"));
    let required = ["q4-1m2z-sq", "q4-inv-z-sq-down", "q4-z-sq"];
    let mut matched = 0;
    for row in &fx.recursions {
        let must = required.contains(&row.id.as_str());
        let derived = derive_row(fx, row, cal, cfg).map(|(d, off)| {
            if let Some(off) = off {
                c.note(format!("row {}: tabulated fixed point is {off:.4} from the nearest exact one", row.index));
            }
            d
        });
        match derived {
            Ok(d) if d.recursion == row.recursion && d.max_residual < cfg.lift.residual => matched += 1,
            Ok(d) if must => {
                c.fail(format!("row {}: derived {} (residual {:e})", row.index, d.recursion, d.max_residual))
            }
            Ok(d) => c.note(format!("row {}: derived {} differs", row.index, d.recursion)),
            Err(e) if must => c.fail(format!("row {}: {e}", row.index)),
            Err(e) => c.note(format!("row {}: {e}", row.index)),
        }
    }
    c.note(format!("{matched} of {} rows reproduced", fx.recursions.len()));
    c
}

pub fn check_obstructions(fx: &Fixtures, cfg: &Config) -> Check {
    let mut c = Check::new("10", "obstruction certificates");
    for (id, want) in
        [("q4-z-sq", Some(CurveClass::Curve { core: Word::b(), conj: Word::identity() })), ("q4-1m2z-sq", None)]
    {
        let Some(row) = fx.row(id) else {
            c.fail(format!("row {id} missing"));
            continue;
        };
        let ve = VirtualEndomorphism::new(row.recursion.clone(), 0);
        let res = computed_nucleus(row, cfg)
            .and_then(|n| fga_candidates(&ve, &n.nucleus, &cfg.fga).map_err(|e| e.to_string()))
            .and_then(|cands| check_obstruction(&ve, &cands).map_err(|e| e.to_string()));
        match (res, &want) {
            (Ok(Some((curve, (1, 1)))), Some(w)) if curve == *w => {
                c.note(format!("row {}: {curve} with multiplier 1", row.index))
            }
            (Ok(None), None) => c.note(format!("row {}: none found", row.index)),
            (Ok(got), _) => c.fail(format!("row {}: got {got:?}", row.index)),
            (Err(e), _) => c.fail(format!("row {}: {e}", row.index)),
        }
    }
    c
}

/// Each obstructed twist family is φ̄-fixed for its row.
pub fn check_obstructed_table(fx: &Fixtures, cfg: &Config) -> Check {
    let mut c = Check::new("t6", "obstructed twist families are fixed by the twisting map");
    for ob in &fx.obstructed {
        let row = fx.row(&ob.row).expect("cross-checked");
        let ve = VirtualEndomorphism::new(row.recursion.clone(), 0);
        let fixed = (-cfg.attractor.verify_window..=cfg.attractor.verify_window).all(|n| {
            let w = ob.twist.instance(n);
            ve.phibar(&w) == w
        });
        if !fixed {
            c.fail(format!("{}: {} is not fixed", ob.id, ob.twist));
        }
    }
    if c.passed {
        c.note(format!("{} families checked", fx.obstructed.len()));
    }
    c
}

/// Checks 1 to 10 in order.
pub fn all_checks(fx: &Fixtures, cfg: &Config) -> Vec<Check> {
    vec![
        check_nuclei(fx, cfg),
        check_contraction_example(fx, cfg),
        check_attractors(fx, cfg),
        check_fgas(fx, cfg),
        check_spot_values(fx),
        check_subhyperbolic(fx, cfg),
        check_portraits(fx),
        check_fixed_points(fx, cfg),
        check_derivations(fx, cfg),
        check_obstructions(fx, cfg),
    ]
}

/// Checks touching one table.
pub fn table_checks(fx: &Fixtures, cfg: &Config, table: u8) -> Vec<Check> {
    match table {
        1 => vec![check_fixed_points(fx, cfg)],
        2 | 3 => vec![check_portraits(fx)],
        4 => vec![
            check_nuclei(fx, cfg),
            check_contraction_example(fx, cfg),
            check_subhyperbolic(fx, cfg),
            check_derivations(fx, cfg),
        ],
        5 => vec![check_attractors(fx, cfg), check_fgas(fx, cfg)],
        6 => vec![check_obstructed_table(fx, cfg), check_obstructions(fx, cfg)],
        _ => Vec::new(),
    }
}

pub fn format_complex(z: Complex64) -> String {
    crate::moduli::format_point(Some(z))
}
