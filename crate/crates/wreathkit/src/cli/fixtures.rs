//! Table fixtures: maps, portraits, recursions, attractors and obstructed
//! families, loaded from the text files in the fixture directory.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use thiserror::Error;

use super::records::{parse_records, split_list, Record, RecordError};
use crate::curves::CurveSpec;
use crate::moduli::{parse_complex, RationalMap};
use crate::portraits::{Portrait, Slot};
use crate::twist::AttractorSpec;
use crate::word::{Family, Pattern, Word};
use crate::wreath::WreathRecursion;

pub const TABLE1: &str = include_str!("../../../../fixtures/table1.txt");
pub const PORTRAITS: &str = include_str!("../../../../fixtures/portraits.txt");
pub const TABLE4: &str = include_str!("../../../../fixtures/table4.txt");
pub const TABLE5: &str = include_str!("../../../../fixtures/table5.txt");
pub const TABLE6: &str = include_str!("../../../../fixtures/table6.txt");

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("{file}: expected {expected} records, found {found}")]
    Count { file: String, expected: usize, found: usize },
    #[error("{file}: record [{id}] refers to unknown {what} `{name}`")]
    Reference { file: String, id: String, what: String, name: String },
}

/// A map from the list of quadratic maps with at most three postcritical points.
#[derive(Clone, Debug)]
pub struct GMapRecord {
    pub key: String,
    pub label: String,
    pub map: RationalMap,
    pub critical: Vec<String>,
    pub portrait: Portrait,
    /// `None` stands for ∞.
    pub fixed: Vec<Option<Complex64>>,
    pub fixed_labels: Vec<String>,
    pub one_critical_postcritical: bool,
}

#[derive(Clone, Debug)]
pub struct PortraitRecord {
    pub id: String,
    pub table: u8,
    pub row: usize,
    pub gmap: String,
    pub slot: Slot,
    pub portrait: Portrait,
}

#[derive(Clone, Debug)]
pub struct RecursionRecord {
    pub id: String,
    pub index: usize,
    pub gmap: String,
    /// `None` for the formal basepoint.
    pub fixed: Option<Complex64>,
    pub fixed_label: String,
    pub recursion: WreathRecursion,
    pub seeds: Vec<Pattern>,
    pub nucleus: Vec<Pattern>,
}

#[derive(Clone, Debug)]
pub struct AttractorRecord {
    pub row: String,
    pub attractor: Option<AttractorSpec>,
    /// `None` when the table has no finite global attractor for the row.
    pub fga: Option<Vec<Vec<CurveSpec>>>,
    pub infinite: Vec<CurveSpec>,
}

#[derive(Clone, Debug)]
pub struct ObstructedRecord {
    pub id: String,
    pub row: String,
    pub slot: Slot,
    pub twist: Family,
}

#[derive(Clone, Debug)]
pub struct Fixtures {
    pub gmaps: Vec<GMapRecord>,
    pub portraits: Vec<PortraitRecord>,
    pub recursions: Vec<RecursionRecord>,
    pub attractors: Vec<AttractorRecord>,
    pub obstructed: Vec<ObstructedRecord>,
}

impl Fixtures {
    /// The tables compiled into the library.
    pub fn builtin() -> Fixtures {
        Fixtures::from_texts(TABLE1, PORTRAITS, TABLE4, TABLE5, TABLE6).expect("built-in fixtures are well formed")
    }

    pub fn load(dir: &Path) -> Result<Fixtures, FixtureError> {
        let read = |name: &str| {
            let p = dir.join(name);
            fs::read_to_string(&p).map_err(|e| FixtureError::Io(p, e))
        };
        Fixtures::from_texts(
            &read("table1.txt")?,
            &read("portraits.txt")?,
            &read("table4.txt")?,
            &read("table5.txt")?,
            &read("table6.txt")?,
        )
    }

    pub fn from_texts(t1: &str, portraits: &str, t4: &str, t5: &str, t6: &str) -> Result<Fixtures, FixtureError> {
        let gmaps = load_gmaps(t1)?;
        let portraits = load_portraits(portraits, &gmaps)?;
        let recursions = load_recursions(t4, &gmaps)?;
        let attractors = load_attractors(t5, &recursions)?;
        let obstructed = load_obstructed(t6, &recursions)?;
        Ok(Fixtures { gmaps, portraits, recursions, attractors, obstructed })
    }

    pub fn gmap(&self, key: &str) -> Option<&GMapRecord> {
        self.gmaps.iter().find(|g| g.key == key || g.label == key)
    }

    /// Looks a row up by id or by its 1-based index.
    pub fn row(&self, id: &str) -> Option<&RecursionRecord> {
        self.recursions.iter().find(|r| r.id == id || id.parse::<usize>().ok() == Some(r.index))
    }

    pub fn attractor(&self, row: &str) -> Option<&AttractorRecord> {
        self.attractors.iter().find(|a| a.row == row)
    }
}

fn expect_count(file: &str, recs: &[Record], n: usize) -> Result<(), FixtureError> {
    if recs.len() != n {
        return Err(FixtureError::Count { file: file.into(), expected: n, found: recs.len() });
    }
    Ok(())
}

fn parse_patterns(file: &str, r: &Record, key: &str) -> Result<Vec<Pattern>, FixtureError> {
    split_list(r.get(file, key)?)
        .iter()
        .map(|s| Pattern::parse(s).map_err(|e| r.field_error(file, key, e).into()))
        .collect()
}

fn load_gmaps(text: &str) -> Result<Vec<GMapRecord>, FixtureError> {
    let file = "table1.txt";
    let recs = parse_records(file, text)?;
    expect_count(file, &recs, 7)?;
    recs.iter()
        .map(|r| {
            let coeffs = |key: &str| -> Result<Vec<Complex64>, FixtureError> {
                r.get(file, key)?
                    .split(';')
                    .map(|c| parse_complex(c.trim()).map_err(|e| r.field_error(file, key, e).into()))
                    .collect()
            };
            let map = RationalMap::new(coeffs("num")?, coeffs("den")?).map_err(|e| r.field_error(file, "num", e))?;
            let portrait = Portrait::parse(r.get(file, "portrait")?).map_err(|e| r.field_error(file, "portrait", e))?;
            let fixed = r
                .get(file, "fixed")?
                .split(';')
                .map(|c| match c.trim() {
                    "inf" => Ok(None),
                    s => parse_complex(s).map(Some).map_err(|e| r.field_error(file, "fixed", e)),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(GMapRecord {
                key: r.id.clone(),
                label: r.get(file, "label")?.to_string(),
                map,
                critical: split_list(r.get(file, "critical")?),
                portrait,
                fixed,
                fixed_labels: split_list(r.get(file, "fixed_labels")?),
                one_critical_postcritical: r.get(file, "one_critical_postcritical")? == "true",
            })
        })
        .collect()
}

fn load_portraits(text: &str, gmaps: &[GMapRecord]) -> Result<Vec<PortraitRecord>, FixtureError> {
    let file = "portraits.txt";
    let recs = parse_records(file, text)?;
    expect_count(file, &recs, 13)?;
    recs.iter()
        .map(|r| {
            let gmap = r.get(file, "gmap")?.to_string();
            if !gmaps.iter().any(|g| g.key == gmap) {
                return Err(FixtureError::Reference {
                    file: file.into(),
                    id: r.id.clone(),
                    what: "g-map".into(),
                    name: gmap,
                });
            }
            let num = |key: &str| -> Result<usize, FixtureError> {
                r.get(file, key)?.parse().map_err(|e| r.field_error(file, key, e).into())
            };
            Ok(PortraitRecord {
                id: r.id.clone(),
                table: num("table")? as u8,
                row: num("row")?,
                gmap,
                slot: r.get(file, "slot")?.parse().map_err(|e| r.field_error(file, "slot", e))?,
                portrait: Portrait::parse(r.get(file, "portrait")?).map_err(|e| r.field_error(file, "portrait", e))?,
            })
        })
        .collect()
}

fn load_recursions(text: &str, gmaps: &[GMapRecord]) -> Result<Vec<RecursionRecord>, FixtureError> {
    let file = "table4.txt";
    let recs = parse_records(file, text)?;
    expect_count(file, &recs, 14)?;
    recs.iter()
        .map(|r| {
            let gmap = r.get(file, "gmap")?.to_string();
            if !gmaps.iter().any(|g| g.label == gmap) {
                return Err(FixtureError::Reference {
                    file: file.into(),
                    id: r.id.clone(),
                    what: "g-map".into(),
                    name: gmap,
                });
            }
            let fixed = match r.get(file, "fixed")? {
                "formal" => None,
                s => Some(parse_complex(s).map_err(|e| r.field_error(file, "fixed", e))?),
            };
            let recursion = WreathRecursion::parse(r.get(file, "alpha")?, r.get(file, "beta")?)
                .map_err(|e| r.field_error(file, "alpha/beta", e))?;
            Ok(RecursionRecord {
                id: r.id.clone(),
                index: r.get(file, "index")?.parse().map_err(|e| r.field_error(file, "index", e))?,
                gmap,
                fixed,
                fixed_label: r.get(file, "fixed_label")?.to_string(),
                recursion,
                seeds: parse_patterns(file, r, "seeds")?,
                nucleus: parse_patterns(file, r, "nucleus")?,
            })
        })
        .collect()
}

fn load_attractors(text: &str, rows: &[RecursionRecord]) -> Result<Vec<AttractorRecord>, FixtureError> {
    let file = "table5.txt";
    let recs = parse_records(file, text)?;
    expect_count(file, &recs, 14)?;
    recs.iter()
        .map(|r| {
            if !rows.iter().any(|x| x.id == r.id) {
                return Err(FixtureError::Reference {
                    file: file.into(),
                    id: r.id.clone(),
                    what: "row".into(),
                    name: r.id.clone(),
                });
            }
            let attractor = match r.fields.get("attractor") {
                None => None,
                Some(s) => Some(AttractorSpec::parse(s).map_err(|e| r.field_error(file, "attractor", e))?),
            };
            let fga = match r.get(file, "fga")? {
                "none" => None,
                s => Some(
                    s.split(';')
                        .map(|cyc| cyc.split("->").map(|c| CurveSpec::parse(c.trim())).collect::<Result<Vec<_>, _>>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| r.field_error(file, "fga", e))?,
                ),
            };
            let infinite = match r.fields.get("infinite") {
                None => Vec::new(),
                Some(s) => s
                    .split(';')
                    .map(|c| CurveSpec::parse(c.trim()))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| r.field_error(file, "infinite", e))?,
            };
            Ok(AttractorRecord { row: r.id.clone(), attractor, fga, infinite })
        })
        .collect()
}

fn load_obstructed(text: &str, rows: &[RecursionRecord]) -> Result<Vec<ObstructedRecord>, FixtureError> {
    let file = "table6.txt";
    let recs = parse_records(file, text)?;
    expect_count(file, &recs, 8)?;
    recs.iter()
        .map(|r| {
            let row = r.get(file, "row")?.to_string();
            if !rows.iter().any(|x| x.id == row) {
                return Err(FixtureError::Reference {
                    file: file.into(),
                    id: r.id.clone(),
                    what: "row".into(),
                    name: row,
                });
            }
            Ok(ObstructedRecord {
                id: r.id.clone(),
                row,
                slot: r.get(file, "slot")?.parse().map_err(|e| r.field_error(file, "slot", e))?,
                twist: Family::parse(r.get(file, "twist")?).map_err(|e| r.field_error(file, "twist", e))?,
            })
        })
        .collect()
}

/// Words used in fixture text for γ and δ.
pub fn named(w: &Word) -> String {
    if *w == Word::gamma() {
        "c".into()
    } else if *w == Word::delta() {
        "d".into()
    } else {
        w.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_counts() {
        let f = Fixtures::builtin();
        assert_eq!(f.gmaps.len(), 7);
        assert_eq!(f.portraits.len(), 13);
        assert_eq!(f.recursions.len(), 14);
        assert_eq!(f.attractors.len(), 14);
        assert_eq!(f.obstructed.len(), 8);
    }

    #[test]
    fn rows_resolve_by_id_and_index() {
        let f = Fixtures::builtin();
        assert_eq!(f.row("q4-1m2z-sq").unwrap().index, 1);
        assert_eq!(f.row("11").unwrap().id, "q4-inv-z-sq-down");
        assert!(f.row("unknown").is_none());
    }

    #[test]
    fn empty_table_is_schema_error() {
        let err = Fixtures::from_texts(TABLE1, PORTRAITS, "", TABLE5, TABLE6).unwrap_err();
        assert!(err.to_string().contains("no records"));
    }
}
