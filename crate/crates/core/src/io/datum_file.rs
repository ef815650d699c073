//! JSON datum files.
//!
//! Every file carries `schema_version` (currently 1) and `kind`. Exponents are
//! strings such as `"3/2"` or `"inf"`; plain integers are accepted too.
//!
//! ```json
//! {"schema_version": 1, "kind": "discrete",
//!  "groups": [{"free_rank": 1}, {"free_rank": 1}],
//!  "generators": [[1, 1]],
//!  "exponents": ["2", "2"]}
//! ```
//!
//! Euclidean data give `factor_dims`, a rational `basis` of `H` in concatenated
//! coordinates, and an optional `measure` (`induced` or `parametrized`).
//! Finite-table data give `groups` by `name`, inline `table`, or `path` to a
//! table file, a `subgroup` by `generators`, `elements`, or `diagonal`, and
//! either `exponents` or `weights`.

use std::fmt;
use std::path::Path;

use num_traits::ToPrimitive;
use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::abelian::FgAbGroup;
use crate::discrete::BLDatum;
use crate::error::{BlError, Result};
use crate::euclid::{canonical_span, EuclideanDatum, MeasureConvention};
use crate::exact::{parse_rational, ExtRational, Rational};
use crate::finite::{FiniteBLDatum, FiniteGroupTable};
use crate::intmat::Int;

pub const SCHEMA_VERSION: u32 = 1;

/// A validated datum of any kind.
#[derive(Clone, Debug)]
pub enum Datum {
    Discrete(BLDatum),
    Euclidean(EuclideanDatum),
    Finite(FiniteBLDatum),
}

impl Datum {
    pub fn kind(&self) -> &'static str {
        match self {
            Datum::Discrete(_) => "discrete",
            Datum::Euclidean(_) => "euclidean",
            Datum::Finite(_) => "finite-table",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ParsedDatum {
    pub datum: Datum,
    /// Normalizations applied while reading the file.
    pub diagnostics: Vec<String>,
}

struct Exponent(ExtRational);

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Exponent;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "an exponent such as \"3/2\" or \"inf\"")
            }
            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<Exponent, E> {
                s.parse::<ExtRational>().map(Exponent).map_err(E::custom)
            }
            fn visit_u64<E: de::Error>(self, n: u64) -> std::result::Result<Exponent, E> {
                self.visit_str(&n.to_string())
            }
            fn visit_i64<E: de::Error>(self, n: i64) -> std::result::Result<Exponent, E> {
                self.visit_str(&n.to_string())
            }
        }
        d.deserialize_any(V)
    }
}

struct RationalValue(Rational);

impl<'de> Deserialize<'de> for RationalValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = RationalValue;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a rational such as \"-3/4\" or an integer")
            }
            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<RationalValue, E> {
                parse_rational(s).map(RationalValue).map_err(E::custom)
            }
            fn visit_u64<E: de::Error>(self, n: u64) -> std::result::Result<RationalValue, E> {
                Ok(RationalValue(Rational::from_integer(n.into())))
            }
            fn visit_i64<E: de::Error>(self, n: i64) -> std::result::Result<RationalValue, E> {
                Ok(RationalValue(Rational::from_integer(n.into())))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Deserialize)]
struct Header {
    schema_version: u32,
    kind: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupSpec {
    #[serde(default)]
    free_rank: usize,
    #[serde(default)]
    torsion: Vec<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct DiscreteFile {
    schema_version: u32,
    kind: String,
    groups: Vec<GroupSpec>,
    #[serde(default)]
    generators: Vec<Vec<i64>>,
    exponents: Vec<Exponent>,
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum MeasureName {
    Induced,
    Parametrized,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct EuclideanFile {
    schema_version: u32,
    kind: String,
    factor_dims: Vec<usize>,
    #[serde(default)]
    basis: Vec<Vec<RationalValue>>,
    exponents: Vec<Exponent>,
    measure: Option<MeasureName>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableSpec {
    name: Option<String>,
    order: Option<usize>,
    table: Option<Vec<Vec<usize>>>,
    labels: Option<Vec<String>>,
    path: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubgroupSpec {
    generators: Option<Vec<Vec<usize>>>,
    elements: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    diagonal: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct FiniteFile {
    schema_version: u32,
    kind: String,
    groups: Vec<TableSpec>,
    subgroup: SubgroupSpec,
    exponents: Option<Vec<Exponent>>,
    weights: Option<Vec<RationalValue>>,
}

fn typed<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = match e.path().to_string().as_str() {
            "." => "$".to_string(),
            p => format!("$.{p}"),
        };
        BlError::Parse(format!("{path}: {}", e.into_inner()))
    })
}

fn at(path: impl fmt::Display, err: BlError) -> BlError {
    BlError::Parse(format!("{path}: {err}"))
}

pub fn parse_datum(path: impl AsRef<Path>) -> Result<ParsedDatum> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_datum_str(&text, path.parent())
}

/// Parses and validates a datum; `base` resolves relative table paths.
pub fn parse_datum_str(text: &str, base: Option<&Path>) -> Result<ParsedDatum> {
    let header: Header = typed(text)?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(BlError::Parse(format!(
            "$.schema_version: unsupported version {}, expected {SCHEMA_VERSION}",
            header.schema_version
        )));
    }
    match header.kind.as_str() {
        "discrete" => parse_discrete(typed(text)?),
        "euclidean" => parse_euclidean(typed(text)?),
        "finite-table" => parse_finite(typed(text)?, base),
        other => Err(BlError::Parse(format!(
            "$.kind: unknown kind {other:?}, expected discrete, euclidean, or finite-table"
        ))),
    }
}

fn parse_discrete(file: DiscreteFile) -> Result<ParsedDatum> {
    let mut diagnostics = Vec::new();
    let mut groups = Vec::new();
    let mut maps = Vec::new();
    let mut widths = Vec::new();
    for (j, spec) in file.groups.iter().enumerate() {
        if spec.torsion.contains(&0) {
            return Err(BlError::Parse(format!(
                "$.groups[{j}].torsion: modulus 0 is not allowed, use free_rank"
            )));
        }
        widths.push(spec.free_rank + spec.torsion.len());
        let chain = spec.torsion.iter().all(|&d| d >= 2) && spec.torsion.windows(2).all(|w| w[1] % w[0] == 0);
        if chain {
            let factors = spec.torsion.iter().map(|&d| Int::from(d)).collect();
            groups.push(FgAbGroup::new(spec.free_rank, factors).map_err(|e| at(format!("$.groups[{j}]"), e))?);
            maps.push(None);
        } else {
            let moduli: Vec<Int> = spec.torsion.iter().map(|&d| Int::from(d)).collect();
            let (g, hom) =
                FgAbGroup::from_cyclic_factors(spec.free_rank, &moduli).map_err(|e| at(format!("$.groups[{j}]"), e))?;
            diagnostics.push(format!(
                "$.groups[{j}].torsion: {:?} renormalized to invariant factors {:?}",
                spec.torsion,
                g.invariant_factors().iter().map(|d| d.to_string()).collect::<Vec<_>>()
            ));
            groups.push(g);
            maps.push(Some(hom));
        }
    }
    let width: usize = widths.iter().sum();
    let mut gens = Vec::new();
    for (i, row) in file.generators.iter().enumerate() {
        if row.len() != width {
            return Err(BlError::Parse(format!(
                "$.generators[{i}]: {} coordinates, expected {width}",
                row.len()
            )));
        }
        let mut out = Vec::new();
        let mut start = 0;
        for (w, map) in widths.iter().zip(&maps) {
            let block: Vec<Int> = row[start..start + w].iter().map(|&x| Int::from(x)).collect();
            match map {
                Some(h) => out.extend(h.matrix.mul_vec(&block)),
                None => out.extend(block),
            }
            start += w;
        }
        gens.push(out);
    }
    if file.exponents.len() != groups.len() {
        return Err(BlError::Parse(format!(
            "$.exponents: {} exponents for {} groups",
            file.exponents.len(),
            groups.len()
        )));
    }
    let exps = file.exponents.into_iter().map(|e| e.0).collect();
    let datum = BLDatum::from_generators(groups, &gens, exps).map_err(|e| at("$", e))?;
    Ok(ParsedDatum {
        datum: Datum::Discrete(datum),
        diagnostics,
    })
}

fn parse_euclidean(file: EuclideanFile) -> Result<ParsedDatum> {
    let n: usize = file.factor_dims.iter().sum();
    for (i, row) in file.basis.iter().enumerate() {
        if row.len() != n {
            return Err(BlError::Parse(format!("$.basis[{i}]: {} coordinates, expected {n}", row.len())));
        }
    }
    let basis = file
        .basis
        .into_iter()
        .map(|r| r.into_iter().map(|x| x.0).collect())
        .collect();
    let exps = file.exponents.into_iter().map(|e| e.0).collect();
    let datum = EuclideanDatum::new(file.factor_dims, basis, exps).map_err(|e| at("$", e))?;
    let measure = match file.measure {
        Some(MeasureName::Parametrized) => MeasureConvention::Parametrized,
        _ => MeasureConvention::Induced,
    };
    Ok(ParsedDatum {
        datum: Datum::Euclidean(datum.with_measure(measure)),
        diagnostics: Vec::new(),
    })
}

/// Reads a Cayley table file, in JSON (`order`, `table`, `labels`) or in the
/// plain text form of [`FiniteGroupTable::parse_text`].
pub fn load_table(path: impl AsRef<Path>) -> Result<FiniteGroupTable> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        let spec: TableSpec = typed(&text)?;
        table_from_spec(spec, None, "$")
    } else {
        FiniteGroupTable::parse_text(&text)
    }
}

fn table_from_spec(spec: TableSpec, base: Option<&Path>, path: &str) -> Result<FiniteGroupTable> {
    let given = [spec.name.is_some(), spec.table.is_some(), spec.path.is_some()];
    if given.iter().filter(|&&b| b).count() != 1 {
        return Err(BlError::Parse(format!("{path}: give exactly one of name, table, path")));
    }
    let g = if let Some(name) = spec.name {
        FiniteGroupTable::named(&name).map_err(|e| at(path, e))?
    } else if let Some(table) = spec.table {
        if let Some(order) = spec.order {
            if order != table.len() {
                return Err(BlError::Parse(format!(
                    "{path}.order: {order} but the table has {} rows",
                    table.len()
                )));
            }
        }
        FiniteGroupTable::from_table(table).map_err(|e| at(format!("{path}.table"), e))?
    } else {
        let rel = spec.path.expect("checked above");
        let full = base.map(|b| b.join(&rel)).unwrap_or_else(|| rel.clone().into());
        load_table(&full).map_err(|e| at(format!("{path}.path"), e))?
    };
    match spec.labels {
        Some(l) => g.with_labels(l).map_err(|e| at(format!("{path}.labels"), e)),
        None => Ok(g),
    }
}

fn parse_finite(file: FiniteFile, base: Option<&Path>) -> Result<ParsedDatum> {
    let groups = file
        .groups
        .into_iter()
        .enumerate()
        .map(|(j, spec)| table_from_spec(spec, base, &format!("$.groups[{j}]")))
        .collect::<Result<Vec<_>>>()?;
    let m = groups.len();
    let weights = match (file.exponents, file.weights) {
        (Some(p), None) => {
            let p: Vec<ExtRational> = p.into_iter().map(|e| e.0).collect();
            FiniteBLDatum::weights_from_exponents(&p)
        }
        (None, Some(w)) => w.into_iter().map(|x| x.0).collect(),
        _ => return Err(BlError::Parse("$: give exactly one of exponents, weights".into())),
    };
    if weights.len() != m {
        return Err(BlError::Parse(format!("$: {} exponents for {m} groups", weights.len())));
    }
    let sub = file.subgroup;
    let datum = match (sub.generators, sub.elements, sub.diagonal) {
        (Some(gens), None, false) => FiniteBLDatum::from_generators(groups, &gens, weights),
        (None, Some(elems), false) => FiniteBLDatum::new(groups, elems, weights),
        (None, None, true) => {
            if groups.windows(2).any(|w| w[0] != w[1]) {
                return Err(BlError::Parse("$.subgroup.diagonal: the factor groups differ".into()));
            }
            FiniteBLDatum::diagonal(&groups[0], weights)
        }
        _ => return Err(BlError::Parse("$.subgroup: give exactly one of generators, elements, diagonal".into())),
    }
    .map_err(|e| at("$.subgroup", e))?;
    Ok(ParsedDatum {
        datum: Datum::Finite(datum),
        diagnostics: Vec::new(),
    })
}

fn int_json(x: &Int) -> Result<Value> {
    x.to_i64()
        .map(Value::from)
        .ok_or_else(|| BlError::Capacity {
            what: "integer entry for serialization".into(),
            size: u128::MAX,
            cap: i64::MAX as u128,
        })
}

/// Rows of integers as JSON arrays.
pub fn int_rows_json(rows: &[Vec<Int>]) -> Result<Value> {
    rows.iter()
        .map(|r| r.iter().map(int_json).collect::<Result<Vec<_>>>().map(Value::from))
        .collect::<Result<Vec<_>>>()
        .map(Value::from)
}

/// The canonical file form: invariant factors, reduced subgroup bases, and
/// explicit tables. Reading it back yields the same canonical form.
pub fn serialize_datum(datum: &Datum) -> Result<Value> {
    Ok(match datum {
        Datum::Discrete(d) => json!({
            "schema_version": SCHEMA_VERSION,
            "kind": "discrete",
            "groups": d.groups().iter().map(|g| json!({
                "free_rank": g.free_rank(),
                "torsion": g.invariant_factors().iter().map(|x| x.to_u64().unwrap_or(0)).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "generators": int_rows_json(d.subgroup().basis())?,
            "exponents": d.exponents().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        }),
        Datum::Euclidean(d) => {
            let basis = canonical_span(d.basis(), d.ambient_dim());
            json!({
                "schema_version": SCHEMA_VERSION,
                "kind": "euclidean",
                "factor_dims": d.factor_dims(),
                "basis": basis.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "exponents": d.exponents().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                "measure": match d.measure() {
                    MeasureConvention::Induced => "induced",
                    MeasureConvention::Parametrized => "parametrized",
                },
            })
        }
        Datum::Finite(d) => {
            let mut elements = d.elements().to_vec();
            elements.sort();
            json!({
                "schema_version": SCHEMA_VERSION,
                "kind": "finite-table",
                "groups": d.groups().iter().map(|g| {
                    let mut o = json!({"order": g.order(), "table": g.table()});
                    if let Some(l) = g.labels() {
                        o["labels"] = json!(l);
                    }
                    o
                }).collect::<Vec<_>>(),
                "subgroup": {"elements": elements},
                "weights": d.weights().iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            })
        }
    })
}

/// SHA-256 of the compact canonical form, in hex.
pub fn datum_digest(datum: &Datum) -> Result<String> {
    let canon = serde_json::to_string(&serialize_datum(datum)?).expect("JSON values serialize");
    Ok(hex::encode(Sha256::digest(canon.as_bytes())))
}
