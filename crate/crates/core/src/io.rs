//! Table and aggregate formats.
//!
//! Tables are read from delimited text (one set-valued cell per dimension,
//! elements separated by a secondary delimiter) or from JSON. The JSON table
//! document also carries both universes, so it round-trips exactly; delimited
//! text only carries element names, so unused elements, negation flags and
//! display order need supplied universes to survive a round trip.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::binning::AggregateResult;
use crate::error::{Error, Result};
use crate::set_model::{element_index, parse_set_value, ElementUniverse, SetPairTable, SetValue, UnknownElementPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TableFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct TableFormatSpec {
    /// Column holding `S_A`; the first column when absent.
    pub column_a: Option<String>,
    /// Column holding `S_B`; the second column when absent.
    pub column_b: Option<String>,
    pub set_delimiter: char,
    pub cell_delimiter: char,
    /// Cell text read as the empty set besides the empty string.
    pub empty_token: String,
    /// Columns kept as pass-through attributes; all others when absent.
    pub extra_columns: Option<Vec<String>>,
    pub policy: UnknownElementPolicy,
    pub universe_a: Option<ElementUniverse>,
    pub universe_b: Option<ElementUniverse>,
}

impl Default for TableFormatSpec {
    fn default() -> Self {
        TableFormatSpec {
            column_a: None,
            column_b: None,
            set_delimiter: ';',
            cell_delimiter: ',',
            empty_token: String::new(),
            extra_columns: None,
            policy: UnknownElementPolicy::AutoRegister,
            universe_a: None,
            universe_b: None,
        }
    }
}

impl TableFormatSpec {
    fn validate(&self) -> Result<u8> {
        if self.set_delimiter == self.cell_delimiter {
            return Err(Error::Spec("set delimiter must differ from the cell delimiter".into()));
        }
        u8::try_from(self.cell_delimiter)
            .ok()
            .filter(u8::is_ascii)
            .ok_or_else(|| Error::Spec("cell delimiter must be an ASCII character".into()))
    }

    fn is_empty_cell(&self, text: &str) -> bool {
        let t = text.trim();
        t.is_empty() || (!self.empty_token.is_empty() && t == self.empty_token)
    }
}

/// Sniffs the format from the first non-blank byte.
pub fn detect_format(bytes: &[u8]) -> TableFormat {
    match bytes.iter().find(|b| !b.is_ascii_whitespace()) {
        Some(b'{') | Some(b'[') => TableFormat::Json,
        _ => TableFormat::Csv,
    }
}

pub fn read_table(bytes: &[u8], spec: &TableFormatSpec) -> Result<SetPairTable> {
    match detect_format(bytes) {
        TableFormat::Csv => read_csv(bytes, spec),
        TableFormat::Json => read_json(bytes, spec),
    }
}

fn csv_error(err: &csv::Error) -> Error {
    let (line, column) = match err.kind() {
        csv::ErrorKind::UnequalLengths { pos: Some(pos), .. } => (pos.line() as usize, 0),
        csv::ErrorKind::Utf8 { pos: Some(pos), err } => (pos.line() as usize, err.field() + 1),
        _ => (err.position().map_or(0, |p| p.line() as usize), 0),
    };
    Error::parse(line, column, err.to_string())
}

fn start_universe(supplied: &Option<ElementUniverse>, name: &str) -> Result<ElementUniverse> {
    match supplied {
        Some(u) => Ok(u.clone()),
        None => ElementUniverse::new(name, Vec::<String>::new()),
    }
}

/// Natural order: digit runs compare by value, so `a2` sorts before `a10`.
fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut x, mut y) = (a, b);
    loop {
        let run = |s: &str| {
            let digits = s.chars().next().is_some_and(|c| c.is_ascii_digit());
            let len = s.find(|c: char| c.is_ascii_digit() != digits).unwrap_or(s.len());
            (digits, len)
        };
        match (x.is_empty(), y.is_empty()) {
            (true, true) => return a.cmp(b),
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let ((dx, lx), (dy, ly)) = (run(x), run(y));
        let (px, py) = (&x[..lx], &y[..ly]);
        let ord = if dx && dy {
            let (tx, ty) = (px.trim_start_matches('0'), py.trim_start_matches('0'));
            tx.len().cmp(&ty.len()).then_with(|| tx.cmp(ty))
        } else {
            px.cmp(py)
        };
        if ord != Ordering::Equal {
            return ord;
        }
        (x, y) = (&x[lx..], &y[ly..]);
    }
}

/// Renumbers an inferred universe into natural name order so the result does
/// not depend on the order rows were read in.
fn sort_inferred(universe: ElementUniverse, items: &mut [SetValue]) -> Result<ElementUniverse> {
    let mut order: Vec<usize> = (0..universe.len()).collect();
    order.sort_by(|&i, &j| natural_cmp(&universe.elements()[i], &universe.elements()[j]));
    let mut new_index = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        new_index[old] = new;
    }
    for item in items.iter_mut() {
        *item = SetValue::from_indices(item.iter().map(|e| new_index[e]));
    }
    ElementUniverse::new(
        universe.name().to_string(),
        order.iter().map(|&i| universe.elements()[i].clone()),
    )
}

/// Applies [`sort_inferred`] to each dimension whose universe was not supplied.
fn finish_inferred(
    spec: &TableFormatSpec,
    (universe_a, mut items_a): (ElementUniverse, Vec<SetValue>),
    (universe_b, mut items_b): (ElementUniverse, Vec<SetValue>),
    extras: Vec<BTreeMap<String, String>>,
) -> Result<SetPairTable> {
    let universe_a = match spec.universe_a {
        Some(_) => universe_a,
        None => sort_inferred(universe_a, &mut items_a)?,
    };
    let universe_b = match spec.universe_b {
        Some(_) => universe_b,
        None => sort_inferred(universe_b, &mut items_b)?,
    };
    SetPairTable::with_extras(universe_a, universe_b, items_a, items_b, extras)
}

fn read_csv(bytes: &[u8], spec: &TableFormatSpec) -> Result<SetPairTable> {
    let delimiter = spec.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .from_reader(bytes);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(&e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let find = |wanted: &Option<String>, default: usize| -> Result<usize> {
        match wanted {
            Some(name) => headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::parse(1, 0, format!("missing column {name:?}"))),
            None if default < headers.len() => Ok(default),
            None => Err(Error::parse(1, 0, "expected at least two columns")),
        }
    };
    let col_a = find(&spec.column_a, 0)?;
    let col_b = find(&spec.column_b, 1)?;
    if col_a == col_b {
        return Err(Error::parse(1, col_a + 1, "set columns A and B must differ"));
    }
    let extra_cols: Vec<usize> = match &spec.extra_columns {
        Some(names) => names.iter().map(|n| find(&Some(n.clone()), 0)).collect::<Result<_>>()?,
        None => (0..headers.len()).filter(|&i| i != col_a && i != col_b).collect(),
    };

    let mut universe_a = start_universe(&spec.universe_a, &headers[col_a])?;
    let mut universe_b = start_universe(&spec.universe_b, &headers[col_b])?;
    let (mut items_a, mut items_b, mut extras) = (Vec::new(), Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let parse = |col: usize, universe: &mut ElementUniverse| -> Result<SetValue> {
            let text = &record[col];
            if spec.is_empty_cell(text) {
                return Ok(SetValue::EMPTY);
            }
            parse_set_value(text, spec.set_delimiter, universe, spec.policy).map_err(|e| match e {
                Error::UniverseOverflow { .. } | Error::UnknownElement { .. } => e,
                other => Error::parse(line, col + 1, other.to_string()),
            })
        };
        items_a.push(parse(col_a, &mut universe_a)?);
        items_b.push(parse(col_b, &mut universe_b)?);
        extras.push(
            extra_cols
                .iter()
                .map(|&c| (headers[c].clone(), record[c].to_string()))
                .collect(),
        );
    }
    finish_inferred(spec, (universe_a, items_a), (universe_b, items_b), extras)
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct JsonItem {
    a: Vec<String>,
    b: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    extra: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct JsonTable {
    universe_a: ElementUniverse,
    universe_b: ElementUniverse,
    items: Vec<JsonItem>,
}

fn json_error(err: &serde_json::Error) -> Error {
    Error::parse(err.line(), err.column(), err.to_string())
}

fn names(set: SetValue, universe: &ElementUniverse) -> Vec<String> {
    set.iter().map(|i| universe.elements()[i].clone()).collect()
}

fn strict_set(names: &[String], universe: &ElementUniverse) -> Result<SetValue> {
    names
        .iter()
        .try_fold(SetValue::EMPTY, |acc, name| match universe.index_of(name) {
            Some(i) => Ok(acc.with(i)),
            None => Err(Error::UnknownElement {
                universe: universe.name().to_string(),
                name: name.clone(),
            }),
        })
}

fn read_json(bytes: &[u8], spec: &TableFormatSpec) -> Result<SetPairTable> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| json_error(&e))?;
    if value.is_array() {
        return read_json_records(value, spec);
    }
    let doc: JsonTable = serde_json::from_value(value).map_err(|e| Error::parse(0, 0, e.to_string()))?;
    let rebuild = |u: ElementUniverse| {
        ElementUniverse::from_parts(
            u.name().to_string(),
            u.elements().to_vec(),
            u.display_order().to_vec(),
            u.negated().to_vec(),
        )
    };
    let universe_a = rebuild(doc.universe_a)?;
    let universe_b = rebuild(doc.universe_b)?;
    let mut items_a = Vec::with_capacity(doc.items.len());
    let mut items_b = Vec::with_capacity(doc.items.len());
    let mut extras = Vec::with_capacity(doc.items.len());
    for item in doc.items {
        items_a.push(strict_set(&item.a, &universe_a)?);
        items_b.push(strict_set(&item.b, &universe_b)?);
        extras.push(item.extra);
    }
    SetPairTable::with_extras(universe_a, universe_b, items_a, items_b, extras)
}

/// Array of records: each set column is a delimited string, an array of
/// names or null. Without explicit columns the keys `A` and `B` are used.
fn read_json_records(value: Value, spec: &TableFormatSpec) -> Result<SetPairTable> {
    spec.validate()?;
    let key_a = spec.column_a.clone().unwrap_or_else(|| "A".into());
    let key_b = spec.column_b.clone().unwrap_or_else(|| "B".into());
    let mut universe_a = start_universe(&spec.universe_a, &key_a)?;
    let mut universe_b = start_universe(&spec.universe_b, &key_b)?;
    let (mut items_a, mut items_b, mut extras) = (Vec::new(), Vec::new(), Vec::new());
    let Value::Array(records) = value else { unreachable!() };
    for (i, record) in records.into_iter().enumerate() {
        let Value::Object(map) = record else {
            return Err(Error::parse(0, 0, format!("record {i} is not an object")));
        };
        let parse = |key: &str, universe: &mut ElementUniverse| -> Result<SetValue> {
            match map.get(key) {
                None | Some(Value::Null) => Ok(SetValue::EMPTY),
                Some(Value::String(s)) if spec.is_empty_cell(s) => Ok(SetValue::EMPTY),
                Some(Value::String(s)) => parse_set_value(s, spec.set_delimiter, universe, spec.policy),
                Some(Value::Array(parts)) => parts.iter().try_fold(SetValue::EMPTY, |acc, p| match p {
                    Value::String(s) => Ok(acc.with(element_index(s.trim(), universe, spec.policy)?)),
                    _ => Err(Error::parse(0, 0, format!("record {i}: element names must be strings"))),
                }),
                Some(_) => Err(Error::parse(
                    0,
                    0,
                    format!("record {i}: {key} must be a string, array or null"),
                )),
            }
        };
        items_a.push(parse(&key_a, &mut universe_a)?);
        items_b.push(parse(&key_b, &mut universe_b)?);
        let keep = |k: &String| match &spec.extra_columns {
            Some(cols) => cols.contains(k),
            None => *k != key_a && *k != key_b,
        };
        extras.push(
            map.iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, v)| {
                    let text = match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    (k.clone(), text)
                })
                .collect(),
        );
    }
    finish_inferred(spec, (universe_a, items_a), (universe_b, items_b), extras)
}

pub fn write_table(table: &SetPairTable, format: TableFormat, spec: &TableFormatSpec) -> Result<Vec<u8>> {
    match format {
        TableFormat::Json => {
            let doc = JsonTable {
                universe_a: table.universe_a().clone(),
                universe_b: table.universe_b().clone(),
                items: table
                    .iter()
                    .map(|(id, a, b)| JsonItem {
                        a: names(a, table.universe_a()),
                        b: names(b, table.universe_b()),
                        extra: table.extras()[id].clone(),
                    })
                    .collect(),
            };
            Ok(to_json_bytes(&doc))
        }
        TableFormat::Csv => write_csv(table, spec),
    }
}

fn write_csv(table: &SetPairTable, spec: &TableFormatSpec) -> Result<Vec<u8>> {
    let delimiter = spec.validate()?;
    let extra_keys: BTreeSet<&String> = table.extras().iter().flat_map(|m| m.keys()).collect();
    let mut writer = csv::WriterBuilder::new().delimiter(delimiter).from_writer(Vec::new());
    let head_a = spec.column_a.as_deref().unwrap_or(table.universe_a().name());
    let head_b = spec.column_b.as_deref().unwrap_or(table.universe_b().name());
    let sep = spec.set_delimiter.to_string();
    let io_err = |e: csv::Error| Error::Spec(e.to_string());
    writer
        .write_record(
            [head_a, head_b]
                .into_iter()
                .chain(extra_keys.iter().map(|k| k.as_str())),
        )
        .map_err(io_err)?;
    for (id, a, b) in table.iter() {
        let cell_a = names(a, table.universe_a()).join(&sep);
        let cell_b = names(b, table.universe_b()).join(&sep);
        let extras = &table.extras()[id];
        let rest = extra_keys.iter().map(|k| extras.get(*k).map_or("", String::as_str));
        writer
            .write_record([cell_a.as_str(), cell_b.as_str()].into_iter().chain(rest))
            .map_err(io_err)?;
    }
    writer.into_inner().map_err(|e| Error::Spec(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum AggregateFormat {
    #[default]
    Json,
    Csv,
}

/// Pretty JSON with a trailing newline. Every JSON output of the CLI and
/// the service goes through here.
pub fn to_json_bytes<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable value");
    out.push(b'\n');
    out
}

const AGGREGATE_CSV_HEADER: [&str; 9] = ["col", "row", "k", "l", "colLabel", "rowLabel", "num", "den", "decimal"];

/// JSON lists every cell in column-major display order; CSV lists only
/// non-zero cells in the same order.
pub fn write_aggregate(result: &AggregateResult, format: AggregateFormat) -> Vec<u8> {
    match format {
        AggregateFormat::Json => to_json_bytes(result),
        AggregateFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(AGGREGATE_CSV_HEADER).expect("in-memory write");
            let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
            for (c, r, key, value) in result.iter_cells() {
                if value.is_zero() {
                    continue;
                }
                writer
                    .write_record([
                        opt(key.col),
                        opt(key.row),
                        opt(key.k),
                        opt(key.l),
                        result.columns[c].label.clone(),
                        result.rows[r].label.clone(),
                        value.numer().to_string(),
                        value.denom().to_string(),
                        value.to_decimal_string(6),
                    ])
                    .expect("in-memory write");
            }
            writer.into_inner().expect("in-memory write")
        }
    }
}

pub fn read_aggregate(bytes: &[u8]) -> Result<AggregateResult> {
    serde_json::from_slice(bytes).map_err(|e| json_error(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binning::{aggregate, CellKey};
    use crate::config::ViewConfig;
    use crate::oracle::{self, sample_table};
    use crate::set_model::Dim;
    use crate::Rational;
    use proptest::prelude::*;

    #[test]
    fn two_line_csv() {
        let t = read_table(b"A,B\nMusic;Family,Fun;Resp", &TableFormatSpec::default()).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.universe_a().elements(), ["Family", "Music"]);
        assert_eq!(t.items_a()[0], SetValue::from_indices([0, 1]));
        assert_eq!(t.items_b()[0], SetValue::from_indices([0, 1]));
        assert_eq!(t.universe_a().name(), "A");
    }

    #[test]
    fn inferred_universes_use_natural_order() {
        let mut names = vec!["a10", "b", "a2", "a02x", "a", "A1"];
        names.sort_by(|x, y| natural_cmp(x, y));
        assert_eq!(names, ["A1", "a", "a2", "a02x", "a10", "b"]);

        let forward = read_table(b"A,B\na10,x\na2;a1,y;x\n", &TableFormatSpec::default()).unwrap();
        let backward = read_table(b"A,B\na2;a1,y;x\na10,x\n", &TableFormatSpec::default()).unwrap();
        assert_eq!(forward.universe_a().elements(), ["a1", "a2", "a10"]);
        assert_eq!(forward.universe_a(), backward.universe_a());
        assert_eq!(forward.items_a()[0], SetValue::from_indices([2]));
        assert_eq!(forward.items_a()[1], backward.items_a()[0]);
    }

    #[test]
    fn empty_cells_and_extras() {
        let t = read_table(
            b"in,out,trip\nMusic,,t1\n-,Loud,t2\n",
            &TableFormatSpec {
                empty_token: "-".into(),
                ..TableFormatSpec::default()
            },
        )
        .unwrap();
        assert_eq!(t.items_b()[0], SetValue::EMPTY);
        assert_eq!(t.items_a()[1], SetValue::EMPTY);
        assert_eq!(t.extras()[1]["trip"], "t2");
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = read_table(b"A,B\nx,y\nx,y,z\n", &TableFormatSpec::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let strict = TableFormatSpec {
            policy: UnknownElementPolicy::Strict,
            universe_a: Some(ElementUniverse::new("A", ["x"]).unwrap()),
            universe_b: Some(ElementUniverse::new("B", ["y"]).unwrap()),
            ..TableFormatSpec::default()
        };
        let err = read_table(b"A,B\nx,q\n", &strict).unwrap_err();
        assert_eq!(err.code(), "UnknownElement");
        let err = read_table(b"{\"universeA\": 3", &TableFormatSpec::default()).unwrap_err();
        assert_eq!(err.code(), "ParseError");
        let err = read_table(
            b"A,B\n",
            &TableFormatSpec {
                set_delimiter: ',',
                ..TableFormatSpec::default()
            },
        )
        .unwrap_err();
        assert_eq!(err.code(), "SpecError");
    }

    #[test]
    fn json_records() {
        let text = br#"[{"A": "Music;Family", "B": ["Fun", "Resp"], "id": 7}, {"A": null, "B": ""}]"#;
        let t = read_table(text, &TableFormatSpec::default()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.items_b()[0].cardinality(), 2);
        assert!(t.items_a()[1].is_empty());
        assert_eq!(t.extras()[0]["id"], "7");
    }

    #[test]
    fn json_table_keeps_negation_and_order() {
        let t = sample_table()
            .negate_element(Dim::B, 4)
            .unwrap()
            .reorder(Dim::A, vec![4, 3, 2, 1, 0])
            .unwrap();
        let bytes = write_table(&t, TableFormat::Json, &TableFormatSpec::default()).unwrap();
        assert_eq!(read_table(&bytes, &TableFormatSpec::default()).unwrap(), t);
    }

    #[test]
    fn aggregate_json_contains_quarter() {
        let result = aggregate(&sample_table(), &ViewConfig::default()).unwrap();
        let bytes = write_aggregate(&result, AggregateFormat::Json);
        let doc: Value = serde_json::from_slice(&bytes).unwrap();
        let cell = doc["cells"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["col"] == 0 && c["row"] == 0 && c["k"] == 1 && c["l"] == 1)
            .unwrap();
        assert_eq!(cell["value"]["num"], 1);
        assert_eq!(cell["value"]["den"], 4);
        assert_eq!(cell["decimal"], "0.250000");
        assert_eq!(read_aggregate(&bytes).unwrap(), result);
    }

    #[test]
    fn aggregate_csv() {
        let empty = sample_table().filter_items(|_| false);
        let result = aggregate(&empty, &ViewConfig::default()).unwrap();
        let text = String::from_utf8(write_aggregate(&result, AggregateFormat::Csv)).unwrap();
        assert_eq!(text, "col,row,k,l,colLabel,rowLabel,num,den,decimal\n");

        let result = aggregate(&sample_table(), &ViewConfig::default()).unwrap();
        let text = String::from_utf8(write_aggregate(&result, AggregateFormat::Csv)).unwrap();
        assert!(text.contains("\n0,0,1,1,Music+1,Fun+1,1,4,0.250000\n"));
        let rows = text.lines().count() - 1;
        assert_eq!(rows, result.cells.iter().filter(|v| !v.is_zero()).count());
    }

    #[test]
    fn tampered_aggregate_is_rejected() {
        let result = aggregate(&sample_table(), &ViewConfig::default()).unwrap();
        let mut doc: Value = serde_json::from_slice(&write_aggregate(&result, AggregateFormat::Json)).unwrap();
        doc["cells"].as_array_mut().unwrap().swap(0, 1);
        let bytes = serde_json::to_vec(&doc).unwrap();
        assert_eq!(read_aggregate(&bytes).unwrap_err().code(), "ParseError");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn table_round_trips(seed in any::<u64>(), n in 0usize..60, sa in 1usize..7, sb in 1usize..7) {
            let table = oracle::random_table(seed, sa, sb, n, 0.4);
            let spec = TableFormatSpec::default();
            let json = write_table(&table, TableFormat::Json, &spec).unwrap();
            prop_assert_eq!(&read_table(&json, &spec).unwrap(), &table);
            let csv = write_table(&table, TableFormat::Csv, &spec).unwrap();
            let with_universes = TableFormatSpec {
                universe_a: Some(table.universe_a().clone()),
                universe_b: Some(table.universe_b().clone()),
                policy: UnknownElementPolicy::Strict,
                ..spec
            };
            prop_assert_eq!(&read_table(&csv, &with_universes).unwrap(), &table);
            prop_assert_eq!(write_table(&table, TableFormat::Csv, &with_universes).unwrap(), csv);
        }

        #[test]
        fn aggregate_round_trips(seed in any::<u64>(), n in 0usize..60) {
            let table = oracle::random_table(seed, 3, 4, n, 0.4);
            let config = oracle::random_config(seed.rotate_left(7), 3, 4);
            let result = aggregate(&table, &config).unwrap();
            let bytes = write_aggregate(&result, AggregateFormat::Json);
            prop_assert_eq!(read_aggregate(&bytes).unwrap(), result);
        }
    }

    #[test]
    fn huge_rationals_survive() {
        let mut result = aggregate(&sample_table(), &ViewConfig::default()).unwrap();
        let big = num_bigint::BigInt::from(3u8).pow(60);
        result.cells[0] = Rational::from_big(num_bigint::BigInt::from(1), big);
        let back = read_aggregate(&write_aggregate(&result, AggregateFormat::Json)).unwrap();
        assert_eq!(back.cells[0], result.cells[0]);
        assert_eq!(back.get(&CellKey::EMPTY_EMPTY), result.get(&CellKey::EMPTY_EMPTY));
    }
}
