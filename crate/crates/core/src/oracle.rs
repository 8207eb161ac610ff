//! Naive reference implementations used to cross-check the optimized paths.
//!
//! Everything here walks items one at a time and derives bin keys directly
//! from the configuration, without the axis layout used by the production
//! code. Results are plain maps keyed like the real outputs.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::binning::CellKey;
use crate::config::{Counting, ViewConfig};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::set_model::{Dim, ElementUniverse, SetPairTable, SetValue};

pub type MarginalMap = BTreeMap<(Option<usize>, Option<usize>), (Rational, u64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleAggregate {
    pub cells: BTreeMap<CellKey, Rational>,
    pub marginal_a: MarginalMap,
    pub marginal_b: MarginalMap,
    pub total: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DetailCounts {
    pub items: u64,
    pub hist_a: Vec<u64>,
    pub hist_b: Vec<u64>,
    pub heat: Vec<Vec<u64>>,
}

/// Key index for cardinality index `card_idx` of `element`.
pub fn card_key(size: usize, cap: Option<usize>, collapsed: bool, card_idx: usize) -> Option<usize> {
    if collapsed {
        return None;
    }
    match cap {
        Some(t) if t + 1 < size && card_idx >= t => Some(t),
        _ => Some(card_idx),
    }
}

fn key_count(size: usize, cap: Option<usize>) -> usize {
    match cap {
        Some(t) if t + 1 < size => t + 1,
        _ => size,
    }
}

fn check(config: &ViewConfig, size_a: usize, size_b: usize) -> Result<()> {
    for (cap, collapsed, size) in [
        (config.cap_a, &config.collapsed_a, size_a),
        (config.cap_b, &config.collapsed_b, size_b),
    ] {
        if cap == Some(0) {
            return Err(Error::InvalidCap(0));
        }
        if let Some(&e) = collapsed.iter().find(|&&e| e >= size) {
            return Err(Error::UniverseMismatch(format!("collapsed element {e}")));
        }
    }
    Ok(())
}

/// All `(element, card)` keys of one axis, empty set first.
fn axis_keys(
    size: usize,
    cap: Option<usize>,
    collapsed: &std::collections::BTreeSet<usize>,
) -> Vec<(Option<usize>, Option<usize>)> {
    let mut keys = vec![(None, None)];
    for e in 0..size {
        if collapsed.contains(&e) {
            keys.push((Some(e), None));
        } else {
            for k in 0..key_count(size, cap) {
                keys.push((Some(e), Some(k)));
            }
        }
    }
    keys
}

/// `(element, card)` keys a set contributes to on one axis.
fn set_keys(
    set: SetValue,
    size: usize,
    cap: Option<usize>,
    collapsed: &std::collections::BTreeSet<usize>,
) -> Vec<(Option<usize>, Option<usize>)> {
    let c = set.cardinality();
    if c == 0 {
        return vec![(None, None)];
    }
    (0..size)
        .filter(|&e| set.contains(e))
        .map(|e| (Some(e), card_key(size, cap, collapsed.contains(&e), c - 1)))
        .collect()
}

fn weight(a: SetValue, b: SetValue, counting: Counting) -> Rational {
    match counting {
        Counting::ElementCentric => Rational::one(),
        Counting::ItemCentric => {
            let m = a.cardinality().max(1) as i64;
            let n = b.cardinality().max(1) as i64;
            Rational::new(1, m * n)
        }
    }
}

fn empty_aggregate(size_a: usize, size_b: usize, config: &ViewConfig) -> OracleAggregate {
    let cols = axis_keys(size_a, config.cap_a, &config.collapsed_a);
    let rows = axis_keys(size_b, config.cap_b, &config.collapsed_b);
    let mut cells = BTreeMap::new();
    for &(col, k) in &cols {
        for &(row, l) in &rows {
            cells.insert(CellKey { col, row, k, l }, Rational::zero());
        }
    }
    let marg = |keys: Vec<_>| keys.into_iter().map(|key| (key, (Rational::zero(), 0))).collect();
    OracleAggregate {
        cells,
        marginal_a: marg(cols),
        marginal_b: marg(rows),
        total: Rational::zero(),
    }
}

fn add_pair(
    out: &mut OracleAggregate,
    a: SetValue,
    b: SetValue,
    size_a: usize,
    size_b: usize,
    config: &ViewConfig,
    times: &Rational,
) {
    let ka = set_keys(a, size_a, config.cap_a, &config.collapsed_a);
    let kb = set_keys(b, size_b, config.cap_b, &config.collapsed_b);
    let w = weight(a, b, config.counting) * times.clone();
    for &(col, k) in &ka {
        for &(row, l) in &kb {
            *out.cells.get_mut(&CellKey { col, row, k, l }).expect("enumerated key") += &w;
            out.total += &w;
        }
    }
    for (keys, set, marginals) in [(&ka, a, &mut out.marginal_a), (&kb, b, &mut out.marginal_b)] {
        let value = match (config.counting, set.cardinality()) {
            (Counting::ElementCentric, 0) => Rational::zero(),
            (Counting::ElementCentric, _) => Rational::one(),
            (Counting::ItemCentric, c) => Rational::new(1, c.max(1) as i64),
        };
        for key in keys {
            let entry = marginals.get_mut(key).expect("enumerated key");
            entry.0 += value.clone() * times.clone();
            entry.1 += 1;
        }
    }
}

/// Item-by-item aggregate of `table`.
pub fn aggregate_map(table: &SetPairTable, config: &ViewConfig) -> Result<OracleAggregate> {
    let (sa, sb) = (table.universe_a().len(), table.universe_b().len());
    check(config, sa, sb)?;
    let mut out = empty_aggregate(sa, sb, config);
    let one = Rational::one();
    for (_, a, b) in table.iter() {
        add_pair(&mut out, a, b, sa, sb, config, &one);
    }
    Ok(out)
}

/// Expected cell values under independent uniform subsets, by summing over
/// every subset pair.
pub fn expected_by_enumeration(
    size_a: usize,
    size_b: usize,
    n: usize,
    config: &ViewConfig,
) -> BTreeMap<CellKey, Rational> {
    let mut out = empty_aggregate(size_a, size_b, config);
    let pairs = 1i64 << (size_a + size_b);
    let share = Rational::new(n as i64, pairs);
    for a in 0..1u64 << size_a {
        for b in 0..1u64 << size_b {
            add_pair(
                &mut out,
                SetValue::from_bits(a),
                SetValue::from_bits(b),
                size_a,
                size_b,
                config,
                &share,
            );
        }
    }
    out.cells
}

fn numbered_universe(prefix: &str, size: usize) -> ElementUniverse {
    ElementUniverse::new(prefix, (0..size).map(|i| format!("{prefix}{i}"))).expect("distinct names")
}

/// One item for every `(S_A, S_B)` pair over universes of the given sizes.
pub fn complete_enumeration_table(size_a: usize, size_b: usize) -> SetPairTable {
    let mut items_a = Vec::new();
    let mut items_b = Vec::new();
    for a in 0..1u64 << size_a {
        for b in 0..1u64 << size_b {
            items_a.push(SetValue::from_bits(a));
            items_b.push(SetValue::from_bits(b));
        }
    }
    SetPairTable::new(
        numbered_universe("a", size_a),
        numbered_universe("b", size_b),
        items_a,
        items_b,
    )
    .expect("consistent table")
}

/// Detail counts for every cell of heatmap `(e_a, e_b)`, keyed by `(k, l)`.
pub fn detail_counts(
    table: &SetPairTable,
    e_a: usize,
    e_b: usize,
    config: &ViewConfig,
) -> BTreeMap<(Option<usize>, Option<usize>), DetailCounts> {
    let (sa, sb) = (table.universe_a().len(), table.universe_b().len());
    let fresh = || DetailCounts {
        items: 0,
        hist_a: vec![0; sa],
        hist_b: vec![0; sb],
        heat: vec![vec![0; sb]; sa],
    };
    let ks: Vec<Option<usize>> = if config.collapsed_a.contains(&e_a) {
        vec![None]
    } else {
        (0..key_count(sa, config.cap_a)).map(Some).collect()
    };
    let ls: Vec<Option<usize>> = if config.collapsed_b.contains(&e_b) {
        vec![None]
    } else {
        (0..key_count(sb, config.cap_b)).map(Some).collect()
    };
    let mut out = BTreeMap::new();
    for &k in &ks {
        for &l in &ls {
            out.insert((k, l), fresh());
        }
    }
    for (_, a, b) in table.iter() {
        if !a.contains(e_a) || !b.contains(e_b) {
            continue;
        }
        let k = card_key(sa, config.cap_a, config.collapsed_a.contains(&e_a), a.cardinality() - 1);
        let l = card_key(sb, config.cap_b, config.collapsed_b.contains(&e_b), b.cardinality() - 1);
        let d = out.get_mut(&(k, l)).expect("enumerated key");
        d.items += 1;
        for x in 0..sa {
            if a.contains(x) {
                d.hist_a[x] += 1;
                for y in 0..sb {
                    if b.contains(y) {
                        d.heat[x][y] += 1;
                    }
                }
            }
        }
        for y in 0..sb {
            if b.contains(y) {
                d.hist_b[y] += 1;
            }
        }
    }
    out
}

/// Distinct subset pairs behind `cell` with their item counts, in tooltip
/// order, and the cell total.
pub fn combinations(
    table: &SetPairTable,
    config: &ViewConfig,
    cell: &CellKey,
) -> (Vec<(SetValue, SetValue, u64)>, Rational) {
    let (sa, sb) = (table.universe_a().len(), table.universe_b().len());
    let hit = |set: SetValue, dim: Dim, element: Option<usize>, card: Option<usize>| -> bool {
        let (size, cap, collapsed) = match dim {
            Dim::A => (sa, config.cap_a, &config.collapsed_a),
            Dim::B => (sb, config.cap_b, &config.collapsed_b),
        };
        set_keys(set, size, cap, collapsed).contains(&(element, card))
    };
    let mut counts: BTreeMap<(SetValue, SetValue), u64> = BTreeMap::new();
    let mut total = Rational::zero();
    for (_, a, b) in table.iter() {
        if hit(a, Dim::A, cell.col, cell.k) && hit(b, Dim::B, cell.row, cell.l) {
            *counts.entry((a, b)).or_default() += 1;
            total += weight(a, b, config.counting);
        }
    }
    let mut list: Vec<_> = counts.into_iter().map(|((a, b), c)| (a, b, c)).collect();
    list.sort_by(|x, y| y.2.cmp(&x.2).then((x.0, x.1).cmp(&(y.0, y.1))));
    (list, total)
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Seeded random table; each element is included with probability `density`.
pub fn random_table(seed: u64, size_a: usize, size_b: usize, n: usize, density: f64) -> SetPairTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |size: usize| {
        let mut bits = 0u64;
        for e in 0..size {
            if unit(&mut rng) < density {
                bits |= 1 << e;
            }
        }
        SetValue::from_bits(bits)
    };
    let mut items_a = Vec::with_capacity(n);
    let mut items_b = Vec::with_capacity(n);
    for _ in 0..n {
        items_a.push(draw(size_a));
        items_b.push(draw(size_b));
    }
    SetPairTable::new(
        numbered_universe("a", size_a),
        numbered_universe("b", size_b),
        items_a,
        items_b,
    )
    .expect("consistent table")
}

/// Seeded random view configuration with caps and collapses.
pub fn random_config(seed: u64, size_a: usize, size_b: usize) -> ViewConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut config = ViewConfig {
        counting: if rng.next_u64() & 1 == 0 {
            Counting::ItemCentric
        } else {
            Counting::ElementCentric
        },
        ..ViewConfig::default()
    };
    for (size, cap, collapsed) in [
        (size_a, &mut config.cap_a, &mut config.collapsed_a),
        (size_b, &mut config.cap_b, &mut config.collapsed_b),
    ] {
        if size > 0 && rng.next_u64() % 3 == 0 {
            *cap = Some(1 + (rng.next_u64() % size as u64) as usize);
        }
        for e in 0..size {
            if rng.next_u64() % 4 == 0 {
                collapsed.insert(e);
            }
        }
    }
    config.show_empty_a = rng.next_u64() % 4 != 0;
    config.show_empty_b = rng.next_u64() % 4 != 0;
    config
}

/// Three drivers with small input and output sets.
pub fn sample_table() -> SetPairTable {
    let input = ElementUniverse::new("Input", ["Music", "Family", "Traffic", "Sport", "Aggr"]).expect("names");
    let output = ElementUniverse::new("Output", ["Fun", "Resp", "Fast", "Cheap", "Loud"]).expect("names");
    SetPairTable::new(
        input,
        output,
        vec![
            SetValue::from_indices([0, 1]),
            SetValue::from_indices([2]),
            SetValue::from_indices([2]),
        ],
        vec![
            SetValue::from_indices([0, 1]),
            SetValue::from_indices([1]),
            SetValue::from_indices([0, 1]),
        ],
    )
    .expect("consistent table")
}
