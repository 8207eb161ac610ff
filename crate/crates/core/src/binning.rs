//! The heatmap grid: per element-pair heatmaps resolved by subset cardinality,
//! the empty-set row and column, and both marginal histograms.
//!
//! Items are first grouped by their exact `(S_A, S_B)` pair with a parallel
//! integer count, so the result does not depend on item order or on how the
//! scan is partitioned. Each distinct pair is then spread over the bins it
//! touches; values stay exact rationals throughout.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{AxisBin, AxisLayout, Counting, ViewConfig};
use crate::error::Result;
use crate::rational::Rational;
use crate::set_model::{Dim, SetPairTable, SetValue};

/// Grid coordinate: anchor elements (`None` is the empty set) and cardinality
/// indices (`k` means `|S| = k + 1`).
///
/// Indices are read against the view configuration: under a cap `t` the index
/// `t` stands for every cardinality index `≥ t`, and a collapsed element has
/// no index at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub col: Option<usize>,
    pub row: Option<usize>,
    pub k: Option<usize>,
    pub l: Option<usize>,
}

impl CellKey {
    pub fn new(col: usize, row: usize, k: usize, l: usize) -> Self {
        CellKey {
            col: Some(col),
            row: Some(row),
            k: Some(k),
            l: Some(l),
        }
    }

    /// Key of a fully collapsed element-pair heatmap.
    pub fn collapsed(col: usize, row: usize) -> Self {
        CellKey {
            col: Some(col),
            row: Some(row),
            k: None,
            l: None,
        }
    }

    pub fn empty_col(row: usize, l: usize) -> Self {
        CellKey {
            col: None,
            row: Some(row),
            k: None,
            l: Some(l),
        }
    }

    pub fn empty_row(col: usize, k: usize) -> Self {
        CellKey {
            col: Some(col),
            row: None,
            k: Some(k),
            l: None,
        }
    }

    pub const EMPTY_EMPTY: CellKey = CellKey {
        col: None,
        row: None,
        k: None,
        l: None,
    };
}

/// Weight of one item in each of the cells it touches.
pub(crate) fn item_weight(a: SetValue, b: SetValue, counting: Counting) -> (u64, u64) {
    match counting {
        Counting::ItemCentric => (1, (a.cardinality().max(1) * b.cardinality().max(1)) as u64),
        Counting::ElementCentric => (1, 1),
    }
}

/// Fine-grained cells (no cap, no collapse) an item contributes to.
pub fn cell_contributions(a: SetValue, b: SetValue, counting: Counting) -> Vec<(CellKey, Rational)> {
    let (num, den) = item_weight(a, b, counting);
    let weight = Rational::new(num as i64, den as i64);
    let cols: Vec<(Option<usize>, Option<usize>)> = if a.is_empty() {
        vec![(None, None)]
    } else {
        a.iter().map(|e| (Some(e), Some(a.cardinality() - 1))).collect()
    };
    let rows: Vec<(Option<usize>, Option<usize>)> = if b.is_empty() {
        vec![(None, None)]
    } else {
        b.iter().map(|e| (Some(e), Some(b.cardinality() - 1))).collect()
    };
    let mut out = Vec::with_capacity(cols.len() * rows.len());
    for &(col, k) in &cols {
        for &(row, l) in &rows {
            out.push((CellKey { col, row, k, l }, weight.clone()));
        }
    }
    out
}

/// One bar of a marginal histogram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MarginalBin {
    pub value: Rational,
    /// Distinct items falling into the bin.
    pub item_count: u64,
    /// Item-centric single-cardinality bins read as `items/cardinality`.
    pub display_as_fraction: bool,
}

impl MarginalBin {
    /// Text shown on the bar: `2/2` for fraction bins, an integer in
    /// element-centric mode and a two-place decimal for merged bins.
    pub fn label(&self, bin: &AxisBin) -> String {
        if self.display_as_fraction {
            match bin.card() {
                Some(k) => format!("{}/{}", self.item_count, k + 1),
                None => self.item_count.to_string(),
            }
        } else if self.value.is_integer() {
            self.value.to_string()
        } else {
            self.value.to_decimal_string(2)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "wire::AggregateWire", try_from = "wire::AggregateWire")]
pub struct AggregateResult {
    pub counting: Counting,
    /// Number of items scanned.
    pub n: usize,
    pub size_a: usize,
    pub size_b: usize,
    pub columns: Vec<AxisBin>,
    pub rows: Vec<AxisBin>,
    /// Column-major grid, `columns.len() * rows.len()` values.
    pub cells: Vec<Rational>,
    pub marginal_a: Vec<MarginalBin>,
    pub marginal_b: Vec<MarginalBin>,
    pub total: Rational,
    pub show_empty_a: bool,
    pub show_empty_b: bool,
}

impl AggregateResult {
    pub fn cell(&self, col: usize, row: usize) -> &Rational {
        &self.cells[col * self.rows.len() + row]
    }

    pub fn key_at(&self, col: usize, row: usize) -> CellKey {
        let c = &self.columns[col];
        let r = &self.rows[row];
        CellKey {
            col: c.element,
            row: r.element,
            k: c.card(),
            l: r.card(),
        }
    }

    pub fn position_of(&self, key: &CellKey) -> Option<(usize, usize)> {
        let col = self
            .columns
            .iter()
            .position(|b| b.element == key.col && b.card() == key.k)?;
        let row = self
            .rows
            .iter()
            .position(|b| b.element == key.row && b.card() == key.l)?;
        Some((col, row))
    }

    pub fn get(&self, key: &CellKey) -> Option<&Rational> {
        self.position_of(key).map(|(c, r)| self.cell(c, r))
    }

    pub fn is_visible(&self, col: usize, row: usize) -> bool {
        (self.show_empty_a || self.columns[col].element.is_some())
            && (self.show_empty_b || self.rows[row].element.is_some())
    }

    /// Every cell in column-major order, with its grid position.
    pub fn iter_cells(&self) -> impl Iterator<Item = (usize, usize, CellKey, &Rational)> + '_ {
        let rows = self.rows.len();
        self.cells.iter().enumerate().map(move |(i, v)| {
            let (c, r) = (i / rows, i % rows);
            (c, r, self.key_at(c, r), v)
        })
    }

    pub fn visible_cells(&self) -> impl Iterator<Item = (usize, usize, CellKey, &Rational)> + '_ {
        self.iter_cells().filter(|&(c, r, _, _)| self.is_visible(c, r))
    }

    pub fn cell_map(&self) -> BTreeMap<CellKey, Rational> {
        self.iter_cells().map(|(_, _, k, v)| (k, v.clone())).collect()
    }

    /// Keys of cells whose value is exactly zero.
    pub fn empty_flags(&self) -> BTreeSet<CellKey> {
        self.iter_cells()
            .filter(|(_, _, _, v)| v.is_zero())
            .map(|(_, _, k, _)| k)
            .collect()
    }

    pub fn is_empty_cell(&self, key: &CellKey) -> Option<bool> {
        self.get(key).map(Rational::is_zero)
    }

    pub fn axis(&self, dim: Dim) -> &[AxisBin] {
        match dim {
            Dim::A => &self.columns,
            Dim::B => &self.rows,
        }
    }

    pub fn marginals(&self, dim: Dim) -> &[MarginalBin] {
        match dim {
            Dim::A => &self.marginal_a,
            Dim::B => &self.marginal_b,
        }
    }

    pub fn marginal(&self, dim: Dim, element: Option<usize>, card: Option<usize>) -> Option<&MarginalBin> {
        let pos = self
            .axis(dim)
            .iter()
            .position(|b| b.element == element && b.card() == card)?;
        Some(&self.marginals(dim)[pos])
    }

    pub fn marginal_total(&self, dim: Dim) -> Rational {
        self.marginals(dim).iter().map(|m| &m.value).sum()
    }

    /// Marginal bins keyed by `(element, card index)`.
    pub fn marginal_map(&self, dim: Dim) -> BTreeMap<(Option<usize>, Option<usize>), (Rational, u64)> {
        self.axis(dim)
            .iter()
            .zip(self.marginals(dim))
            .map(|(b, m)| ((b.element, b.card()), (m.value.clone(), m.item_count)))
            .collect()
    }
}

mod wire {
    //! Serialized form: cells are listed with their keys and a decimal
    //! rendering next to the exact value.

    use super::*;

    pub(super) const DECIMAL_PLACES: usize = 6;

    #[derive(Serialize, Deserialize)]
    #[serde(rename_all = "camelCase")]
    pub(super) struct WireCell {
        #[serde(flatten)]
        key: CellKey,
        value: Rational,
        decimal: String,
    }

    #[derive(Serialize, Deserialize)]
    #[serde(rename_all = "camelCase")]
    pub(super) struct WireMarginal {
        element: Option<usize>,
        card: Option<usize>,
        label: String,
        value: Rational,
        decimal: String,
        item_count: u64,
        display_as_fraction: bool,
    }

    #[derive(Serialize, Deserialize)]
    #[serde(rename_all = "camelCase")]
    pub(super) struct AggregateWire {
        counting: Counting,
        n: usize,
        size_a: usize,
        size_b: usize,
        show_empty_a: bool,
        show_empty_b: bool,
        columns: Vec<AxisBin>,
        rows: Vec<AxisBin>,
        cells: Vec<WireCell>,
        marginal_a: Vec<WireMarginal>,
        marginal_b: Vec<WireMarginal>,
        total: Rational,
        total_decimal: String,
    }

    fn marginals(axis: &[AxisBin], bins: &[MarginalBin]) -> Vec<WireMarginal> {
        axis.iter()
            .zip(bins)
            .map(|(bin, m)| WireMarginal {
                element: bin.element,
                card: bin.card(),
                label: m.label(bin),
                value: m.value.clone(),
                decimal: m.value.to_decimal_string(DECIMAL_PLACES),
                item_count: m.item_count,
                display_as_fraction: m.display_as_fraction,
            })
            .collect()
    }

    impl From<AggregateResult> for AggregateWire {
        fn from(r: AggregateResult) -> Self {
            let cells = r
                .iter_cells()
                .map(|(_, _, key, value)| WireCell {
                    key,
                    value: value.clone(),
                    decimal: value.to_decimal_string(DECIMAL_PLACES),
                })
                .collect();
            AggregateWire {
                counting: r.counting,
                n: r.n,
                size_a: r.size_a,
                size_b: r.size_b,
                show_empty_a: r.show_empty_a,
                show_empty_b: r.show_empty_b,
                cells,
                marginal_a: marginals(&r.columns, &r.marginal_a),
                marginal_b: marginals(&r.rows, &r.marginal_b),
                total_decimal: r.total.to_decimal_string(DECIMAL_PLACES),
                total: r.total,
                columns: r.columns,
                rows: r.rows,
            }
        }
    }

    fn unwire(axis: &[AxisBin], bins: Vec<WireMarginal>, dim: Dim) -> std::result::Result<Vec<MarginalBin>, String> {
        if axis.len() != bins.len() {
            return Err(format!(
                "marginal {dim} has {} bins for {} axis bins",
                bins.len(),
                axis.len()
            ));
        }
        axis.iter()
            .zip(bins)
            .map(|(bin, m)| {
                if (m.element, m.card) != (bin.element, bin.card()) {
                    return Err(format!("marginal {dim} bin out of order at {:?}", bin.label));
                }
                Ok(MarginalBin {
                    value: m.value,
                    item_count: m.item_count,
                    display_as_fraction: m.display_as_fraction,
                })
            })
            .collect()
    }

    impl TryFrom<AggregateWire> for AggregateResult {
        type Error = String;

        fn try_from(w: AggregateWire) -> std::result::Result<Self, String> {
            let expected = w.columns.len() * w.rows.len();
            if w.cells.len() != expected {
                return Err(format!(
                    "{} cells for a {}x{} grid",
                    w.cells.len(),
                    w.columns.len(),
                    w.rows.len()
                ));
            }
            let marginal_a = unwire(&w.columns, w.marginal_a, Dim::A)?;
            let marginal_b = unwire(&w.rows, w.marginal_b, Dim::B)?;
            let mut result = AggregateResult {
                counting: w.counting,
                n: w.n,
                size_a: w.size_a,
                size_b: w.size_b,
                columns: w.columns,
                rows: w.rows,
                cells: Vec::with_capacity(expected),
                marginal_a,
                marginal_b,
                total: w.total,
                show_empty_a: w.show_empty_a,
                show_empty_b: w.show_empty_b,
            };
            let rows = result.rows.len();
            for (i, cell) in w.cells.into_iter().enumerate() {
                if cell.key != result.key_at(i / rows, i % rows) {
                    return Err(format!("cell {:?} out of grid order", cell.key));
                }
                result.cells.push(cell.value);
            }
            Ok(result)
        }
    }
}

/// Counts items per distinct `(S_A, S_B)` pair.
pub(crate) fn pair_counts(table: &SetPairTable) -> Vec<((SetValue, SetValue), u64)> {
    let counts = table
        .items_a()
        .par_iter()
        .zip(table.items_b().par_iter())
        .fold(HashMap::new, |mut acc: HashMap<(SetValue, SetValue), u64>, (&a, &b)| {
            *acc.entry((a, b)).or_default() += 1;
            acc
        })
        .reduce(HashMap::new, |mut left, right| {
            for (key, count) in right {
                *left.entry(key).or_default() += count;
            }
            left
        });
    let mut counts: Vec<_> = counts.into_iter().collect();
    counts.sort_unstable();
    counts
}

/// Computes the grid and marginals for `table` under `config`.
///
/// Caps fold before collapsing; both are partition sums so every merged bin
/// is the exact sum of its constituents.
pub fn aggregate(table: &SetPairTable, config: &ViewConfig) -> Result<AggregateResult> {
    config.validate(table)?;
    let pairs = pair_counts(table);
    Ok(aggregate_pairs(table, config, &pairs))
}

fn accumulate(acc: &HashMap<(usize, u64), u64>, len: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); len];
    let mut entries: Vec<_> = acc.iter().collect();
    entries.sort_unstable();
    for (&(idx, den), &count) in entries {
        out[idx] += Rational::new(count as i64, den as i64);
    }
    out
}

pub(crate) fn aggregate_pairs(
    table: &SetPairTable,
    config: &ViewConfig,
    pairs: &[((SetValue, SetValue), u64)],
) -> AggregateResult {
    let cols = AxisLayout::for_dim(table, config, Dim::A);
    let rows = AxisLayout::for_dim(table, config, Dim::B);
    let n_rows = rows.len();
    let item_centric = config.counting == Counting::ItemCentric;

    // (bin index, weight denominator) -> summed item count
    let mut cell_acc: HashMap<(usize, u64), u64> = HashMap::new();
    let mut marg_acc = [HashMap::new(), HashMap::new()];
    let mut marg_items = [vec![0u64; cols.len()], vec![0u64; rows.len()]];

    for &((a, b), count) in pairs {
        let (_, den) = item_weight(a, b, config.counting);
        for c in cols.bins_of(a) {
            for r in rows.bins_of(b) {
                *cell_acc.entry((c * n_rows + r, den)).or_default() += count;
            }
        }
        for (side, (layout, set)) in [(&cols, a), (&rows, b)].into_iter().enumerate() {
            for bin in layout.bins_of(set) {
                marg_items[side][bin] += count;
                let den = if item_centric {
                    set.cardinality().max(1) as u64
                } else if bin == AxisLayout::EMPTY_BIN {
                    // an empty subset holds no elements
                    continue;
                } else {
                    1
                };
                *marg_acc[side].entry((bin, den)).or_default() += count;
            }
        }
    }

    let cells = accumulate(&cell_acc, cols.len() * n_rows);
    let total = cells.iter().sum();
    let [acc_a, acc_b] = marg_acc;
    let [items_a, items_b] = marg_items;
    let marginals = |layout: &AxisLayout, acc: &HashMap<(usize, u64), u64>, items: Vec<u64>| {
        accumulate(acc, layout.len())
            .into_iter()
            .zip(items)
            .zip(layout.bins())
            .map(|((value, item_count), bin)| MarginalBin {
                value,
                item_count,
                display_as_fraction: item_centric && !bin.rule.is_merged(),
            })
            .collect::<Vec<_>>()
    };
    let marginal_a = marginals(&cols, &acc_a, items_a);
    let marginal_b = marginals(&rows, &acc_b, items_b);

    AggregateResult {
        counting: config.counting,
        n: table.len(),
        size_a: table.universe_a().len(),
        size_b: table.universe_b().len(),
        columns: cols.bins().to_vec(),
        rows: rows.bins().to_vec(),
        cells,
        marginal_a,
        marginal_b,
        total,
        show_empty_a: config.show_empty_a,
        show_empty_b: config.show_empty_b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::apply_cap;
    use crate::oracle::sample_table;
    use crate::set_model::ElementUniverse;

    const MUSIC: usize = 0;
    const FAMILY: usize = 1;
    const TRAFFIC: usize = 2;
    const FUN: usize = 0;
    const RESP: usize = 1;

    #[test]
    fn contributions_of_two_by_two_item() {
        let a = SetValue::from_indices([MUSIC, FAMILY]);
        let b = SetValue::from_indices([FUN, RESP]);
        let got = cell_contributions(a, b, Counting::ItemCentric);
        let quarter = Rational::new(1, 4);
        assert_eq!(
            got,
            vec![
                (CellKey::new(MUSIC, FUN, 1, 1), quarter.clone()),
                (CellKey::new(MUSIC, RESP, 1, 1), quarter.clone()),
                (CellKey::new(FAMILY, FUN, 1, 1), quarter.clone()),
                (CellKey::new(FAMILY, RESP, 1, 1), quarter),
            ]
        );
        let got = cell_contributions(a, b, Counting::ElementCentric);
        assert_eq!(got.len(), 4);
        assert!(got.iter().all(|(_, w)| *w == Rational::one()));
    }

    #[test]
    fn contributions_with_empty_sets() {
        let b = SetValue::from_indices([FUN, RESP]);
        let got = cell_contributions(SetValue::from_indices([TRAFFIC]), b, Counting::ItemCentric);
        assert_eq!(
            got,
            vec![
                (CellKey::new(TRAFFIC, FUN, 0, 1), Rational::new(1, 2)),
                (CellKey::new(TRAFFIC, RESP, 0, 1), Rational::new(1, 2)),
            ]
        );
        let got = cell_contributions(SetValue::EMPTY, SetValue::EMPTY, Counting::ItemCentric);
        assert_eq!(got, vec![(CellKey::EMPTY_EMPTY, Rational::one())]);
        let got = cell_contributions(SetValue::EMPTY, b, Counting::ItemCentric);
        assert_eq!(
            got,
            vec![
                (CellKey::empty_col(FUN, 1), Rational::new(1, 2)),
                (CellKey::empty_col(RESP, 1), Rational::new(1, 2)),
            ]
        );
    }

    #[test]
    fn sample_values() {
        let result = aggregate(&sample_table(), &ViewConfig::default()).unwrap();
        let q = Rational::new(1, 4);
        for (a, b) in [(MUSIC, FUN), (MUSIC, RESP), (FAMILY, FUN), (FAMILY, RESP)] {
            assert_eq!(result.get(&CellKey::new(a, b, 1, 1)), Some(&q));
        }
        assert_eq!(result.get(&CellKey::new(TRAFFIC, RESP, 0, 0)), Some(&Rational::one()));
        assert_eq!(
            result.get(&CellKey::new(TRAFFIC, RESP, 0, 1)),
            Some(&Rational::new(1, 2))
        );
        assert_eq!(
            result.get(&CellKey::new(TRAFFIC, FUN, 0, 1)),
            Some(&Rational::new(1, 2))
        );

        let resp_plus_one = result.marginal(Dim::B, Some(RESP), Some(1)).unwrap();
        assert_eq!(resp_plus_one.value, Rational::one());
        assert_eq!(resp_plus_one.item_count, 2);
        assert!(resp_plus_one.display_as_fraction);
        let pos = result
            .rows
            .iter()
            .position(|b| b.element == Some(RESP) && b.card() == Some(1))
            .unwrap();
        assert_eq!(resp_plus_one.label(&result.rows[pos]), "2/2");

        assert_eq!(result.total, Rational::from(3));
        assert_eq!(result.marginal_total(Dim::A), Rational::from(3));
        assert_eq!(result.marginal_total(Dim::B), Rational::from(3));
    }

    #[test]
    fn element_centric_marginals_count_items_once_per_element() {
        let result = aggregate(&sample_table(), &ViewConfig::element_centric()).unwrap();
        assert_eq!(result.marginal_total(Dim::A), Rational::from(4));
        assert_eq!(result.marginal_total(Dim::B), Rational::from(5));
        let m = result.marginal(Dim::A, Some(TRAFFIC), Some(0)).unwrap();
        assert_eq!(
            (m.value.clone(), m.item_count, m.display_as_fraction),
            (Rational::from(2), 2, false)
        );
        assert_eq!(result.get(&CellKey::new(MUSIC, FUN, 1, 1)), Some(&Rational::one()));
    }

    #[test]
    fn empty_singleton_table() {
        let u = ElementUniverse::new("A", ["x"]).unwrap();
        let v = ElementUniverse::new("B", ["Cheap"]).unwrap();
        let table = SetPairTable::new(u, v, vec![SetValue::EMPTY], vec![SetValue::from_indices([0])]).unwrap();
        let result = aggregate(&table, &ViewConfig::default()).unwrap();
        assert_eq!(result.total, Rational::one());
        assert_eq!(result.marginal(Dim::A, None, None).unwrap().value, Rational::one());
        assert_eq!(result.get(&CellKey::empty_col(0, 0)), Some(&Rational::one()));
    }

    #[test]
    fn empty_table_is_all_zero() {
        let table = sample_table().filter_items(|_| false);
        let result = aggregate(&table, &ViewConfig::default()).unwrap();
        assert_eq!(result.n, 0);
        assert!(result.cells.iter().all(Rational::is_zero));
        assert_eq!(result.empty_flags().len(), result.cells.len());
    }

    #[test]
    fn collapse_sums_whole_heatmap() {
        let table = sample_table();
        let full = aggregate(&table, &ViewConfig::default()).unwrap();
        let collapsed = aggregate(&table, &ViewConfig::default().collapse_all(&table)).unwrap();
        for a in 0..5 {
            for b in 0..5 {
                let expected: Rational = full
                    .iter_cells()
                    .filter(|(_, _, key, _)| key.col == Some(a) && key.row == Some(b))
                    .map(|(_, _, _, v)| v.clone())
                    .sum();
                assert_eq!(collapsed.get(&CellKey::collapsed(a, b)), Some(&expected));
            }
        }
        let m = collapsed.marginal(Dim::B, Some(RESP), None).unwrap();
        assert!(!m.display_as_fraction);
        assert_eq!(m.item_count, 3);
        assert_eq!(m.value, Rational::new(2, 1));
    }

    #[test]
    fn cap_folds_tail() {
        let table = sample_table();
        let config = apply_cap(&ViewConfig::default(), Dim::B, 1).unwrap();
        let capped = aggregate(&table, &config).unwrap();
        let tail = capped.get(&CellKey::new(MUSIC, FUN, 1, 1)).unwrap();
        assert_eq!(tail, &Rational::new(1, 4));
        assert_eq!(capped.rows.iter().filter(|b| b.element == Some(FUN)).count(), 2);
        let fun_tail = capped.marginal(Dim::B, Some(FUN), Some(1)).unwrap();
        assert!(!fun_tail.display_as_fraction);
        assert_eq!(capped.total, Rational::from(3));
    }

    #[test]
    fn config_errors() {
        let table = sample_table();
        let config = ViewConfig {
            cap_a: Some(0),
            ..ViewConfig::default()
        };
        assert_eq!(aggregate(&table, &config).unwrap_err().code(), "InvalidCap");
        let config = ViewConfig::default().with_collapsed(Dim::B, 9);
        assert_eq!(aggregate(&table, &config).unwrap_err().code(), "UniverseMismatch");
    }
}
