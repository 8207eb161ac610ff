//! Details on demand for one element-pair heatmap: per-cell element
//! histograms, per-cell detail heatmaps, and the full list of subset
//! combinations behind a cell.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::binning::{item_weight, pair_counts, CellKey};
use crate::config::{AxisLayout, ViewConfig};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::set_model::{Dim, SetPairTable, SetValue};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetailSelection {
    #[serde(rename = "eA")]
    pub e_a: usize,
    #[serde(rename = "eB")]
    pub e_b: usize,
    #[serde(default)]
    pub config: ViewConfig,
}

/// Raw item counts for one cell of the selected heatmap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DetailCell {
    pub k: Option<usize>,
    pub l: Option<usize>,
    pub col_label: String,
    pub row_label: String,
    /// Items qualifying for the cell.
    pub items: u64,
    /// Per A-element count of qualifying items containing it.
    pub hist_a: Vec<u64>,
    pub hist_b: Vec<u64>,
    /// `heat[a][b]`: qualifying items containing both `a` and `b`.
    pub heat: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DetailResult {
    #[serde(rename = "eA")]
    pub e_a: usize,
    #[serde(rename = "eB")]
    pub e_b: usize,
    /// Element labels indexing `hist_a` and the rows of `heat`.
    pub labels_a: Vec<String>,
    pub labels_b: Vec<String>,
    /// Cells in column-major order of the selected heatmap.
    pub cells: Vec<DetailCell>,
}

impl DetailResult {
    pub fn cell(&self, k: Option<usize>, l: Option<usize>) -> Option<&DetailCell> {
        self.cells.iter().find(|c| c.k == k && c.l == l)
    }
}

fn check_element(table: &SetPairTable, dim: Dim, e: usize) -> Result<()> {
    let len = table.universe(dim).len();
    if e >= len {
        return Err(Error::InvalidSelection(format!(
            "element {e} outside universe {dim} of size {len}"
        )));
    }
    Ok(())
}

/// Detail histograms and heatmaps for the heatmap `(e_a, e_b)`; a collapsed or
/// capped selection inherits the merged cell structure.
pub fn detail_views(table: &SetPairTable, selection: &DetailSelection) -> Result<DetailResult> {
    let config = &selection.config;
    config.validate(table)?;
    check_element(table, Dim::A, selection.e_a)?;
    check_element(table, Dim::B, selection.e_b)?;
    let cols = AxisLayout::for_dim(table, config, Dim::A);
    let rows = AxisLayout::for_dim(table, config, Dim::B);
    let size_a = table.universe_a().len();
    let size_b = table.universe_b().len();

    let col_bins: Vec<usize> = (0..cols.len())
        .filter(|&i| cols.bins()[i].element == Some(selection.e_a))
        .collect();
    let row_bins: Vec<usize> = (0..rows.len())
        .filter(|&i| rows.bins()[i].element == Some(selection.e_b))
        .collect();
    let mut cells: Vec<DetailCell> = Vec::with_capacity(col_bins.len() * row_bins.len());
    for &c in &col_bins {
        for &r in &row_bins {
            cells.push(DetailCell {
                k: cols.bins()[c].card(),
                l: rows.bins()[r].card(),
                col_label: cols.bins()[c].label.clone(),
                row_label: rows.bins()[r].label.clone(),
                items: 0,
                hist_a: vec![0; size_a],
                hist_b: vec![0; size_b],
                heat: vec![vec![0; size_b]; size_a],
            });
        }
    }

    for ((a, b), count) in pair_counts(table) {
        if !a.contains(selection.e_a) || !b.contains(selection.e_b) {
            continue;
        }
        let c = cols.bin_of(selection.e_a, a.cardinality() - 1);
        let r = rows.bin_of(selection.e_b, b.cardinality() - 1);
        let ci = col_bins.iter().position(|&x| x == c).expect("bin of anchor element");
        let ri = row_bins.iter().position(|&x| x == r).expect("bin of anchor element");
        let cell = &mut cells[ci * row_bins.len() + ri];
        cell.items += count;
        for x in a.iter() {
            cell.hist_a[x] += count;
        }
        for y in b.iter() {
            cell.hist_b[y] += count;
        }
        for x in a.iter() {
            for y in b.iter() {
                cell.heat[x][y] += count;
            }
        }
    }

    Ok(DetailResult {
        e_a: selection.e_a,
        e_b: selection.e_b,
        labels_a: (0..size_a).map(|i| table.universe_a().label(i)).collect(),
        labels_b: (0..size_b).map(|i| table.universe_b().label(i)).collect(),
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CombinationEntry {
    pub set_a: SetValue,
    pub set_b: SetValue,
    pub label_a: String,
    pub label_b: String,
    pub item_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CombinationList {
    pub cell: CellKey,
    /// Row rule vs column rule, e.g. `Fun+2 vs Music+2`.
    pub rule_label: String,
    pub total_value: Rational,
    /// Sorted by item count descending, ties by `(S_A, S_B)` bits ascending.
    pub entries: Vec<CombinationEntry>,
}

/// Every distinct `(S_A, S_B)` pair contributing to `cell`.
pub fn enumerate_combinations(table: &SetPairTable, config: &ViewConfig, cell: &CellKey) -> Result<CombinationList> {
    config.validate(table)?;
    let cols = AxisLayout::for_dim(table, config, Dim::A);
    let rows = AxisLayout::for_dim(table, config, Dim::B);
    let invalid = || Error::InvalidKey(format!("{cell:?} does not address a cell of this view"));
    let col = &cols.bins()[cols.find(cell.col, cell.k).ok_or_else(invalid)?];
    let row = &rows.bins()[rows.find(cell.row, cell.l).ok_or_else(invalid)?];

    let mut total = Rational::zero();
    let mut entries = Vec::new();
    for ((a, b), count) in pair_counts(table) {
        if !col.matches(a) || !row.matches(b) {
            continue;
        }
        let (num, den) = item_weight(a, b, config.counting);
        total += Rational::new((num * count) as i64, den as i64);
        entries.push(CombinationEntry {
            set_a: a,
            set_b: b,
            label_a: a.label(table.universe_a()),
            label_b: b.label(table.universe_b()),
            item_count: count,
        });
    }
    entries.sort_by(|x, y| {
        y.item_count
            .cmp(&x.item_count)
            .then((x.set_a, x.set_b).cmp(&(y.set_a, y.set_b)))
    });
    Ok(CombinationList {
        cell: *cell,
        rule_label: format!("{} vs {}", row.label, col.label),
        total_value: total,
        entries,
    })
}

/// Plain-text tooltip: the rule, the cell total, then one ranked line per
/// combination with its item count.
pub fn format_tooltip(list: &CombinationList) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", list.rule_label);
    let _ = writeln!(
        out,
        "total: {} ({})",
        list.total_value,
        list.total_value.to_decimal_string(3)
    );
    let width = list
        .entries
        .iter()
        .map(|e| e.label_b.chars().count() + e.label_a.chars().count() + 8)
        .max()
        .unwrap_or(0);
    for (rank, e) in list.entries.iter().enumerate() {
        let pair = format!("{{{}}} vs {{{}}}", e.label_b, e.label_a);
        let pad = width.saturating_sub(pair.chars().count());
        let _ = writeln!(out, "{:>3}. {pair}{} {}", rank + 1, " ".repeat(pad), e.item_count);
    }
    out
}
