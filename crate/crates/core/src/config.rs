//! View configuration and the per-axis bin layout it induces.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set_model::{Dim, ElementUniverse, SetPairTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Counting {
    /// Every item contributes a total weight of one.
    #[default]
    ItemCentric,
    /// Every element-pair occurrence contributes one.
    ElementCentric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Transform {
    #[default]
    Raw,
    RankStandard,
    RankDense,
    Deviation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ViewConfig {
    pub counting: Counting,
    pub cap_a: Option<usize>,
    pub cap_b: Option<usize>,
    pub collapsed_a: BTreeSet<usize>,
    pub collapsed_b: BTreeSet<usize>,
    pub show_empty_a: bool,
    pub show_empty_b: bool,
    pub transform: Transform,
    pub color_scale: String,
    /// Maps rank 1 to the lightest instead of the darkest color.
    pub invert_rank: bool,
}

impl Default for ViewConfig {
    fn default() -> Self {
        ViewConfig {
            counting: Counting::ItemCentric,
            cap_a: None,
            cap_b: None,
            collapsed_a: BTreeSet::new(),
            collapsed_b: BTreeSet::new(),
            show_empty_a: true,
            show_empty_b: true,
            transform: Transform::Raw,
            color_scale: "neutral".to_string(),
            invert_rank: false,
        }
    }
}

impl ViewConfig {
    pub fn element_centric() -> Self {
        ViewConfig {
            counting: Counting::ElementCentric,
            ..ViewConfig::default()
        }
    }

    pub fn cap(&self, dim: Dim) -> Option<usize> {
        match dim {
            Dim::A => self.cap_a,
            Dim::B => self.cap_b,
        }
    }

    pub fn collapsed(&self, dim: Dim) -> &BTreeSet<usize> {
        match dim {
            Dim::A => &self.collapsed_a,
            Dim::B => &self.collapsed_b,
        }
    }

    pub fn show_empty(&self, dim: Dim) -> bool {
        match dim {
            Dim::A => self.show_empty_a,
            Dim::B => self.show_empty_b,
        }
    }

    /// Collapses every element of both dimensions of `table`.
    pub fn collapse_all(mut self, table: &SetPairTable) -> Self {
        self.collapsed_a = (0..table.universe_a().len()).collect();
        self.collapsed_b = (0..table.universe_b().len()).collect();
        self
    }

    pub fn with_collapsed(mut self, dim: Dim, element: usize) -> Self {
        match dim {
            Dim::A => self.collapsed_a.insert(element),
            Dim::B => self.collapsed_b.insert(element),
        };
        self
    }

    pub fn validate(&self, table: &SetPairTable) -> Result<()> {
        self.validate_sizes(table.universe_a().len(), table.universe_b().len())
    }

    pub fn validate_sizes(&self, len_a: usize, len_b: usize) -> Result<()> {
        for (dim, len) in [(Dim::A, len_a), (Dim::B, len_b)] {
            if let Some(t) = self.cap(dim) {
                if t == 0 {
                    return Err(Error::InvalidCap(t));
                }
            }
            if let Some(&e) = self.collapsed(dim).iter().find(|&&e| e >= len) {
                return Err(Error::UniverseMismatch(format!(
                    "collapsed element {e} outside universe {dim} of size {len}"
                )));
            }
        }
        Ok(())
    }
}

/// Returns `config` with a cardinality cap `t` on `dim`: cardinality indices
/// `≥ t` fold into one tail bin labelled `+t…`.
pub fn apply_cap(config: &ViewConfig, dim: Dim, t: usize) -> Result<ViewConfig> {
    if t == 0 {
        return Err(Error::InvalidCap(t));
    }
    let mut config = config.clone();
    match dim {
        Dim::A => config.cap_a = Some(t),
        Dim::B => config.cap_b = Some(t),
    }
    Ok(config)
}

/// Which cardinality indices (`|S| - 1`) a bin covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum CardRule {
    /// The empty-set bin.
    Empty,
    Exact {
        k: usize,
    },
    /// Tail bin of a cap: every index `≥ k`.
    AtLeast {
        k: usize,
    },
    /// Collapsed element: every index.
    Any,
}

impl CardRule {
    pub fn matches(self, card_idx: usize) -> bool {
        match self {
            CardRule::Empty => false,
            CardRule::Exact { k } => card_idx == k,
            CardRule::AtLeast { k } => card_idx >= k,
            CardRule::Any => true,
        }
    }

    /// Index carried in a [`CellKey`](crate::CellKey) for this rule.
    pub fn key_index(self) -> Option<usize> {
        match self {
            CardRule::Exact { k } | CardRule::AtLeast { k } => Some(k),
            CardRule::Empty | CardRule::Any => None,
        }
    }

    /// True when the bin merges more than one cardinality.
    pub fn is_merged(self) -> bool {
        matches!(self, CardRule::AtLeast { .. } | CardRule::Any)
    }

    /// Rule of the bin addressed by `(element, card)` on an axis of `size`
    /// elements, or `None` when no such bin exists under the configuration.
    pub fn resolve(
        size: usize,
        cap: Option<usize>,
        collapsed: &BTreeSet<usize>,
        element: Option<usize>,
        card: Option<usize>,
    ) -> Option<CardRule> {
        let Some(e) = element else {
            return card.is_none().then_some(CardRule::Empty);
        };
        if e >= size {
            return None;
        }
        if collapsed.contains(&e) {
            return card.is_none().then_some(CardRule::Any);
        }
        let k = card?;
        match cap.filter(|&t| t < size - 1) {
            Some(t) if k == t => Some(CardRule::AtLeast { k }),
            Some(t) if k > t => None,
            _ if k < size => Some(CardRule::Exact { k }),
            _ => None,
        }
    }

    pub fn suffix(self) -> String {
        match self {
            CardRule::Empty | CardRule::Exact { k: 0 } => String::new(),
            CardRule::Exact { k } => format!("+{k}"),
            CardRule::AtLeast { k } => format!("+{k}…"),
            CardRule::Any => "+0…".to_string(),
        }
    }
}

/// One column (dimension A) or row (dimension B) of the heatmap grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AxisBin {
    /// Anchor element; `None` for the empty-set bin.
    pub element: Option<usize>,
    pub rule: CardRule,
    pub label: String,
}

impl AxisBin {
    pub fn card(&self) -> Option<usize> {
        self.rule.key_index()
    }

    /// Whether an item whose subset on this axis is `set` falls in this bin.
    pub fn matches(&self, set: crate::SetValue) -> bool {
        match self.element {
            None => set.is_empty(),
            Some(e) => set.contains(e) && self.rule.matches(set.cardinality() - 1),
        }
    }
}

/// Ordered bins of one axis: the empty-set bin first, then every element in
/// display order with its cardinality bins in ascending order.
#[derive(Debug, Clone)]
pub struct AxisLayout {
    bins: Vec<AxisBin>,
    /// `lookup[element][card_idx]` is the bin holding that fine cell.
    lookup: Vec<Vec<usize>>,
}

impl AxisLayout {
    pub fn new(universe: &ElementUniverse, cap: Option<usize>, collapsed: &BTreeSet<usize>) -> Self {
        let len = universe.len();
        let mut bins = vec![AxisBin {
            element: None,
            rule: CardRule::Empty,
            label: "∅".to_string(),
        }];
        let mut lookup = vec![Vec::new(); len];
        for &e in universe.display_order() {
            let name = universe.label(e);
            let push = |rule: CardRule, bins: &mut Vec<AxisBin>| {
                bins.push(AxisBin {
                    element: Some(e),
                    rule,
                    label: format!("{name}{}", rule.suffix()),
                });
                bins.len() - 1
            };
            if collapsed.contains(&e) {
                let bin = push(CardRule::Any, &mut bins);
                lookup[e] = vec![bin; len];
                continue;
            }
            let tail = cap.filter(|&t| t < len.saturating_sub(1));
            let exact_until = tail.unwrap_or(len);
            for k in 0..exact_until {
                let bin = push(CardRule::Exact { k }, &mut bins);
                lookup[e].push(bin);
            }
            if let Some(t) = tail {
                let bin = push(CardRule::AtLeast { k: t }, &mut bins);
                lookup[e].resize(len, bin);
            }
        }
        AxisLayout { bins, lookup }
    }

    pub fn for_dim(table: &SetPairTable, config: &ViewConfig, dim: Dim) -> Self {
        AxisLayout::new(table.universe(dim), config.cap(dim), config.collapsed(dim))
    }

    pub fn bins(&self) -> &[AxisBin] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub const EMPTY_BIN: usize = 0;

    /// Bin of the fine cell `(element, card_idx)`.
    pub fn bin_of(&self, element: usize, card_idx: usize) -> usize {
        self.lookup[element][card_idx]
    }

    /// Bins an item with subset `set` touches on this axis, one per element.
    pub fn bins_of(&self, set: crate::SetValue) -> impl Iterator<Item = usize> + '_ {
        let card = set.cardinality();
        let empty = set.is_empty().then_some(Self::EMPTY_BIN);
        empty
            .into_iter()
            .chain(set.iter().map(move |e| self.lookup[e][card - 1]))
    }

    /// Finds the bin addressed by a key's `(element, card index)` pair.
    pub fn find(&self, element: Option<usize>, card: Option<usize>) -> Option<usize> {
        match element {
            None => card.is_none().then_some(Self::EMPTY_BIN),
            Some(e) => self
                .lookup
                .get(e)?
                .iter()
                .copied()
                .find(|&b| self.bins[b].card() == card),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn universe(n: usize) -> ElementUniverse {
        ElementUniverse::new("X", (0..n).map(|i| format!("x{i}"))).unwrap()
    }

    #[test]
    fn full_resolution_layout() {
        let layout = AxisLayout::new(&universe(3), None, &BTreeSet::new());
        let labels: Vec<_> = layout.bins().iter().map(|b| b.label.as_str()).collect();
        assert_eq!(
            labels,
            ["∅", "x0", "x0+1", "x0+2", "x1", "x1+1", "x1+2", "x2", "x2+1", "x2+2"]
        );
        assert_eq!(layout.bin_of(1, 2), 6);
        assert_eq!(layout.find(Some(1), Some(2)), Some(6));
        assert_eq!(layout.find(None, None), Some(0));
        assert_eq!(layout.find(None, Some(0)), None);
        assert_eq!(layout.find(Some(1), Some(3)), None);
    }

    #[test]
    fn capped_and_collapsed_layout() {
        let collapsed: BTreeSet<usize> = [2].into();
        let layout = AxisLayout::new(&universe(5), Some(2), &collapsed);
        let labels: Vec<_> = layout.bins().iter().map(|b| b.label.as_str()).collect();
        assert_eq!(
            labels,
            [
                "∅", "x0", "x0+1", "x0+2…", "x1", "x1+1", "x1+2…", "x2+0…", "x3", "x3+1", "x3+2…", "x4", "x4+1",
                "x4+2…"
            ]
        );
        assert_eq!(layout.bin_of(0, 4), 3);
        assert_eq!(layout.bin_of(2, 0), 7);
        assert_eq!(layout.bin_of(2, 4), 7);
        assert_eq!(layout.find(Some(0), Some(2)), Some(3));
        assert_eq!(layout.find(Some(2), None), Some(7));
        assert_eq!(layout.find(Some(0), Some(3)), None);
    }

    #[test]
    fn non_binding_cap_keeps_exact_bins() {
        let layout = AxisLayout::new(&universe(3), Some(2), &BTreeSet::new());
        assert!(layout.bins().iter().all(|b| !b.rule.is_merged()));
        assert_eq!(layout.len(), 10);
    }

    #[test]
    fn display_order_drives_layout() {
        let u = crate::set_model::reorder_elements(&universe(2), vec![1, 0]).unwrap();
        let layout = AxisLayout::new(&u, None, &BTreeSet::new());
        let labels: Vec<_> = layout.bins().iter().map(|b| b.label.as_str()).collect();
        assert_eq!(labels, ["∅", "x1", "x1+1", "x0", "x0+1"]);
    }

    #[test]
    fn cap_contract() {
        let config = ViewConfig::default();
        assert_eq!(apply_cap(&config, Dim::A, 0).unwrap_err().code(), "InvalidCap");
        assert_eq!(apply_cap(&config, Dim::B, 2).unwrap().cap_b, Some(2));
    }

    #[test]
    fn config_json_defaults() {
        let config: ViewConfig = serde_json::from_str(r#"{"counting":"elementCentric","capA":2}"#).unwrap();
        assert_eq!(config.counting, Counting::ElementCentric);
        assert_eq!(config.cap_a, Some(2));
        assert!(config.show_empty_b);
        assert_eq!(config.color_scale, "neutral");
    }
}
