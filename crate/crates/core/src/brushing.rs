//! Item predicates ("brushes") and the brushed overlay they induce on a view.

use serde::{Deserialize, Serialize};

use crate::binning::{aggregate, AggregateResult, CellKey};
use crate::config::{AxisLayout, ViewConfig};
use crate::error::{Error, Result};
use crate::set_model::{Dim, SetPairTable, SetValue};

/// A predicate over items. Cardinalities here are plain `|S|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum Brush {
    ElementPresent {
        dim: Dim,
        element: usize,
    },
    CardinalityIs {
        dim: Dim,
        card: usize,
    },
    CardinalityAtLeast {
        dim: Dim,
        card: usize,
    },
    /// Items contributing to a cell of the view described by `config`.
    CellMember {
        cell: CellKey,
        #[serde(default)]
        config: ViewConfig,
    },
    /// Items contributing anywhere to the heatmap of `(e_a, e_b)`.
    HeatmapMember {
        #[serde(rename = "eA")]
        e_a: usize,
        #[serde(rename = "eB")]
        e_b: usize,
    },
    MarginalBinMember {
        dim: Dim,
        element: Option<usize>,
        card: Option<usize>,
        #[serde(default)]
        config: ViewConfig,
    },
    ItemIdIn {
        ids: Vec<usize>,
    },
    And {
        of: Vec<Brush>,
    },
    Or {
        of: Vec<Brush>,
    },
    Not {
        of: Box<Brush>,
    },
}

/// Base and brushed aggregates of the same view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BrushOverlay {
    pub base: AggregateResult,
    pub brushed: AggregateResult,
    /// Ascending ids of the brushed items.
    pub item_ids: Vec<usize>,
}

fn check_element(table: &SetPairTable, dim: Dim, element: usize) -> Result<()> {
    let len = table.universe(dim).len();
    if element >= len {
        return Err(Error::InvalidReference(format!(
            "element {element} outside universe {dim} of size {len}"
        )));
    }
    Ok(())
}

fn bin_matcher(
    table: &SetPairTable,
    config: &ViewConfig,
    dim: Dim,
    element: Option<usize>,
    card: Option<usize>,
) -> Result<impl Fn(SetValue) -> bool> {
    let layout = AxisLayout::for_dim(table, config, dim);
    let idx = layout.find(element, card).ok_or_else(|| {
        Error::InvalidReference(format!("no {dim} bin for element {element:?}, cardinality {card:?}"))
    })?;
    let bin = layout.bins()[idx].clone();
    Ok(move |set: SetValue| bin.matches(set))
}

fn eval(table: &SetPairTable, brush: &Brush) -> Result<Vec<bool>> {
    let n = table.len();
    let by_set = |dim: Dim, f: &dyn Fn(SetValue) -> bool| table.items(dim).iter().map(|&s| f(s)).collect();
    Ok(match brush {
        Brush::ElementPresent { dim, element } => {
            check_element(table, *dim, *element)?;
            by_set(*dim, &|s| s.contains(*element))
        }
        Brush::CardinalityIs { dim, card } => by_set(*dim, &|s| s.cardinality() == *card),
        Brush::CardinalityAtLeast { dim, card } => by_set(*dim, &|s| s.cardinality() >= *card),
        Brush::CellMember { cell, config } => {
            config.validate(table)?;
            let col = bin_matcher(table, config, Dim::A, cell.col, cell.k)?;
            let row = bin_matcher(table, config, Dim::B, cell.row, cell.l)?;
            table.iter().map(|(_, a, b)| col(a) && row(b)).collect()
        }
        Brush::HeatmapMember { e_a, e_b } => {
            check_element(table, Dim::A, *e_a)?;
            check_element(table, Dim::B, *e_b)?;
            table
                .iter()
                .map(|(_, a, b)| a.contains(*e_a) && b.contains(*e_b))
                .collect()
        }
        Brush::MarginalBinMember {
            dim,
            element,
            card,
            config,
        } => {
            config.validate(table)?;
            let m = bin_matcher(table, config, *dim, *element, *card)?;
            by_set(*dim, &m)
        }
        Brush::ItemIdIn { ids } => {
            let mut mask = vec![false; n];
            for &id in ids {
                *mask
                    .get_mut(id)
                    .ok_or_else(|| Error::InvalidReference(format!("item {id} of {n}")))? = true;
            }
            mask
        }
        Brush::And { of } => {
            let mut mask = vec![true; n];
            for b in of {
                for (m, x) in mask.iter_mut().zip(eval(table, b)?) {
                    *m &= x;
                }
            }
            mask
        }
        Brush::Or { of } => {
            let mut mask = vec![false; n];
            for b in of {
                for (m, x) in mask.iter_mut().zip(eval(table, b)?) {
                    *m |= x;
                }
            }
            mask
        }
        Brush::Not { of } => eval(table, of)?.into_iter().map(|x| !x).collect(),
    })
}

/// Ascending ids of the items matching `brush`.
pub fn evaluate_brush(table: &SetPairTable, brush: &Brush) -> Result<Vec<usize>> {
    Ok(eval(table, brush)?
        .into_iter()
        .enumerate()
        .filter_map(|(i, hit)| hit.then_some(i))
        .collect())
}

/// Aggregates the full table and the brushed subset under the same view.
pub fn brushed_aggregate(table: &SetPairTable, config: &ViewConfig, brush: &Brush) -> Result<BrushOverlay> {
    let base = aggregate(table, config)?;
    let mask = eval(table, brush)?;
    let brushed = aggregate(&table.filter_items(|i| mask[i]), config)?;
    let item_ids = mask
        .iter()
        .enumerate()
        .filter_map(|(i, &hit)| hit.then_some(i))
        .collect();
    Ok(BrushOverlay {
        base,
        brushed,
        item_ids,
    })
}
