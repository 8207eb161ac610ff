//! Value-to-display transforms: competition ranks, deviation from the
//! uniform-subset expectation, and color scale positions.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::binning::{AggregateResult, CellKey};
use crate::config::{CardRule, Counting, Transform, ViewConfig};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Tie handling for ranks; rank 1 is the largest value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RankMode {
    /// Ties share a rank and the following ranks are skipped (1, 2, 2, 4).
    Standard,
    /// Ties share a rank and no ranks are skipped (1, 2, 2, 3).
    Dense,
}

/// Descending competition ranks of `values`.
pub fn rank_values<T: Ord>(values: &[T], mode: RankMode) -> Vec<u32> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].cmp(&values[i]));
    let mut ranks = vec![0u32; values.len()];
    let mut distinct = 0u32;
    for (pos, &i) in order.iter().enumerate() {
        let tied = pos > 0 && values[order[pos - 1]] == values[i];
        if tied {
            ranks[i] = ranks[order[pos - 1]];
        } else {
            distinct += 1;
            ranks[i] = match mode {
                RankMode::Standard => pos as u32 + 1,
                RankMode::Dense => distinct,
            };
        }
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RankMap {
    pub mode: RankMode,
    #[serde(with = "cell_entries")]
    pub ranks: BTreeMap<CellKey, u32>,
    pub max_rank: u32,
}

impl RankMap {
    /// Display position in `[0, 1]`; rank 1 maps to 1 (darkest) unless inverted.
    pub fn position(&self, rank: u32, invert: bool) -> f64 {
        let p = if self.max_rank <= 1 {
            1.0
        } else {
            f64::from(self.max_rank - rank) / f64::from(self.max_rank - 1)
        };
        if invert {
            1.0 - p
        } else {
            p
        }
    }
}

/// Ranks every visible non-empty cell of the grid jointly.
pub fn rank_transform(result: &AggregateResult, mode: RankMode) -> RankMap {
    let cells: Vec<(CellKey, &Rational)> = result
        .visible_cells()
        .filter(|(_, _, _, v)| !v.is_zero())
        .map(|(_, _, k, v)| (k, v))
        .collect();
    let values: Vec<&Rational> = cells.iter().map(|(_, v)| *v).collect();
    let ranks = rank_values(&values, mode);
    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    RankMap {
        mode,
        ranks: cells.iter().map(|(k, _)| *k).zip(ranks).collect(),
        max_rank,
    }
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Expected share of items per bin on one axis of `size` elements when
/// every subset is equally likely.
fn axis_factor(rule: CardRule, size: usize, counting: Counting) -> Rational {
    let subsets = BigInt::one() << size;
    if rule == CardRule::Empty {
        return Rational::from_big(BigInt::one(), subsets);
    }
    (0..size)
        .filter(|&k| rule.matches(k))
        .map(|k| {
            let divisor = match counting {
                Counting::ItemCentric => BigInt::from(k + 1),
                Counting::ElementCentric => BigInt::one(),
            };
            Rational::from_big(binomial(size - 1, k), &subsets * divisor)
        })
        .sum()
}

fn expected_for_rules(
    size_a: usize,
    size_b: usize,
    n: usize,
    col: CardRule,
    row: CardRule,
    counting: Counting,
) -> Rational {
    Rational::from(n as u64) * axis_factor(col, size_a, counting) * axis_factor(row, size_b, counting)
}

/// Exact expectation of a cell when `S_A` and `S_B` are drawn independently
/// and uniformly from all subsets of their universes.
pub fn expected_cell_rational(
    size_a: usize,
    size_b: usize,
    n: usize,
    key: &CellKey,
    counting: Counting,
    config: &ViewConfig,
) -> Result<Rational> {
    let col = CardRule::resolve(size_a, config.cap_a, &config.collapsed_a, key.col, key.k);
    let row = CardRule::resolve(size_b, config.cap_b, &config.collapsed_b, key.row, key.l);
    match (col, row) {
        (Some(col), Some(row)) => Ok(expected_for_rules(size_a, size_b, n, col, row, counting)),
        _ => Err(Error::InvalidKey(format!("{key:?} under sizes {size_a}x{size_b}"))),
    }
}

pub fn expected_cell_value(
    size_a: usize,
    size_b: usize,
    n: usize,
    key: &CellKey,
    counting: Counting,
    config: &ViewConfig,
) -> Result<f64> {
    expected_cell_rational(size_a, size_b, n, key, counting, config).map(|r| r.to_f64())
}

/// Smallest half-width of the divergent scale, in decades.
pub const MIN_LOG_SPAN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DeviationMap {
    /// Observed / expected per visible cell.
    #[serde(with = "cell_entries")]
    pub ratios: BTreeMap<CellKey, f64>,
    /// Cells with nothing observed; their ratio is 0.
    pub zero_cells: BTreeSet<CellKey>,
    /// Half-width of the scale in decades: `log10` of the largest
    /// proportional deviation on either side.
    pub log_span: f64,
}

impl DeviationMap {
    /// Divergent position: 0.5 is "as expected", 1 the over-represented end.
    pub fn position(&self, ratio: f64) -> f64 {
        divergent_position(ratio, self.log_span)
    }
}

pub fn divergent_position(ratio: f64, log_span: f64) -> f64 {
    if ratio <= 0.0 {
        return 0.0;
    }
    (0.5 + 0.5 * ratio.log10() / log_span).clamp(0.0, 1.0)
}

/// Observed-to-expected ratios for every visible cell. Requires `n > 0`.
pub fn deviation_transform(result: &AggregateResult) -> DeviationMap {
    let mut ratios = BTreeMap::new();
    let mut zero_cells = BTreeSet::new();
    let mut span = MIN_LOG_SPAN;
    for (c, r, key, observed) in result.visible_cells() {
        let expected = expected_for_rules(
            result.size_a,
            result.size_b,
            result.n,
            result.columns[c].rule,
            result.rows[r].rule,
            result.counting,
        );
        if observed.is_zero() {
            zero_cells.insert(key);
            ratios.insert(key, 0.0);
            continue;
        }
        let ratio = (observed.clone() / expected).to_f64();
        span = span.max(ratio.log10().abs());
        ratios.insert(key, ratio);
    }
    DeviationMap {
        ratios,
        zero_cells,
        log_span: span,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ColorScalePreset {
    pub id: &'static str,
    pub gamma: f64,
    pub divergent: bool,
}

pub const PRESETS: [ColorScalePreset; 4] = [
    ColorScalePreset {
        id: "emphasize-low",
        gamma: 0.5,
        divergent: false,
    },
    ColorScalePreset {
        id: "neutral",
        gamma: 1.0,
        divergent: false,
    },
    ColorScalePreset {
        id: "emphasize-high",
        gamma: 2.0,
        divergent: false,
    },
    ColorScalePreset {
        id: "divergent",
        gamma: 1.0,
        divergent: true,
    },
];

pub fn preset(id: &str) -> Option<&'static ColorScalePreset> {
    PRESETS.iter().find(|p| p.id == id)
}

/// Position of `value` on a color scale, in `[0, 1]`.
///
/// Sequential presets apply `gamma` to the normalized value. Divergent presets
/// read `value` as a ratio and map its logarithm symmetrically around 0.5,
/// using the larger proportional deviation of `vmin` and `vmax` as half-width.
/// A degenerate range yields 0.5.
pub fn color_position(value: f64, vmin: f64, vmax: f64, preset: &ColorScalePreset) -> f64 {
    if vmax <= vmin {
        return 0.5;
    }
    if preset.divergent {
        let low = if vmin > 0.0 { vmin.log10().abs() } else { 0.0 };
        let span = vmax.log10().abs().max(low).max(MIN_LOG_SPAN);
        return divergent_position(value, span);
    }
    let t = ((value - vmin) / (vmax - vmin)).clamp(0.0, 1.0);
    t.powf(preset.gamma)
}

/// Transform output attached to an aggregate response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum TransformOutput {
    Rank(RankMap),
    Deviation(DeviationMap),
}

pub fn apply_transform(result: &AggregateResult, transform: Transform) -> Option<TransformOutput> {
    match transform {
        Transform::Raw => None,
        Transform::RankStandard => Some(TransformOutput::Rank(rank_transform(result, RankMode::Standard))),
        Transform::RankDense => Some(TransformOutput::Rank(rank_transform(result, RankMode::Dense))),
        Transform::Deviation if result.n > 0 => Some(TransformOutput::Deviation(deviation_transform(result))),
        Transform::Deviation => None,
    }
}

/// Color position of every cell (column-major); `None` for empty or hidden
/// cells, which are drawn in the dedicated empty style.
pub fn cell_positions(result: &AggregateResult, config: &ViewConfig) -> Vec<Option<f64>> {
    let preset = preset(&config.color_scale).unwrap_or(&PRESETS[1]);
    let transform = apply_transform(result, config.transform);
    let vmax = result
        .visible_cells()
        .map(|(_, _, _, v)| v.to_f64())
        .fold(0.0, f64::max);
    result
        .iter_cells()
        .map(|(c, r, key, value)| {
            if !result.is_visible(c, r) || value.is_zero() {
                return None;
            }
            Some(match &transform {
                None => {
                    let sequential = if preset.divergent { &PRESETS[1] } else { preset };
                    color_position(value.to_f64(), 0.0, vmax, sequential)
                }
                Some(TransformOutput::Rank(map)) => map.position(map.ranks[&key], config.invert_rank),
                Some(TransformOutput::Deviation(map)) => map.position(map.ratios[&key]),
            })
        })
        .collect()
}

/// Sum of the expected values of every cell of the grid.
pub fn expected_total(result: &AggregateResult) -> Rational {
    let mut total = Rational::zero();
    for (c, r, _, _) in result.iter_cells() {
        total += expected_for_rules(
            result.size_a,
            result.size_b,
            result.n,
            result.columns[c].rule,
            result.rows[r].rule,
            result.counting,
        );
    }
    total
}

/// Serializes a `CellKey`-keyed map as a list of `{cell, value}` entries.
mod cell_entries {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::binning::CellKey;

    #[derive(Serialize, Deserialize)]
    struct Entry<T> {
        cell: CellKey,
        value: T,
    }

    pub fn serialize<S: Serializer, T: Serialize + Clone>(
        map: &BTreeMap<CellKey, T>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        let entries: Vec<Entry<T>> = map
            .iter()
            .map(|(cell, value)| Entry {
                cell: *cell,
                value: value.clone(),
            })
            .collect();
        entries.serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>, T: Deserialize<'de>>(
        deserializer: D,
    ) -> Result<BTreeMap<CellKey, T>, D::Error> {
        let entries: Vec<Entry<T>> = Vec::deserialize(deserializer)?;
        Ok(entries.into_iter().map(|e| (e.cell, e.value)).collect())
    }
}
