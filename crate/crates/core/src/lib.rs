//! Aggregation engine for data tables with two set-typed columns.
//!
//! Every item carries one subset of universe `A` and one subset of universe
//! `B`. The engine splits each item over per element-pair heatmaps resolved by
//! subset cardinality, with exact rational bookkeeping so that item-centric
//! totals always add up to the number of items.
//!
//! Module map:
//!
//! * [`set_model`]: universes, subset values, tables, negation and reordering.
//! * [`rational`]: exact rational numbers with a stable wire form.
//! * [`config`]: view configuration and the per-axis bin layout it induces.
//! * [`binning`]: the heatmap grid and marginal histograms.
//! * [`transforms`]: rank, deviation-from-expected and color scale positions.
//! * [`drilldown`]: detail histograms, detail heatmaps and combination lists.
//! * [`brushing`]: item predicates and brushed overlays.
//! * [`datagen`]: seeded synthetic datasets.
//! * [`io`] and [`svg`]: table/aggregate formats and static rendering.
//! * [`api`]: request/response shapes shared by the CLI and the HTTP service.

pub mod api;
pub mod binning;
pub mod brushing;
pub mod config;
pub mod datagen;
pub mod drilldown;
pub mod error;
pub mod io;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod rational;
pub mod set_model;
pub mod svg;
pub mod transforms;

pub use binning::{aggregate, cell_contributions, AggregateResult, CellKey, MarginalBin};
pub use brushing::{brushed_aggregate, evaluate_brush, Brush, BrushOverlay};
pub use config::{Counting, Transform, ViewConfig};
pub use error::{Error, Result};
pub use rational::Rational;
pub use set_model::{Dim, ElementUniverse, SetPairTable, SetValue, UnknownElementPolicy};
