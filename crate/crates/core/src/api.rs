//! Request and response shapes shared by the command line and the HTTP
//! service. Both serialize through [`to_json_bytes`], so equal inputs give
//! byte-identical output on either path.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

pub use crate::io::to_json_bytes;

use crate::binning::{aggregate, AggregateResult, CellKey};
use crate::brushing::{brushed_aggregate, Brush, BrushOverlay};
use crate::config::ViewConfig;
use crate::datagen::{gen_drives, gen_s, DriveRuleTable, SVariant, SVariantSpec};
use crate::drilldown::{detail_views, enumerate_combinations, CombinationList, DetailResult, DetailSelection};
use crate::error::{Error, Result};
use crate::set_model::{Dim, SetPairTable};
use crate::transforms::{apply_transform, TransformOutput};

/// Per-request table edits: element negations and display orders. They are
/// applied to a copy; stored datasets never change.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct TableEdits {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub negate_a: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub negate_b: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_a: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_b: Option<Vec<usize>>,
}

impl TableEdits {
    pub fn apply<'t>(&self, table: &'t SetPairTable) -> Result<Cow<'t, SetPairTable>> {
        if *self == TableEdits::default() {
            return Ok(Cow::Borrowed(table));
        }
        let mut t = table.clone();
        for (dim, negate, order) in [
            (Dim::A, &self.negate_a, &self.order_a),
            (Dim::B, &self.negate_b, &self.order_b),
        ] {
            for &e in negate {
                t = t.negate_element(dim, e)?;
            }
            if let Some(perm) = order {
                t = t.reorder(dim, perm.clone())?;
            }
        }
        Ok(Cow::Owned(t))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ViewRequest {
    #[serde(flatten)]
    pub config: ViewConfig,
    #[serde(flatten)]
    pub edits: TableEdits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ViewResponse {
    pub aggregate: AggregateResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transform: Option<TransformOutput>,
}

pub fn view(table: &SetPairTable, request: &ViewRequest) -> Result<ViewResponse> {
    let table = request.edits.apply(table)?;
    let aggregate = aggregate(&table, &request.config)?;
    let transform = apply_transform(&aggregate, request.config.transform);
    Ok(ViewResponse { aggregate, transform })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DetailRequest {
    #[serde(flatten)]
    pub selection: DetailSelection,
    #[serde(flatten)]
    pub edits: TableEdits,
}

pub fn detail(table: &SetPairTable, request: &DetailRequest) -> Result<DetailResult> {
    detail_views(&*request.edits.apply(table)?, &request.selection)
}

/// The cell key fields sit at the top level of the body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CombinationsRequest {
    #[serde(flatten)]
    pub cell: CellKey,
    #[serde(default)]
    pub config: ViewConfig,
    #[serde(flatten)]
    pub edits: TableEdits,
}

pub fn combinations(table: &SetPairTable, request: &CombinationsRequest) -> Result<CombinationList> {
    enumerate_combinations(&*request.edits.apply(table)?, &request.config, &request.cell)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BrushRequest {
    pub brush: Brush,
    #[serde(default)]
    pub config: ViewConfig,
    #[serde(flatten)]
    pub edits: TableEdits,
}

pub fn brush(table: &SetPairTable, request: &BrushRequest) -> Result<BrushOverlay> {
    brushed_aggregate(&*request.edits.apply(table)?, &request.config, &request.brush)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenVariant {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
    #[serde(rename = "drives")]
    Drives,
}

impl std::str::FromStr for GenVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("drives") {
            return Ok(GenVariant::Drives);
        }
        s.parse::<SVariant>()
            .map(GenVariant::from)
            .map_err(|_| format!("unknown variant {s:?}, expected S1..S6 or drives"))
    }
}

impl From<SVariant> for GenVariant {
    fn from(v: SVariant) -> Self {
        match v {
            SVariant::S1 => GenVariant::S1,
            SVariant::S2 => GenVariant::S2,
            SVariant::S3 => GenVariant::S3,
            SVariant::S4 => GenVariant::S4,
            SVariant::S5 => GenVariant::S5,
            SVariant::S6 => GenVariant::S6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GenerateRequest {
    pub variant: GenVariant,
    pub n: usize,
    pub seed: u64,
    /// Rule table for `drives`; the default table when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rules: Option<DriveRuleTable>,
}

pub fn generate(request: &GenerateRequest) -> Result<SetPairTable> {
    if request.n == 0 {
        return Err(Error::Spec("item count n must be positive".into()));
    }
    let s = |variant| {
        Ok(gen_s(&SVariantSpec {
            variant,
            n: request.n,
            seed: request.seed,
        }))
    };
    match request.variant {
        GenVariant::S1 => s(SVariant::S1),
        GenVariant::S2 => s(SVariant::S2),
        GenVariant::S3 => s(SVariant::S3),
        GenVariant::S4 => s(SVariant::S4),
        GenVariant::S5 => s(SVariant::S5),
        GenVariant::S6 => s(SVariant::S6),
        GenVariant::Drives => {
            let default = DriveRuleTable::default();
            gen_drives(request.n, request.seed, request.rules.as_ref().unwrap_or(&default))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::sample_table;
    use crate::Rational;

    #[test]
    fn view_request_json() {
        let req: ViewRequest =
            serde_json::from_str(r#"{"counting":"elementCentric","capB":2,"negateB":[4],"transform":"rankDense"}"#)
                .unwrap();
        assert_eq!(req.config.cap_b, Some(2));
        assert_eq!(req.edits.negate_b, vec![4]);
        let resp = view(&sample_table(), &req).unwrap();
        assert!(matches!(resp.transform, Some(TransformOutput::Rank(_))));
        let bytes = to_json_bytes(&resp);
        assert_eq!(bytes, to_json_bytes(&view(&sample_table(), &req).unwrap()));
    }

    #[test]
    fn negation_is_per_request() {
        let table = sample_table();
        let req = ViewRequest {
            edits: TableEdits {
                negate_b: vec![4],
                ..TableEdits::default()
            },
            ..ViewRequest::default()
        };
        let resp = view(&table, &req).unwrap();
        // every item now carries ¬Loud, so the empty-set row is gone
        assert_eq!(resp.aggregate.marginal(Dim::B, None, None).unwrap().item_count, 0);
        assert_eq!(
            resp.aggregate.rows[5..]
                .iter()
                .filter(|b| b.label.starts_with('¬'))
                .count(),
            5
        );
        let plain = view(&table, &ViewRequest::default()).unwrap();
        assert_ne!(plain.aggregate, resp.aggregate);
        let bad = ViewRequest {
            edits: TableEdits {
                negate_a: vec![9],
                ..TableEdits::default()
            },
            ..ViewRequest::default()
        };
        assert_eq!(view(&table, &bad).unwrap_err().code(), "InvalidReference");
    }

    #[test]
    fn combinations_body_is_a_cell_key() {
        let req: CombinationsRequest = serde_json::from_str(r#"{"col":2,"row":1,"k":0,"l":1}"#).unwrap();
        let list = combinations(&sample_table(), &req).unwrap();
        assert_eq!(list.total_value, Rational::new(1, 2));
    }

    #[test]
    fn generate_requests() {
        let req: GenerateRequest = serde_json::from_str(r#"{"variant":"S1","n":10,"seed":7}"#).unwrap();
        assert_eq!(generate(&req).unwrap().len(), 10);
        let req: GenerateRequest = serde_json::from_str(r#"{"variant":"drives","n":10,"seed":7}"#).unwrap();
        assert_eq!(generate(&req).unwrap().universe_b().elements()[4], "Loud");
        assert_eq!("s3".parse::<GenVariant>().unwrap(), GenVariant::S3);
        let zero = GenerateRequest { n: 0, ..req };
        assert_eq!(generate(&zero).unwrap_err().code(), "SpecError");
    }
}
