//! Seeded synthetic datasets.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`). The generator is seeded
//! with `seed_from_u64(seed)` and item `i` reads from stream `i` starting at
//! word 0, so every item has its own counter-based sequence. Items can be
//! generated in any order or in parallel with identical output.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set_model::{ElementUniverse, SetPairTable, SetValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SVariant {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
}

impl SVariant {
    pub const ALL: [SVariant; 6] = [
        SVariant::S1,
        SVariant::S2,
        SVariant::S3,
        SVariant::S4,
        SVariant::S5,
        SVariant::S6,
    ];
}

impl std::fmt::Display for SVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for SVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        SVariant::ALL
            .into_iter()
            .find(|v| v.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown variant {s:?}, expected S1..S6"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SVariantSpec {
    pub variant: SVariant,
    pub n: usize,
    pub seed: u64,
}

fn item_rngs(seed: u64, n: usize) -> impl IndexedParallelIterator<Item = ChaCha8Rng> {
    let base = ChaCha8Rng::seed_from_u64(seed);
    (0..n).into_par_iter().map(move |i| {
        let mut rng = base.clone();
        rng.set_stream(i as u64);
        rng
    })
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn numbered(prefix: &str) -> ElementUniverse {
    ElementUniverse::new(prefix.to_uppercase(), (1..=4).map(|i| format!("{prefix}{i}"))).expect("distinct names")
}

/// Draws the pair for one item of an S-variant from a single 64-bit word:
/// bits 0..4 give `S_A`, bit 4 (or bits 4..7 for S5) the mixture choice and
/// bits 8..12 an independent `S_B`.
pub fn s_pair(variant: SVariant, word: u64) -> (SetValue, SetValue) {
    let a = word & 0xF;
    let mirror = a;
    let complement = !a & 0xF;
    let independent = (word >> 8) & 0xF;
    let b = match variant {
        SVariant::S1 => mirror,
        SVariant::S2 => complement,
        SVariant::S3 => {
            if (word >> 4) & 1 == 0 {
                mirror
            } else {
                complement
            }
        }
        SVariant::S4 => {
            if (word >> 4) & 1 == 0 {
                mirror
            } else {
                independent
            }
        }
        SVariant::S5 => {
            if (word >> 4) & 7 == 0 {
                mirror
            } else {
                independent
            }
        }
        SVariant::S6 => independent,
    };
    (SetValue::from_bits(a), SetValue::from_bits(b))
}

/// Generates an S-family table over `{a1..a4}` and `{b1..b4}`.
pub fn gen_s(spec: &SVariantSpec) -> SetPairTable {
    let (items_a, items_b): (Vec<_>, Vec<_>) = item_rngs(spec.seed, spec.n)
        .map(|mut rng| s_pair(spec.variant, rng.next_u64()))
        .unzip();
    SetPairTable::new(numbered("a"), numbered("b"), items_a, items_b).expect("consistent table")
}

/// Inclusion probability of one output element, linear in the input subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OutputRule {
    pub base: f64,
    /// One weight per input element, added when that element is present.
    pub weights: Vec<f64>,
    /// Added once per input element present.
    #[serde(default)]
    pub per_card: f64,
}

impl OutputRule {
    pub fn probability(&self, input: SetValue) -> f64 {
        let linear: f64 = input.iter().map(|e| self.weights[e]).sum();
        self.base + linear + self.per_card * input.cardinality() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DriveRuleTable {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// Independent inclusion probability of each input element.
    pub input_probs: Vec<f64>,
    /// One rule per output element.
    pub rules: Vec<OutputRule>,
}

/// Slack for accumulated rounding in rule sums.
const PROB_EPS: f64 = 1e-9;
const MAX_RULE_INPUTS: usize = 16;

fn check_prob(what: impl FnOnce() -> String, p: f64) -> Result<()> {
    if p.is_finite() && (-PROB_EPS..=1.0 + PROB_EPS).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability { what: what(), value: p })
    }
}

impl Default for DriveRuleTable {
    /// Car-trip drives: loud trips are frequent regardless of the situation,
    /// fast driving follows aggressive or sporty moods, family trips favour
    /// responsible driving.
    fn default() -> Self {
        let rule = |base: f64, weights: [f64; 5], per_card: f64| OutputRule {
            base,
            weights: weights.to_vec(),
            per_card,
        };
        DriveRuleTable {
            inputs: ["Music", "Family", "Traffic", "Sport", "Aggr"]
                .map(String::from)
                .to_vec(),
            outputs: ["Fun", "Resp", "Fast", "Cheap", "Loud"].map(String::from).to_vec(),
            input_probs: vec![0.5; 5],
            rules: vec![
                rule(0.35, [0.2, 0.05, -0.15, 0.1, 0.0], -0.04),
                rule(0.5, [0.0, 0.25, 0.0, -0.1, -0.3], -0.02),
                rule(0.15, [0.0, 0.0, -0.1, 0.3, 0.35], 0.0),
                rule(0.55, [0.0, 0.0, 0.0, -0.1, -0.2], -0.05),
                rule(0.5, [0.1, 0.0, 0.0, 0.0, 0.15], 0.04),
            ],
        }
    }
}

impl DriveRuleTable {
    /// Checks shapes and that every probability, for every possible input
    /// subset, lies in `[0, 1]`.
    pub fn validate(&self) -> Result<()> {
        let ni = self.inputs.len();
        if ni > MAX_RULE_INPUTS {
            return Err(Error::InvalidUniverse(format!(
                "rule tables support at most {MAX_RULE_INPUTS} inputs, got {ni}"
            )));
        }
        if self.input_probs.len() != ni || self.rules.len() != self.outputs.len() {
            return Err(Error::InvalidUniverse(
                "rule table needs one input probability per input and one rule per output".into(),
            ));
        }
        ElementUniverse::new("Input", self.inputs.clone())?;
        ElementUniverse::new("Output", self.outputs.clone())?;
        for (name, &p) in self.inputs.iter().zip(&self.input_probs) {
            check_prob(|| format!("input {name}"), p)?;
        }
        for (name, rule) in self.outputs.iter().zip(&self.rules) {
            if rule.weights.len() != ni {
                return Err(Error::InvalidUniverse(format!("rule for {name} needs {ni} weights")));
            }
            for bits in 0..1u64 << ni {
                let input = SetValue::from_bits(bits);
                check_prob(|| format!("output {name} given {bits:#b}"), rule.probability(input))?;
            }
        }
        Ok(())
    }
}

/// Generates a drives-style table from `rules`.
pub fn gen_drives(n: usize, seed: u64, rules: &DriveRuleTable) -> Result<SetPairTable> {
    rules.validate()?;
    let (items_a, items_b): (Vec<_>, Vec<_>) = item_rngs(seed, n)
        .map(|mut rng| {
            let mut input = SetValue::EMPTY;
            for (e, &p) in rules.input_probs.iter().enumerate() {
                if unit(&mut rng) < p {
                    input = input.with(e);
                }
            }
            let mut output = SetValue::EMPTY;
            for (e, rule) in rules.rules.iter().enumerate() {
                if unit(&mut rng) < rule.probability(input) {
                    output = output.with(e);
                }
            }
            (input, output)
        })
        .unzip();
    SetPairTable::new(
        ElementUniverse::new("Input", rules.inputs.clone())?,
        ElementUniverse::new("Output", rules.outputs.clone())?,
        items_a,
        items_b,
    )
}
