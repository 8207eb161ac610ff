//! Element universes, subset values and the two-column item table.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of elements a universe can hold (one machine word).
pub const MAX_ELEMENTS: usize = 64;

/// One of the two set-typed dimensions of a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dim {
    A,
    B,
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::A => f.write_str("A"),
            Dim::B => f.write_str("B"),
        }
    }
}

impl std::str::FromStr for Dim {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(Dim::A),
            "B" | "b" => Ok(Dim::B),
            other => Err(format!("unknown dimension {other:?}, expected A or B")),
        }
    }
}

/// What to do with element names that are not yet part of a universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum UnknownElementPolicy {
    Strict,
    #[default]
    AutoRegister,
}

/// The ordered alphabet of one set-typed dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ElementUniverse {
    name: String,
    elements: Vec<String>,
    display_order: Vec<usize>,
    negated: Vec<bool>,
}

impl ElementUniverse {
    pub fn new<S: Into<String>>(name: impl Into<String>, elements: impl IntoIterator<Item = S>) -> Result<Self> {
        let name = name.into();
        let mut universe = ElementUniverse {
            name,
            elements: Vec::new(),
            display_order: Vec::new(),
            negated: Vec::new(),
        };
        for element in elements {
            let element = element.into();
            if universe.index_of(&element).is_some() {
                return Err(Error::InvalidUniverse(format!(
                    "duplicate element {element:?} in universe {:?}",
                    universe.name
                )));
            }
            universe.register(element)?;
        }
        Ok(universe)
    }

    /// Rebuilds a universe from all of its parts, checking every invariant.
    pub fn from_parts(
        name: String,
        elements: Vec<String>,
        display_order: Vec<usize>,
        negated: Vec<bool>,
    ) -> Result<Self> {
        let mut universe = ElementUniverse::new(name, elements)?;
        if negated.len() != universe.len() {
            return Err(Error::InvalidUniverse(format!(
                "{} negation flags for {} elements",
                negated.len(),
                universe.len()
            )));
        }
        universe.negated = negated;
        universe.set_display_order(display_order)?;
        Ok(universe)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn element(&self, index: usize) -> Option<&str> {
        self.elements.get(index).map(String::as_str)
    }

    pub fn display_order(&self) -> &[usize] {
        &self.display_order
    }

    pub fn is_negated(&self, index: usize) -> bool {
        self.negated.get(index).copied().unwrap_or(false)
    }

    pub fn negated(&self) -> &[bool] {
        &self.negated
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == name)
    }

    /// Resolves either a plain element name, its displayed label (`¬name`) or
    /// a numeric index.
    pub fn resolve(&self, reference: &str) -> Option<usize> {
        if let Some(i) = self.index_of(reference) {
            return Some(i);
        }
        if let Some(i) = (0..self.len()).find(|&i| self.label(i) == reference) {
            return Some(i);
        }
        reference.parse::<usize>().ok().filter(|&i| i < self.len())
    }

    /// Display label of an element, `¬name` when negated.
    pub fn label(&self, index: usize) -> String {
        let name = &self.elements[index];
        if self.negated[index] {
            format!("¬{name}")
        } else {
            name.clone()
        }
    }

    /// Bit mask with one bit per element of this universe.
    pub fn full_mask(&self) -> u64 {
        match self.len() {
            0 => 0,
            64 => u64::MAX,
            n => (1u64 << n) - 1,
        }
    }

    /// Appends `name` if absent and returns its index.
    pub fn register(&mut self, name: String) -> Result<usize> {
        if name.is_empty() {
            return Err(Error::InvalidUniverse(format!(
                "empty element name in universe {:?}",
                self.name
            )));
        }
        if let Some(i) = self.index_of(&name) {
            return Ok(i);
        }
        if self.elements.len() == MAX_ELEMENTS {
            return Err(Error::UniverseOverflow {
                universe: self.name.clone(),
            });
        }
        let index = self.elements.len();
        self.elements.push(name);
        self.display_order.push(index);
        self.negated.push(false);
        Ok(index)
    }

    fn set_display_order(&mut self, permutation: Vec<usize>) -> Result<()> {
        check_permutation(&permutation, self.len())?;
        self.display_order = permutation;
        Ok(())
    }

    pub(crate) fn toggle_negated(&mut self, index: usize) {
        self.negated[index] = !self.negated[index];
    }
}

fn check_permutation(permutation: &[usize], len: usize) -> Result<()> {
    if permutation.len() != len {
        return Err(Error::InvalidPermutation(format!(
            "expected {len} entries, got {}",
            permutation.len()
        )));
    }
    let mut seen = vec![false; len];
    for &p in permutation {
        if p >= len || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidPermutation(format!(
                "{permutation:?} is not a permutation of 0..{len}"
            )));
        }
    }
    Ok(())
}

/// A subset of an element universe; bit `i` set means element `i` is present.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SetValue(u64);

impl SetValue {
    pub const EMPTY: SetValue = SetValue(0);

    pub fn from_bits(bits: u64) -> Self {
        SetValue(bits)
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = 0u64;
        for i in indices {
            bits |= 1 << i;
        }
        SetValue(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, index: usize) -> bool {
        index < 64 && self.0 >> index & 1 == 1
    }

    pub fn cardinality(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn with(self, index: usize) -> Self {
        SetValue(self.0 | 1 << index)
    }

    pub fn toggled(self, index: usize) -> Self {
        SetValue(self.0 ^ 1 << index)
    }

    /// Element indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    /// `{Music+Family}`-style label using the universe's display labels.
    pub fn label(self, universe: &ElementUniverse) -> String {
        if self.is_empty() {
            return "∅".to_string();
        }
        let names: Vec<String> = universe
            .display_order()
            .iter()
            .filter(|&&i| self.contains(i))
            .map(|&i| universe.label(i))
            .collect();
        names.join("+")
    }
}

/// Parses a delimiter-separated list of element names into a subset.
///
/// The empty string is the empty set. Repeated names set the same bit once.
/// Surrounding whitespace is ignored, as are empty tokens.
pub fn parse_set_value(
    text: &str,
    delimiter: char,
    universe: &mut ElementUniverse,
    policy: UnknownElementPolicy,
) -> Result<SetValue> {
    let mut value = SetValue::EMPTY;
    for token in text.split(delimiter).map(str::trim).filter(|t| !t.is_empty()) {
        value = value.with(element_index(token, universe, policy)?);
    }
    Ok(value)
}

/// Index of `name`, registering it first when the policy allows.
pub fn element_index(name: &str, universe: &mut ElementUniverse, policy: UnknownElementPolicy) -> Result<usize> {
    match universe.index_of(name) {
        Some(i) => Ok(i),
        None => match policy {
            UnknownElementPolicy::Strict => Err(Error::UnknownElement {
                universe: universe.name().to_string(),
                name: name.to_string(),
            }),
            UnknownElementPolicy::AutoRegister => universe.register(name.to_string()),
        },
    }
}

/// Items with one subset per dimension plus opaque pass-through attributes.
///
/// Item ids are the positions `0..N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetPairTable {
    universe_a: ElementUniverse,
    universe_b: ElementUniverse,
    items_a: Vec<SetValue>,
    items_b: Vec<SetValue>,
    extras: Vec<BTreeMap<String, String>>,
}

impl SetPairTable {
    pub fn new(
        universe_a: ElementUniverse,
        universe_b: ElementUniverse,
        items_a: Vec<SetValue>,
        items_b: Vec<SetValue>,
    ) -> Result<Self> {
        let n = items_a.len();
        Self::with_extras(universe_a, universe_b, items_a, items_b, vec![BTreeMap::new(); n])
    }

    pub fn with_extras(
        universe_a: ElementUniverse,
        universe_b: ElementUniverse,
        items_a: Vec<SetValue>,
        items_b: Vec<SetValue>,
        extras: Vec<BTreeMap<String, String>>,
    ) -> Result<Self> {
        if items_a.len() != items_b.len() || items_a.len() != extras.len() {
            return Err(Error::UniverseMismatch(format!(
                "column lengths differ: A={}, B={}, extras={}",
                items_a.len(),
                items_b.len(),
                extras.len()
            )));
        }
        for (dim, universe, items) in [(Dim::A, &universe_a, &items_a), (Dim::B, &universe_b, &items_b)] {
            let mask = !universe.full_mask();
            if let Some(pos) = items.iter().position(|s| s.bits() & mask != 0) {
                return Err(Error::UniverseMismatch(format!(
                    "item {pos} has bits outside universe {dim} of size {}",
                    universe.len()
                )));
            }
        }
        Ok(SetPairTable {
            universe_a,
            universe_b,
            items_a,
            items_b,
            extras,
        })
    }

    pub fn len(&self) -> usize {
        self.items_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items_a.is_empty()
    }

    pub fn universe(&self, dim: Dim) -> &ElementUniverse {
        match dim {
            Dim::A => &self.universe_a,
            Dim::B => &self.universe_b,
        }
    }

    pub fn universe_a(&self) -> &ElementUniverse {
        &self.universe_a
    }

    pub fn universe_b(&self) -> &ElementUniverse {
        &self.universe_b
    }

    pub fn items(&self, dim: Dim) -> &[SetValue] {
        match dim {
            Dim::A => &self.items_a,
            Dim::B => &self.items_b,
        }
    }

    pub fn items_a(&self) -> &[SetValue] {
        &self.items_a
    }

    pub fn items_b(&self) -> &[SetValue] {
        &self.items_b
    }

    pub fn extras(&self) -> &[BTreeMap<String, String>] {
        &self.extras
    }

    /// `(id, S_A, S_B)` for every item.
    pub fn iter(&self) -> impl Iterator<Item = (usize, SetValue, SetValue)> + '_ {
        self.items_a
            .iter()
            .zip(&self.items_b)
            .enumerate()
            .map(|(id, (&a, &b))| (id, a, b))
    }

    /// Returns a copy of the table with `element` of `dim` negated: its
    /// membership bit is toggled in every item and the universe flag flips.
    pub fn negate_element(&self, dim: Dim, element: usize) -> Result<SetPairTable> {
        let universe = self.universe(dim);
        if element >= universe.len() {
            return Err(Error::InvalidReference(format!(
                "element {element} not in universe {dim} of size {}",
                universe.len()
            )));
        }
        let mut table = self.clone();
        let (universe, items) = match dim {
            Dim::A => (&mut table.universe_a, &mut table.items_a),
            Dim::B => (&mut table.universe_b, &mut table.items_b),
        };
        universe.toggle_negated(element);
        for s in items.iter_mut() {
            *s = s.toggled(element);
        }
        Ok(table)
    }

    /// Returns a copy whose universe `dim` uses `permutation` as display order.
    pub fn reorder(&self, dim: Dim, permutation: Vec<usize>) -> Result<SetPairTable> {
        let mut table = self.clone();
        let universe = match dim {
            Dim::A => &mut table.universe_a,
            Dim::B => &mut table.universe_b,
        };
        *universe = reorder_elements(universe, permutation)?;
        Ok(table)
    }

    /// Keeps only the items for which `keep(id)` holds, renumbering them.
    pub fn filter_items(&self, mut keep: impl FnMut(usize) -> bool) -> SetPairTable {
        let mut items_a = Vec::new();
        let mut items_b = Vec::new();
        let mut extras = Vec::new();
        for id in 0..self.len() {
            if keep(id) {
                items_a.push(self.items_a[id]);
                items_b.push(self.items_b[id]);
                extras.push(self.extras[id].clone());
            }
        }
        SetPairTable {
            universe_a: self.universe_a.clone(),
            universe_b: self.universe_b.clone(),
            items_a,
            items_b,
            extras,
        }
    }
}

/// Replaces the display order of a universe. Item bits are not touched.
pub fn reorder_elements(universe: &ElementUniverse, permutation: Vec<usize>) -> Result<ElementUniverse> {
    let mut universe = universe.clone();
    universe.set_display_order(permutation)?;
    Ok(universe)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drives_input() -> ElementUniverse {
        ElementUniverse::new("Input", ["Music", "Family", "Traffic", "Sport", "Aggr"]).unwrap()
    }

    fn drives_output() -> ElementUniverse {
        ElementUniverse::new("Output", ["Fun", "Resp", "Fast", "Cheap", "Loud"]).unwrap()
    }

    #[test]
    fn parse_examples() {
        let mut u = drives_input();
        let s = parse_set_value("Music;Family", ';', &mut u, UnknownElementPolicy::Strict).unwrap();
        assert_eq!(s, SetValue::from_indices([0, 1]));
        let s = parse_set_value("", ';', &mut u, UnknownElementPolicy::Strict).unwrap();
        assert!(s.is_empty());
        let s = parse_set_value("Music;Music", ';', &mut u, UnknownElementPolicy::Strict).unwrap();
        assert_eq!(s.cardinality(), 1);
    }

    #[test]
    fn parse_unknown_element() {
        let mut u = drives_input();
        let err = parse_set_value("Music;Radio", ';', &mut u, UnknownElementPolicy::Strict).unwrap_err();
        assert_eq!(err.code(), "UnknownElement");
        let s = parse_set_value("Music;Radio", ';', &mut u, UnknownElementPolicy::AutoRegister).unwrap();
        assert_eq!(u.len(), 6);
        assert_eq!(s, SetValue::from_indices([0, 5]));
    }

    #[test]
    fn parse_overflow() {
        let mut u = ElementUniverse::new("X", (0..64).map(|i| format!("e{i}"))).unwrap();
        let err = parse_set_value("e1;e64", ';', &mut u, UnknownElementPolicy::AutoRegister).unwrap_err();
        assert_eq!(err.code(), "UniverseOverflow");
    }

    #[test]
    fn universe_rejects_duplicates_and_empty_names() {
        assert!(ElementUniverse::new("X", ["a", "b"]).is_ok());
        assert!(ElementUniverse::new("X", ["a", ""]).is_err());
        assert_eq!(
            ElementUniverse::new("X", ["a", "a"]).unwrap_err().code(),
            "InvalidUniverse"
        );
    }

    #[test]
    fn negation_examples() {
        let input = drives_input();
        let output = drives_output();
        let loud = 4;
        let fast = 2;
        let table = SetPairTable::new(
            input,
            output,
            vec![SetValue::EMPTY, SetValue::EMPTY],
            vec![SetValue::from_indices([loud]), SetValue::from_indices([fast])],
        )
        .unwrap();
        let negated = table.negate_element(Dim::B, loud).unwrap();
        assert!(negated.items_b()[0].is_empty());
        assert_eq!(negated.items_b()[1], SetValue::from_indices([fast, loud]));
        assert_eq!(negated.universe_b().label(loud), "¬Loud");
        assert_eq!(negated.items_b()[1].label(negated.universe_b()), "Fast+¬Loud");
        assert_eq!(negated.negate_element(Dim::B, loud).unwrap(), table);
        assert!(table.negate_element(Dim::B, 5).is_err());
    }

    #[test]
    fn reorder_examples() {
        let u = ElementUniverse::new("X", ["x", "y", "z"]).unwrap();
        assert_eq!(reorder_elements(&u, vec![0, 1, 2]).unwrap(), u);
        assert_eq!(reorder_elements(&u, vec![2, 1, 0]).unwrap().display_order(), &[2, 1, 0]);
        assert_eq!(
            reorder_elements(&u, vec![0, 0, 1]).unwrap_err().code(),
            "InvalidPermutation"
        );
        assert_eq!(
            reorder_elements(&u, vec![0, 1]).unwrap_err().code(),
            "InvalidPermutation"
        );
    }

    #[test]
    fn table_rejects_out_of_universe_bits() {
        let u = ElementUniverse::new("X", ["x"]).unwrap();
        let err = SetPairTable::new(u.clone(), u, vec![SetValue::from_bits(0b10)], vec![SetValue::EMPTY]).unwrap_err();
        assert_eq!(err.code(), "UniverseMismatch");
    }

    #[test]
    fn set_value_iteration() {
        let s = SetValue::from_indices([63, 0, 5]);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 5, 63]);
        assert_eq!(s.cardinality(), 3);
    }
}
