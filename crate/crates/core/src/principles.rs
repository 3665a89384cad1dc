//! The six rule design principles shared across checkers, classifier, and stats.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Principle {
    LimitedProxy,
    SuccessfulAction,
    Exceptions,
    AlertThrottling,
    GeneralizedCharacteristic,
    GeneralizedPosition,
}

impl Principle {
    /// Canonical order, used for label CSV columns and regression covariates.
    pub const ALL: [Principle; 6] = [
        Principle::LimitedProxy,
        Principle::SuccessfulAction,
        Principle::Exceptions,
        Principle::AlertThrottling,
        Principle::GeneralizedCharacteristic,
        Principle::GeneralizedPosition,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Principle::LimitedProxy => "limited_proxy",
            Principle::SuccessfulAction => "successful_action",
            Principle::Exceptions => "exceptions",
            Principle::AlertThrottling => "alert_throttling",
            Principle::GeneralizedCharacteristic => "generalized_characteristic",
            Principle::GeneralizedPosition => "generalized_position",
        }
    }

    pub fn from_name(name: &str) -> Option<Principle> {
        Principle::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn index(&self) -> usize {
        Principle::ALL.iter().position(|p| p == self).unwrap()
    }
}

impl fmt::Display for Principle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One boolean per principle, indexed in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PrincipleSet([bool; 6]);

impl PrincipleSet {
    pub fn new(values: [bool; 6]) -> PrincipleSet {
        PrincipleSet(values)
    }

    pub fn get(&self, p: Principle) -> bool {
        self.0[p.index()]
    }

    pub fn set(&mut self, p: Principle, value: bool) {
        self.0[p.index()] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (Principle, bool)> + '_ {
        Principle::ALL.into_iter().map(move |p| (p, self.0[p.index()]))
    }
}

impl Serialize for PrincipleSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(6))?;
        for (p, v) in self.iter() {
            m.serialize_entry(p.name(), &v)?;
        }
        m.end()
    }
}
