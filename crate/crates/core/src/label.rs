use std::fmt;

use serde::{Deserialize, Serialize};

/// Binary class of a news article.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Label {
    Authentic = 0,
    Fake = 1,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Authentic, Label::Fake];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Label {
        if i == 0 {
            Label::Authentic
        } else {
            Label::Fake
        }
    }

    #[inline]
    pub fn other(self) -> Label {
        match self {
            Label::Authentic => Label::Fake,
            Label::Fake => Label::Authentic,
        }
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        l as u8
    }
}

impl TryFrom<u8> for Label {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            0 => Ok(Label::Authentic),
            1 => Ok(Label::Fake),
            other => Err(format!("label must be 0 or 1, got {other}")),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Authentic => f.write_str("authentic"),
            Label::Fake => f.write_str("fake"),
        }
    }
}

/// Per-class row counts, indexed by [`Label::index`].
pub fn class_counts(labels: &[Label]) -> [usize; 2] {
    let mut counts = [0usize; 2];
    for l in labels {
        counts[l.index()] += 1;
    }
    counts
}

/// The rarer class; ties resolve to [`Label::Fake`].
pub fn minority_label(counts: [usize; 2]) -> Label {
    if counts[0] < counts[1] {
        Label::Authentic
    } else {
        Label::Fake
    }
}
