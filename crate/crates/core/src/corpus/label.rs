//! The 19 directed relation labels of SemEval 2010 Task 8.
//!
//! Label ids are laid out so that ids `0..18` are the directed labels
//! (`family * 2 + direction`) and id `18` is `Other`. Ranking scorers carry
//! exactly the 18 directed rows, so a ranking score index is a label id.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

pub const NUM_FAMILIES: usize = 9;
pub const NUM_DIRECTED: usize = NUM_FAMILIES * 2;
pub const NUM_LABELS: usize = NUM_DIRECTED + 1;
pub const OTHER_ID: usize = NUM_DIRECTED;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    CauseEffect,
    ComponentWhole,
    ContentContainer,
    EntityDestination,
    EntityOrigin,
    InstrumentAgency,
    MemberCollection,
    MessageTopic,
    ProductProducer,
}

impl Family {
    pub const ALL: [Family; NUM_FAMILIES] = [
        Family::CauseEffect,
        Family::ComponentWhole,
        Family::ContentContainer,
        Family::EntityDestination,
        Family::EntityOrigin,
        Family::InstrumentAgency,
        Family::MemberCollection,
        Family::MessageTopic,
        Family::ProductProducer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::CauseEffect => "Cause-Effect",
            Family::ComponentWhole => "Component-Whole",
            Family::ContentContainer => "Content-Container",
            Family::EntityDestination => "Entity-Destination",
            Family::EntityOrigin => "Entity-Origin",
            Family::InstrumentAgency => "Instrument-Agency",
            Family::MemberCollection => "Member-Collection",
            Family::MessageTopic => "Message-Topic",
            Family::ProductProducer => "Product-Producer",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// `(e1,e2)`
    Forward,
    /// `(e2,e1)`
    Reverse,
}

/// A directed relation, or the undirected `Other` class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationLabel {
    Directed(Family, Direction),
    Other,
}

impl RelationLabel {
    pub fn id(self) -> usize {
        match self {
            RelationLabel::Directed(f, d) => f.index() * 2 + d as usize,
            RelationLabel::Other => OTHER_ID,
        }
    }

    pub fn from_id(id: usize) -> Option<Self> {
        match id {
            OTHER_ID => Some(RelationLabel::Other),
            i if i < NUM_DIRECTED => {
                let dir = if i % 2 == 0 {
                    Direction::Forward
                } else {
                    Direction::Reverse
                };
                Some(RelationLabel::Directed(Family::ALL[i / 2], dir))
            }
            _ => None,
        }
    }

    pub fn all() -> impl Iterator<Item = RelationLabel> {
        (0..NUM_LABELS).map(|i| RelationLabel::from_id(i).unwrap())
    }

    pub fn family(self) -> Option<Family> {
        match self {
            RelationLabel::Directed(f, _) => Some(f),
            RelationLabel::Other => None,
        }
    }

    pub fn direction(self) -> Option<Direction> {
        match self {
            RelationLabel::Directed(_, d) => Some(d),
            RelationLabel::Other => None,
        }
    }

    pub fn is_other(self) -> bool {
        self == RelationLabel::Other
    }
}

impl fmt::Display for RelationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationLabel::Other => f.write_str("Other"),
            RelationLabel::Directed(fam, Direction::Forward) => write!(f, "{}(e1,e2)", fam.name()),
            RelationLabel::Directed(fam, Direction::Reverse) => write!(f, "{}(e2,e1)", fam.name()),
        }
    }
}

impl FromStr for RelationLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "Other" {
            return Ok(RelationLabel::Other);
        }
        let (name, dir) = if let Some(name) = s.strip_suffix("(e1,e2)") {
            (name, Direction::Forward)
        } else if let Some(name) = s.strip_suffix("(e2,e1)") {
            (name, Direction::Reverse)
        } else {
            return Err(Error::Invalid(format!("unknown relation label `{s}`")));
        };
        Family::ALL
            .iter()
            .find(|f| f.name() == name)
            .map(|&f| RelationLabel::Directed(f, dir))
            .ok_or_else(|| Error::Invalid(format!("unknown relation label `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nineteen_distinct_labels() {
        let labels: std::collections::BTreeSet<_> = RelationLabel::all().collect();
        assert_eq!(labels.len(), 19);
        assert_eq!(labels.iter().filter(|l| l.is_other()).count(), 1);
        for l in labels {
            assert_eq!(l.is_other(), l.direction().is_none());
        }
    }

    #[test]
    fn id_codec_round_trips() {
        for k in 0..NUM_LABELS {
            assert_eq!(RelationLabel::from_id(k).unwrap().id(), k);
        }
        assert!(RelationLabel::from_id(NUM_LABELS).is_none());
    }

    #[test]
    fn string_codec_round_trips() {
        for l in RelationLabel::all() {
            assert_eq!(l.to_string().parse::<RelationLabel>().unwrap(), l);
        }
        assert_eq!(
            "Entity-Destination(e1,e2)".parse::<RelationLabel>().unwrap(),
            RelationLabel::Directed(Family::EntityDestination, Direction::Forward)
        );
        assert!("Entity-Destination".parse::<RelationLabel>().is_err());
        assert!("Foo-Bar(e1,e2)".parse::<RelationLabel>().is_err());
    }
}
