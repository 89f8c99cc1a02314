//! Venue → AI subfield mapping.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subfield {
    Nlp,
    Cv,
    Ml,
    Dm,
    Robotics,
    Unknown,
}

impl Subfield {
    pub const KNOWN: [Subfield; 5] = [
        Subfield::Nlp,
        Subfield::Cv,
        Subfield::Ml,
        Subfield::Dm,
        Subfield::Robotics,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Subfield::Nlp => "NLP",
            Subfield::Cv => "CV",
            Subfield::Ml => "ML",
            Subfield::Dm => "DM",
            Subfield::Robotics => "Robotics",
            Subfield::Unknown => "Unknown",
        }
    }
}

impl fmt::Display for Subfield {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Subfield {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        Subfield::KNOWN
            .into_iter()
            .chain([Subfield::Unknown])
            .find(|f| f.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| CoreError::Config(format!("unknown subfield `{s}`")))
    }
}

/// Conference lists per subfield, as published by the AI deadlines tracker.
/// Some venues appear under two subfields.
const VENUE_TABLE: &[(Subfield, &[&str])] = &[
    (
        Subfield::Nlp,
        &[
            "ACL", "EMNLP", "EACL", "COLING", "NAACL", "IJCNLP", "CONLL", "LREC",
        ],
    ),
    (
        Subfield::Cv,
        &[
            "MM", "ICML", "ICMR", "ACCV", "3DV", "ICME", "ICIP", "MIDL", "MICCAI", "ICCV", "FG",
            "WACV", "CVPR", "ECCV", "BMVC",
        ],
    ),
    (
        Subfield::Ml,
        &[
            "ECAI", "NEURIPS", "UAI", "IJCAI", "ICML", "AISTATS", "ICLR", "ACML", "AAAI", "ALT",
            "COLT", "ICCV", "ICPR", "AAMAS", "ICAPS",
        ],
    ),
    (
        Subfield::Dm,
        &[
            "SIGIR", "ICDM", "PAKDD", "PKDD", "WSDM", "CIKM", "SDM", "RESSYS", "WWW", "ICWSM",
            "KDD", "ISMIS",
        ],
    ),
    (Subfield::Robotics, &["IROS", "RSS", "HRI", "ICRA"]),
];

pub const DEFAULT_PRIORITY: [Subfield; 5] = [
    Subfield::Cv,
    Subfield::Ml,
    Subfield::Nlp,
    Subfield::Dm,
    Subfield::Robotics,
];

/// Resolves a venue acronym to one subfield. Venues listed under several
/// subfields go to the earliest one in `priority`.
#[derive(Debug, Clone)]
pub struct SubfieldMap {
    priority: Vec<Subfield>,
}

impl Default for SubfieldMap {
    fn default() -> Self {
        Self {
            priority: DEFAULT_PRIORITY.to_vec(),
        }
    }
}

impl SubfieldMap {
    pub fn with_priority(priority: Vec<Subfield>) -> Result<Self> {
        let mut sorted = priority.clone();
        sorted.sort();
        if sorted != Subfield::KNOWN.to_vec() {
            return Err(CoreError::Config(
                "subfield priority must list each known subfield exactly once".into(),
            ));
        }
        Ok(Self { priority })
    }

    pub fn priority(&self) -> &[Subfield] {
        &self.priority
    }

    pub fn subfield_of(&self, venue: &str) -> Subfield {
        let v = venue.trim().to_uppercase();
        self.priority
            .iter()
            .copied()
            .find(|sf| {
                VENUE_TABLE
                    .iter()
                    .any(|(s, venues)| s == sf && venues.contains(&v.as_str()))
            })
            .unwrap_or(Subfield::Unknown)
    }

    /// Venues listed under more than one subfield, with every listing.
    pub fn ambiguous_venues() -> Vec<(&'static str, Vec<Subfield>)> {
        let mut out: Vec<(&'static str, Vec<Subfield>)> = Vec::new();
        for (sf, venues) in VENUE_TABLE {
            for v in *venues {
                match out.iter_mut().find(|(name, _)| name == v) {
                    Some((_, l)) => l.push(*sf),
                    None => out.push((v, vec![*sf])),
                }
            }
        }
        out.retain(|(_, l)| l.len() > 1);
        out
    }
}

pub fn subfield_of(venue: &str) -> Subfield {
    SubfieldMap::default().subfield_of(venue)
}
