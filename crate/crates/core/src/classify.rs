//! Affiliation classification and team labelling.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Authorship, Corpus, PaperRecord};
use crate::error::{CoreError, Result};

pub const DEFAULT_ACADEMIC_KEYWORDS: &[&str] = &[
    "university",
    "academy",
    "school",
    "college",
    "faculty",
    "institute of technology",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OrgClass {
    Academic,
    Industry,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassSource {
    Registry,
    Keyword,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffiliationClass {
    pub name: String,
    pub class: OrgClass,
    pub source: ClassSource,
}

fn normalize(name: &str) -> String {
    name.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

fn words(name: &str) -> Vec<String> {
    name.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Curated organization table. Lookups are case- and whitespace-insensitive.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    entries: HashMap<String, OrgClass>,
}

impl Registry {
    pub fn insert(&mut self, name: &str, class: OrgClass) -> Result<()> {
        if class == OrgClass::Unknown {
            return Err(CoreError::Contract(format!(
                "registry entry `{name}` must be academic or industry"
            )));
        }
        self.entries.insert(normalize(name), class);
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Option<OrgClass> {
        self.entries.get(&normalize(name)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads a two-column `name,class` file. A leading `name,class` header is
    /// optional. Accepted class tags: academic/education, industry/company.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut reg = Registry::default();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let line = i + 1;
            if row.len() != 2 {
                return Err(CoreError::Parse {
                    line,
                    message: format!("registry rows need 2 columns, found {}", row.len()),
                });
            }
            if i == 0 && row[0].eq_ignore_ascii_case("name") && row[1].eq_ignore_ascii_case("class")
            {
                continue;
            }
            let class = match row[1].to_ascii_lowercase().as_str() {
                "academic" | "education" => OrgClass::Academic,
                "industry" | "company" => OrgClass::Industry,
                other => {
                    return Err(CoreError::Parse {
                        line,
                        message: format!("unknown registry class `{other}`"),
                    })
                }
            };
            reg.insert(&row[0], class)?;
        }
        Ok(reg)
    }

    /// Serializes in sorted order with a header row.
    pub fn to_csv(&self) -> String {
        let sorted: BTreeMap<&String, &OrgClass> = self.entries.iter().collect();
        let mut s = String::from("name,class\n");
        for (name, class) in sorted {
            let tag = if *class == OrgClass::Academic {
                "academic"
            } else {
                "industry"
            };
            s.push_str(&format!("{name},{tag}\n"));
        }
        s
    }
}

/// Registry lookup first, then case-insensitive whole-word keyword matching.
#[derive(Debug, Clone)]
pub struct Classifier {
    registry: Registry,
    keywords: Vec<Vec<String>>,
}

impl Default for Classifier {
    fn default() -> Self {
        Self::new(Registry::default())
    }
}

impl Classifier {
    pub fn new(registry: Registry) -> Self {
        Self::with_keywords(registry, DEFAULT_ACADEMIC_KEYWORDS)
    }

    pub fn with_keywords<S: AsRef<str>>(registry: Registry, keywords: &[S]) -> Self {
        let keywords = keywords
            .iter()
            .map(|k| words(k.as_ref()))
            .filter(|k| !k.is_empty())
            .collect();
        Self { registry, keywords }
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn classify(&self, name: &str) -> AffiliationClass {
        let (class, source) = if let Some(c) = self.registry.lookup(name) {
            (c, ClassSource::Registry)
        } else if self.matches_keyword(name) {
            (OrgClass::Academic, ClassSource::Keyword)
        } else {
            (OrgClass::Unknown, ClassSource::Unresolved)
        };
        AffiliationClass {
            name: name.to_string(),
            class,
            source,
        }
    }

    fn matches_keyword(&self, name: &str) -> bool {
        let ws = words(name);
        self.keywords
            .iter()
            .any(|k| ws.windows(k.len()).any(|w| w == k.as_slice()))
    }

    /// What the author's affiliations on one paper say about them.
    pub fn author_affiliation(&self, author: &Authorship) -> AuthorAffiliation {
        let mut a = AuthorAffiliation::default();
        for name in &author.affiliations {
            match self.classify(name).class {
                OrgClass::Academic => a.academic = true,
                OrgClass::Industry => a.industry = true,
                OrgClass::Unknown => {}
            }
        }
        a
    }

    pub fn team_label(&self, paper: &PaperRecord) -> TeamLabel {
        let authors: Vec<AuthorAffiliation> = paper
            .authors
            .iter()
            .map(|a| self.author_affiliation(a))
            .collect();
        let team = team_type(&authors);
        TeamLabel {
            paper_id: paper.paper_id.clone(),
            team_type: team,
            subtype: if team == TeamType::Mixed {
                collab_subtype(&authors).ok()
            } else {
                None
            },
        }
    }
}

/// Convenience wrapper: registry (if any) with the default keyword list.
pub fn classify_affiliation(name: &str, registry: Option<&Registry>) -> AffiliationClass {
    Classifier::new(registry.cloned().unwrap_or_default()).classify(name)
}

/// Affiliation evidence for one author on one paper.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AuthorAffiliation {
    pub academic: bool,
    pub industry: bool,
}

impl AuthorAffiliation {
    pub const ACADEMIC: Self = Self {
        academic: true,
        industry: false,
    };
    pub const INDUSTRY: Self = Self {
        academic: false,
        industry: true,
    };
    pub const BOTH: Self = Self {
        academic: true,
        industry: true,
    };
    pub const UNKNOWN: Self = Self {
        academic: false,
        industry: false,
    };

    /// Single class per author; dual affiliation counts as academic.
    pub fn class(self) -> OrgClass {
        if self.academic {
            OrgClass::Academic
        } else if self.industry {
            OrgClass::Industry
        } else {
            OrgClass::Unknown
        }
    }

    pub fn is_resolved(self) -> bool {
        self.academic || self.industry
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TeamType {
    AcademicOnly,
    IndustryOnly,
    Mixed,
    Unclassifiable,
}

impl TeamType {
    pub const ALL: [TeamType; 4] = [
        TeamType::AcademicOnly,
        TeamType::IndustryOnly,
        TeamType::Mixed,
        TeamType::Unclassifiable,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TeamType::AcademicOnly => "academic",
            TeamType::IndustryOnly => "industry",
            TeamType::Mixed => "mixed",
            TeamType::Unclassifiable => "unclassifiable",
        }
    }
}

impl fmt::Display for TeamType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TeamType {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        TeamType::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| CoreError::Contract(format!("unknown team type `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CollabSubtype {
    FirstAcadLastAcad,
    FirstAcadLastInd,
    FirstIndLastAcad,
    FirstIndLastInd,
}

impl CollabSubtype {
    pub const ALL: [CollabSubtype; 4] = [
        CollabSubtype::FirstAcadLastAcad,
        CollabSubtype::FirstAcadLastInd,
        CollabSubtype::FirstIndLastAcad,
        CollabSubtype::FirstIndLastInd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CollabSubtype::FirstAcadLastAcad => "first_acad_last_acad",
            CollabSubtype::FirstAcadLastInd => "first_acad_last_ind",
            CollabSubtype::FirstIndLastAcad => "first_ind_last_acad",
            CollabSubtype::FirstIndLastInd => "first_ind_last_ind",
        }
    }
}

impl fmt::Display for CollabSubtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TeamLabel {
    pub paper_id: String,
    pub team_type: TeamType,
    /// Present iff `team_type` is `Mixed`.
    pub subtype: Option<CollabSubtype>,
}

/// Unknown authors are ignored; both classes anywhere on the byline (even on
/// a single author) make the team mixed.
pub fn team_type(authors: &[AuthorAffiliation]) -> TeamType {
    let academic = authors.iter().any(|a| a.academic);
    let industry = authors.iter().any(|a| a.industry);
    match (academic, industry) {
        (true, true) => TeamType::Mixed,
        (true, false) => TeamType::AcademicOnly,
        (false, true) => TeamType::IndustryOnly,
        (false, false) => TeamType::Unclassifiable,
    }
}

/// First/last-author subtype of a mixed team. Dual-affiliated authors count
/// as academic; unresolved authors at either end are skipped inward to the
/// nearest resolved author.
pub fn collab_subtype(authors: &[AuthorAffiliation]) -> Result<CollabSubtype> {
    if team_type(authors) != TeamType::Mixed {
        return Err(CoreError::Contract(
            "collaboration subtype requested for a non-mixed team".into(),
        ));
    }
    let first = authors
        .iter()
        .find(|a| a.is_resolved())
        .expect("mixed has resolved");
    let last = authors
        .iter()
        .rev()
        .find(|a| a.is_resolved())
        .expect("mixed has resolved");
    Ok(
        match (
            first.class() == OrgClass::Academic,
            last.class() == OrgClass::Academic,
        ) {
            (true, true) => CollabSubtype::FirstAcadLastAcad,
            (true, false) => CollabSubtype::FirstAcadLastInd,
            (false, true) => CollabSubtype::FirstIndLastAcad,
            (false, false) => CollabSubtype::FirstIndLastInd,
        },
    )
}

/// Labels for every paper, aligned with `corpus.papers()`, plus counts of
/// what could not be resolved.
#[derive(Debug, Clone, Default)]
pub struct CorpusLabels {
    pub labels: Vec<TeamLabel>,
    /// Per paper, per byline position.
    pub author_classes: Vec<Vec<AuthorAffiliation>>,
    /// Unresolved affiliation names with occurrence counts, sorted by name.
    pub unresolved_affiliations: BTreeMap<String, usize>,
    pub authors_without_affiliation: usize,
}

impl CorpusLabels {
    pub fn counts(&self) -> BTreeMap<TeamType, usize> {
        let mut m: BTreeMap<TeamType, usize> = TeamType::ALL.iter().map(|&t| (t, 0)).collect();
        for l in &self.labels {
            *m.get_mut(&l.team_type).unwrap() += 1;
        }
        m
    }
}

pub fn label_corpus(corpus: &Corpus, classifier: &Classifier) -> CorpusLabels {
    let mut out = CorpusLabels::default();
    for paper in corpus.papers() {
        let mut classes = Vec::with_capacity(paper.authors.len());
        for a in &paper.authors {
            if a.affiliations.is_empty() {
                out.authors_without_affiliation += 1;
            }
            for name in &a.affiliations {
                if classifier.classify(name).class == OrgClass::Unknown {
                    *out.unresolved_affiliations.entry(name.clone()).or_default() += 1;
                }
            }
            classes.push(classifier.author_affiliation(a));
        }
        out.labels.push(classifier.team_label(paper));
        out.author_classes.push(classes);
    }
    out
}
