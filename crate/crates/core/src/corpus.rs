//! Line-delimited paper records and the validated, deduplicated corpus.
//!
//! One JSON object per line:
//!
//! ```text
//! {"id":"p1","year":2015,"venue":"ACL","authors":[{"id":"a1","affiliations":["Stanford University"]}],"references":["p0"]}
//! ```

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CoreError, Result};

pub const MIN_YEAR: i32 = 1900;

/// One author's position on a byline together with the affiliations held on
/// that paper.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Authorship {
    pub id: String,
    #[serde(default)]
    pub affiliations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    #[serde(rename = "id")]
    pub paper_id: String,
    pub year: i32,
    #[serde(default)]
    pub venue: String,
    /// Byline order.
    pub authors: Vec<Authorship>,
    #[serde(default)]
    pub references: Vec<String>,
}

impl PaperRecord {
    pub fn author_ids(&self) -> impl Iterator<Item = &str> {
        self.authors.iter().map(|a| a.id.as_str())
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum YearField {
    Int(i64),
    Text(String),
}

#[derive(Deserialize)]
struct RawPaper {
    id: String,
    year: YearField,
    #[serde(default)]
    venue: String,
    authors: Vec<Authorship>,
    #[serde(default)]
    references: Vec<String>,
}

/// A reference whose target is not part of the corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DanglingRef {
    pub paper_id: String,
    pub target: String,
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    papers: Vec<PaperRecord>,
    index: HashMap<String, usize>,
    dangling: Vec<DanglingRef>,
    dropped_self_refs: Vec<String>,
}

impl Corpus {
    /// Validates and deduplicates records. Exact duplicates are collapsed;
    /// a repeated id with different content is an error.
    pub fn from_records(records: impl IntoIterator<Item = PaperRecord>) -> Result<Self> {
        let mut corpus = Corpus::default();
        for (i, rec) in records.into_iter().enumerate() {
            corpus.insert(rec, i + 1)?;
        }
        corpus.resolve_dangling();
        Ok(corpus)
    }

    fn insert(&mut self, mut rec: PaperRecord, line: usize) -> Result<()> {
        if rec.paper_id.is_empty() {
            return Err(CoreError::Parse {
                line,
                message: "empty paper id".into(),
            });
        }
        if rec.year < MIN_YEAR {
            return Err(CoreError::Parse {
                line,
                message: format!("year {} is before {MIN_YEAR}", rec.year),
            });
        }
        if rec.authors.is_empty() {
            return Err(CoreError::Parse {
                line,
                message: format!("paper `{}` has no authors", rec.paper_id),
            });
        }
        if rec.authors.iter().any(|a| a.id.is_empty()) {
            return Err(CoreError::Parse {
                line,
                message: format!("paper `{}` has an author with an empty id", rec.paper_id),
            });
        }
        let mut seen = HashSet::new();
        let before = rec.references.len();
        let own = rec.paper_id.clone();
        rec.references.retain(|r| r != &own);
        if rec.references.len() != before {
            self.dropped_self_refs.push(own.clone());
        }
        rec.references.retain(|r| seen.insert(r.clone()));

        if let Some(&existing) = self.index.get(&rec.paper_id) {
            if self.papers[existing] == rec {
                return Ok(());
            }
            return Err(CoreError::DuplicatePaper {
                id: rec.paper_id,
                line,
            });
        }
        self.index.insert(rec.paper_id.clone(), self.papers.len());
        self.papers.push(rec);
        Ok(())
    }

    fn resolve_dangling(&mut self) {
        self.dangling = self
            .papers
            .iter()
            .flat_map(|p| {
                p.references
                    .iter()
                    .filter(|r| !self.index.contains_key(*r))
                    .map(|r| DanglingRef {
                        paper_id: p.paper_id.clone(),
                        target: r.clone(),
                    })
            })
            .collect();
    }

    pub fn papers(&self) -> &[PaperRecord] {
        &self.papers
    }

    pub fn len(&self) -> usize {
        self.papers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    pub fn get(&self, paper_id: &str) -> Option<&PaperRecord> {
        self.index.get(paper_id).map(|&i| &self.papers[i])
    }

    pub fn position(&self, paper_id: &str) -> Option<usize> {
        self.index.get(paper_id).copied()
    }

    pub fn dangling_references(&self) -> &[DanglingRef] {
        &self.dangling
    }

    /// Papers that listed themselves as a reference (the self-edge is dropped).
    pub fn dropped_self_references(&self) -> &[String] {
        &self.dropped_self_refs
    }

    /// SHA-256 over the canonical line-delimited serialization.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for p in &self.papers {
            hasher.update(serde_json::to_vec(p).expect("paper serializes"));
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }

    pub fn write_jsonl<W: Write>(&self, out: W) -> std::io::Result<()> {
        write_records(&self.papers, out)
    }
}

pub fn write_records<W: Write>(records: &[PaperRecord], mut out: W) -> std::io::Result<()> {
    for p in records {
        serde_json::to_writer(&mut out, p)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

fn parse_line(text: &str, line: usize) -> Result<PaperRecord> {
    let raw: RawPaper = serde_json::from_str(text).map_err(|e| CoreError::Parse {
        line,
        message: e.to_string(),
    })?;
    let year = match raw.year {
        YearField::Int(y) => i32::try_from(y).map_err(|_| CoreError::Parse {
            line,
            message: format!("year {y} out of range"),
        })?,
        YearField::Text(s) => s.trim().parse::<i32>().map_err(|_| CoreError::Parse {
            line,
            message: format!("year `{s}` is not an integer"),
        })?,
    };
    Ok(PaperRecord {
        paper_id: raw.id,
        year,
        venue: raw.venue,
        authors: raw.authors,
        references: raw.references,
    })
}

/// Reads one paper per line; blank lines are skipped. Errors carry the
/// 1-based line number.
pub fn parse_corpus<R: BufRead>(reader: R) -> Result<Corpus> {
    let mut corpus = Corpus::default();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let text = line.map_err(|e| CoreError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if text.trim().is_empty() {
            continue;
        }
        let rec = parse_line(&text, line_no)?;
        corpus.insert(rec, line_no)?;
    }
    corpus.resolve_dangling();
    Ok(corpus)
}
