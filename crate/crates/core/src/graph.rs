//! Compressed forward/reverse citation adjacency over the observed corpus.

use std::collections::HashMap;

use crate::corpus::{Corpus, DanglingRef};

/// Dense node index; equals the paper's position in the corpus.
pub type NodeId = u32;

#[derive(Debug, Clone, Default)]
pub struct GraphDiagnostics {
    pub dangling: Vec<DanglingRef>,
    /// Pairs `(a, b)` with `a < b` by node index where each cites the other.
    pub two_cycles: Vec<(String, String)>,
}

/// Immutable after `build`. Adjacency lists are sorted by node index.
#[derive(Debug, Clone)]
pub struct CitationGraph {
    ids: Vec<String>,
    years: Vec<i32>,
    venues: Vec<String>,
    index: HashMap<String, NodeId>,
    ref_offsets: Vec<usize>,
    refs: Vec<NodeId>,
    citer_offsets: Vec<usize>,
    citers: Vec<NodeId>,
}

fn csr(n: usize, lists: &[Vec<NodeId>]) -> (Vec<usize>, Vec<NodeId>) {
    let mut offsets = Vec::with_capacity(n + 1);
    let mut flat = Vec::with_capacity(lists.iter().map(Vec::len).sum());
    offsets.push(0);
    for l in lists {
        flat.extend_from_slice(l);
        offsets.push(flat.len());
    }
    (offsets, flat)
}

impl CitationGraph {
    pub fn build(corpus: &Corpus) -> (Self, GraphDiagnostics) {
        let n = corpus.len();
        let papers = corpus.papers();
        let index: HashMap<String, NodeId> = papers
            .iter()
            .enumerate()
            .map(|(i, p)| (p.paper_id.clone(), i as NodeId))
            .collect();

        let mut fwd: Vec<Vec<NodeId>> = Vec::with_capacity(n);
        let mut rev: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for (i, p) in papers.iter().enumerate() {
            let mut out: Vec<NodeId> = p
                .references
                .iter()
                .filter_map(|r| index.get(r).copied())
                .collect();
            out.sort_unstable();
            out.dedup();
            for &t in &out {
                rev[t as usize].push(i as NodeId);
            }
            fwd.push(out);
        }
        // sources were pushed in increasing order, so `rev` lists are sorted

        let mut two_cycles = Vec::new();
        for (a, outs) in fwd.iter().enumerate() {
            for &b in outs {
                if (a as NodeId) < b && fwd[b as usize].binary_search(&(a as NodeId)).is_ok() {
                    two_cycles.push((
                        papers[a].paper_id.clone(),
                        papers[b as usize].paper_id.clone(),
                    ));
                }
            }
        }

        let (ref_offsets, refs) = csr(n, &fwd);
        let (citer_offsets, citers) = csr(n, &rev);
        let graph = CitationGraph {
            ids: papers.iter().map(|p| p.paper_id.clone()).collect(),
            years: papers.iter().map(|p| p.year).collect(),
            venues: papers.iter().map(|p| p.venue.clone()).collect(),
            index,
            ref_offsets,
            refs,
            citer_offsets,
            citers,
        };
        let diagnostics = GraphDiagnostics {
            dangling: corpus.dangling_references().to_vec(),
            two_cycles,
        };
        (graph, diagnostics)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.refs.len()
    }

    pub fn node(&self, paper_id: &str) -> Option<NodeId> {
        self.index.get(paper_id).copied()
    }

    pub fn id(&self, node: NodeId) -> &str {
        &self.ids[node as usize]
    }

    pub fn year(&self, node: NodeId) -> i32 {
        self.years[node as usize]
    }

    pub fn venue(&self, node: NodeId) -> &str {
        &self.venues[node as usize]
    }

    /// Papers cited by `node`.
    pub fn references(&self, node: NodeId) -> &[NodeId] {
        let i = node as usize;
        &self.refs[self.ref_offsets[i]..self.ref_offsets[i + 1]]
    }

    /// Papers citing `node`.
    pub fn citers(&self, node: NodeId) -> &[NodeId] {
        let i = node as usize;
        &self.citers[self.citer_offsets[i]..self.citer_offsets[i + 1]]
    }

    pub fn cites(&self, from: NodeId, to: NodeId) -> bool {
        self.references(from).binary_search(&to).is_ok()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        0..self.ids.len() as NodeId
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Authorship, PaperRecord};

    pub(crate) fn paper(id: &str, year: i32, refs: &[&str]) -> PaperRecord {
        PaperRecord {
            paper_id: id.into(),
            year,
            venue: "ACL".into(),
            authors: vec![Authorship {
                id: format!("au-{id}"),
                affiliations: vec![],
            }],
            references: refs.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn transpose() {
        let c = Corpus::from_records([paper("b", 2000, &[]), paper("a", 2001, &["b"])]).unwrap();
        let (g, d) = CitationGraph::build(&c);
        let a = g.node("a").unwrap();
        let b = g.node("b").unwrap();
        assert_eq!(g.citers(b), &[a]);
        assert_eq!(g.references(a), &[b]);
        assert!(d.dangling.is_empty() && d.two_cycles.is_empty());
    }

    #[test]
    fn dangling_excluded() {
        let c = Corpus::from_records([paper("a", 2001, &["ghost"])]).unwrap();
        let (g, d) = CitationGraph::build(&c);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(d.dangling.len(), 1);
    }

    #[test]
    fn two_cycle_reported() {
        let c = Corpus::from_records([paper("a", 2001, &["b"]), paper("b", 2001, &["a"])]).unwrap();
        let (g, d) = CitationGraph::build(&c);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(d.two_cycles, vec![("a".to_string(), "b".to_string())]);
    }
}
