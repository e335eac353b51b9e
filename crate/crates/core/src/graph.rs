//! The weighted directed graph of extracted (hyponym, hypernym) pairs.
//!
//! Storage is sparse throughout: edges are a map keyed by id pairs and the
//! probability/PPMI views materialize entries for observed pairs only. The
//! graph may contain cycles — noisy extractions routinely produce them — so
//! nothing here assumes acyclicity.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: expected {expected} tab-separated fields, got {got}")]
    BadFieldCount {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: count must be a positive integer, got {value:?}")]
    BadCount { line: usize, value: String },
    #[error("line {line}: empty term")]
    EmptyTerm { line: usize },
    #[error("line {line}: self-loop {term:?} is not a valid edge")]
    SelfLoop { line: usize, term: String },
    #[error("matrix views are undefined on an empty graph")]
    EmptyGraph,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Bidirectional term-phrase <-> dense id mapping. Ids are assigned
/// contiguously from 0 in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Id of `term`, inserting it if unseen.
    pub fn intern(&mut self, term: &str) -> u32 {
        if let Some(&id) = self.index.get(term) {
            return id;
        }
        let id = self.terms.len() as u32;
        self.terms.push(term.to_string());
        self.index.insert(term.to_string(), id);
        id
    }

    pub fn id(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: u32) -> &str {
        &self.terms[id as usize]
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }

    pub fn save_tsv<W: Write>(&self, mut out: W) -> Result<(), GraphError> {
        for (id, term) in self.terms.iter().enumerate() {
            writeln!(out, "{id}\t{term}")?;
        }
        Ok(())
    }
}

/// A set of directed (u, v) id pairs; self-pairs are rejected.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EdgeSet {
    pairs: HashSet<(u32, u32)>,
}

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts the pair; returns false for self-pairs and duplicates.
    pub fn insert(&mut self, u: u32, v: u32) -> bool {
        if u == v {
            return false;
        }
        self.pairs.insert((u, v))
    }

    pub fn contains(&self, u: u32, v: u32) -> bool {
        self.pairs.contains(&(u, v))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.pairs.iter().copied()
    }

    /// Pairs sorted by id, for deterministic iteration.
    pub fn sorted(&self) -> Vec<(u32, u32)> {
        let mut v: Vec<_> = self.pairs.iter().copied().collect();
        v.sort_unstable();
        v
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.pairs.is_subset(&other.pairs)
    }
}

impl FromIterator<(u32, u32)> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = (u32, u32)>>(iter: I) -> Self {
        let mut set = EdgeSet::new();
        for (u, v) in iter {
            set.insert(u, v);
        }
        set
    }
}

/// Sparse |V| x |V| matrix keyed by (row, col) id pairs; absent entries are 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    size: usize,
    entries: HashMap<(u32, u32), f64>,
}

impl SparseMatrix {
    pub fn new(size: usize) -> Self {
        SparseMatrix {
            size,
            entries: HashMap::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: u32, col: u32) -> f64 {
        self.entries.get(&(row, col)).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, row: u32, col: u32, value: f64) {
        debug_assert!((row as usize) < self.size && (col as usize) < self.size);
        if value != 0.0 {
            self.entries.insert((row, col), value);
        }
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn sum(&self) -> f64 {
        self.entries.values().sum()
    }
}

/// Vocabulary plus weighted directed edges `w(u, v)` with their total mass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HearstGraph {
    vocab: Vocabulary,
    edges: HashMap<(u32, u32), u64>,
    total: u64,
}

impl HearstGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `count` observations of (hypo, hyper). Self-pairs are dropped.
    pub fn add_count(&mut self, hypo: &str, hyper: &str, count: u64) {
        if count == 0 || hypo == hyper {
            return;
        }
        let u = self.vocab.intern(hypo);
        let v = self.vocab.intern(hyper);
        *self.edges.entry((u, v)).or_insert(0) += count;
        self.total += count;
    }

    /// Folds another graph's counts into this one. Associative and
    /// commutative over the (phrase, phrase) -> count multiset, which is what
    /// makes sharded extraction mergeable.
    pub fn merge(&mut self, other: &HearstGraph) {
        for (&(u, v), &w) in &other.edges {
            self.add_count(other.vocab.term(u), other.vocab.term(v), w);
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Sum of all edge weights `W`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self, u: u32, v: u32) -> u64 {
        self.edges.get(&(u, v)).copied().unwrap_or(0)
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.edges.contains_key(&(u, v))
    }

    /// Edges sorted by id pair, for deterministic iteration.
    pub fn edges_sorted(&self) -> Vec<((u32, u32), u64)> {
        let mut v: Vec<_> = self.edges.iter().map(|(&k, &w)| (k, w)).collect();
        v.sort_unstable();
        v
    }

    pub fn edge_set(&self) -> EdgeSet {
        self.edges.keys().copied().collect()
    }

    /// Parses `hypo<TAB>hyper<TAB>count` rows. Duplicate rows accumulate;
    /// self-loops and non-positive counts are rejected with their line number.
    pub fn load_tsv<R: BufRead>(reader: R) -> Result<Self, GraphError> {
        let mut graph = HearstGraph::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(GraphError::BadFieldCount {
                    line: lineno,
                    expected: 3,
                    got: fields.len(),
                });
            }
            if fields[0].is_empty() || fields[1].is_empty() {
                return Err(GraphError::EmptyTerm { line: lineno });
            }
            let count: u64 = fields[2].parse().ok().filter(|c| *c >= 1).ok_or_else(|| {
                GraphError::BadCount {
                    line: lineno,
                    value: fields[2].to_string(),
                }
            })?;
            if fields[0] == fields[1] {
                return Err(GraphError::SelfLoop {
                    line: lineno,
                    term: fields[0].to_string(),
                });
            }
            graph.add_count(fields[0], fields[1], count);
        }
        Ok(graph)
    }

    /// Writes `hypo<TAB>hyper<TAB>count` rows sorted by (hypo, hyper).
    pub fn save_tsv<W: Write>(&self, mut out: W) -> Result<(), GraphError> {
        out.write_all(self.to_tsv_string().as_bytes())?;
        Ok(())
    }

    pub fn to_tsv_string(&self) -> String {
        let mut rows: Vec<(&str, &str, u64)> = self
            .edges
            .iter()
            .map(|(&(u, v), &w)| (self.vocab.term(u), self.vocab.term(v), w))
            .collect();
        rows.sort_unstable();
        let mut s = String::new();
        for (hypo, hyper, count) in rows {
            let _ = writeln!(s, "{hypo}\t{hyper}\t{count}");
        }
        s
    }

    /// Extraction-probability view: entry (x, y) = w(x, y) / W.
    pub fn prob_matrix(&self) -> Result<SparseMatrix, GraphError> {
        if self.total == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let w_total = self.total as f64;
        let mut m = SparseMatrix::new(self.vocab.len());
        for (&(u, v), &w) in &self.edges {
            m.set(u, v, w as f64 / w_total);
        }
        Ok(m)
    }

    /// Positive pointwise mutual information view (natural log):
    /// `max(0, ln(p(x,y) / (p_out(x) * p_in(y))))` with
    /// `p_out(x) = sum_y w(x,y)/W` and `p_in(y) = sum_x w(x,y)/W`.
    pub fn ppmi_matrix(&self) -> Result<SparseMatrix, GraphError> {
        if self.total == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let w_total = self.total as f64;
        let n = self.vocab.len();
        let mut out_w = vec![0u64; n];
        let mut in_w = vec![0u64; n];
        for (&(u, v), &w) in &self.edges {
            out_w[u as usize] += w;
            in_w[v as usize] += w;
        }
        let mut m = SparseMatrix::new(n);
        for (&(u, v), &w) in &self.edges {
            let p = w as f64 / w_total;
            let p_out = out_w[u as usize] as f64 / w_total;
            let p_in = in_w[v as usize] as f64 / w_total;
            let pmi = (p / (p_out * p_in)).ln();
            if pmi > 0.0 {
                m.set(u, v, pmi);
            }
        }
        Ok(m)
    }
}

/// Taxonomy edges partitioned for the reconstruction ablation.
#[derive(Debug, Clone)]
pub struct TaxonomySplit {
    /// Every taxonomy edge.
    pub all: EdgeSet,
    /// Taxonomy edges absent from the graph.
    pub missing: EdgeSet,
    /// Missing edges (x, z) with a two-hop path x -> y -> z in the graph.
    pub transitive: EdgeSet,
}

/// Splits taxonomy edges into All / Missing / Transitive relative to `graph`.
pub fn transitive_missing(graph: &HearstGraph, taxonomy: &EdgeSet) -> TaxonomySplit {
    let mut successors: HashMap<u32, Vec<u32>> = HashMap::new();
    for ((u, v), _) in graph.edges_sorted() {
        successors.entry(u).or_default().push(v);
    }
    let mut missing = EdgeSet::new();
    let mut transitive = EdgeSet::new();
    for (x, z) in taxonomy.iter() {
        if graph.has_edge(x, z) {
            continue;
        }
        missing.insert(x, z);
        let two_hop = successors
            .get(&x)
            .map(|ys| {
                ys.iter()
                    .any(|y| successors.get(y).is_some_and(|zs| zs.contains(&z)))
            })
            .unwrap_or(false);
        if two_hop {
            transitive.insert(x, z);
        }
    }
    TaxonomySplit {
        all: taxonomy.clone(),
        missing,
        transitive,
    }
}

/// Reads `hypo<TAB>hyper` taxonomy rows, resolving terms against `vocab`.
/// Pairs with an unresolvable side are returned separately, not dropped.
pub fn load_taxonomy_tsv<R: BufRead>(
    reader: R,
    vocab: &Vocabulary,
) -> Result<(EdgeSet, Vec<(String, String)>), GraphError> {
    let mut edges = EdgeSet::new();
    let mut unresolved = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(GraphError::BadFieldCount {
                line: lineno,
                expected: 2,
                got: fields.len(),
            });
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(GraphError::EmptyTerm { line: lineno });
        }
        if fields[0] == fields[1] {
            return Err(GraphError::SelfLoop {
                line: lineno,
                term: fields[0].to_string(),
            });
        }
        match (vocab.id(fields[0]), vocab.id(fields[1])) {
            (Some(u), Some(v)) => {
                edges.insert(u, v);
            }
            _ => unresolved.push((fields[0].to_string(), fields[1].to_string())),
        }
    }
    Ok((edges, unresolved))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn graph_from(rows: &[(&str, &str, u64)]) -> HearstGraph {
        let mut g = HearstGraph::new();
        for (hypo, hyper, count) in rows {
            g.add_count(hypo, hyper, *count);
        }
        g
    }

    #[test]
    fn vocabulary_round_trips_ids() {
        let mut v = Vocabulary::new();
        let a = v.intern("cat");
        let b = v.intern("animal");
        assert_eq!(v.intern("cat"), a);
        assert_eq!((a, b), (0, 1));
        assert_eq!(v.term(v.id("animal").unwrap()), "animal");
        assert_eq!(v.id("dog"), None);
    }

    #[test]
    fn counts_accumulate_and_self_pairs_drop() {
        let g = graph_from(&[("cat", "animal", 1), ("cat", "animal", 1), ("cat", "cat", 5)]);
        let (u, v) = (g.vocab().id("cat").unwrap(), g.vocab().id("animal").unwrap());
        assert_eq!(g.weight(u, v), 2);
        assert_eq!(g.total(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn load_single_row() {
        let g = HearstGraph::load_tsv(Cursor::new("a\tb\t3\n")).unwrap();
        assert_eq!(g.total(), 3);
        assert_eq!(g.vocab().len(), 2);
    }

    #[test]
    fn save_load_round_trip_is_identity_on_sorted_tsv() {
        let g = graph_from(&[("dog", "animal", 2), ("cat", "animal", 7), ("cat", "pet", 1)]);
        let tsv = g.to_tsv_string();
        let reloaded = HearstGraph::load_tsv(Cursor::new(tsv.clone())).unwrap();
        assert_eq!(reloaded.to_tsv_string(), tsv);
        assert_eq!(reloaded.total(), g.total());
    }

    #[test]
    fn load_rejects_bad_rows() {
        let err = HearstGraph::load_tsv(Cursor::new("a\tb\t0\n")).unwrap_err();
        assert!(matches!(err, GraphError::BadCount { line: 1, .. }));
        let err = HearstGraph::load_tsv(Cursor::new("a\tb\t2\nx\ty\n")).unwrap_err();
        assert!(matches!(err, GraphError::BadFieldCount { line: 2, .. }));
        let err = HearstGraph::load_tsv(Cursor::new("a\tb\t-4\n")).unwrap_err();
        assert!(matches!(err, GraphError::BadCount { line: 1, .. }));
        let err = HearstGraph::load_tsv(Cursor::new("a\ta\t2\n")).unwrap_err();
        assert!(matches!(err, GraphError::SelfLoop { line: 1, .. }));
    }

    #[test]
    fn merge_matches_joint_aggregation() {
        let mut a = graph_from(&[("cat", "animal", 2), ("dog", "animal", 1)]);
        let b = graph_from(&[("cat", "animal", 3), ("oak", "tree", 4)]);
        a.merge(&b);
        let joint = graph_from(&[
            ("cat", "animal", 5),
            ("dog", "animal", 1),
            ("oak", "tree", 4),
        ]);
        assert_eq!(a.to_tsv_string(), joint.to_tsv_string());
    }

    #[test]
    fn prob_matrix_divides_by_total() {
        let g = graph_from(&[("a", "b", 3), ("c", "b", 1)]);
        let m = g.prob_matrix().unwrap();
        let (a, b, c) = (
            g.vocab().id("a").unwrap(),
            g.vocab().id("b").unwrap(),
            g.vocab().id("c").unwrap(),
        );
        assert_eq!(m.get(a, b), 0.75);
        assert_eq!(m.get(c, b), 0.25);
        assert_eq!(m.get(b, a), 0.0);
        assert!((m.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prob_matrix_single_edge_is_one() {
        let g = graph_from(&[("a", "b", 1)]);
        let m = g.prob_matrix().unwrap();
        assert_eq!(m.get(0, 1), 1.0);
    }

    #[test]
    fn empty_graph_has_no_matrix_views() {
        let g = HearstGraph::new();
        assert!(matches!(g.prob_matrix(), Err(GraphError::EmptyGraph)));
        assert!(matches!(g.ppmi_matrix(), Err(GraphError::EmptyGraph)));
    }

    #[test]
    fn ppmi_single_edge_is_zero() {
        let g = graph_from(&[("a", "b", 1)]);
        let m = g.ppmi_matrix().unwrap();
        // p = p_out = p_in = 1, so ln(1) = 0 and the entry stays sparse-zero.
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.nnz(), 0);
    }

    #[test]
    fn ppmi_matches_brute_force_on_star_graph() {
        let g = graph_from(&[("a", "b", 1), ("c", "b", 1), ("a", "d", 2)]);
        let m = g.ppmi_matrix().unwrap();
        let w_total = 4.0;
        // Brute-force marginals by direct summation over the edge list.
        let edges = [("a", "b", 1.0), ("c", "b", 1.0), ("a", "d", 2.0)];
        for (x, y, w) in edges {
            let p = w / w_total;
            let p_out: f64 = edges
                .iter()
                .filter(|(u, _, _)| *u == x)
                .map(|(_, _, w)| w / w_total)
                .sum();
            let p_in: f64 = edges
                .iter()
                .filter(|(_, v, _)| *v == y)
                .map(|(_, _, w)| w / w_total)
                .sum();
            let expected = (p / (p_out * p_in)).ln().max(0.0);
            let got = m.get(g.vocab().id(x).unwrap(), g.vocab().id(y).unwrap());
            assert!(
                (got - expected).abs() < 1e-12,
                "ppmi({x},{y}) = {got}, oracle {expected}"
            );
        }
    }

    #[test]
    fn ppmi_is_nonnegative_and_clamps() {
        // Heavy marginals make ln(...) negative for the light edge.
        let g = graph_from(&[("a", "b", 50), ("a", "c", 50), ("d", "b", 50)]);
        let m = g.ppmi_matrix().unwrap();
        for ((_, _), v) in m.iter() {
            assert!(v >= 0.0);
        }
        let (a, b) = (g.vocab().id("a").unwrap(), g.vocab().id("b").unwrap());
        // ln(p/(p_out p_in)) = ln((1/3)/((2/3)(2/3))) = ln(3/4) < 0 -> clamped.
        assert_eq!(m.get(a, b), 0.0);
    }

    #[test]
    fn transitive_missing_definition() {
        let g = graph_from(&[("a", "b", 1), ("b", "c", 1)]);
        let ids = |t: &str| g.vocab().id(t).unwrap();
        let taxonomy: EdgeSet = [
            (ids("a"), ids("b")),
            (ids("b"), ids("c")),
            (ids("a"), ids("c")),
        ]
        .into_iter()
        .collect();
        let split = transitive_missing(&g, &taxonomy);
        assert_eq!(split.all.len(), 3);
        assert_eq!(split.missing.sorted(), vec![(ids("a"), ids("c"))]);
        assert_eq!(split.transitive.sorted(), vec![(ids("a"), ids("c"))]);
    }

    #[test]
    fn taxonomy_subset_of_graph_has_nothing_missing() {
        let g = graph_from(&[("a", "b", 1), ("b", "c", 1)]);
        let taxonomy: EdgeSet = [(0, 1), (1, 2)].into_iter().collect();
        let split = transitive_missing(&g, &taxonomy);
        assert!(split.missing.is_empty());
        assert!(split.transitive.is_empty());
    }

    #[test]
    fn transitive_missing_matches_double_loop_oracle() {
        // Three-level chain with some extra edges and a cycle.
        let g = graph_from(&[
            ("a", "b", 1),
            ("b", "c", 2),
            ("c", "d", 1),
            ("d", "a", 1),
            ("a", "c", 1),
        ]);
        let n = g.vocab().len() as u32;
        let mut taxonomy = EdgeSet::new();
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    taxonomy.insert(u, v);
                }
            }
        }
        let split = transitive_missing(&g, &taxonomy);
        // O(E^2) oracle: enumerate all edge pairs.
        let edges = g.edge_set();
        let mut expected = EdgeSet::new();
        for (x, y) in edges.iter() {
            for (y2, z) in edges.iter() {
                if y == y2 && x != z && !edges.contains(x, z) && taxonomy.contains(x, z) {
                    expected.insert(x, z);
                }
            }
        }
        assert_eq!(split.transitive.sorted(), expected.sorted());
        assert!(split
            .transitive
            .sorted()
            .iter()
            .all(|&(u, v)| split.missing.contains(u, v)));
        assert!(split.missing.is_subset(&split.all));
    }

    #[test]
    fn taxonomy_loader_tracks_unresolved() {
        let g = graph_from(&[("cat", "animal", 1)]);
        let (edges, unresolved) =
            load_taxonomy_tsv(Cursor::new("cat\tanimal\ncat\torganism\n"), g.vocab()).unwrap();
        assert_eq!(edges.len(), 1);
        assert_eq!(
            unresolved,
            vec![("cat".to_string(), "organism".to_string())]
        );
    }
}
