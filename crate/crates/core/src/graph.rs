//! Finite undirected multigraphs and their bipartite (cyan/purple) variant.
//!
//! Vertices carry opaque string identifiers and are stored in lexicographic
//! order, so a vertex index is also its rank in that order. Edges are kept as
//! a multiplicity per unordered pair of distinct vertices.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("self-loop at `{0}`")]
    SelfLoop(String),
    #[error("edge {{{0}, {1}}} has multiplicity 0")]
    ZeroMultiplicity(String, String),
    #[error("edge {{{0}, {1}}} listed more than once")]
    DuplicateEdge(String, String),
    #[error("edge endpoints `{0}`, `{1}` are not in lexicographic order")]
    UnorderedEdge(String, String),
    #[error("vertex `{0}` is both cyan and purple")]
    DoubleColored(String),
    #[error("vertex `{0}` has no color")]
    Uncolored(String),
    #[error("edge {{{0}, {1}}} joins two vertices of the same color")]
    MonochromaticEdge(String, String),
    #[error("purple vertex `{0}` has degree {1}, expected 2")]
    PurpleDegree(String, u32),
}

/// A finite undirected multigraph without self-loops.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiGraph {
    ids: Vec<String>,
    /// Multiplicity per pair `(i, j)` with `i < j`.
    edges: BTreeMap<(usize, usize), u32>,
    adjacency: Vec<Vec<usize>>,
}

impl Default for MultiGraph {
    fn default() -> Self {
        Self::empty()
    }
}

impl MultiGraph {
    pub fn empty() -> Self {
        Self { ids: Vec::new(), edges: BTreeMap::new(), adjacency: Vec::new() }
    }

    /// Builds a graph from vertex identifiers and `(v, w, multiplicity)` triples.
    ///
    /// Endpoint order inside a triple is irrelevant; a pair may appear once.
    pub fn new<V, S, E>(vertices: V, edges: E) -> Result<Self, GraphError>
    where
        V: IntoIterator<Item = S>,
        S: Into<String>,
        E: IntoIterator<Item = (S, S, u32)>,
    {
        let mut ids: Vec<String> = vertices.into_iter().map(Into::into).collect();
        ids.sort();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateVertex(w[0].clone()));
        }
        let index: HashMap<&str, usize> =
            ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut pairs = BTreeMap::new();
        for (a, b, mult) in edges {
            let (a, b) = (a.into(), b.into());
            let ia = *index.get(a.as_str()).ok_or_else(|| GraphError::UnknownVertex(a.clone()))?;
            let ib = *index.get(b.as_str()).ok_or_else(|| GraphError::UnknownVertex(b.clone()))?;
            if ia == ib {
                return Err(GraphError::SelfLoop(a));
            }
            if mult == 0 {
                return Err(GraphError::ZeroMultiplicity(a, b));
            }
            let key = (ia.min(ib), ia.max(ib));
            if pairs.insert(key, mult).is_some() {
                return Err(GraphError::DuplicateEdge(a, b));
            }
        }
        Ok(Self::from_parts(ids, pairs))
    }

    /// Builds a graph on already sorted, unique identifiers. Pairs must satisfy
    /// `i < j < ids.len()` and carry positive multiplicities.
    pub(crate) fn from_parts(ids: Vec<String>, edges: BTreeMap<(usize, usize), u32>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        let mut adjacency = vec![Vec::new(); ids.len()];
        for &(i, j) in edges.keys() {
            debug_assert!(i < j && j < ids.len());
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Self { ids, edges, adjacency }
    }

    /// Graph on vertices `v0, v1, ...` (zero-padded so that index order and
    /// lexicographic order agree) with the given index-pair multiplicities.
    pub fn indexed(n: usize, edges: impl IntoIterator<Item = ((usize, usize), u32)>) -> Self {
        let width = n.saturating_sub(1).to_string().len();
        let ids = (0..n).map(|i| format!("v{i:0width$}")).collect();
        let edges = edges
            .into_iter()
            .filter(|&(_, m)| m > 0)
            .map(|((i, j), m)| ((i.min(j), i.max(j)), m))
            .collect();
        Self::from_parts(ids, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    /// Number of edges counted with multiplicity.
    pub fn edge_count(&self) -> u64 {
        self.edges.values().map(|&m| u64::from(m)).sum()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.binary_search_by(|probe| probe.as_str().cmp(id)).ok()
    }

    pub(crate) fn require(&self, id: &str) -> Result<usize, GraphError> {
        self.index_of(id).ok_or_else(|| GraphError::UnknownVertex(id.to_string()))
    }

    pub fn multiplicity(&self, i: usize, j: usize) -> u32 {
        self.edges.get(&(i.min(j), i.max(j))).copied().unwrap_or(0)
    }

    /// Index pairs `(i, j)`, `i < j`, with their multiplicities, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = ((usize, usize), u32)> + '_ {
        self.edges.iter().map(|(&k, &m)| (k, m))
    }

    /// Distinct neighbours of vertex `i`, ascending.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Number of incident edges counted with multiplicity.
    pub fn degree(&self, id: &str) -> Result<u32, GraphError> {
        Ok(self.degree_at(self.require(id)?))
    }

    pub fn degree_at(&self, i: usize) -> u32 {
        self.adjacency[i].iter().map(|&j| self.multiplicity(i, j)).sum()
    }

    /// Connected components as sorted index lists, ordered by smallest member.
    pub fn component_indices(&self) -> Vec<Vec<usize>> {
        self.components_within(&vec![true; self.vertex_count()])
    }

    /// Connected components of the full subgraph on `{i : keep[i]}`.
    pub(crate) fn components_within(&self, keep: &[bool]) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..n {
            if seen[start] || !keep[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut block = Vec::new();
            while let Some(v) = queue.pop_front() {
                block.push(v);
                for &w in &self.adjacency[v] {
                    if keep[w] && !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            block.sort_unstable();
            out.push(block);
        }
        out
    }

    pub fn connected_components(&self) -> Vec<Vec<String>> {
        self.component_indices()
            .into_iter()
            .map(|block| block.into_iter().map(|i| self.ids[i].clone()).collect())
            .collect()
    }

    pub fn component_count(&self) -> usize {
        self.component_indices().len()
    }

    /// The empty graph counts as connected.
    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }

    /// First Betti number `|E| - |V| + #components`.
    pub fn betti(&self) -> u64 {
        let rank = self.vertex_count() as u64 - self.component_count() as u64;
        self.edge_count() - rank
    }

    pub fn full_subgraph<S: AsRef<str>>(&self, vertices: &[S]) -> Result<MultiGraph, GraphError> {
        let idx = vertices.iter().map(|v| self.require(v.as_ref())).collect::<Result<Vec<_>, _>>()?;
        Ok(self.full_subgraph_idx(&idx))
    }

    /// Full subgraph spanned by the given vertex indices (duplicates ignored).
    pub fn full_subgraph_idx(&self, vertices: &[usize]) -> MultiGraph {
        let keep: BTreeSet<usize> = vertices.iter().copied().collect();
        let remap: HashMap<usize, usize> = keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let ids = keep.iter().map(|&i| self.ids[i].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|(&(i, j), &m)| Some(((*remap.get(&i)?, *remap.get(&j)?), m)))
            .collect();
        Self::from_parts(ids, edges)
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            vertices: self.ids.clone(),
            edges: self
                .edges
                .iter()
                .map(|(&(i, j), &m)| (self.ids[i].clone(), self.ids[j].clone(), m))
                .collect(),
        }
    }

    pub fn from_json(json: &GraphJson) -> Result<Self, GraphError> {
        for (a, b, _) in &json.edges {
            if a > b {
                return Err(GraphError::UnorderedEdge(a.clone(), b.clone()));
            }
        }
        Self::new(
            json.vertices.iter().map(String::as_str),
            json.edges.iter().map(|(a, b, m)| (a.as_str(), b.as_str(), *m)),
        )
    }
}

/// Wire format `{"vertices":[id...],"edges":[[id,id,mult]...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    pub edges: Vec<(String, String, u32)>,
}

/// Bipartite graph with cyan and purple vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteDualGraph {
    graph: MultiGraph,
    cyan: Vec<bool>,
}

impl BipartiteDualGraph {
    pub fn new<S: AsRef<str>>(graph: MultiGraph, cyan: &[S], purple: &[S]) -> Result<Self, GraphError> {
        let mut color: Vec<Option<bool>> = vec![None; graph.vertex_count()];
        for (list, is_cyan) in [(cyan, true), (purple, false)] {
            for id in list {
                let i = graph.require(id.as_ref())?;
                if color[i].is_some() {
                    return Err(GraphError::DoubleColored(id.as_ref().to_string()));
                }
                color[i] = Some(is_cyan);
            }
        }
        let cyan = color
            .iter()
            .enumerate()
            .map(|(i, c)| c.ok_or_else(|| GraphError::Uncolored(graph.id(i).to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        for ((i, j), _) in graph.edges() {
            if cyan[i] == cyan[j] {
                return Err(GraphError::MonochromaticEdge(graph.id(i).into(), graph.id(j).into()));
            }
        }
        Ok(Self { graph, cyan })
    }

    pub fn graph(&self) -> &MultiGraph {
        &self.graph
    }

    pub fn is_cyan(&self, i: usize) -> bool {
        self.cyan[i]
    }

    pub fn cyan_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.cyan.len()).filter(|&i| self.cyan[i])
    }

    pub fn purple_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.cyan.len()).filter(|&i| !self.cyan[i])
    }

    pub fn cyan_count(&self) -> usize {
        self.cyan.iter().filter(|&&c| c).count()
    }

    pub fn purple_count(&self) -> usize {
        self.cyan.len() - self.cyan_count()
    }

    /// Checks the dual-graph role: every purple vertex has degree exactly 2.
    pub fn check_dual_role(&self) -> Result<(), GraphError> {
        for p in self.purple_indices() {
            let d = self.graph.degree_at(p);
            if d != 2 {
                return Err(GraphError::PurpleDegree(self.graph.id(p).to_string(), d));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> BipartiteJson {
        let ids = self.graph.ids();
        BipartiteJson {
            graph: self.graph.to_json(),
            cyan: self.cyan_indices().map(|i| ids[i].clone()).collect(),
            purple: self.purple_indices().map(|i| ids[i].clone()).collect(),
        }
    }

    pub fn from_json(json: &BipartiteJson) -> Result<Self, GraphError> {
        Self::new(MultiGraph::from_json(&json.graph)?, &json.cyan, &json.purple)
    }
}

/// Wire format of a bipartite graph: the graph object plus `cyan`/`purple` lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteJson {
    #[serde(flatten)]
    pub graph: GraphJson,
    pub cyan: Vec<String>,
    pub purple: Vec<String>,
}
