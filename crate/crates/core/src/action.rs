//! Finite permutation groups acting on multigraphs: stabilizers, fixed
//! subgraphs, rigidities and their orbits.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, GraphJson, MultiGraph};

/// Default cap on the number of group elements that will be enumerated.
pub const DEFAULT_ELEMENT_CAP: usize = 10080;

/// Above this order products are looked up by hashing instead of a table.
const TABLE_LIMIT: usize = 2048;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ActionError {
    #[error("group has more than {cap} elements")]
    CapExceeded { cap: usize },
    #[error("image list {0:?} is not a permutation")]
    NotBijective(Vec<u32>),
    #[error("permutation acts on {found} points, expected {expected}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("graph is not connected")]
    Disconnected,
    #[error("not a subgroup of the acting group")]
    NotSubgroup,
    #[error(transparent)]
    NotAutomorphism(Box<ActionViolation>),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A bijection of `{0, .., n-1}`, stored as its image list.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<u32>);

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl Permutation {
    pub fn new(images: Vec<u32>) -> Result<Self, ActionError> {
        let mut seen = vec![false; images.len()];
        for &x in &images {
            match seen.get_mut(x as usize) {
                Some(s) if !*s => *s = true,
                _ => return Err(ActionError::NotBijective(images)),
            }
        }
        Ok(Self(images))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n as u32).collect())
    }

    /// Product of disjoint or overlapping cycles, applied right to left.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self, ActionError> {
        let mut result = Self::identity(n);
        for cycle in cycles.iter().rev() {
            let mut images: Vec<u32> = (0..n as u32).collect();
            for (k, &x) in cycle.iter().enumerate() {
                let y = cycle[(k + 1) % cycle.len()];
                if x >= n || y >= n {
                    return Err(ActionError::DegreeMismatch { expected: n, found: x.max(y) + 1 });
                }
                images[x] = y as u32;
            }
            result = Self::new(images)?.compose(&result);
        }
        Ok(result)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.0
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.0[x] as usize
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self(other.0.iter().map(|&x| self.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Self(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    pub fn fixes(&self, x: usize) -> bool {
        self.apply(x) == x
    }
}

/// All permutations of `n` points in lexicographic order of image lists.
pub fn all_permutations(n: usize) -> impl Iterator<Item = Permutation> {
    let mut current: Option<Vec<u32>> = Some((0..n as u32).collect());
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let mut next = out.clone();
        current = if next_permutation(&mut next) { Some(next) } else { None };
        Some(Permutation(out))
    })
}

fn next_permutation(v: &mut [u32]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// A finite permutation group with its elements enumerated in sorted order.
///
/// The identity is always the first element. Equality compares element sets
/// only, so two generating sets of the same group give equal values.
#[derive(Clone, Debug)]
pub struct PermGroup {
    degree: usize,
    elements: Vec<Permutation>,
    generators: Vec<Permutation>,
}

impl PartialEq for PermGroup {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.elements == other.elements
    }
}

impl Eq for PermGroup {}

impl std::hash::Hash for PermGroup {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.degree.hash(state);
        self.elements.hash(state);
    }
}

impl PartialOrd for PermGroup {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical subgroup order: by order, then by sorted element list.
impl Ord for PermGroup {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.degree, self.order(), &self.elements).cmp(&(other.degree, other.order(), &other.elements))
    }
}

impl PermGroup {
    pub fn trivial(degree: usize) -> Self {
        Self { degree, elements: vec![Permutation::identity(degree)], generators: Vec::new() }
    }

    /// Closure of `generators` under composition.
    pub fn generate(degree: usize, generators: Vec<Permutation>, cap: usize) -> Result<Self, ActionError> {
        for g in &generators {
            if g.degree() != degree {
                return Err(ActionError::DegreeMismatch { expected: degree, found: g.degree() });
            }
        }
        let identity = Permutation::identity(degree);
        let mut seen: HashSet<Permutation> = HashSet::from([identity.clone()]);
        let mut queue = VecDeque::from([identity]);
        while let Some(x) = queue.pop_front() {
            for g in &generators {
                let y = g.compose(&x);
                if !seen.contains(&y) {
                    if seen.len() >= cap {
                        return Err(ActionError::CapExceeded { cap });
                    }
                    seen.insert(y.clone());
                    queue.push_back(y);
                }
            }
        }
        let mut elements: Vec<Permutation> = seen.into_iter().collect();
        elements.sort();
        let generators = generators.into_iter().filter(|g| !g.is_identity()).collect();
        Ok(Self { degree, elements, generators })
    }

    /// Wraps a set already known to be closed; picks a small generating set.
    pub(crate) fn from_closed_set(degree: usize, mut elements: Vec<Permutation>) -> Self {
        elements.sort();
        elements.dedup();
        let mut generators: Vec<Permutation> = Vec::new();
        let mut span: HashSet<Permutation> = HashSet::from([Permutation::identity(degree)]);
        for g in &elements {
            if span.len() == elements.len() {
                break;
            }
            if !span.contains(g) {
                generators.push(g.clone());
                span = Self::generate(degree, generators.clone(), usize::MAX)
                    .expect("uncapped")
                    .elements
                    .into_iter()
                    .collect();
            }
        }
        debug_assert_eq!(span.len(), elements.len(), "element set is not closed");
        Self { degree, elements, generators }
    }

    /// The group of all permutations preserving every edge multiplicity.
    pub fn automorphisms(graph: &MultiGraph, cap: usize) -> Result<Self, ActionError> {
        let n = graph.vertex_count();
        let mut elements = Vec::new();
        for p in all_permutations(n) {
            if preserves(graph, &p) {
                if elements.len() >= cap {
                    return Err(ActionError::CapExceeded { cap });
                }
                elements.push(p);
            }
        }
        Ok(Self::from_closed_set(n, elements))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn index_of(&self, p: &Permutation) -> Option<usize> {
        self.elements.binary_search(p).ok()
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.index_of(p).is_some()
    }

    pub fn is_subgroup_of(&self, other: &Self) -> bool {
        self.degree == other.degree
            && other.order().is_multiple_of(self.order())
            && self.elements.iter().all(|p| other.contains(p))
    }

    /// Index `[other : self]`, if `self` is a subgroup of `other`.
    pub fn index_in(&self, other: &Self) -> Option<usize> {
        self.is_subgroup_of(other).then(|| other.order() / self.order())
    }

    pub(crate) fn subgroup_from(&self, elements: Vec<Permutation>) -> Self {
        Self::from_closed_set(self.degree, elements)
    }

    pub fn stabilizer(&self, point: usize) -> Self {
        self.subgroup_from(self.elements.iter().filter(|p| p.fixes(point)).cloned().collect())
    }

    pub fn orbit(&self, point: usize) -> Vec<usize> {
        let mut orbit: Vec<usize> = self.elements.iter().map(|p| p.apply(point)).collect();
        orbit.sort_unstable();
        orbit.dedup();
        orbit
    }

    /// `g H g^{-1}`.
    pub fn conjugate_by(&self, g: &Permutation) -> Self {
        let inv = g.inverse();
        let mut elements: Vec<Permutation> = self.elements.iter().map(|h| g.compose(h).compose(&inv)).collect();
        elements.sort();
        let generators = self.generators.iter().map(|h| g.compose(h).compose(&inv)).collect();
        Self { degree: self.degree, elements, generators }
    }

    /// Whether `self` is normalised by every element of `ambient`.
    pub fn is_normal_in(&self, ambient: &Self) -> bool {
        self.is_subgroup_of(ambient)
            && ambient.generators().iter().all(|g| self.conjugate_by(g) == *self)
    }

    pub fn is_conjugate_in(&self, other: &Self, ambient: &Self) -> bool {
        self.order() == other.order() && ambient.elements.iter().any(|g| self.conjugate_by(g) == *other)
    }

    /// All subgroups of order at most `cap`, in canonical order.
    pub fn subgroups(&self, cap: usize) -> Vec<PermGroup> {
        let table = Cayley::new(self);
        let n = self.order();
        let mut known: HashSet<FixedBitSet> = HashSet::new();
        let mut found: Vec<(FixedBitSet, Vec<usize>)> = Vec::new();
        let mut trivial = FixedBitSet::with_capacity(n);
        trivial.insert(0);
        known.insert(trivial.clone());
        found.push((trivial, Vec::new()));
        let mut next = 0;
        while next < found.len() {
            let (set, gens) = found[next].clone();
            next += 1;
            // <K, g> only depends on the coset gK.
            let mut handled = set.clone();
            for g in 0..n {
                if handled.contains(g) {
                    continue;
                }
                for k in set.ones() {
                    handled.insert(table.mul(g, k));
                }
                let mut extended = gens.clone();
                extended.push(g);
                if let Some(closure) = table.closure(&extended, cap) {
                    if known.insert(closure.clone()) {
                        found.push((closure, extended));
                    }
                }
            }
        }
        let mut out: Vec<PermGroup> = found
            .into_iter()
            .map(|(set, gens)| PermGroup {
                degree: self.degree,
                elements: set.ones().map(|i| self.elements[i].clone()).collect(),
                generators: gens.into_iter().map(|i| self.elements[i].clone()).collect(),
            })
            .collect();
        out.sort();
        out
    }

    /// Element membership as a bitset over the indices of `ambient`.
    pub(crate) fn mask_in(&self, ambient: &Self) -> FixedBitSet {
        let mut mask = FixedBitSet::with_capacity(ambient.order());
        for p in &self.elements {
            if let Some(i) = ambient.index_of(p) {
                mask.insert(i);
            }
        }
        mask
    }
}

/// Multiplication by element index.
struct Cayley<'a> {
    group: &'a PermGroup,
    table: Option<Vec<u32>>,
}

impl<'a> Cayley<'a> {
    fn new(group: &'a PermGroup) -> Self {
        let n = group.order();
        let table = (n <= TABLE_LIMIT).then(|| {
            let mut t = Vec::with_capacity(n * n);
            for a in &group.elements {
                for b in &group.elements {
                    t.push(group.index_of(&a.compose(b)).expect("closed") as u32);
                }
            }
            t
        });
        Self { group, table }
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        match &self.table {
            Some(t) => t[a * self.group.order() + b] as usize,
            None => {
                let p = self.group.elements[a].compose(&self.group.elements[b]);
                self.group.index_of(&p).expect("closed")
            }
        }
    }

    /// Subgroup generated by the given element indices, unless it exceeds `cap`.
    fn closure(&self, gens: &[usize], cap: usize) -> Option<FixedBitSet> {
        let mut set = FixedBitSet::with_capacity(self.group.order());
        set.insert(0);
        let mut size = 1;
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(g, x);
                if !set.contains(y) {
                    size += 1;
                    if size > cap {
                        return None;
                    }
                    set.insert(y);
                    queue.push_back(y);
                }
            }
        }
        Some(set)
    }
}

fn preserves(graph: &MultiGraph, p: &Permutation) -> bool {
    // Multiplicity preservation on existing edges plus equal edge counts per
    // vertex image forces preservation on all pairs, but the pairwise check
    // is cheap enough at the sizes involved.
    let n = graph.vertex_count();
    (0..n).all(|i| ((i + 1)..n).all(|j| graph.multiplicity(i, j) == graph.multiplicity(p.apply(i), p.apply(j))))
}

/// First element (in sorted order) and pair whose multiplicity is not preserved.
#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize)]
#[error("element {element:?} maps pair {{{}, {}}} (multiplicity {multiplicity}) to {{{}, {}}} (multiplicity {image_multiplicity})", pair.0, pair.1, image.0, image.1)]
pub struct ActionViolation {
    pub element: BTreeMap<String, String>,
    pub pair: (String, String),
    pub multiplicity: u32,
    pub image: (String, String),
    pub image_multiplicity: u32,
}

/// Checks that every group element preserves all edge multiplicities.
pub fn validate_action(graph: &MultiGraph, group: &PermGroup) -> Result<(), ActionError> {
    if group.degree() != graph.vertex_count() {
        return Err(ActionError::DegreeMismatch { expected: graph.vertex_count(), found: group.degree() });
    }
    if group.generators().iter().all(|g| preserves(graph, g)) {
        return Ok(());
    }
    let n = graph.vertex_count();
    for g in group.elements() {
        for i in 0..n {
            for j in (i + 1)..n {
                let (gi, gj) = (g.apply(i), g.apply(j));
                let (m, gm) = (graph.multiplicity(i, j), graph.multiplicity(gi, gj));
                if m != gm {
                    let (a, b) = (gi.min(gj), gi.max(gj));
                    return Err(ActionError::NotAutomorphism(Box::new(ActionViolation {
                        element: moved_points(graph, g),
                        pair: (graph.id(i).into(), graph.id(j).into()),
                        multiplicity: m,
                        image: (graph.id(a).into(), graph.id(b).into()),
                        image_multiplicity: gm,
                    })));
                }
            }
        }
    }
    unreachable!("a generator failed but no element did")
}

fn moved_points(graph: &MultiGraph, p: &Permutation) -> BTreeMap<String, String> {
    (0..p.degree())
        .filter(|&i| !p.fixes(i))
        .map(|i| (graph.id(i).to_string(), graph.id(p.apply(i)).to_string()))
        .collect()
}

/// A connected multigraph with a validated permutation action on its vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GGraph {
    graph: MultiGraph,
    group: PermGroup,
}

impl GGraph {
    pub fn new(graph: MultiGraph, group: PermGroup) -> Result<Self, ActionError> {
        if !graph.is_connected() {
            return Err(ActionError::Disconnected);
        }
        validate_action(&graph, &group)?;
        Ok(Self { graph, group })
    }

    /// For actions that preserve the graph by construction.
    pub(crate) fn from_trusted(graph: MultiGraph, group: PermGroup) -> Self {
        debug_assert!(validate_action(&graph, &group).is_ok());
        Self { graph, group }
    }

    /// Graph with the trivial action.
    pub fn trivial(graph: MultiGraph) -> Result<Self, ActionError> {
        let n = graph.vertex_count();
        Self::new(graph, PermGroup::trivial(n))
    }

    /// Builds the acting group from generators given as vertex-id maps;
    /// vertices missing from a map are fixed.
    pub fn from_id_generators(
        graph: MultiGraph,
        generators: &[BTreeMap<String, String>],
        cap: usize,
    ) -> Result<Self, ActionError> {
        let n = graph.vertex_count();
        let mut perms = Vec::with_capacity(generators.len());
        for map in generators {
            let mut images: Vec<u32> = (0..n as u32).collect();
            for (from, to) in map {
                images[graph.require(from)?] = graph.require(to)? as u32;
            }
            perms.push(Permutation::new(images)?);
        }
        let group = PermGroup::generate(n, perms, cap)?;
        Self::new(graph, group)
    }

    pub fn graph(&self) -> &MultiGraph {
        &self.graph
    }

    pub fn group(&self) -> &PermGroup {
        &self.group
    }

    pub fn betti(&self) -> u64 {
        self.graph.betti()
    }

    pub fn vertex_stabilizer(&self, v: &str) -> Result<PermGroup, ActionError> {
        Ok(self.group.stabilizer(self.graph.require(v)?))
    }

    /// Full subgraph on the vertices fixed by every element of `h`.
    pub fn fixed_subgraph(&self, h: &PermGroup) -> Result<MultiGraph, ActionError> {
        if !h.is_subgroup_of(&self.group) {
            return Err(ActionError::NotSubgroup);
        }
        Ok(self.graph.full_subgraph_idx(&self.fixed_points(h)))
    }

    pub fn fixed_points(&self, h: &PermGroup) -> Vec<usize> {
        (0..self.graph.vertex_count())
            .filter(|&v| h.elements().iter().all(|p| p.fixes(v)))
            .collect()
    }

    /// All rigidities, ordered by smallest vertex.
    ///
    /// The only possible rigidifiers are vertex stabilizers, so only those
    /// are tried as candidate subgroups.
    pub fn rigidities(&self) -> Vec<Rigidity> {
        let n = self.graph.vertex_count();
        let masks: Vec<FixedBitSet> = (0..n)
            .map(|v| {
                let mut m = FixedBitSet::with_capacity(self.group.order());
                for (i, p) in self.group.elements().iter().enumerate() {
                    if p.fixes(v) {
                        m.insert(i);
                    }
                }
                m
            })
            .collect();
        let mut candidates: Vec<&FixedBitSet> = masks.iter().collect();
        candidates.sort_by(|a, b| a.as_slice().cmp(b.as_slice()));
        candidates.dedup();
        let mut out = Vec::new();
        for h in candidates {
            let keep: Vec<bool> = masks.iter().map(|m| h.is_subset(m)).collect();
            let mut rigidifier = None;
            for block in self.graph.components_within(&keep) {
                if block.iter().all(|&v| masks[v] == *h) {
                    let group = rigidifier
                        .get_or_insert_with(|| {
                            self.group.subgroup_from(h.ones().map(|i| self.group.elements()[i].clone()).collect())
                        })
                        .clone();
                    out.push(Rigidity::new(block, group));
                }
            }
        }
        out.sort_by(|a, b| a.vertices.cmp(&b.vertices));
        out
    }

    /// Partition of the rigidities into G-orbits.
    pub fn rigidity_orbits(&self) -> RigidityOrbits {
        RigidityOrbits::new(self, self.rigidities())
    }

    pub fn to_json(&self) -> GGraphJson {
        GGraphJson {
            graph: self.graph.to_json(),
            generators: self.group.generators().iter().map(|g| moved_points(&self.graph, g)).collect(),
        }
    }

    pub fn from_json(json: &GGraphJson, cap: usize) -> Result<Self, ActionError> {
        let graph = MultiGraph::from_json(&json.graph)?;
        Self::from_id_generators(graph, &json.generators, cap)
    }
}

/// Wire format: the graph object plus `generators` as vertex-to-image maps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GGraphJson {
    #[serde(flatten)]
    pub graph: GraphJson,
    /// Absent means the trivial action.
    #[serde(default)]
    pub generators: Vec<BTreeMap<String, String>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rigidity {
    /// Sorted vertex indices.
    pub vertices: Vec<usize>,
    pub rigidifier: PermGroup,
    pub singular: bool,
}

impl Rigidity {
    pub(crate) fn new(vertices: Vec<usize>, rigidifier: PermGroup) -> Self {
        let singular = vertices.len() == 1;
        Self { vertices, rigidifier, singular }
    }
}

#[derive(Clone, Debug)]
pub struct RigidityOrbits {
    pub rigidities: Vec<Rigidity>,
    /// Indices into `rigidities`, each orbit sorted, orbits ordered by first member.
    pub orbits: Vec<Vec<usize>>,
}

impl RigidityOrbits {
    pub fn new(gg: &GGraph, rigidities: Vec<Rigidity>) -> Self {
        let mut owner = vec![usize::MAX; gg.graph().vertex_count()];
        for (r, rig) in rigidities.iter().enumerate() {
            for &v in &rig.vertices {
                owner[v] = r;
            }
        }
        let mut orbit_of = vec![usize::MAX; rigidities.len()];
        let mut orbits = Vec::new();
        for start in 0..rigidities.len() {
            if orbit_of[start] != usize::MAX {
                continue;
            }
            let id = orbits.len();
            orbit_of[start] = id;
            let mut members = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(r) = queue.pop_front() {
                let v = rigidities[r].vertices[0];
                for g in gg.group().generators() {
                    let image = owner[g.apply(v)];
                    debug_assert_ne!(image, usize::MAX, "image of a rigidity is not a rigidity");
                    if image != usize::MAX && orbit_of[image] == usize::MAX {
                        orbit_of[image] = id;
                        members.push(image);
                        queue.push_back(image);
                    }
                }
            }
            members.sort_unstable();
            orbits.push(members);
        }
        Self { rigidities, orbits }
    }

    /// Smallest orbit size `d`, if there are rigidities at all.
    pub fn min_orbit_size(&self) -> Option<usize> {
        self.orbits.iter().map(Vec::len).min()
    }

    /// Rigidities fixed (setwise) by the whole group.
    pub fn fixed(&self) -> Vec<usize> {
        self.orbits.iter().filter(|o| o.len() == 1).map(|o| o[0]).collect()
    }

    pub fn singular_orbit_count(&self) -> usize {
        self.orbits.iter().filter(|o| self.rigidities[o[0]].singular).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyc(n: usize, cycles: &[&[usize]]) -> Permutation {
        Permutation::from_cycles(n, cycles).unwrap()
    }

    fn cycle_graph(n: usize) -> MultiGraph {
        MultiGraph::indexed(n, (0..n).map(|i| ((i, (i + 1) % n), 1)))
    }

    fn path(n: usize) -> MultiGraph {
        MultiGraph::indexed(n, (0..n - 1).map(|i| ((i, i + 1), 1)))
    }

    fn gg(graph: MultiGraph, gens: Vec<Permutation>) -> GGraph {
        let n = graph.vertex_count();
        GGraph::new(graph, PermGroup::generate(n, gens, DEFAULT_ELEMENT_CAP).unwrap()).unwrap()
    }

    #[test]
    fn enumerate_group_examples() {
        assert_eq!(PermGroup::generate(3, vec![], 10).unwrap().order(), 1);
        assert_eq!(PermGroup::generate(3, vec![cyc(3, &[&[0, 1]])], 10).unwrap().order(), 2);
        let s3 = PermGroup::generate(3, vec![cyc(3, &[&[0, 1]]), cyc(3, &[&[1, 2]])], 10).unwrap();
        assert_eq!(s3.order(), 6);
        assert!(s3.elements()[0].is_identity());
        assert_eq!(
            PermGroup::generate(3, vec![cyc(3, &[&[0, 1]]), cyc(3, &[&[1, 2]])], 5),
            Err(ActionError::CapExceeded { cap: 5 })
        );
    }

    #[test]
    fn permutation_algebra() {
        let p = cyc(4, &[&[0, 1, 2]]);
        assert_eq!(p.images(), &[1, 2, 0, 3]);
        assert!(p.compose(&p.inverse()).is_identity());
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert_eq!(all_permutations(4).count(), 24);
        let all: Vec<_> = all_permutations(3).collect();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
    }

    #[test]
    fn validate_action_examples() {
        let tri = cycle_graph(3);
        assert!(validate_action(&tri, &PermGroup::trivial(3)).is_ok());
        let edge = path(2);
        let swap = PermGroup::generate(2, vec![cyc(2, &[&[0, 1]])], 10).unwrap();
        assert!(validate_action(&edge, &swap).is_ok());
        let rot = PermGroup::generate(3, vec![cyc(3, &[&[0, 1, 2]])], 10).unwrap();
        let err = validate_action(&path(3), &rot).unwrap_err();
        let ActionError::NotAutomorphism(v) = err else { panic!("{err:?}") };
        assert_eq!(v.pair, ("v0".into(), "v2".into()));
        assert_eq!((v.multiplicity, v.image_multiplicity), (0, 1));
    }

    #[test]
    fn stabilizers_and_fixed_subgraphs() {
        let square = gg(cycle_graph(4), vec![cyc(4, &[&[0, 2]])]);
        assert_eq!(square.vertex_stabilizer("v1").unwrap(), *square.group());
        assert!(square.vertex_stabilizer("v0").unwrap().is_trivial());
        assert!(square.vertex_stabilizer("v9").is_err());

        let fixed = square.fixed_subgraph(square.group()).unwrap();
        assert_eq!(fixed.ids(), &["v1", "v3"]);
        assert_eq!(fixed.edge_count(), 0);
        assert_eq!(square.fixed_subgraph(&PermGroup::trivial(4)).unwrap(), *square.graph());

        let tri = gg(cycle_graph(3), vec![cyc(3, &[&[0, 1]]), cyc(3, &[&[1, 2]])]);
        assert_eq!(tri.fixed_subgraph(tri.group()).unwrap().vertex_count(), 0);
        let foreign = PermGroup::generate(4, vec![cyc(4, &[&[0, 1]])], 10).unwrap();
        assert_eq!(square.fixed_subgraph(&foreign), Err(ActionError::NotSubgroup));
    }

    #[test]
    fn rigidity_examples() {
        let trivial = GGraph::trivial(cycle_graph(4)).unwrap();
        let r = trivial.rigidities();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].vertices, vec![0, 1, 2, 3]);
        assert!(!r[0].singular && r[0].rigidifier.is_trivial());

        let square = gg(cycle_graph(4), vec![cyc(4, &[&[0, 2]])]);
        let r = square.rigidities();
        assert_eq!(r.iter().map(|x| x.vertices.clone()).collect::<Vec<_>>(), vec![vec![1], vec![3]]);
        assert!(r.iter().all(|x| x.singular && x.rigidifier == *square.group()));

        let reflected_path = gg(path(3), vec![cyc(3, &[&[0, 2]])]);
        let r = reflected_path.rigidities();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].vertices, vec![1]);

        let single = GGraph::trivial(MultiGraph::indexed(1, [])).unwrap();
        assert!(single.rigidities()[0].singular);
    }

    #[test]
    fn orbit_examples() {
        let trivial = GGraph::trivial(path(3)).unwrap();
        let o = trivial.rigidity_orbits();
        assert_eq!(o.orbits, vec![vec![0]]);

        let square = gg(cycle_graph(4), vec![cyc(4, &[&[0, 2]])]);
        let o = square.rigidity_orbits();
        assert_eq!(o.orbits, vec![vec![0], vec![1]]);
        assert_eq!(o.min_orbit_size(), Some(1));
        assert_eq!(o.fixed(), vec![0, 1]);

        // Klein four-group on a 6-cycle: the reflection through v0 and v3
        // rigidifies both, and the edge reflection swaps them.
        let hexagon = gg(cycle_graph(6), vec![cyc(6, &[&[1, 5], &[2, 4]]), cyc(6, &[&[0, 3], &[1, 2], &[4, 5]])]);
        let o = hexagon.rigidity_orbits();
        assert_eq!(o.rigidities.iter().map(|r| r.vertices.clone()).collect::<Vec<_>>(), vec![vec![0], vec![3]]);
        assert_eq!(o.orbits, vec![vec![0, 1]]);
        assert_eq!(o.min_orbit_size(), Some(2));
        assert!(o.fixed().is_empty());
    }

    #[test]
    fn subgroup_enumeration_counts() {
        // S3 has 6 subgroups; S4 has 30; C6 has 4.
        let s3 = PermGroup::generate(3, vec![cyc(3, &[&[0, 1]]), cyc(3, &[&[0, 1, 2]])], 100).unwrap();
        assert_eq!(s3.subgroups(usize::MAX).len(), 6);
        let s4 = PermGroup::generate(4, vec![cyc(4, &[&[0, 1]]), cyc(4, &[&[0, 1, 2, 3]])], 100).unwrap();
        assert_eq!(s4.subgroups(usize::MAX).len(), 30);
        assert_eq!(s4.subgroups(4).len(), 1 + 9 + 4 + 7);
        let c6 = PermGroup::generate(6, vec![cyc(6, &[&[0, 1, 2, 3, 4, 5]])], 100).unwrap();
        let subs = c6.subgroups(usize::MAX);
        assert_eq!(subs.iter().map(PermGroup::order).collect::<Vec<_>>(), vec![1, 2, 3, 6]);
    }

    #[test]
    fn conjugation_and_normality() {
        let s3 = PermGroup::generate(3, vec![cyc(3, &[&[0, 1]]), cyc(3, &[&[0, 1, 2]])], 100).unwrap();
        let subs = s3.subgroups(usize::MAX);
        let a3 = subs.iter().find(|h| h.order() == 3).unwrap();
        assert!(a3.is_normal_in(&s3));
        let twos: Vec<_> = subs.iter().filter(|h| h.order() == 2).collect();
        assert!(!twos[0].is_normal_in(&s3));
        assert!(twos[0].is_conjugate_in(twos[1], &s3));
        assert_eq!(twos[0].index_in(&s3), Some(3));
    }

    #[test]
    fn automorphisms_of_small_graphs() {
        assert_eq!(PermGroup::automorphisms(&cycle_graph(4), 100).unwrap().order(), 8);
        assert_eq!(PermGroup::automorphisms(&path(3), 100).unwrap().order(), 2);
        let double = MultiGraph::indexed(3, [((0, 1), 2), ((1, 2), 1)]);
        assert_eq!(PermGroup::automorphisms(&double, 100).unwrap().order(), 1);
        assert!(PermGroup::automorphisms(&MultiGraph::indexed(5, []), 100).is_err());
    }

    #[test]
    fn json_round_trip() {
        let square = gg(cycle_graph(4), vec![cyc(4, &[&[0, 2]])]);
        let text = serde_json::to_string(&square.to_json()).unwrap();
        assert_eq!(
            text,
            r#"{"vertices":["v0","v1","v2","v3"],"edges":[["v0","v1",1],["v0","v3",1],["v1","v2",1],["v2","v3",1]],"generators":[{"v0":"v2","v2":"v0"}]}"#
        );
        let back = GGraph::from_json(&serde_json::from_str(&text).unwrap(), 100).unwrap();
        assert_eq!(back, square);
    }
}
