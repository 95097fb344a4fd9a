//! Counting bounds for rigidities of G-graphs, the Betti epimorphism
//! inequality for bipartite dual graphs, and instance generators.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{all_permutations, ActionError, GGraph, PermGroup, Permutation, DEFAULT_ELEMENT_CAP};
use crate::graph::{BipartiteDualGraph, MultiGraph};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Holds { tight: bool },
    NotApplicable,
    Violated { detail: String },
}

impl Verdict {
    pub(crate) fn bound(lhs: i64, rhs: i64, what: &str) -> Self {
        if lhs <= rhs {
            Verdict::Holds { tight: lhs == rhs }
        } else {
            Verdict::Violated { detail: format!("{what}: {lhs} > {rhs}") }
        }
    }

    pub(crate) fn strict(lhs: i64, rhs: i64, what: &str) -> Self {
        if lhs < rhs {
            Verdict::Holds { tight: false }
        } else {
            Verdict::Violated { detail: format!("{what}: {lhs} >= {rhs}") }
        }
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, Verdict::Violated { .. })
    }

    pub fn is_tight(&self) -> bool {
        matches!(self, Verdict::Holds { tight: true })
    }

    /// `self`, unless a side condition is violated; tightness stays that of `self`.
    pub(crate) fn guarded(self, side: Self) -> Self {
        match side {
            v @ Verdict::Violated { .. } => v,
            _ => self,
        }
    }

    /// Combines two verdicts on the same instance: any violation wins, and
    /// tightness is reported if either part is tight.
    pub(crate) fn and(self, other: Self) -> Self {
        match (self, other) {
            (v @ Verdict::Violated { .. }, _) | (_, v @ Verdict::Violated { .. }) => v,
            (Verdict::Holds { tight: a }, Verdict::Holds { tight: b }) => Verdict::Holds { tight: a || b },
            (Verdict::NotApplicable, v) | (v, Verdict::NotApplicable) => v,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds { tight: true } => f.write_str("holds (tight)"),
            Verdict::Holds { tight: false } => f.write_str("holds"),
            Verdict::NotApplicable => f.write_str("not applicable"),
            Verdict::Violated { detail } => write!(f, "VIOLATED: {detail}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    Tree,
    Fixpoint,
    OrbitAvoid,
    Main,
    Corollary,
}

impl Theorem {
    pub const ALL: [Theorem; 5] = [Theorem::Tree, Theorem::Fixpoint, Theorem::OrbitAvoid, Theorem::Main, Theorem::Corollary];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::Tree => "tree",
            Theorem::Fixpoint => "fixpoint",
            Theorem::OrbitAvoid => "orbit-avoid",
            Theorem::Main => "main",
            Theorem::Corollary => "corollary",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown theorem {s:?}; expected one of tree, fixpoint, orbit-avoid, main, corollary"))
    }
}

/// Rigidities avoiding one vertex orbit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitAvoidance {
    pub vertex: String,
    pub orbit_size: usize,
    pub avoiding: usize,
}

/// Everything the bound checks consume; verdicts are pure functions of it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quantities {
    pub vertices: usize,
    pub group_order: usize,
    pub betti: u64,
    pub rigidities: usize,
    pub singular: usize,
    pub orbits: usize,
    pub min_orbit: Option<usize>,
    pub fixed: usize,
    /// One entry per vertex orbit, keyed by its smallest vertex.
    pub orbit_avoid: Vec<OrbitAvoidance>,
}

impl Quantities {
    pub fn of(gg: &GGraph) -> Self {
        let ro = gg.rigidity_orbits();
        let n = gg.graph().vertex_count();
        let mut owner = vec![usize::MAX; n];
        for (r, rig) in ro.rigidities.iter().enumerate() {
            for &v in &rig.vertices {
                owner[v] = r;
            }
        }
        let mut seen = vec![false; n];
        let mut orbit_avoid = Vec::new();
        for v in 0..n {
            if seen[v] {
                continue;
            }
            let orbit = gg.group().orbit(v);
            let mut touched = BTreeSet::new();
            for &w in &orbit {
                seen[w] = true;
                if owner[w] != usize::MAX {
                    touched.insert(owner[w]);
                }
            }
            orbit_avoid.push(OrbitAvoidance {
                vertex: gg.graph().id(v).to_string(),
                orbit_size: orbit.len(),
                avoiding: ro.rigidities.len() - touched.len(),
            });
        }
        Quantities {
            vertices: n,
            group_order: gg.group().order(),
            betti: gg.betti(),
            rigidities: ro.rigidities.len(),
            singular: ro.rigidities.iter().filter(|r| r.singular).count(),
            orbits: ro.orbits.len(),
            min_orbit: ro.min_orbit_size(),
            fixed: ro.fixed().len(),
            orbit_avoid,
        }
    }

    pub fn evaluate(&self, theorem: Theorem) -> Verdict {
        let b = self.betti as i64;
        let r = self.rigidities as i64;
        match theorem {
            Theorem::Tree if self.betti == 0 => Verdict::bound(r, 1, "|D_G| <= 1 on a tree"),
            Theorem::Tree => Verdict::NotApplicable,
            Theorem::Fixpoint if self.fixed > 0 => Verdict::bound(r, b + 1, "|D_G| <= beta + 1"),
            Theorem::Fixpoint => Verdict::NotApplicable,
            Theorem::OrbitAvoid => self
                .orbit_avoid
                .iter()
                .map(|o| {
                    Verdict::bound(
                        o.avoiding as i64,
                        b + o.orbit_size as i64 - 1,
                        &format!("rigidities avoiding the orbit of {} <= beta + |Gv| - 1", o.vertex),
                    )
                })
                .fold(Verdict::NotApplicable, Verdict::and),
            Theorem::Main => match self.min_orbit {
                None => Verdict::NotApplicable,
                Some(d) => {
                    let d = d as i64;
                    let o = self.orbits as i64;
                    // The orbit bound (beta - 1)/d + 2 is compared after
                    // multiplying through by d.
                    Verdict::bound(r, b + 2 * d - 1, "|D_G| <= beta + 2d - 1")
                        .and(Verdict::bound(o * d, b - 1 + 2 * d, "d * |G\\D_G| <= beta - 1 + 2d"))
                }
            },
            Theorem::Corollary => {
                let o = self.orbits as i64;
                let base = Verdict::bound(o, b + 1, "|G\\D_G| <= beta + 1");
                if o == b + 1 {
                    let all_fixed = self.fixed == self.rigidities;
                    let cycle_without_fixed = self.betti == 1 && self.fixed == 0;
                    if !(all_fixed || cycle_without_fixed) {
                        return Verdict::Violated {
                            detail: format!(
                                "equality |G\\D_G| = beta + 1 = {o} but {} of {} rigidities are fixed and beta = {b}",
                                self.fixed, self.rigidities
                            ),
                        };
                    }
                }
                base
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub instance: String,
    pub quantities: Quantities,
    pub verdicts: BTreeMap<Theorem, Verdict>,
}

impl BoundReport {
    pub fn violated(&self) -> bool {
        self.verdicts.values().any(Verdict::is_violated)
    }

    /// Re-derives the verdicts from the stored quantities.
    pub fn recompute(&self) -> BTreeMap<Theorem, Verdict> {
        self.verdicts.keys().map(|&t| (t, self.quantities.evaluate(t))).collect()
    }
}

pub fn check_theorems(instance: impl Into<String>, gg: &GGraph, theorems: &[Theorem]) -> BoundReport {
    let quantities = Quantities::of(gg);
    let verdicts = theorems.iter().map(|&t| (t, quantities.evaluate(t))).collect();
    BoundReport { instance: instance.into(), quantities, verdicts }
}

pub fn check_all(instance: impl Into<String>, gg: &GGraph) -> BoundReport {
    check_theorems(instance, gg, &Theorem::ALL)
}

pub fn check_tree_bound(gg: &GGraph) -> Verdict {
    Quantities::of(gg).evaluate(Theorem::Tree)
}

pub fn check_fixpoint_bound(gg: &GGraph) -> Verdict {
    Quantities::of(gg).evaluate(Theorem::Fixpoint)
}

pub fn check_main_bound(gg: &GGraph) -> Verdict {
    Quantities::of(gg).evaluate(Theorem::Main)
}

pub fn check_corollary(gg: &GGraph) -> Verdict {
    Quantities::of(gg).evaluate(Theorem::Corollary)
}

/// The orbit-avoidance bound for the orbit of a single vertex.
pub fn check_orbit_avoid_bound(gg: &GGraph, v: &str) -> Result<Verdict, ActionError> {
    let idx = gg.graph().require(v)?;
    let orbit = gg.group().orbit(idx);
    let avoiding = gg
        .rigidities()
        .iter()
        .filter(|r| r.vertices.iter().all(|w| orbit.binary_search(w).is_err()))
        .count();
    Ok(Verdict::bound(
        avoiding as i64,
        gg.betti() as i64 + orbit.len() as i64 - 1,
        "rigidities avoiding Gv <= beta + |Gv| - 1",
    ))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EpimorphismError {
    #[error("map covers {found} source vertices, source has {expected}")]
    WrongDomain { expected: usize, found: usize },
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("vertex {0:?} changes colour")]
    ColorViolation(String),
    #[error("vertex {0:?} has no preimage")]
    NotSurjective(String),
    #[error("source edge {{{0}, {1}}} does not map to an edge")]
    EdgeNotPreserved(String, String),
    #[error("target edge {{{0}, {1}}} has no preimage edge")]
    EdgeNotLifted(String, String),
    #[error("purple vertex {0:?} has degree {1}, expected 2")]
    PurpleDegree(String, u32),
    #[error("source graph is not connected")]
    SourceDisconnected,
    #[error("hypothesis fails at purple {purple:?}: i_x = {i_x} < e_Gamma = {e_gamma} for cyan {cyan:?}")]
    Hypothesis { purple: String, cyan: String, i_x: u64, e_gamma: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpimorphismReport {
    pub src_betti: u64,
    pub dst_betti: u64,
    /// Fibre sizes over cyan target vertices.
    pub e_cyan: BTreeMap<String, u64>,
    /// Fibre sizes over purple target vertices.
    pub i_purple: BTreeMap<String, u64>,
    /// Mean of the cyan fibre sizes at the two ends of each purple vertex.
    pub e_purple: BTreeMap<String, f64>,
    pub verdict: Verdict,
}

/// Checks `β(dst) ≤ β(src)` for a colour-respecting epimorphism `src → dst`
/// given by source-id to target-id pairs.
pub fn check_betti_epimorphism(
    src: &BipartiteDualGraph,
    dst: &BipartiteDualGraph,
    vmap: &BTreeMap<String, String>,
) -> Result<EpimorphismReport, EpimorphismError> {
    let (sg, dg) = (src.graph(), dst.graph());
    if vmap.len() != sg.vertex_count() {
        return Err(EpimorphismError::WrongDomain { expected: sg.vertex_count(), found: vmap.len() });
    }
    let mut map = vec![0; sg.vertex_count()];
    for (a, b) in vmap {
        let i = sg.index_of(a).ok_or_else(|| EpimorphismError::UnknownVertex(a.clone()))?;
        let j = dg.index_of(b).ok_or_else(|| EpimorphismError::UnknownVertex(b.clone()))?;
        map[i] = j;
    }
    check_betti_epimorphism_idx(src, dst, &map)
}

/// Index form of [`check_betti_epimorphism`]: `map[i]` is the image of source vertex `i`.
pub fn check_betti_epimorphism_idx(
    src: &BipartiteDualGraph,
    dst: &BipartiteDualGraph,
    map: &[usize],
) -> Result<EpimorphismReport, EpimorphismError> {
    let (sg, dg) = (src.graph(), dst.graph());
    if map.len() != sg.vertex_count() {
        return Err(EpimorphismError::WrongDomain { expected: sg.vertex_count(), found: map.len() });
    }
    if !sg.is_connected() {
        return Err(EpimorphismError::SourceDisconnected);
    }
    for (bip, g) in [(src, sg), (dst, dg)] {
        for p in bip.purple_indices() {
            let d = g.degree_at(p);
            if d != 2 {
                return Err(EpimorphismError::PurpleDegree(g.id(p).to_string(), d));
            }
        }
    }
    let mut fibre = vec![0u64; dg.vertex_count()];
    for (i, &j) in map.iter().enumerate() {
        if j >= dg.vertex_count() {
            return Err(EpimorphismError::UnknownVertex(format!("#{j}")));
        }
        if src.is_cyan(i) != dst.is_cyan(j) {
            return Err(EpimorphismError::ColorViolation(sg.id(i).to_string()));
        }
        fibre[j] += 1;
    }
    if let Some(j) = fibre.iter().position(|&c| c == 0) {
        return Err(EpimorphismError::NotSurjective(dg.id(j).to_string()));
    }
    let mut image_edges = BTreeSet::new();
    for ((a, b), _) in sg.edges() {
        let (x, y) = (map[a], map[b]);
        if dg.multiplicity(x, y) == 0 {
            return Err(EpimorphismError::EdgeNotPreserved(sg.id(a).to_string(), sg.id(b).to_string()));
        }
        image_edges.insert((x.min(y), x.max(y)));
    }
    for ((a, b), _) in dg.edges() {
        if !image_edges.contains(&(a, b)) {
            return Err(EpimorphismError::EdgeNotLifted(dg.id(a).to_string(), dg.id(b).to_string()));
        }
    }
    let mut e_cyan = BTreeMap::new();
    let mut i_purple = BTreeMap::new();
    let mut e_purple = BTreeMap::new();
    for c in dst.cyan_indices() {
        e_cyan.insert(dg.id(c).to_string(), fibre[c]);
    }
    for p in dst.purple_indices() {
        let i_x = fibre[p];
        let mut ends = Vec::with_capacity(2);
        for &c in dg.neighbors(p) {
            for _ in 0..dg.multiplicity(p, c) {
                ends.push(c);
            }
        }
        for &c in &ends {
            if i_x < fibre[c] {
                return Err(EpimorphismError::Hypothesis {
                    purple: dg.id(p).to_string(),
                    cyan: dg.id(c).to_string(),
                    i_x,
                    e_gamma: fibre[c],
                });
            }
        }
        i_purple.insert(dg.id(p).to_string(), i_x);
        e_purple.insert(dg.id(p).to_string(), ends.iter().map(|&c| fibre[c] as f64).sum::<f64>() / 2.0);
    }
    let (src_betti, dst_betti) = (sg.betti(), dg.betti());
    Ok(EpimorphismReport {
        src_betti,
        dst_betti,
        e_cyan,
        i_purple,
        e_purple,
        verdict: Verdict::bound(dst_betti as i64, src_betti as i64, "beta(dst) <= beta(src)"),
    })
}

/// How exhaustive enumeration treats isomorphic graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Enumeration {
    /// One representative per isomorphism class.
    #[default]
    Classes,
    /// Every labelled graph.
    Raw,
}

fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// All multigraphs on exactly `n` labelled vertices with multiplicities at
/// most `max_mult`, optionally restricted to class representatives and to
/// connected graphs.
pub fn enumerate_graphs(n: usize, max_mult: u32, mode: Enumeration, connected_only: bool) -> Vec<MultiGraph> {
    let pairs = pair_count(n);
    let perms: Vec<Vec<u8>> = match mode {
        Enumeration::Raw => Vec::new(),
        Enumeration::Classes => all_permutations(n)
            .skip(1)
            .map(|p| p.images().iter().map(|&x| x as u8).collect())
            .collect(),
    };
    let mut out = Vec::new();
    let mut mults = vec![0u8; pairs];
    loop {
        if (mode == Enumeration::Raw || lex_canonical(n, &mults, &perms))
            && (!connected_only || mults_connected(n, &mults))
        {
            out.push(MultiGraph::indexed(
                n,
                (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).filter_map(|(i, j)| {
                    let m = mults[pair_index(n, i, j)] as u32;
                    (m > 0).then_some(((i, j), m))
                }),
            ));
        }
        // Odometer increment, last pair fastest.
        let mut k = pairs;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if (mults[k] as u32) < max_mult {
                mults[k] += 1;
                break;
            }
            mults[k] = 0;
        }
    }
}

/// A multiplicity vector represents its class if no relabelling makes it
/// lexicographically larger.
fn lex_canonical(n: usize, mults: &[u8], perms: &[Vec<u8>]) -> bool {
    'perm: for p in perms {
        for i in 0..n {
            let pi = p[i] as usize;
            for j in (i + 1)..n {
                let pj = p[j] as usize;
                let image = mults[pair_index(n, pi.min(pj), pi.max(pj))];
                let own = mults[pair_index(n, i, j)];
                if image > own {
                    return false;
                }
                if image < own {
                    continue 'perm;
                }
            }
        }
    }
    true
}

fn mults_connected(n: usize, mults: &[u8]) -> bool {
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for w in 0..n {
            if w != v && !seen[w] && mults[pair_index(n, v.min(w), v.max(w))] > 0 {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

/// Every subgroup of order at most `order_cap` of the multiplicity-preserving
/// permutations of `graph`.
pub fn actions(graph: &MultiGraph, order_cap: usize) -> Result<Vec<PermGroup>, ActionError> {
    Ok(PermGroup::automorphisms(graph, DEFAULT_ELEMENT_CAP)?.subgroups(order_cap))
}

/// All connected graphs on 1..=max_vertices vertices with every admissible
/// action; lazy over graphs.
pub fn exhaustive_ggraphs(
    max_vertices: usize,
    max_mult: u32,
    order_cap: usize,
    mode: Enumeration,
) -> impl Iterator<Item = Result<GGraph, ActionError>> {
    (1..=max_vertices)
        .flat_map(move |n| enumerate_graphs(n, max_mult, mode, true))
        .flat_map(move |g| {
            let items: Vec<Result<GGraph, ActionError>> = match actions(&g, order_cap) {
                Ok(groups) => groups.into_iter().map(|h| GGraph::new(g.clone(), h)).collect(),
                Err(e) => vec![Err(e)],
            };
            items
        })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomGGraphParams {
    pub max_vertices: usize,
    pub max_mult: u32,
    pub max_group_order: usize,
    /// Probability that a pair orbit carries edges.
    pub density: f64,
    pub max_generators: usize,
}

impl Default for RandomGGraphParams {
    fn default() -> Self {
        Self { max_vertices: 10, max_mult: 2, max_group_order: 24, density: 0.35, max_generators: 2 }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerationError {
    #[error("invalid generator parameters: {0}")]
    Params(String),
    #[error("no instance found after {0} attempts")]
    Exhausted(usize),
}

const GROUP_ATTEMPTS: usize = 64;
const EDGE_ATTEMPTS: usize = 32;

/// A random connected G-graph, deterministic in `seed`.
pub fn random_ggraph(seed: u64, params: &RandomGGraphParams) -> Result<GGraph, GenerationError> {
    if params.max_vertices == 0 || params.max_mult == 0 || params.max_group_order == 0 {
        return Err(GenerationError::Params("vertex, multiplicity and order caps must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=params.max_vertices);
    let group = random_group(&mut rng, n, params);
    let orbits = pair_orbits(n, &group);
    for _ in 0..EDGE_ATTEMPTS {
        let mults: Vec<u32> = orbits
            .iter()
            .map(|_| if rng.gen_bool(params.density) { rng.gen_range(1..=params.max_mult) } else { 0 })
            .collect();
        if let Some(gg) = assemble(n, &orbits, &mults, &group) {
            return Ok(gg);
        }
    }
    // The complete graph is invariant under every group.
    let ones = vec![1; orbits.len()];
    assemble(n, &orbits, &ones, &group).ok_or(GenerationError::Exhausted(EDGE_ATTEMPTS))
}

fn random_group(rng: &mut ChaCha8Rng, n: usize, params: &RandomGGraphParams) -> PermGroup {
    for _ in 0..GROUP_ATTEMPTS {
        let k = rng.gen_range(0..=params.max_generators);
        let gens: Vec<Permutation> = (0..k)
            .map(|_| {
                let mut support: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
                let mut images: Vec<u32> = (0..n as u32).collect();
                let original = support.clone();
                support.shuffle(rng);
                for (&from, &to) in original.iter().zip(&support) {
                    images[from] = to as u32;
                }
                Permutation::new(images).expect("shuffle is a bijection")
            })
            .collect();
        if let Ok(g) = PermGroup::generate(n, gens, params.max_group_order) {
            return g;
        }
    }
    PermGroup::trivial(n)
}

fn pair_orbits(n: usize, group: &PermGroup) -> Vec<Vec<(usize, usize)>> {
    let mut seen = BTreeSet::new();
    let mut orbits = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if seen.contains(&(i, j)) {
                continue;
            }
            let mut orbit: Vec<(usize, usize)> = group
                .elements()
                .iter()
                .map(|p| {
                    let (a, b) = (p.apply(i), p.apply(j));
                    (a.min(b), a.max(b))
                })
                .collect();
            orbit.sort_unstable();
            orbit.dedup();
            seen.extend(orbit.iter().copied());
            orbits.push(orbit);
        }
    }
    orbits
}

fn assemble(n: usize, orbits: &[Vec<(usize, usize)>], mults: &[u32], group: &PermGroup) -> Option<GGraph> {
    let edges = orbits
        .iter()
        .zip(mults)
        .filter(|(_, &m)| m > 0)
        .flat_map(|(orbit, &m)| orbit.iter().map(move |&pair| (pair, m)));
    let graph = MultiGraph::indexed(n, edges);
    if !graph.is_connected() {
        return None;
    }
    GGraph::new(graph, group.clone()).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyc(n: usize, cycles: &[&[usize]]) -> Permutation {
        Permutation::from_cycles(n, cycles).unwrap()
    }

    fn gg(graph: MultiGraph, gens: Vec<Permutation>) -> GGraph {
        let n = graph.vertex_count();
        GGraph::new(graph, PermGroup::generate(n, gens, DEFAULT_ELEMENT_CAP).unwrap()).unwrap()
    }

    fn cycle_graph(n: usize) -> MultiGraph {
        MultiGraph::indexed(n, (0..n).map(|i| ((i, (i + 1) % n), 1)))
    }

    fn path(n: usize) -> MultiGraph {
        MultiGraph::indexed(n, (0..n - 1).map(|i| ((i, i + 1), 1)))
    }

    fn square() -> GGraph {
        gg(cycle_graph(4), vec![cyc(4, &[&[0, 2]])])
    }

    #[test]
    fn tree_bound_examples() {
        assert_eq!(check_tree_bound(&GGraph::trivial(path(4)).unwrap()), Verdict::Holds { tight: true });
        assert_eq!(check_tree_bound(&gg(path(3), vec![cyc(3, &[&[0, 2]])])), Verdict::Holds { tight: true });
        let star = MultiGraph::indexed(4, [((0, 1), 1), ((0, 2), 1), ((0, 3), 1)]);
        let star = gg(star, vec![cyc(4, &[&[1, 2, 3]])]);
        assert_eq!(star.rigidities().len(), 1);
        assert_eq!(star.rigidities()[0].vertices, vec![0]);
        assert_eq!(check_tree_bound(&star), Verdict::Holds { tight: true });
        assert_eq!(check_tree_bound(&square()), Verdict::NotApplicable);
    }

    #[test]
    fn fixpoint_bound_examples() {
        assert_eq!(check_fixpoint_bound(&square()), Verdict::Holds { tight: true });
        assert_eq!(check_fixpoint_bound(&GGraph::trivial(path(2)).unwrap()), Verdict::Holds { tight: true });
        assert_eq!(check_fixpoint_bound(&GGraph::trivial(cycle_graph(3)).unwrap()), Verdict::Holds { tight: false });
    }

    #[test]
    fn orbit_avoid_examples() {
        let tri = GGraph::trivial(cycle_graph(3)).unwrap();
        assert_eq!(check_orbit_avoid_bound(&tri, "v0").unwrap(), Verdict::Holds { tight: false });
        let sq = square();
        assert_eq!(check_orbit_avoid_bound(&sq, "v0").unwrap(), Verdict::Holds { tight: true });
        assert_eq!(check_orbit_avoid_bound(&sq, "v1").unwrap(), Verdict::Holds { tight: true });
        assert!(check_orbit_avoid_bound(&sq, "nope").is_err());
    }

    #[test]
    fn main_bound_examples() {
        assert_eq!(check_main_bound(&square()), Verdict::Holds { tight: true });
        assert_eq!(check_main_bound(&GGraph::trivial(path(3)).unwrap()), Verdict::Holds { tight: true });
        // Two singular rigidities swapped by the group on a single cycle.
        let hexagon = gg(cycle_graph(6), vec![cyc(6, &[&[1, 5], &[2, 4]]), cyc(6, &[&[0, 3], &[1, 2], &[4, 5]])]);
        let q = Quantities::of(&hexagon);
        assert_eq!((q.betti, q.min_orbit, q.orbits, q.rigidities), (1, Some(2), 1, 2));
        assert_eq!(check_main_bound(&hexagon), Verdict::Holds { tight: false });
    }

    #[test]
    fn corollary_examples() {
        assert_eq!(check_corollary(&GGraph::trivial(path(3)).unwrap()), Verdict::Holds { tight: true });
        assert_eq!(check_corollary(&square()), Verdict::Holds { tight: true });
        assert_eq!(check_corollary(&GGraph::trivial(cycle_graph(3)).unwrap()), Verdict::Holds { tight: false });
    }

    #[test]
    fn corollary_equality_analysis_detects_bad_quantities() {
        let mut q = Quantities::of(&square());
        q.fixed = 1;
        assert!(q.evaluate(Theorem::Corollary).is_violated());
        q.betti = 1;
        q.fixed = 0;
        assert!(!q.evaluate(Theorem::Corollary).is_violated());
    }

    #[test]
    fn report_recomputes() {
        let r = check_all("square", &square());
        assert!(!r.violated());
        assert_eq!(r.recompute(), r.verdicts);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["verdicts"]["orbit-avoid"]["status"], "holds");
        assert_eq!("orbit-avoid".parse::<Theorem>(), Ok(Theorem::OrbitAvoid));
        assert!("nope".parse::<Theorem>().is_err());
    }

    fn bip(n_cyan: usize, n_purple: usize, edges: &[(usize, usize)]) -> BipartiteDualGraph {
        let ids: Vec<String> =
            (0..n_cyan).map(|i| format!("c{i}")).chain((0..n_purple).map(|i| format!("p{i}"))).collect();
        let mut mult: BTreeMap<(String, String), u32> = BTreeMap::new();
        for &(c, p) in edges {
            *mult.entry((ids[c].clone(), ids[n_cyan + p].clone())).or_default() += 1;
        }
        let g = MultiGraph::new(ids.clone(), mult.into_iter().map(|((a, b), m)| (a, b, m))).unwrap();
        BipartiteDualGraph::new(g, &ids[..n_cyan], &ids[n_cyan..]).unwrap()
    }

    #[test]
    fn epimorphism_examples() {
        let path = bip(2, 1, &[(0, 0), (1, 0)]);
        let id: BTreeMap<String, String> = ["c0", "c1", "p0"].iter().map(|s| (s.to_string(), s.to_string())).collect();
        let r = check_betti_epimorphism(&path, &path, &id).unwrap();
        assert_eq!((r.src_betti, r.dst_betti), (0, 0));
        assert_eq!(r.verdict, Verdict::Holds { tight: true });

        // Alternating 4-cycle c0 p0 c1 p1 onto c0 - p0 - c1.
        let square = bip(2, 2, &[(0, 0), (1, 0), (0, 1), (1, 1)]);
        let r = check_betti_epimorphism_idx(&square, &path, &[0, 1, 2, 2]).unwrap();
        assert_eq!((r.dst_betti, r.src_betti), (0, 1));
        assert_eq!(r.i_purple["p0"], 2);
        assert_eq!(r.e_cyan["c0"], 1);
        assert_eq!(r.e_purple["p0"], 1.0);
        assert_eq!(r.verdict, Verdict::Holds { tight: false });

        let point = bip(1, 0, &[]);
        let r = check_betti_epimorphism_idx(&path, &point, &[0, 0, 0]);
        assert!(matches!(r, Err(EpimorphismError::ColorViolation(_))));
        let r = check_betti_epimorphism_idx(&bip(2, 0, &[]), &point, &[0, 0]);
        assert_eq!(r, Err(EpimorphismError::SourceDisconnected));
        let r = check_betti_epimorphism_idx(&bip(1, 0, &[]), &point, &[0]).unwrap();
        assert_eq!((r.dst_betti, r.src_betti), (0, 0));
    }

    #[test]
    fn epimorphism_rejections() {
        let path = bip(2, 1, &[(0, 0), (1, 0)]);
        let src = bip(3, 2, &[(0, 0), (1, 0), (1, 1), (2, 1)]);
        assert!(check_betti_epimorphism_idx(&src, &path, &[0, 1, 0, 2, 2]).is_ok());
        let isolated = bip(3, 1, &[(0, 0), (1, 0)]);
        assert_eq!(
            check_betti_epimorphism_idx(&isolated, &path, &[0, 1, 0, 2]),
            Err(EpimorphismError::SourceDisconnected)
        );
        let square = bip(2, 2, &[(0, 0), (1, 0), (0, 1), (1, 1)]);
        assert!(matches!(
            check_betti_epimorphism_idx(&square, &square, &[0, 1, 2, 2]),
            Err(EpimorphismError::NotSurjective(_))
        ));
        let pendant = bip(1, 1, &[(0, 0)]);
        assert!(matches!(
            check_betti_epimorphism_idx(&pendant, &pendant, &[0, 1]),
            Err(EpimorphismError::PurpleDegree(_, 1))
        ));
        assert!(matches!(
            check_betti_epimorphism_idx(&path, &path, &[1, 0]),
            Err(EpimorphismError::WrongDomain { .. })
        ));
    }

    #[test]
    fn epimorphism_hypothesis_failure_is_distinct() {
        // Two cyan preimages of c0 but a single preimage of p0.
        let dst = bip(2, 2, &[(0, 0), (1, 0), (0, 1), (1, 1)]);
        let src = bip(3, 3, &[(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (1, 2)]);
        // s0 -> c0, s1 -> c1, s2 -> c0, q0 -> p0, q1 -> p1, q2 -> p1.
        let r = check_betti_epimorphism_idx(&src, &dst, &[0, 1, 0, 2, 3, 3]);
        assert!(matches!(r, Err(EpimorphismError::Hypothesis { i_x: 1, e_gamma: 2, .. })), "{r:?}");
    }

    #[test]
    fn enumeration_examples() {
        let one: Vec<_> = exhaustive_ggraphs(1, 2, 48, Enumeration::Raw).collect::<Result<_, _>>().unwrap();
        assert_eq!(one.len(), 1);
        let two: Vec<_> = exhaustive_ggraphs(2, 1, 48, Enumeration::Raw).collect::<Result<_, _>>().unwrap();
        assert_eq!(two.len(), 3);
        assert_eq!(two.iter().filter(|g| g.graph().vertex_count() == 2).count(), 2);
        // Connected simple graphs on 3 labelled vertices: 3 paths and 1 triangle.
        assert_eq!(enumerate_graphs(3, 1, Enumeration::Raw, true).len(), 4);
        assert_eq!(enumerate_graphs(3, 1, Enumeration::Classes, true).len(), 2);
        let three: Vec<_> = exhaustive_ggraphs(3, 1, 48, Enumeration::Classes).collect::<Result<_, _>>().unwrap();
        // Path: subgroups of C2 (2); triangle: subgroups of S3 (6).
        assert_eq!(three.len(), 1 + 2 + 2 + 6);
    }

    /// Burnside's lemma counts the classes independently of the canonical test.
    fn burnside_classes(n: usize, max_mult: u32) -> usize {
        let mut total = 0usize;
        let mut count = 0usize;
        for p in all_permutations(n) {
            count += 1;
            let mut seen = BTreeSet::new();
            let mut cycles = 0u32;
            for i in 0..n {
                for j in (i + 1)..n {
                    if seen.contains(&(i, j)) {
                        continue;
                    }
                    cycles += 1;
                    let (mut a, mut b) = (i, j);
                    loop {
                        seen.insert((a.min(b), a.max(b)));
                        (a, b) = (p.apply(a), p.apply(b));
                        if (a.min(b), a.max(b)) == (i, j) {
                            break;
                        }
                    }
                }
            }
            total += (max_mult as usize + 1).pow(cycles);
        }
        total / count
    }

    #[test]
    fn class_enumeration_matches_burnside() {
        for n in 1..=5 {
            for m in 1..=2 {
                assert_eq!(enumerate_graphs(n, m, Enumeration::Classes, false).len(), burnside_classes(n, m), "n={n} m={m}");
            }
        }
        // Connected simple graphs on 4 and 5 vertices (OEIS A001349).
        assert_eq!(enumerate_graphs(4, 1, Enumeration::Classes, true).len(), 6);
        assert_eq!(enumerate_graphs(5, 1, Enumeration::Classes, true).len(), 21);
    }

    #[test]
    fn random_ggraphs_are_valid_and_deterministic() {
        let params = RandomGGraphParams::default();
        for seed in 0..200 {
            let a = random_ggraph(seed, &params).unwrap();
            assert_eq!(a, random_ggraph(seed, &params).unwrap());
            assert!(a.graph().is_connected());
            assert!(crate::action::validate_action(a.graph(), a.group()).is_ok());
            assert!(a.group().order() <= params.max_group_order);
            assert!(a.graph().vertex_count() <= params.max_vertices);
        }
        let nontrivial = (0..200).filter(|&s| !random_ggraph(s, &params).unwrap().group().is_trivial()).count();
        assert!(nontrivial > 50, "{nontrivial}");
    }
}
