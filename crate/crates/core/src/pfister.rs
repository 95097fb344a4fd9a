//! Bound calculus for Pfister indices of function fields over henselian
//! n-discrete valued fields, and the local-square bound.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reduction::ReductionGraph;
use crate::symmetry::Verdict;

/// A natural number or infinity; addition saturates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExtNat {
    Fin(u64),
    #[serde(with = "infinity")]
    Inf,
}

mod infinity {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("inf")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "inf" {
            Ok(())
        } else {
            Err(serde::de::Error::custom(format!("expected \"inf\", got {s:?}")))
        }
    }
}

impl ExtNat {
    pub const ZERO: ExtNat = ExtNat::Fin(0);

    pub fn finite(self) -> Option<u64> {
        match self {
            ExtNat::Fin(x) => Some(x),
            ExtNat::Inf => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == ExtNat::Inf
    }
}

impl From<u64> for ExtNat {
    fn from(x: u64) -> Self {
        ExtNat::Fin(x)
    }
}

impl Add for ExtNat {
    type Output = ExtNat;
    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtNat::Fin(a), ExtNat::Fin(b)) => a.checked_add(b).map_or(ExtNat::Inf, ExtNat::Fin),
            _ => ExtNat::Inf,
        }
    }
}

impl std::iter::Sum for ExtNat {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ExtNat::ZERO, Add::add)
    }
}

impl PartialOrd for ExtNat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtNat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtNat::Fin(a), ExtNat::Fin(b)) => a.cmp(b),
            (ExtNat::Fin(_), ExtNat::Inf) => Ordering::Less,
            (ExtNat::Inf, ExtNat::Fin(_)) => Ordering::Greater,
            (ExtNat::Inf, ExtNat::Inf) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Fin(x) => write!(f, "{x}"),
            ExtNat::Inf => f.write_str("inf"),
        }
    }
}

/// Compares a finite `x` with `2^e` without overflow.
fn cmp_pow2(x: u64, e: u32) -> Ordering {
    if e >= 64 {
        Ordering::Less
    } else {
        x.cmp(&(1u64 << e))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProfileError {
    #[error("level {0} is not a power of two")]
    LevelNotPowerOfTwo(u64),
    #[error("Pythagoras number must be positive")]
    ZeroPythagoras,
    #[error("real fields have infinite level, nonreal fields finite level")]
    RealityMismatch,
    #[error("Pythagoras number {pythagoras} outside [level, level + 1] for level {level}")]
    Sandwich { level: u64, pythagoras: ExtNat },
}

/// Declared sums-of-squares invariants of a field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldProfile {
    level: ExtNat,
    pythagoras: ExtNat,
    /// Known Pfister indices by `ℓ`; a missing entry means unbounded.
    rho: BTreeMap<u32, ExtNat>,
}

impl FieldProfile {
    pub fn new(level: ExtNat, pythagoras: ExtNat, real: bool, rho: BTreeMap<u32, ExtNat>) -> Result<Self, ProfileError> {
        if real != level.is_infinite() {
            return Err(ProfileError::RealityMismatch);
        }
        if pythagoras == ExtNat::Fin(0) {
            return Err(ProfileError::ZeroPythagoras);
        }
        if let ExtNat::Fin(s) = level {
            if !s.is_power_of_two() {
                return Err(ProfileError::LevelNotPowerOfTwo(s));
            }
            if pythagoras < level || pythagoras > ExtNat::Fin(s + 1) {
                return Err(ProfileError::Sandwich { level: s, pythagoras });
            }
        }
        Ok(Self { level, pythagoras, rho })
    }

    pub fn real(pythagoras: ExtNat) -> Result<Self, ProfileError> {
        Self::new(ExtNat::Inf, pythagoras, true, BTreeMap::new())
    }

    pub fn nonreal(level: u64, pythagoras: u64) -> Result<Self, ProfileError> {
        Self::new(ExtNat::Fin(level), ExtNat::Fin(pythagoras), false, BTreeMap::new())
    }

    pub fn with_rho(mut self, ell: u32, rho: ExtNat) -> Self {
        self.rho.insert(ell, rho);
        self
    }

    pub fn level(&self) -> ExtNat {
        self.level
    }

    pub fn pythagoras(&self) -> ExtNat {
        self.pythagoras
    }

    pub fn is_real(&self) -> bool {
        self.level.is_infinite()
    }

    pub fn rho(&self, ell: u32) -> ExtNat {
        self.rho.get(&ell).copied().unwrap_or(ExtNat::Inf)
    }
}

/// Which case of the henselian lifting bound applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HenselBranch {
    /// `ℓ ≥ 1` and either `s ≤ 2^(ℓ-1)`, or `s = ∞` and `p ≤ 2^ℓ`: the index vanishes.
    Vanishing,
    /// `s ≥ 2^(ℓ+1)`: the residue index carries over.
    Deep,
    /// `s = 2^ℓ`: one extra bit from the value group.
    Boundary,
}

pub fn hensel_branch(residue: &FieldProfile, ell: u32) -> HenselBranch {
    let vanishing = ell >= 1
        && match (residue.level, residue.pythagoras) {
            (ExtNat::Fin(s), _) => cmp_pow2(s, ell - 1) != Ordering::Greater,
            (ExtNat::Inf, ExtNat::Fin(p)) => cmp_pow2(p, ell) != Ordering::Greater,
            (ExtNat::Inf, ExtNat::Inf) => false,
        };
    if vanishing {
        return HenselBranch::Vanishing;
    }
    match residue.level {
        ExtNat::Inf => HenselBranch::Deep,
        ExtNat::Fin(s) => match cmp_pow2(s, ell) {
            Ordering::Equal => HenselBranch::Boundary,
            Ordering::Greater => HenselBranch::Deep,
            // Only reachable for ℓ = 0, where s ≥ 1 = 2^0 always.
            Ordering::Less => unreachable!("level below 2^ell outside the vanishing branch"),
        },
    }
}

/// Upper bound on `ρ_ℓ` of a henselian discretely valued field with the
/// given residue field.
pub fn hensel_lift_bound(residue: &FieldProfile, ell: u32) -> ExtNat {
    match hensel_branch(residue, ell) {
        HenselBranch::Vanishing => ExtNat::ZERO,
        HenselBranch::Deep => residue.rho(ell),
        HenselBranch::Boundary => ExtNat::Fin(1) + residue.rho(ell),
    }
}

/// Residue level class of a valuation relative to `ℓ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LevelClass {
    /// `s(κ_w) ≥ 2^(ℓ+1)`.
    #[serde(rename = ">l")]
    Above,
    /// `s(κ_w) = 2^ℓ`.
    #[serde(rename = "=l")]
    At,
}

/// `Σ_{>ℓ} ρ_w + Σ_{=ℓ} (1 + ρ_w)`.
pub fn localglobal_sum_bound(entries: &[(LevelClass, ExtNat)]) -> ExtNat {
    entries
        .iter()
        .map(|&(class, rho)| match class {
            LevelClass::Above => rho,
            LevelClass::At => ExtNat::Fin(1) + rho,
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveDescriptor {
    /// Rank of the henselian valuation on the base field.
    pub n: u32,
    pub genus: u32,
    pub real: bool,
}

impl CurveDescriptor {
    /// `g` for real function fields, `g + 1` otherwise.
    pub fn genus_star(&self) -> u64 {
        self.genus as u64 + u64::from(!self.real)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum TraceStep {
    /// Rank zero: the residue field hypothesis forces `ρ_ℓ = 0`.
    Base,
    /// One induction step on the rank.
    Rank {
        rank: u32,
        /// Bound at rank `r − 1` for a genus-zero nonreal residue curve.
        induction: u64,
        /// The extremal valuation multiset fed to the local-global sum.
        entries: Vec<(LevelClass, ExtNat)>,
        /// Lifting of one boundary-level residue bound.
        lifted: ExtNat,
        /// Budget from the genus inequality on the number of valuations.
        budget: u64,
        value: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhoBound {
    pub curve: CurveDescriptor,
    pub ell: u32,
    pub value: u64,
    /// Whether the bound is known to be attained; only established for `ℓ = 1`.
    pub optimal: bool,
    pub trace: Vec<TraceStep>,
}

/// `n·g` for real and `n·(g+1)` for nonreal function fields, with the
/// rank-by-rank derivation.
pub fn rho_upper_bound(c: CurveDescriptor, ell: u32) -> RhoBound {
    let gstar = c.genus_star();
    let mut trace = vec![TraceStep::Base];
    let mut previous = 0u64;
    for rank in 1..=c.n {
        // g* valuations whose residue fields have level exactly 2^ℓ and are
        // genus-zero curves over a field of rank r − 1.
        let residue_rho = rank as u64 - 1;
        let entries = vec![(LevelClass::At, ExtNat::Fin(residue_rho)); gstar as usize];
        let boundary = 1u64 << ell.min(62);
        let residue = FieldProfile::nonreal(boundary, boundary)
            .expect("boundary profile is valid")
            .with_rho(ell, ExtNat::Fin(residue_rho));
        let lifted = hensel_lift_bound(&residue, ell);
        let value = previous + gstar;
        trace.push(TraceStep::Rank { rank, induction: residue_rho, entries, lifted, budget: gstar, value });
        previous = value;
    }
    RhoBound { curve: c, ell, value: previous, optimal: ell == 1, trace }
}

/// Re-derives every trace step from the primitive bounds.
pub fn audit_trace(bound: &RhoBound) -> Result<(), String> {
    let gstar = bound.curve.genus_star();
    let mut previous = None;
    for (i, step) in bound.trace.iter().enumerate() {
        match step {
            TraceStep::Base if i == 0 => previous = Some(0),
            TraceStep::Base => return Err(format!("base step at position {i}")),
            TraceStep::Rank { rank, induction, entries, lifted, budget, value } => {
                let prev = previous.ok_or("rank step before base")?;
                if *rank as usize != i {
                    return Err(format!("rank {rank} at position {i}"));
                }
                if *induction != *rank as u64 - 1 {
                    return Err(format!("rank {rank}: residue bound {induction} is not the rank {} bound", rank - 1));
                }
                if entries.iter().any(|&(_, rho)| rho != ExtNat::Fin(*induction)) {
                    return Err(format!("rank {rank}: residue entries disagree with the induction bound"));
                }
                if *budget != gstar || entries.len() as u64 != *budget {
                    return Err(format!("rank {rank}: {} valuations exceed the genus budget {gstar}", entries.len()));
                }
                if *lifted != ExtNat::Fin(*induction + 1) {
                    return Err(format!("rank {rank}: boundary lift {lifted} != {}", induction + 1));
                }
                let sum = localglobal_sum_bound(entries);
                // The same total through the genus inequality: (r-1) g* + g*.
                let via_genus = prev + gstar;
                if sum != ExtNat::Fin(*value) || via_genus != *value {
                    return Err(format!("rank {rank}: sum {sum}, genus form {via_genus}, claimed {value}"));
                }
                previous = Some(*value);
            }
        }
    }
    let closed = closed_form(bound.curve);
    match previous {
        Some(v) if v == bound.value && v == closed => Ok(()),
        other => Err(format!("final value {other:?} vs claimed {} and closed form {closed}", bound.value)),
    }
}

/// `2^exponent`, with the exponent kept exact even when the power is huge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerOfTwo {
    pub exponent: u64,
}

impl PowerOfTwo {
    pub fn value(self) -> Option<u128> {
        (self.exponent < 128).then(|| 1u128 << self.exponent)
    }
}

impl fmt::Display for PowerOfTwo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2^{}", self.exponent)
    }
}

/// Bound on the index of sums of two squares in all sums of squares.
pub fn index_bound(c: CurveDescriptor) -> PowerOfTwo {
    PowerOfTwo { exponent: closed_form(c) }
}

fn closed_form(c: CurveDescriptor) -> u64 {
    c.n as u64 * c.genus_star()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessNode {
    pub label: String,
    pub rank: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residue_level: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub children: Vec<WitnessNode>,
}

impl WitnessNode {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(WitnessNode::size).sum::<usize>()
    }

    /// Ranks strictly increase from parent to child.
    pub fn ranks_increase(&self) -> bool {
        self.children.iter().all(|c| c.rank > self.rank && c.ranks_increase())
    }
}

/// Valuations of level-2 residue field on the real curve
/// `Y² = (X−1)·∏_{i=1}^{g}(X² + t_n^{2i})`, rooted at the function field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessTree {
    pub genus: u32,
    pub n: u32,
    pub root: WitnessNode,
}

impl WitnessTree {
    /// Number of witnessing valuations, i.e. nodes below the root.
    pub fn count(&self) -> usize {
        self.root.size() - 1
    }
}

pub fn witness_tree(g: u32, n: u32) -> WitnessTree {
    let gauss = if n == 0 {
        Vec::new()
    } else {
        (1..=g)
            .map(|j| WitnessNode {
                label: format!("w{j}"),
                rank: 1,
                residue_level: Some(2),
                children: (2..=n)
                    .map(|d| WitnessNode {
                        label: format!("w{j}.{d}"),
                        rank: d,
                        residue_level: Some(2),
                        children: Vec::new(),
                    })
                    .collect(),
            })
            .collect()
    };
    WitnessTree { genus: g, n, root: WitnessNode { label: "F".into(), rank: 0, residue_level: None, children: gauss } }
}

/// Witness count for the real optimality example; equals `ρ_1 = n·g`.
pub fn optimal_witness_count(g: u32, n: u32) -> (u64, WitnessTree) {
    let tree = witness_tree(g, n);
    let count = tree.count() as u64;
    debug_assert_eq!(count, rho_upper_bound(CurveDescriptor { n, genus: g, real: true }, 1).value);
    (count, tree)
}

/// `ρ_1 = n·(g+1)` for the nonreal curve `Y² = −∏_{i=0}^{g}(X² + t_n^{2i})`.
pub fn nonreal_witness_count(g: u32, n: u32) -> u64 {
    let count = n as u64 * (g as u64 + 1);
    debug_assert_eq!(count, rho_upper_bound(CurveDescriptor { n, genus: g, real: false }, 1).value);
    count
}

/// A value in `(Z^n, ≤_lex)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LexValue(pub Vec<i64>);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("expected rank {expected}, got {found}")]
pub struct RankError {
    pub expected: usize,
    pub found: usize,
}

impl LexValue {
    pub fn rank(&self) -> usize {
        self.0.len()
    }

    /// Value under the 1-discrete coarsening.
    pub fn coarsen(&self) -> Option<i64> {
        self.0.first().copied()
    }

    /// Value under the residual valuation modulo the coarsening.
    pub fn residual(&self) -> LexValue {
        LexValue(self.0.iter().skip(1).copied().collect())
    }
}

/// `(v(x), w(residue of x·π^{−v(x)}))` for a rank-1 outer value and an inner
/// value of rank `rank − 1`.
pub fn compose_valuation(outer: &LexValue, inner: &LexValue, rank: usize) -> Result<LexValue, RankError> {
    if outer.rank() != 1 {
        return Err(RankError { expected: 1, found: outer.rank() });
    }
    if inner.rank() + 1 != rank {
        return Err(RankError { expected: rank.saturating_sub(1), found: inner.rank() });
    }
    Ok(LexValue(outer.0.iter().chain(&inner.0).copied().collect()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalSquareReport {
    /// log₂ of the bound on `|L(F)/F^{×2}|`: the Betti number of the base change.
    pub log2_bound: u64,
    /// Betti number of the unreduced dual graph, `log₂|Ш|` for the model itself.
    pub beta: u64,
    /// `g_F − Σ [G:stab]·genus`, when a genus is declared.
    pub budget: Option<i64>,
    pub verdict: Verdict,
}

pub fn local_square_bound(rg: &ReductionGraph) -> LocalSquareReport {
    let log2_bound = rg.base_change().betti();
    let beta = rg.betti();
    let budget = rg.declared().map(|d| d.g_f as i64 - rg.genus_sum() as i64);
    let monotone = Verdict::bound(beta as i64, log2_bound as i64, "beta <= beta'");
    let verdict = match budget {
        Some(b) => Verdict::bound(log2_bound as i64, b, "beta' <= g_F - sum [G:stab] genus").guarded(monotone),
        None => monotone,
    };
    LocalSquareReport { log2_bound, beta, budget, verdict }
}
