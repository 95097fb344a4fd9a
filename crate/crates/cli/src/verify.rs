use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use riglab::pfister::local_square_bound;
use riglab::reduction::{random_reduction, FieldProperty, RandomReductionParams, ReductionGraph};
use riglab::symmetry::{
    actions, check_theorems, enumerate_graphs, random_ggraph, BoundReport, Enumeration, RandomGGraphParams, Theorem,
    Verdict,
};
use riglab::GGraph;

use crate::{to_json, Format, Outcome, VerifyArgs, EXIT_INVALID, EXIT_OK, EXIT_VIOLATION, VERSION};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub holds: u64,
    pub tight: u64,
    pub not_applicable: u64,
    pub violated: u64,
}

impl Tally {
    fn add(&mut self, v: &Verdict) {
        match v {
            Verdict::Holds { tight } => {
                self.holds += 1;
                self.tight += *tight as u64;
            }
            Verdict::NotApplicable => self.not_applicable += 1,
            Verdict::Violated { .. } => self.violated += 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GGraphSuite {
    pub graphs: u64,
    pub instances: u64,
    pub verdicts: BTreeMap<Theorem, Tally>,
    /// First instance attaining equality, per theorem.
    pub tight_witnesses: BTreeMap<Theorem, String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionSuite {
    pub instances: u64,
    /// Instances where `|Ω ∖ Ω^rat_int|` matched the singular cyan orbit count.
    pub singular_count_agreed: u64,
    /// Instances where the subcurves matched the rigidity orbits.
    pub subcurves_agreed: u64,
    pub monotone: Tally,
    pub nonrat: BTreeMap<String, Tally>,
    pub strict_i: u64,
    pub strict_ii: u64,
    pub genus_consistent: u64,
    pub real_chain_checked: u64,
    pub local_square: Tally,
}

/// Everything needed to replay a failing instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reproducer {
    pub suite: String,
    pub id: String,
    pub seed: Option<u64>,
    pub version: String,
    pub problems: Vec<String>,
    pub instance: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub exhaustive: Option<usize>,
    pub max_mult: u32,
    pub order_cap: u64,
    pub enumeration: Enumeration,
    pub random: Option<usize>,
    pub seed: Option<u64>,
    pub max_vertices: u64,
    pub max_group_order: u64,
    pub max_galois_order: u64,
    pub theorems: Vec<Theorem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutant: Option<Theorem>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub version: String,
    pub config: VerifyConfig,
    pub exhaustive: Option<GGraphSuite>,
    pub random: Option<GGraphSuite>,
    pub reductions: Option<ReductionSuite>,
    pub violations: Vec<Reproducer>,
}

struct Checked {
    id: String,
    seed: Option<u64>,
    report: BoundReport,
    instance: Option<Value>,
}

fn check_ggraph(id: String, seed: Option<u64>, gg: &GGraph, theorems: &[Theorem], mutant: Option<Theorem>) -> Checked {
    let mut report = check_theorems(id.clone(), gg, theorems);
    if let Some(t) = mutant {
        if let Some(v) = report.verdicts.get_mut(&t) {
            *v = match v {
                Verdict::Holds { .. } => Verdict::Violated { detail: "check negated".into() },
                Verdict::Violated { .. } => Verdict::Holds { tight: false },
                Verdict::NotApplicable => Verdict::NotApplicable,
            };
        }
    }
    let instance = report.violated().then(|| serde_json::to_value(gg.to_json()).expect("serializable"));
    Checked { id, seed, report, instance }
}

fn fold_ggraphs(suite: &mut GGraphSuite, violations: &mut Vec<Reproducer>, name: &str, checked: Vec<Checked>) {
    for c in checked {
        suite.instances += 1;
        for (t, v) in &c.report.verdicts {
            suite.verdicts.entry(*t).or_default().add(v);
            if v.is_tight() {
                suite.tight_witnesses.entry(*t).or_insert_with(|| c.id.clone());
            }
        }
        if let Some(instance) = c.instance {
            let problems = c
                .report
                .verdicts
                .iter()
                .filter_map(|(t, v)| match v {
                    Verdict::Violated { detail } => Some(format!("{t}: {detail}")),
                    _ => None,
                })
                .collect();
            violations.push(Reproducer {
                suite: name.into(),
                id: c.id,
                seed: c.seed,
                version: VERSION.into(),
                problems,
                instance,
            });
        }
    }
}

fn exhaustive(args: &VerifyArgs, n_max: usize, theorems: &[Theorem], violations: &mut Vec<Reproducer>) -> Result<GGraphSuite, String> {
    let mode = if args.raw { Enumeration::Raw } else { Enumeration::Classes };
    let mut suite = GGraphSuite::default();
    for n in 1..=n_max {
        let graphs = enumerate_graphs(n, args.max_mult, mode, true);
        suite.graphs += graphs.len() as u64;
        let per_graph: Vec<Result<Vec<Checked>, String>> = graphs
            .par_iter()
            .enumerate()
            .map(|(gi, g)| {
                let groups = actions(g, args.order_cap as usize).map_err(|e| e.to_string())?;
                groups
                    .into_iter()
                    .enumerate()
                    .map(|(hi, h)| {
                        let gg = GGraph::new(g.clone(), h).map_err(|e| e.to_string())?;
                        Ok(check_ggraph(format!("x{n}.{gi}.{hi}"), None, &gg, theorems, args.mutant))
                    })
                    .collect()
            })
            .collect();
        for checked in per_graph {
            fold_ggraphs(&mut suite, violations, "exhaustive", checked?);
        }
    }
    Ok(suite)
}

fn instance_seeds(seed: u64, stream: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..count).map(|_| rng.gen()).collect()
}

fn random_batch(
    args: &VerifyArgs,
    count: usize,
    seed: u64,
    theorems: &[Theorem],
    violations: &mut Vec<Reproducer>,
) -> Result<GGraphSuite, String> {
    let params = RandomGGraphParams {
        max_vertices: args.max_vertices as usize,
        max_group_order: args.max_group_order as usize,
        ..RandomGGraphParams::default()
    };
    let checked: Result<Vec<Checked>, String> = instance_seeds(seed, 0, count)
        .into_par_iter()
        .enumerate()
        .map(|(i, s)| {
            let gg = random_ggraph(s, &params).map_err(|e| e.to_string())?;
            Ok(check_ggraph(format!("r{i}"), Some(s), &gg, theorems, args.mutant))
        })
        .collect();
    let mut suite = GGraphSuite { graphs: count as u64, ..GGraphSuite::default() };
    fold_ggraphs(&mut suite, violations, "random", checked?);
    Ok(suite)
}

#[derive(Default)]
struct ReductionOutcome {
    singular_count_agreed: bool,
    subcurves_agreed: bool,
    monotone: Option<Verdict>,
    nonrat: Vec<(FieldProperty, Verdict, bool, bool)>,
    genus_consistent: bool,
    real_chain_checked: bool,
    local_square: Option<Verdict>,
    problems: Vec<String>,
}

fn check_reduction(rg: &ReductionGraph) -> ReductionOutcome {
    let mut out = ReductionOutcome::default();
    match rg.singular_rigidity_orbit_count() {
        Ok(_) => out.singular_count_agreed = true,
        Err(e) => out.problems.push(e.to_string()),
    }
    match rg.check_rigidity_subcurves() {
        Ok(_) => out.subcurves_agreed = true,
        Err(e) => out.problems.push(e.to_string()),
    }
    match rg.betti_monotone_check() {
        Ok(m) => {
            if let Verdict::Violated { detail } = &m.verdict {
                out.problems.push(format!("betti monotonicity: {detail}"));
            }
            out.monotone = Some(m.verdict);
        }
        Err(e) => out.problems.push(format!("betti monotonicity: {e}")),
    }
    for p in FieldProperty::ALL {
        let r = rg.check_nonrat_bound(p);
        if let Verdict::Violated { detail } = &r.verdict {
            out.problems.push(format!("non-rational count for {p:?}: {detail}"));
        }
        out.nonrat.push((p, r.verdict, r.hypothesis_i.is_some(), r.hypothesis_ii.is_some()));
    }
    if let Some(d) = rg.declared() {
        let g = rg.genus_budget_check(d.g_f, d.real_f, d.henselian);
        out.genus_consistent = g.consistent;
        out.real_chain_checked = g.real_sum.is_some();
        if !g.consistent {
            out.problems.push(format!(
                "genus budget: betti-genus {}, rational {}, real {}",
                g.betti_genus, g.rational, g.real
            ));
        }
    }
    let ls = local_square_bound(rg);
    if let Verdict::Violated { detail } = &ls.verdict {
        out.problems.push(format!("local square bound: {detail}"));
    }
    out.local_square = Some(ls.verdict);
    out
}

fn reduction_batch(args: &VerifyArgs, count: usize, seed: u64, violations: &mut Vec<Reproducer>) -> Result<ReductionSuite, String> {
    let params = RandomReductionParams { max_group_order: args.max_galois_order as usize, ..RandomReductionParams::default() };
    let results: Result<Vec<(u64, ReductionGraph, ReductionOutcome)>, String> = instance_seeds(seed, 1, count)
        .into_par_iter()
        .map(|s| {
            let rg = random_reduction(s, &params).map_err(|e| e.to_string())?;
            let outcome = check_reduction(&rg);
            Ok((s, rg, outcome))
        })
        .collect();
    let mut suite = ReductionSuite::default();
    for (i, (s, rg, o)) in results?.into_iter().enumerate() {
        suite.instances += 1;
        suite.singular_count_agreed += o.singular_count_agreed as u64;
        suite.subcurves_agreed += o.subcurves_agreed as u64;
        if let Some(v) = &o.monotone {
            suite.monotone.add(v);
        }
        for (p, v, i_, ii) in &o.nonrat {
            suite.nonrat.entry(format!("{p:?}").to_lowercase()).or_default().add(v);
            suite.strict_i += *i_ as u64;
            suite.strict_ii += *ii as u64;
        }
        suite.genus_consistent += o.genus_consistent as u64;
        suite.real_chain_checked += o.real_chain_checked as u64;
        if let Some(v) = &o.local_square {
            suite.local_square.add(v);
        }
        if !o.problems.is_empty() {
            violations.push(Reproducer {
                suite: "reductions".into(),
                id: format!("q{i}"),
                seed: Some(s),
                version: VERSION.into(),
                problems: o.problems,
                instance: serde_json::to_value(rg.to_json()).expect("serializable"),
            });
        }
    }
    Ok(suite)
}

/// Runs the configured batches; `Err` means an instance could not be built.
pub fn verify(args: &VerifyArgs) -> Result<VerifyReport, String> {
    let theorems = args.theorems.clone().unwrap_or_else(|| Theorem::ALL.to_vec());
    let config = VerifyConfig {
        exhaustive: args.exhaustive,
        max_mult: args.max_mult,
        order_cap: args.order_cap,
        enumeration: if args.raw { Enumeration::Raw } else { Enumeration::Classes },
        random: args.random,
        seed: args.seed,
        max_vertices: args.max_vertices,
        max_group_order: args.max_group_order,
        max_galois_order: args.max_galois_order,
        theorems: theorems.clone(),
        mutant: args.mutant,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build().map_err(|e| e.to_string())?;
    pool.install(|| {
        let mut violations = Vec::new();
        let exhaustive = args.exhaustive.map(|n| exhaustive(args, n, &theorems, &mut violations)).transpose()?;
        let (random, reductions) = match (args.random, args.seed) {
            (Some(count), Some(seed)) => (
                Some(random_batch(args, count, seed, &theorems, &mut violations)?),
                Some(reduction_batch(args, count, seed, &mut violations)?),
            ),
            _ => (None, None),
        };
        Ok(VerifyReport { version: VERSION.into(), config, exhaustive, random, reductions, violations })
    })
}

pub fn run(args: &VerifyArgs) -> Outcome {
    if args.exhaustive.is_none() && args.random.is_none() {
        return Outcome::fail(crate::EXIT_PARSE, "error: nothing to verify; pass --exhaustive N and/or --random COUNT --seed S\n");
    }
    let report = match verify(args) {
        Ok(r) => r,
        Err(e) => return Outcome::fail(EXIT_INVALID, format!("error: {e}\n")),
    };
    let json = to_json(&report);
    if let Some(path) = &args.report {
        if let Err(e) = std::fs::write(path, &json) {
            return Outcome::fail(crate::EXIT_IO, format!("error: cannot write {}: {e}\n", path.display()));
        }
    }
    let stdout = match args.format {
        Format::Json => json,
        Format::Text => text(&report),
    };
    if report.violations.is_empty() {
        Outcome { code: EXIT_OK, stdout, stderr: String::new() }
    } else {
        let stderr = report.violations.iter().map(|v| serde_json::to_string(v).expect("serializable") + "\n").collect();
        Outcome { code: EXIT_VIOLATION, stdout, stderr }
    }
}

fn suite_text(name: &str, s: &GGraphSuite, out: &mut String) {
    out.push_str(&format!("{name}: {} graphs, {} instances\n", s.graphs, s.instances));
    out.push_str(&format!("  {:<12} {:>10} {:>8} {:>8} {:>8}\n", "theorem", "holds", "tight", "n/a", "violated"));
    for (t, tally) in &s.verdicts {
        out.push_str(&format!(
            "  {:<12} {:>10} {:>8} {:>8} {:>8}\n",
            t.name(),
            tally.holds,
            tally.tight,
            tally.not_applicable,
            tally.violated
        ));
    }
}

fn text(r: &VerifyReport) -> String {
    let mut out = format!("{}\n", r.version);
    if let Some(s) = &r.exhaustive {
        suite_text("exhaustive", s, &mut out);
    }
    if let Some(s) = &r.random {
        suite_text("random", s, &mut out);
    }
    if let Some(s) = &r.reductions {
        out.push_str(&format!(
            "reductions: {} instances, singular count agreed {}, subcurves agreed {}, genus consistent {}\n",
            s.instances, s.singular_count_agreed, s.subcurves_agreed, s.genus_consistent
        ));
        out.push_str(&format!(
            "  monotone violated {}, local square violated {}, strict (i) {}, strict (ii) {}\n",
            s.monotone.violated, s.local_square.violated, s.strict_i, s.strict_ii
        ));
        for (p, t) in &s.nonrat {
            out.push_str(&format!("  non-rational {p}: holds {} tight {} violated {}\n", t.holds, t.tight, t.violated));
        }
    }
    out.push_str(&format!("violations: {}\n", r.violations.len()));
    out
}
