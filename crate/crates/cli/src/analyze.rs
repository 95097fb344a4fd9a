use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use riglab::action::{GGraphJson, RigidityOrbits};
use riglab::pfister::{local_square_bound, LocalSquareReport};
use riglab::reduction::{FieldProperty, GenusReport, NonratReport, ReductionGraph, ReductionJson, SubcurveCandidate};
use riglab::symmetry::{check_all, BoundReport, EpimorphismReport, Verdict};
use riglab::{GGraph, MultiGraph, PermGroup};

use crate::{to_json, AnalyzeArgs, Format, Outcome, EXIT_INVALID, EXIT_PARSE, EXIT_VIOLATION, VERSION};

#[derive(Serialize)]
struct RigidityEntry {
    vertices: Vec<String>,
    rigidifier_order: usize,
    rigidifier_generators: Vec<BTreeMap<String, String>>,
    singular: bool,
    orbit: usize,
}

#[derive(Serialize)]
struct GGraphReport {
    betti: u64,
    vertices: usize,
    group_order: usize,
    rigidities: Vec<RigidityEntry>,
    orbits: Vec<Vec<usize>>,
    /// Smallest rigidity-orbit size `d`.
    d: Option<usize>,
    /// Rigidities fixed by the whole group, i.e. the components of `D_G^G`.
    fixed_rigidities: Vec<usize>,
    bounds: BoundReport,
}

#[derive(Serialize)]
struct PropertySet {
    property: FieldProperty,
    components: Vec<String>,
}

#[derive(Serialize)]
struct BaseChangeSummary {
    vertices: usize,
    cyan: usize,
    purple: usize,
    edges: u64,
    betti: u64,
    group_order: usize,
    analysis: GGraphReport,
}

#[derive(Serialize)]
struct ReductionReport {
    betti: u64,
    beta_prime: u64,
    components: Vec<String>,
    omega_rat_int: Vec<String>,
    omega_p: Vec<PropertySet>,
    /// `|Ω ∖ Ω^rat_int|`, cross-checked against singular cyan rigidity orbits.
    n: Option<usize>,
    subcurves: Option<Vec<SubcurveCandidate>>,
    nonrat: Vec<NonratReport>,
    monotone: Option<EpimorphismReport>,
    genus: Option<GenusReport>,
    local_square: LocalSquareReport,
    base_change: BaseChangeSummary,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Report {
    Ggraph {
        instance: String,
        #[serde(flatten)]
        report: Box<GGraphReport>,
    },
    Reduction {
        instance: String,
        #[serde(flatten)]
        report: Box<ReductionReport>,
    },
}

#[derive(Serialize)]
struct Dump<'a> {
    version: &'a str,
    seed: Option<u64>,
    problems: Vec<String>,
    instance: Value,
}

pub fn run(args: &AnalyzeArgs) -> Outcome {
    let instance = args.path.display().to_string();
    let text = match std::fs::read_to_string(&args.path) {
        Ok(t) => t,
        Err(e) => return Outcome::fail(EXIT_PARSE, format!("error: cannot read {instance}: {e}\n")),
    };
    let value: Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => return Outcome::fail(EXIT_PARSE, format!("error: {instance}: {e}\n")),
    };
    let (report, problems, invalid) = if value.get("galois").is_some() {
        let json: ReductionJson = match serde_json::from_value(value.clone()) {
            Ok(j) => j,
            Err(e) => return Outcome::fail(EXIT_PARSE, format!("error: {instance}: {e}\n")),
        };
        let rg = match ReductionGraph::from_json(&json) {
            Ok(rg) => rg,
            Err(e) => return Outcome::fail(EXIT_INVALID, format!("error: invalid reduction graph: {e}\n")),
        };
        let (report, problems, inconsistent) = reduction_report(&rg);
        (Report::Reduction { instance, report: Box::new(report) }, problems, inconsistent)
    } else {
        let json: GGraphJson = match serde_json::from_value(value.clone()) {
            Ok(j) => j,
            Err(e) => return Outcome::fail(EXIT_PARSE, format!("error: {instance}: {e}\n")),
        };
        let gg = match GGraph::from_json(&json, args.group_cap) {
            Ok(gg) => gg,
            Err(e) => return Outcome::fail(EXIT_INVALID, format!("error: invalid G-graph: {e}\n")),
        };
        let report = ggraph_report(&instance, &gg);
        let problems = violations(&report.bounds);
        (Report::Ggraph { instance, report: Box::new(report) }, problems, Vec::new())
    };
    let stdout = match args.format {
        Format::Json => to_json(&report),
        Format::Text => text_report(&report),
    };
    if !problems.is_empty() {
        let dump = Dump { version: VERSION, seed: None, problems, instance: value };
        return Outcome { code: EXIT_VIOLATION, stdout, stderr: to_json(&dump) };
    }
    if !invalid.is_empty() {
        let stderr = invalid.iter().map(|p| format!("inconsistent with paper bounds: {p}\n")).collect();
        return Outcome { code: EXIT_INVALID, stdout, stderr };
    }
    Outcome::ok(stdout)
}

fn violations(report: &BoundReport) -> Vec<String> {
    report
        .verdicts
        .iter()
        .filter_map(|(t, v)| match v {
            Verdict::Violated { detail } => Some(format!("{t}: {detail}")),
            _ => None,
        })
        .collect()
}

fn moved_points(graph: &MultiGraph, group: &PermGroup) -> Vec<BTreeMap<String, String>> {
    group
        .generators()
        .iter()
        .map(|g| {
            (0..graph.vertex_count())
                .filter(|&v| !g.fixes(v))
                .map(|v| (graph.id(v).to_string(), graph.id(g.apply(v)).to_string()))
                .collect()
        })
        .collect()
}

fn ggraph_report(instance: &str, gg: &GGraph) -> GGraphReport {
    let RigidityOrbits { rigidities, orbits } = gg.rigidity_orbits();
    let mut orbit_of = vec![0; rigidities.len()];
    for (o, members) in orbits.iter().enumerate() {
        for &r in members {
            orbit_of[r] = o;
        }
    }
    let graph = gg.graph();
    let fixed = orbits.iter().filter(|o| o.len() == 1).map(|o| o[0]).collect();
    let d = orbits.iter().map(Vec::len).min();
    let entries = rigidities
        .iter()
        .enumerate()
        .map(|(i, r)| RigidityEntry {
            vertices: r.vertices.iter().map(|&v| graph.id(v).to_string()).collect(),
            rigidifier_order: r.rigidifier.order(),
            rigidifier_generators: moved_points(graph, &r.rigidifier),
            singular: r.singular,
            orbit: orbit_of[i],
        })
        .collect();
    GGraphReport {
        betti: gg.betti(),
        vertices: graph.vertex_count(),
        group_order: gg.group().order(),
        rigidities: entries,
        orbits,
        d,
        fixed_rigidities: fixed,
        bounds: check_all(instance, gg),
    }
}

/// The report, theorem violations, and failed genus-consistency checks.
fn reduction_report(rg: &ReductionGraph) -> (ReductionReport, Vec<String>, Vec<String>) {
    let mut problems = Vec::new();
    let mut inconsistent = Vec::new();
    let base = rg.base_change();
    let analysis = ggraph_report("base change", &base.ggraph);
    problems.extend(violations(&analysis.bounds).into_iter().map(|p| format!("base change {p}")));
    let n = rg.singular_rigidity_orbit_count().map_err(|e| problems.push(e.to_string())).ok();
    let subcurves = rg.check_rigidity_subcurves().map_err(|e| problems.push(e.to_string())).ok();
    let nonrat: Vec<NonratReport> = FieldProperty::ALL.iter().map(|&p| rg.check_nonrat_bound(p)).collect();
    for r in &nonrat {
        if let Verdict::Violated { detail } = &r.verdict {
            problems.push(format!("non-rational count for {:?}: {detail}", r.property));
        }
    }
    let monotone = match rg.betti_monotone_check() {
        Ok(m) => {
            if let Verdict::Violated { detail } = &m.verdict {
                problems.push(format!("betti monotonicity: {detail}"));
            }
            Some(m)
        }
        Err(e) => {
            problems.push(format!("betti monotonicity: {e}"));
            None
        }
    };
    let genus = rg.declared().map(|d| rg.genus_budget_check(d.g_f, d.real_f, d.henselian));
    if let Some(g) = &genus {
        for (what, v) in [("betti-genus", &g.betti_genus), ("rational", &g.rational), ("real", &g.real)] {
            if let Verdict::Violated { detail } = v {
                inconsistent.push(format!("{what}: {detail}"));
            }
        }
    }
    let local_square = local_square_bound(rg);
    if let Verdict::Violated { detail } = &local_square.verdict {
        // β ≤ β′ is a theorem; the budget part is a declared-data check.
        if local_square.beta > local_square.log2_bound {
            problems.push(format!("local square bound: {detail}"));
        } else {
            inconsistent.push(format!("local square bound: {detail}"));
        }
    }
    let dual = &base.dual;
    let report = ReductionReport {
        betti: rg.betti(),
        beta_prime: base.betti(),
        components: rg.components().iter().map(|c| c.id.clone()).collect(),
        omega_rat_int: rg.component_ids(&rg.omega_rat_int()),
        omega_p: FieldProperty::ALL
            .iter()
            .map(|&p| PropertySet { property: p, components: rg.component_ids(&rg.omega_p(p)) })
            .collect(),
        n,
        subcurves,
        nonrat,
        monotone,
        genus,
        local_square,
        base_change: BaseChangeSummary {
            vertices: dual.graph().vertex_count(),
            cyan: dual.cyan_count(),
            purple: dual.purple_count(),
            edges: dual.graph().edge_count(),
            betti: base.betti(),
            group_order: base.ggraph.group().order(),
            analysis,
        },
    };
    (report, problems, inconsistent)
}

fn verdict_lines(bounds: &BoundReport, out: &mut String) {
    for (t, v) in &bounds.verdicts {
        out.push_str(&format!("  {:<12} {v}\n", t.name()));
    }
}

fn ggraph_text(r: &GGraphReport, out: &mut String) {
    out.push_str(&format!("vertices: {}\ngroup order: {}\nbetti: {}\n", r.vertices, r.group_order, r.betti));
    out.push_str(&format!("rigidities: {}\n", r.rigidities.len()));
    for (i, rig) in r.rigidities.iter().enumerate() {
        out.push_str(&format!(
            "  [{i}] {{{}}} rigidifier order {}{} orbit {}\n",
            rig.vertices.join(", "),
            rig.rigidifier_order,
            if rig.singular { " singular" } else { "" },
            rig.orbit
        ));
    }
    out.push_str(&format!("orbits: {}\n", r.orbits.len()));
    match r.d {
        Some(d) => out.push_str(&format!("d: {d}\n")),
        None => out.push_str("d: none\n"),
    }
    out.push_str(&format!("fixed rigidities: {:?}\n", r.fixed_rigidities));
    out.push_str("bounds:\n");
    verdict_lines(&r.bounds, out);
}

fn text_report(report: &Report) -> String {
    let mut out = String::new();
    match report {
        Report::Ggraph { instance, report } => {
            out.push_str(&format!("G-graph {instance}\n"));
            ggraph_text(report, &mut out);
        }
        Report::Reduction { instance, report: r } => {
            out.push_str(&format!("reduction graph {instance}\n"));
            out.push_str(&format!("betti: {}\nbeta': {}\n", r.betti, r.beta_prime));
            out.push_str(&format!("components: {}\n", r.components.join(", ")));
            out.push_str(&format!("omega rat int: {}\n", r.omega_rat_int.join(", ")));
            for s in &r.omega_p {
                out.push_str(&format!("omega {:?}: {}\n", s.property, s.components.join(", ")));
            }
            match r.n {
                Some(n) => out.push_str(&format!("N: {n}\n")),
                None => out.push_str("N: cross-check failed\n"),
            }
            if let Some(sc) = &r.subcurves {
                out.push_str(&format!("rigidity subcurves: {}\n", sc.len()));
                for c in sc {
                    out.push_str(&format!(
                        "  {{{}}} label {}{}\n",
                        c.components.join(", "),
                        c.label,
                        if c.singular { " singular" } else { "" }
                    ));
                }
            }
            for nr in &r.nonrat {
                out.push_str(&format!(
                    "non-rational {:?}: shadow {} <= middle {} <= beta' + 1 = {}: {}\n",
                    nr.property,
                    nr.shadow,
                    nr.middle,
                    nr.beta_prime + 1,
                    nr.verdict
                ));
            }
            if let Some(m) = &r.monotone {
                out.push_str(&format!("betti monotone {} <= {}: {}\n", m.dst_betti, m.src_betti, m.verdict));
            }
            if let Some(g) = &r.genus {
                out.push_str(&format!(
                    "genus budget: betti-genus {}, rational {}, real {}\n",
                    g.betti_genus, g.rational, g.real
                ));
            }
            out.push_str(&format!("local square log2 bound: {} ({})\n", r.local_square.log2_bound, r.local_square.verdict));
            let b = &r.base_change;
            out.push_str(&format!(
                "base change: {} vertices ({} cyan, {} purple), {} edges, betti {}, group order {}\n",
                b.vertices, b.cyan, b.purple, b.edges, b.betti, b.group_order
            ));
            ggraph_text(&b.analysis, &mut out);
        }
    }
    out
}
