use serde::Serialize;

use riglab::pfister::{
    index_bound, nonreal_witness_count, optimal_witness_count, rho_upper_bound, CurveDescriptor, PowerOfTwo, TraceStep,
    WitnessNode,
};

use crate::{to_json, BoundsArgs, Format, Outcome};

#[derive(Serialize)]
struct Witness {
    count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    tree: Option<WitnessNode>,
}

#[derive(Serialize)]
struct BoundsReport {
    curve: CurveDescriptor,
    ell: u32,
    rho: u64,
    optimal: bool,
    index: PowerOfTwo,
    #[serde(skip_serializing_if = "Option::is_none")]
    index_value: Option<String>,
    summary: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<TraceStep>>,
}

pub fn run(args: &BoundsArgs) -> Outcome {
    let curve = CurveDescriptor { n: args.n, genus: args.genus, real: args.real };
    let bound = rho_upper_bound(curve, args.ell);
    let index = if args.ell == 1 {
        index_bound(curve)
    } else {
        PowerOfTwo { exponent: bound.value }
    };
    let summary = format!("rho_{} <= {}, index <= {}", args.ell, bound.value, index);
    let witness = args.witness.then(|| {
        if curve.real {
            let (count, tree) = optimal_witness_count(args.genus, args.n);
            Witness { count, tree: Some(tree.root) }
        } else {
            Witness { count: nonreal_witness_count(args.genus, args.n), tree: None }
        }
    });
    let report = BoundsReport {
        curve,
        ell: args.ell,
        rho: bound.value,
        optimal: bound.optimal,
        index,
        index_value: index.value().map(|v| v.to_string()),
        summary,
        witness,
        trace: args.trace.then_some(bound.trace),
    };
    let out = match args.format {
        Format::Json => to_json(&report),
        Format::Text => text(&report, args.index),
    };
    Outcome::ok(out)
}

fn text(r: &BoundsReport, index_only: bool) -> String {
    if index_only {
        return format!("{}\n", r.index);
    }
    let mut out = format!("{}\n", r.summary);
    if !r.optimal {
        out.push_str("optimality not established for this ell\n");
    }
    if let Some(w) = &r.witness {
        out.push_str(&format!("witnesses: {}\n", w.count));
        if let Some(tree) = &w.tree {
            tree_lines(tree, 0, &mut out);
        }
    }
    if let Some(trace) = &r.trace {
        for step in trace {
            match step {
                TraceStep::Base => out.push_str("rank 0: rho = 0\n"),
                TraceStep::Rank { rank, induction, entries, lifted, value, .. } => out.push_str(&format!(
                    "rank {rank}: {} valuations at level 2^ell, residue bound {induction}, lifted {lifted}, total {value}\n",
                    entries.len()
                )),
            }
        }
    }
    out
}

fn tree_lines(node: &WitnessNode, depth: usize, out: &mut String) {
    let level = node.residue_level.map(|s| format!(", residue level {s}")).unwrap_or_default();
    out.push_str(&format!("{}{} (rank {}{level})\n", "  ".repeat(depth), node.label, node.rank));
    for child in &node.children {
        tree_lines(child, depth + 1, out);
    }
}
