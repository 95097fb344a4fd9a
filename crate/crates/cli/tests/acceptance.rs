//! Acceptance suite: one PASS/FAIL line per criterion. Every number is
//! re-derived here from brute-force oracles rather than taken from the
//! library's own reports.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::Instant;

use riglab::oracle::rigidities_all_subgroups;
use riglab::pfister::{
    index_bound, local_square_bound, nonreal_witness_count, optimal_witness_count, rho_upper_bound, CurveDescriptor,
};
use riglab::reduction::{random_reduction, FieldProperty, LabelMatch, RandomReductionParams, ReductionGraph};
use riglab::symmetry::{
    actions, check_betti_epimorphism_idx, enumerate_graphs, random_ggraph, Enumeration, RandomGGraphParams,
};
use riglab::{GGraph, PermGroup};

type Outcome = Result<String, String>;

/// Rigidities with their orbits under every group element, from the oracle.
struct OracleRigidities {
    rigidities: Vec<(Vec<usize>, PermGroup, bool)>,
    /// Orbit id per rigidity.
    orbit: Vec<usize>,
    orbit_count: usize,
}

impl OracleRigidities {
    fn of(gg: &GGraph) -> Self {
        let rigidities = rigidities_all_subgroups(gg);
        let sets: Vec<BTreeSet<usize>> = rigidities.iter().map(|r| r.0.iter().copied().collect()).collect();
        let mut orbit = vec![usize::MAX; rigidities.len()];
        let mut orbit_count = 0;
        for i in 0..rigidities.len() {
            if orbit[i] != usize::MAX {
                continue;
            }
            for g in gg.group().elements() {
                let image: BTreeSet<usize> = sets[i].iter().map(|&v| g.apply(v)).collect();
                let j = sets.iter().position(|s| *s == image).expect("image of a rigidity is a rigidity");
                orbit[j] = orbit_count;
            }
            orbit_count += 1;
        }
        Self { rigidities, orbit, orbit_count }
    }

    fn orbit_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.orbit_count];
        for &o in &self.orbit {
            sizes[o] += 1;
        }
        sizes
    }
}

/// The five bounds, evaluated directly from oracle data.
fn oracle_bounds(gg: &GGraph) -> Result<(), String> {
    let o = OracleRigidities::of(gg);
    let count = o.rigidities.len() as i64;
    let beta = gg.graph().betti() as i64;
    let sizes = o.orbit_sizes();
    let orbits = sizes.len() as i64;
    let fixed = sizes.iter().filter(|&&s| s == 1).count() as i64;
    if beta == 0 && count > 1 {
        return Err(format!("tree bound: {count} rigidities"));
    }
    if fixed > 0 && count > beta + 1 {
        return Err(format!("fixpoint bound: {count} > {}", beta + 1));
    }
    for v in 0..gg.graph().vertex_count() {
        let orbit: BTreeSet<usize> = gg.group().elements().iter().map(|g| g.apply(v)).collect();
        let avoiding = o.rigidities.iter().filter(|r| r.0.iter().all(|w| !orbit.contains(w))).count() as i64;
        if avoiding > beta + orbit.len() as i64 - 1 {
            return Err(format!("orbit-avoid bound at vertex {v}: {avoiding}"));
        }
    }
    if let Some(&d) = sizes.iter().min() {
        let d = d as i64;
        if count > beta + 2 * d - 1 || d * orbits > beta - 1 + 2 * d {
            return Err(format!("main bound: count {count}, orbits {orbits}, d {d}, beta {beta}"));
        }
    }
    if orbits > beta + 1 {
        return Err(format!("corollary: {orbits} orbits > {}", beta + 1));
    }
    if orbits == beta + 1 && !(fixed == orbits || (beta == 1 && fixed == 0)) {
        return Err(format!("corollary equality case: {orbits} orbits, {fixed} fixed, beta {beta}"));
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    let args = riglab_cli::VerifyArgs {
        exhaustive: Some(6),
        max_mult: 2,
        order_cap: 48,
        raw: false,
        random: None,
        seed: None,
        max_vertices: 10,
        max_group_order: 24,
        max_galois_order: 12,
        theorems: None,
        report: None,
        jobs: 0,
        format: riglab_cli::Format::Json,
        mutant: None,
    };
    let report = riglab_cli::verify(&args)?;
    let suite = report.exhaustive.as_ref().ok_or("no exhaustive suite")?;
    if !report.violations.is_empty() {
        return Err(format!("{} violations, first {:?}", report.violations.len(), report.violations[0].problems));
    }
    if suite.verdicts.values().any(|t| t.violated > 0) {
        return Err("violated tally".into());
    }
    // Independent pass over the same instances with the oracle.
    let mut instances = 0u64;
    for n in 1..=6 {
        for g in enumerate_graphs(n, 2, Enumeration::Classes, true) {
            for h in actions(&g, 48).map_err(|e| e.to_string())? {
                let gg = GGraph::new(g.clone(), h).map_err(|e| e.to_string())?;
                oracle_bounds(&gg).map_err(|e| format!("{e} on {}", serde_json::to_string(&gg.to_json()).unwrap()))?;
                instances += 1;
            }
        }
    }
    if instances != suite.instances {
        return Err(format!("oracle saw {instances} instances, verify saw {}", suite.instances));
    }
    Ok(format!(
        "{} graph classes, {instances} G-graphs, 0 violations, tightness witnessed for {} theorems",
        suite.graphs,
        suite.tight_witnesses.len()
    ))
}

fn criterion_2() -> Outcome {
    let params = RandomGGraphParams { max_vertices: 10, max_group_order: 24, ..RandomGGraphParams::default() };
    let mut rigidities = 0usize;
    for seed in 0..10_000u64 {
        let gg = random_ggraph(seed, &params).map_err(|e| e.to_string())?;
        if gg.graph().vertex_count() > 10 || gg.group().order() > 24 {
            return Err(format!("seed {seed} exceeds caps"));
        }
        let fast: Vec<_> = gg.rigidities().into_iter().map(|r| (r.vertices, r.rigidifier, r.singular)).collect();
        let oracle = rigidities_all_subgroups(&gg);
        if fast != oracle {
            return Err(format!("seed {seed}: {} vs {} rigidities", fast.len(), oracle.len()));
        }
        rigidities += oracle.len();
    }
    Ok(format!("10000 seeds, {rigidities} rigidities, exact equality"))
}

fn reductions() -> Result<Vec<ReductionGraph>, String> {
    let params = RandomReductionParams { max_group_order: 12, ..RandomReductionParams::default() };
    (0..2000u64).map(|s| random_reduction(s, &params).map_err(|e| format!("seed {s}: {e}"))).collect()
}

/// `|Ω ∖ Ω^rat_int|` straight from the labels.
fn non_rat_int(rg: &ReductionGraph) -> BTreeSet<usize> {
    (0..rg.components().len())
        .filter(|&c| {
            !rg.intersections()
                .iter()
                .any(|p| (p.between.0 == c || p.between.1 == c) && p.residue == rg.components()[c].stab)
        })
        .collect()
}

fn criterion_3(batch: &[ReductionGraph]) -> Outcome {
    for (s, rg) in batch.iter().enumerate() {
        if rg.galois().group().order() > 12 {
            return Err(format!("seed {s}: group order {}", rg.galois().group().order()));
        }
        let base = rg.base_change();
        let o = OracleRigidities::of(&base.ggraph);
        let singular_cyan: BTreeSet<usize> = o
            .rigidities
            .iter()
            .zip(&o.orbit)
            .filter(|(r, _)| r.2 && base.dual.is_cyan(r.0[0]))
            .map(|(_, &orbit)| orbit)
            .collect();
        let expected = non_rat_int(rg).len();
        if singular_cyan.len() != expected {
            return Err(format!("seed {s}: {} singular cyan orbits, {expected} from labels", singular_cyan.len()));
        }
        let lib = rg.singular_rigidity_orbit_count().map_err(|e| format!("seed {s}: {e}"))?;
        if lib != expected {
            return Err(format!("seed {s}: library N = {lib}, oracle {expected}"));
        }
    }
    Ok(format!("{} reduction graphs, exact equality", batch.len()))
}

fn criterion_4(batch: &[ReductionGraph]) -> Outcome {
    let mut non_singular = 0;
    for (s, rg) in batch.iter().enumerate() {
        let base = rg.base_change();
        let o = OracleRigidities::of(&base.ggraph);
        let singular_orbits: BTreeSet<usize> =
            o.rigidities.iter().zip(&o.orbit).filter(|(r, _)| r.2).map(|(_, &orbit)| orbit).collect();
        for matching in [LabelMatch::Exact, LabelMatch::Conjugate] {
            let subcurves = rg.rigidity_subcurves(matching);
            let singletons = subcurves.iter().filter(|c| c.components.len() == 1).count();
            if subcurves.len() != o.orbit_count || singletons != singular_orbits.len() {
                return Err(format!(
                    "seed {s} ({matching:?}): {} subcurves ({singletons} singletons) vs {} orbits ({} singular)",
                    subcurves.len(),
                    o.orbit_count,
                    singular_orbits.len()
                ));
            }
            if subcurves.iter().any(|c| c.singular != (c.components.len() == 1)) {
                return Err(format!("seed {s}: singular flag disagrees with irreducibility"));
            }
        }
        non_singular += o.orbit_count - singular_orbits.len();
    }
    Ok(format!("{} reduction graphs, exact equality, {non_singular} non-singular orbits", batch.len()))
}

fn criterion_5(batch: &[ReductionGraph]) -> Outcome {
    let mut strict = 0;
    for (s, rg) in batch.iter().enumerate() {
        let base = rg.base_change();
        let report = check_betti_epimorphism_idx(&base.dual, rg.dual(), &base.projection).map_err(|e| format!("seed {s}: {e}"))?;
        let gal = rg.galois();
        for c in rg.components() {
            if report.e_cyan.get(&c.id) != Some(&gal.index(c.stab)) {
                return Err(format!("seed {s}: e_{} is {:?}, index {}", c.id, report.e_cyan.get(&c.id), gal.index(c.stab)));
            }
        }
        for p in rg.intersections() {
            if report.i_purple.get(&p.id) != Some(&gal.index(p.residue)) {
                return Err(format!("seed {s}: i_{} disagrees with the residue index", p.id));
            }
        }
        let (b, bp) = (rg.dual().graph().betti(), base.dual.graph().betti());
        if b > bp || report.verdict.is_violated() {
            return Err(format!("seed {s}: beta {b} > beta' {bp}"));
        }
        strict += (b < bp) as usize;
    }
    Ok(format!("{} reduction graphs, 0 violations, {strict} strict", batch.len()))
}

fn criterion_6(batch: &[ReductionGraph]) -> Outcome {
    let (mut with_i, mut with_ii) = (0, 0);
    for (s, rg) in batch.iter().enumerate() {
        let beta_prime = rg.base_change().dual.graph().betti() as usize;
        let non_rat = non_rat_int(rg);
        for property in FieldProperty::ALL {
            let omega_p: BTreeSet<usize> = (0..rg.components().len())
                .filter(|&c| rg.components()[c].point_fields.iter().all(|&f| property.holds(rg.galois(), f)))
                .collect();
            let middle = omega_p.intersection(&non_rat).count();
            if middle > beta_prime + 1 {
                return Err(format!("seed {s} {property:?}: {middle} > {}", beta_prime + 1));
            }
            let r = rg.check_nonrat_bound(property);
            if r.middle != middle || r.beta_prime as usize != beta_prime || r.verdict.is_violated() {
                return Err(format!("seed {s} {property:?}: library {r:?}, oracle middle {middle}"));
            }
            if r.hypothesis_i.is_some() {
                with_i += 1;
                if r.shadow >= middle {
                    return Err(format!("seed {s}: (i) detected but {} >= {middle}", r.shadow));
                }
            }
            if r.hypothesis_ii.is_some() {
                with_ii += 1;
                if middle > beta_prime {
                    return Err(format!("seed {s}: (ii) detected but {middle} >= {}", beta_prime + 1));
                }
            }
        }
    }
    Ok(format!("{} reduction graphs x 2 properties, 0 violations, strict (i) {with_i}, strict (ii) {with_ii}", batch.len()))
}

fn criterion_7() -> Outcome {
    for n in 0..=50u32 {
        for g in 0..=50u32 {
            let (n64, g64) = (n as u64, g as u64);
            let real = rho_upper_bound(CurveDescriptor { n, genus: g, real: true }, 1).value;
            let nonreal = rho_upper_bound(CurveDescriptor { n, genus: g, real: false }, 1).value;
            if real != n64 * g64 || nonreal != n64 * (g64 + 1) {
                return Err(format!("rho at n={n} g={g}: {real}, {nonreal}"));
            }
            let ir = index_bound(CurveDescriptor { n, genus: g, real: true });
            let inr = index_bound(CurveDescriptor { n, genus: g, real: false });
            if ir.exponent != n64 * g64 || inr.exponent != n64 * (g64 + 1) {
                return Err(format!("index at n={n} g={g}"));
            }
            if let Some(v) = inr.value() {
                if v != 1u128 << (n64 * (g64 + 1)) {
                    return Err(format!("index value at n={n} g={g}"));
                }
            }
            if optimal_witness_count(g, n).0 != n64 * g64 || nonreal_witness_count(g, n) != n64 * (g64 + 1) {
                return Err(format!("witness counts at n={n} g={g}"));
            }
        }
    }
    Ok("all 0 <= n, g <= 50 match n*g and n*(g+1), indices and witness counts exact".into())
}

fn criterion_8(batch: &[ReductionGraph]) -> Outcome {
    let mut declared = 0;
    for (s, rg) in batch.iter().enumerate() {
        let beta_prime = rg.base_change().dual.graph().betti();
        let r = local_square_bound(rg);
        if r.log2_bound != beta_prime {
            return Err(format!("seed {s}: returned {} but beta' = {beta_prime}", r.log2_bound));
        }
        if let Some(d) = rg.declared() {
            declared += 1;
            let sigma: u64 = rg.components().iter().map(|c| rg.galois().index(c.stab) * c.genus).sum();
            if beta_prime as i64 > d.g_f as i64 - sigma as i64 || r.verdict.is_violated() {
                return Err(format!("seed {s}: beta' {beta_prime} > g_F {} - {sigma}", d.g_f));
            }
        }
    }
    Ok(format!("{} reduction graphs, {declared} with declared genus, 0 violations", batch.len()))
}

fn criterion_9() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_riglab");
    let dir = std::env::temp_dir().join(format!("riglab-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (i, jobs) in ["1", "1", "4"].iter().enumerate() {
        let report = dir.join(format!("report{i}.json"));
        let out = Command::new(bin)
            .args(["verify", "--exhaustive", "4", "--random", "2000", "--seed", "7", "--jobs", jobs, "--report"])
            .arg(&report)
            .output()
            .map_err(|e| e.to_string())?;
        if out.status.code() != Some(0) {
            return Err(format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
        }
        let file = std::fs::read(&report).map_err(|e| e.to_string())?;
        outputs.push((out.stdout, file));
    }
    std::fs::remove_dir_all(&dir).ok();
    if outputs.windows(2).any(|w| w[0] != w[1]) {
        return Err("reports differ between runs".into());
    }
    Ok(format!("3 runs (jobs 1, 1, 4), byte-identical {}-byte reports", outputs[0].0.len()))
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() {
    let batch = reductions();
    let batched = |f: fn(&[ReductionGraph]) -> Outcome| -> Outcome {
        match &batch {
            Ok(b) => f(b),
            Err(e) => Err(e.clone()),
        }
    };
    let criteria: Vec<Criterion> = vec![
        ("exhaustive symmetry bounds", Box::new(criterion_1)),
        ("rigidity oracle equivalence", Box::new(criterion_2)),
        ("singular cyan orbit count", Box::new(move || batched(criterion_3))),
        ("rigidity subcurve bijection", Box::new(move || batched(criterion_4))),
        ("betti monotonicity", Box::new(move || batched(criterion_5))),
        ("non-rational component bound", Box::new(move || batched(criterion_6))),
        ("pfister closed forms", Box::new(criterion_7)),
        ("local-square bound", Box::new(move || batched(criterion_8))),
        ("determinism", Box::new(criterion_9)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {} PASS {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
