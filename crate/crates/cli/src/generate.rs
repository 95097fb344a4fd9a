use riglab::reduction::{random_reduction, RandomReductionParams};
use riglab::symmetry::{random_ggraph, RandomGGraphParams};

use crate::{to_json, GenerateArgs, InstanceKind, Outcome, EXIT_INVALID};

pub fn run(args: &GenerateArgs) -> Outcome {
    let json = match args.kind {
        InstanceKind::Ggraph => {
            let params = RandomGGraphParams {
                max_vertices: args.max_vertices as usize,
                max_group_order: args.max_group_order as usize,
                ..RandomGGraphParams::default()
            };
            random_ggraph(args.seed, &params).map(|gg| to_json(&gg.to_json())).map_err(|e| e.to_string())
        }
        InstanceKind::Reduction => {
            let params =
                RandomReductionParams { max_group_order: args.max_galois_order as usize, ..RandomReductionParams::default() };
            random_reduction(args.seed, &params).map(|rg| to_json(&rg.to_json())).map_err(|e| e.to_string())
        }
    };
    let json = match json {
        Ok(j) => j,
        Err(e) => return Outcome::fail(EXIT_INVALID, format!("error: {e}\n")),
    };
    match &args.out {
        Some(path) => match std::fs::write(path, &json) {
            Ok(()) => Outcome::ok(String::new()),
            Err(e) => Outcome::fail(crate::EXIT_IO, format!("error: cannot write {}: {e}\n", path.display())),
        },
        None => Outcome::ok(json),
    }
}
