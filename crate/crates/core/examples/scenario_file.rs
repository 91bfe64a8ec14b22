//! Parse a scenario file, run it, and print the CSV report. Pass a path to
//! run your own file instead of the built-in one.

use fedrdma::bench::{load_scenarios, parse_scenarios, rows_to_csv, run_scenarios};

const BUILT_IN: &str = r#"
[[scenario]]
id = "chunk-sweep"
path = { sender_rate = 10e9 }
transport = { kind = "FedRdmaE" }
workload = { sweep = { axis = "base_chunk_size", values = [1e6, 2e6, 4e6, 8e6], data_bytes = 1_000_000_000 } }

[[scenario]]
id = "lossy-v1"
repetitions = 3
loss_probability = 1e-5
transport = { kind = "FedRdmaV1" }
workload = { single_blob = { data_bytes = 100_000_000 } }
"#;

fn main() {
    let scenarios = match std::env::args().nth(1) {
        Some(p) => load_scenarios(p.as_ref()),
        None => parse_scenarios(BUILT_IN),
    }
    .unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(2)
    });
    let rows = run_scenarios(&scenarios, Some(1)).unwrap();
    print!("{}", rows_to_csv(&rows).unwrap());
}
