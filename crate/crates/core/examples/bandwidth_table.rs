//! Chunk-size search per sender rate, printed as the bandwidth table.

use fedrdma::bench::{run_preset, Preset};

fn main() {
    let table = run_preset(Preset::TableBandwidth, 0).unwrap();
    print!("{}", table.to_csv().unwrap());
}
