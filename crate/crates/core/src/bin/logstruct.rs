use clap::Parser;
use logstruct::cli::{run, RunOptions};

fn main() {
    let options = RunOptions::parse();
    std::process::exit(run(&options));
}
