fn main() { std::process::exit(monosynth::cli::run(std::env::args().skip(1).collect())); }
