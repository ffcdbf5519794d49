fn main() {
    std::process::exit(hazardsim::cli::main_with_args(std::env::args_os()));
}
