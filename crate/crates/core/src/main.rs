fn main() {
    std::process::exit(toral_discrepancy::cli::main_with_args(std::env::args().collect()));
}
