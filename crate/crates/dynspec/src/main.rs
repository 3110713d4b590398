fn main() {
    std::process::exit(dynspec::cli::run(std::env::args().collect()));
}
