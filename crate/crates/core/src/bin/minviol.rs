fn main() {
    std::process::exit(minviol::cli::run(std::env::args()));
}
