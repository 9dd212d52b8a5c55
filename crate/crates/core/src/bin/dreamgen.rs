fn main() {
    std::process::exit(dreamgen::cli::run(std::env::args()));
}
