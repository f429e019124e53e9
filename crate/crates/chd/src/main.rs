fn main() {
    std::process::exit(chd::cli::run(std::env::args()));
}
