fn main() {
    std::process::exit(shiftheat::cli::run(std::env::args()));
}
