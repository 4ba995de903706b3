fn main() {
    std::process::exit(latwh::cli::run(std::env::args().collect()));
}
