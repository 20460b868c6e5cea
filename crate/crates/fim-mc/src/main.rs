fn main() {
    std::process::exit(fim_mc::cli::run(std::env::args()));
}
