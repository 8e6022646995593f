fn main() {
    std::process::exit(oscillax_cli::run(std::env::args().collect()));
}
