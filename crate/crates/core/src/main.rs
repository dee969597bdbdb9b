fn main() {
    std::process::exit(definetti::cli::run_main());
}
