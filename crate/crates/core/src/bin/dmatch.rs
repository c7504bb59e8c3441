fn main() {
    std::process::exit(decomposable_matching::cli::run_cli());
}
