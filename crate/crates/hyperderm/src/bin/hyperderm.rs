fn main() {
    std::process::exit(hyperderm::cli::run());
}
