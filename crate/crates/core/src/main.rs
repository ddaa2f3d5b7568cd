fn main() {
    std::process::exit(shorsim::cli::main());
}
