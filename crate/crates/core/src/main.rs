fn main() {
    std::process::exit(pqm::cli::main());
}
