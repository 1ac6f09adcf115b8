fn main() {
    std::process::exit(uca::cli::main());
}
