fn main() {
    std::process::exit(framegen::cli::main());
}
