fn main() {
    std::process::exit(egedyn::cli::main());
}
