fn main() {
    std::process::exit(grin_coherence::cli::run(std::env::args_os()));
}
