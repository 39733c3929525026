fn main() {
    std::process::exit(monomorse::cli::run(std::env::args_os()));
}
