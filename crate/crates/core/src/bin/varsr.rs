fn main() {
    std::process::exit(varsr::cli::run(std::env::args_os()));
}
