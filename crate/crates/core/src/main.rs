fn main() {
    std::process::exit(bglasso::cli::main_with_args(std::env::args_os()));
}
