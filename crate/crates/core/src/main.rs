fn main() {
    std::process::exit(contourmap::cli::main_with_args(std::env::args_os()));
}
