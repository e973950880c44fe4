fn main() {
    std::process::exit(coopsense_lab::cli::main_with_args(std::env::args_os()));
}
