fn main() {
    std::process::exit(gilbert_tess::cli::main_with_args(std::env::args_os()));
}
