fn main() {
    std::process::exit(vsl_cli::main_with_args(std::env::args_os()));
}
