fn main() {
    std::process::exit(nsm_cli::main_with_args(std::env::args_os()));
}
