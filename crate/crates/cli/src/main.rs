fn main() {
    std::process::exit(weightflow_cli::main_with_args(std::env::args_os()));
}
