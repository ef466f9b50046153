fn main() {
    std::process::exit(minimax_cli::main_with_args(std::env::args_os()));
}
