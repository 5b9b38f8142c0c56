fn main() {
    std::process::exit(cstar_rank::cli::main_with_args(std::env::args_os()));
}
