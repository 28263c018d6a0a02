fn main() {
    std::process::exit(phasebound::cli::main_with_args(std::env::args_os()));
}
