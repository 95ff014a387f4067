fn main() {
    std::process::exit(kellyclock_cli::main_with_args(std::env::args_os()));
}
