fn main() {
    std::process::exit(movelike::cli::main_with_args(std::env::args_os()));
}
