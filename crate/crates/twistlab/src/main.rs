fn main() {
    std::process::exit(twistlab::cli::main_with_args(std::env::args_os()));
}
