fn main() {
    std::process::exit(flatweb::cli::main_with_args(std::env::args_os()));
}
