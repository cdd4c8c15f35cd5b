fn main() {
    std::process::exit(envt::cli::main_with_args(std::env::args_os()));
}
