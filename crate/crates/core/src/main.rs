fn main() {
    std::process::exit(vofde::cli::main_with_args(std::env::args_os()));
}
