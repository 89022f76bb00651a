fn main() {
    std::process::exit(foukit::cli::main_with_args(std::env::args_os()));
}
