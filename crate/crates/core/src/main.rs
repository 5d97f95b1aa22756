fn main() {
    std::process::exit(graphprobe::cli::main_with_args(std::env::args_os()));
}
