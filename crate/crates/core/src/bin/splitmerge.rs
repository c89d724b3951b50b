fn main() {
    std::process::exit(splitmerge::cli::main_with_args(std::env::args_os()));
}
