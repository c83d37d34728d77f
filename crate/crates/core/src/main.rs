fn main() {
    std::process::exit(finpop::cli::main_with_args(std::env::args_os()));
}
