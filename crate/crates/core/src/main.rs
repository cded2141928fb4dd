fn main() {
    std::process::exit(potts_sd::cli::main_with_args(std::env::args_os()));
}
