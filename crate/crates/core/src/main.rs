fn main() {
    std::process::exit(irs_mas::cli::main_with_args(std::env::args_os()));
}
