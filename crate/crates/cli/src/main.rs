fn main() {
    std::process::exit(sdinc_cli::main_with(std::env::args_os()));
}
