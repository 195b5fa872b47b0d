fn main() {
    std::process::exit(htlab::xlab::cli::run_cli(std::env::args_os()));
}
