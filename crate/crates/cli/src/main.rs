fn main() {
    std::process::exit(skewspec_cli::run_command(std::env::args_os()));
}
