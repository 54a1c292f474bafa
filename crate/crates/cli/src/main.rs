fn main() {
    std::process::exit(tdaguard_cli::run(std::env::args_os()));
}
