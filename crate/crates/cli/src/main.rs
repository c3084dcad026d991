fn main() {
    std::process::exit(mvnlock_cli::run(std::env::args_os()));
}
