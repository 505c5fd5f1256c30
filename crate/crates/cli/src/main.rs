fn main() {
    std::process::exit(relmine_cli::run(std::env::args_os()));
}
