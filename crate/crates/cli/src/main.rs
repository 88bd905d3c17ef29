fn main() {
    std::process::exit(gass_cli::run(std::env::args_os()));
}
