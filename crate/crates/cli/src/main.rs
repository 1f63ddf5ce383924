fn main() {
    std::process::exit(tpldca_cli::run(std::env::args_os()));
}
