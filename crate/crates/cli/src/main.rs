fn main() {
    std::process::exit(dcfw_cli::run(std::env::args_os()));
}
