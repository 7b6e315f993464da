fn main() {
    std::process::exit(qrbsde_cli::run(std::env::args_os()));
}
