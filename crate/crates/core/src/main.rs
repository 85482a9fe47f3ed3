fn main() {
    std::process::exit(nss_gate::cli::run(std::env::args_os()));
}
