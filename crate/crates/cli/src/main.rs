fn main() {
    std::process::exit(sdnlw_cli::run(std::env::args_os()));
}
