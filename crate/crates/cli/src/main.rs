fn main() {
    std::process::exit(hotspot_cli::run_cli(std::env::args_os()));
}
