fn main() {
    std::process::exit(occupancy_cli::run(std::env::args_os()));
}
