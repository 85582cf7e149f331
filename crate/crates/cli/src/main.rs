fn main() {
    std::process::exit(osm_cli::run(std::env::args_os()));
}
