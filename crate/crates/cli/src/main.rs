fn main() {
    std::process::exit(igeo_cli::run());
}
