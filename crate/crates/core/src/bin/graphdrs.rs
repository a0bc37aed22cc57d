fn main() {
    std::process::exit(graph_drs::cli::run_cli(std::env::args_os()));
}
