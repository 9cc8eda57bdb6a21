fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(spinsim_cli::cli::cli_main(&args));
}
