fn main() {
    std::process::exit(rgg_mst::experiments::cli::cli_main(std::env::args_os()));
}
