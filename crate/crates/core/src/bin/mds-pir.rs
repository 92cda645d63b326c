fn main() {
    std::process::exit(mds_pir::cli::main_with_args(std::env::args_os()));
}
