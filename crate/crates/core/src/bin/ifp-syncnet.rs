fn main() {
    std::process::exit(ifp_syncnet::cli::run(std::env::args_os()));
}
