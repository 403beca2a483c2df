fn main() {
    std::process::exit(expm_rt::cli::run_from_args(std::env::args_os()));
}
