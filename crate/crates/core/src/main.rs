fn main() {
    std::process::exit(rg_spectra::cli::run(std::env::args_os()));
}
