fn main() {
    std::process::exit(filtered_spectra::cli::run(std::env::args_os()));
}
