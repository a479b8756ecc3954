fn main() {
    std::process::exit(hessma::cli::run(std::env::args_os()));
}
