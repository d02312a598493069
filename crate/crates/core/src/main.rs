fn main() {
    std::process::exit(rmtlab::cli::main(std::env::args_os()));
}
