fn main() {
    std::process::exit(evtaug::cli::run(std::env::args_os()));
}
