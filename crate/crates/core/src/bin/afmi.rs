fn main() {
    std::process::exit(afmi_core::cli::run(std::env::args_os()));
}
