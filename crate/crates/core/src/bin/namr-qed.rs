fn main() {
    std::process::exit(namr_qed::cli::run(std::env::args_os()));
}
