fn main() {
    std::process::exit(qcldpc::cli::run(std::env::args()));
}
