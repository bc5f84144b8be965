fn main() {
    std::process::exit(p1nf::cli::run());
}
