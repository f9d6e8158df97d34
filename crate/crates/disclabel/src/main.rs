fn main() {
    std::process::exit(disclabel::cli::run());
}
