fn main() {
    std::process::exit(offsim::run());
}
