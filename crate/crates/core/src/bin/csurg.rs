fn main() {
    std::process::exit(contact_surgery::cli::run());
}
