fn main() {
    std::process::exit(wrsk::cli::main_entry());
}
