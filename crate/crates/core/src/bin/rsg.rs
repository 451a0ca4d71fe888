fn main() {
    std::process::exit(renyi_semigroups::cli::main_from_env());
}
