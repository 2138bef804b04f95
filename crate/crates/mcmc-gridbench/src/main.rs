fn main() {
    std::process::exit(mcmc_gridbench::cli::main_entry());
}
