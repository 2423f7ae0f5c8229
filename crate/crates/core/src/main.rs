fn main() {
    std::process::exit(ringbench_core::cli::run(std::env::args_os()));
}
