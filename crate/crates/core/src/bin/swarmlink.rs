fn main() {
    std::process::exit(swarmlink::cli::main(std::env::args_os()));
}
