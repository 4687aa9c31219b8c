fn main() {
    std::process::exit(storyprobe::cli::run(std::env::args_os()));
}
