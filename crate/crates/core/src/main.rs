fn main() {
    std::process::exit(glyphdiff::cli::dispatch(std::env::args().collect()));
}
