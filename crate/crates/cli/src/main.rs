fn main() {
    std::process::exit(kpplab::run(std::env::args_os()));
}
