fn main() {
    eprintln!("chm: subcommands arrive with the library modules");
    std::process::exit(64);
}
