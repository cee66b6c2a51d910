fn main() {
    let (code, out, err) = tn_cli::execute(std::env::args_os());
    print!("{out}");
    eprint!("{err}");
    std::process::exit(code);
}
