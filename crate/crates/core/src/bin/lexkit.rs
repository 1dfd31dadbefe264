use std::io;

fn main() {
    let status = lexkit::cli::run(
        std::env::args_os().skip(1),
        &mut io::stdin().lock(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    std::process::exit(status.code());
}
