use std::io;

use uniform_im::CompetitorRegistry;

fn main() {
    let registry = CompetitorRegistry::new();
    let code = uniform_im::cli::run(
        std::env::args_os(),
        &registry,
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    std::process::exit(code);
}
