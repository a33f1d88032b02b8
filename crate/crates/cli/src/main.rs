use clap::Parser;

fn main() {
    let cli = entsearch_cli::Cli::parse();
    let code = match entsearch_cli::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("entsearch: {e}");
            e.code
        }
    };
    std::process::exit(code);
}
