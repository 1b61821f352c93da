use clap::Parser;

fn main() {
    let cli = linkscope_cli::Cli::parse();
    match linkscope_cli::run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(linkscope_cli::exit_code_for_error(&e));
        }
    }
}
