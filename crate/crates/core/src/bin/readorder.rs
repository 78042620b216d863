fn main() {
    if let Err(err) = readorder::cli::run(std::env::args_os()) {
        if let Some(clap_err) = err.downcast_ref::<clap::Error>() {
            clap_err.exit();
        }
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
