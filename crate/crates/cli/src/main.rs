use latewalk::{config, runner};

fn main() {
    let code = match config::parse_config(std::env::args()) {
        Ok(cfg) => match runner::run(&cfg) {
            Ok(manifest) => {
                eprintln!(
                    "wrote {} output(s) and {} replica(s) under {:?}",
                    manifest.outputs.len(),
                    manifest.replicas.len(),
                    cfg.out
                );
                0
            }
            Err(err) => {
                eprintln!("{err}");
                err.exit_code()
            }
        },
        Err(err) => {
            eprintln!("{err}");
            err.exit_code()
        }
    };
    std::process::exit(code);
}
