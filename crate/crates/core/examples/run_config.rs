//! Runs an experiment config through the same pipeline as the binary and
//! lists the files it wrote.
//!
//! ```text
//! cargo run --example run_config -- configs/batch.json
//! ```

use std::path::PathBuf;

use mann_rates::cli::{exit_code, run_experiment, Overrides};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/minimal.json").into());
    let out = std::env::temp_dir().join("mann-rates-example");
    let overrides = Overrides {
        out_dir: Some(out.clone()),
        ..Overrides::default()
    };
    let result = run_experiment(PathBuf::from(&path).as_path(), &overrides);
    match &result {
        Ok(outcomes) => {
            for o in outcomes {
                match o {
                    Ok(a) => {
                        print!("{}", a.summary);
                        for f in [&a.trajectory_csv, &a.certificates_json].into_iter().flatten() {
                            println!("  wrote {}", f.display());
                        }
                        println!("  wrote {}", a.moduli_json.display());
                    }
                    Err(e) => eprintln!("{e}"),
                }
            }
        }
        Err(e) => eprintln!("{e}"),
    }
    println!("exit code {}", exit_code(&result));
}
