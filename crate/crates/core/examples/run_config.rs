// Running a TOML experiment from code, the way the command line does.

use ergolab::runner::{execute, parse_config, validate};

const CONFIG: &str = r#"
kind = "cone-check"
seed = 1

[scheme]
family = "expsqrt"
n_max = 200

[cone]
per_decade = 32
"#;

pub fn run_example() -> ergolab::Result<()> {
    let config = parse_config(CONFIG)?;
    assert!(validate(&config).is_empty());
    for artifact in execute(&config)? {
        let text = String::from_utf8_lossy(&artifact.bytes);
        let head: Vec<&str> = text.lines().take(4).collect();
        println!("{} ({} bytes, sha256 {}):", artifact.suffix, artifact.bytes.len(), &artifact.sha256()[..12]);
        for line in head {
            println!("  {line}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ergolab::Result<()> {
    run_example()
}
