//! Drive the command line from code: an interrupted run, then a resume.

use rmtlab::cli;

fn main() {
    let out = tempfile::tempdir().expect("temp dir");
    let out_dir = out.path().to_str().unwrap();
    let run = ["rmtlab", "run", "tail", "-n", "20", "--trials", "10000", "--out", out_dir, "--run-id", "demo"];

    let mut partial = run.to_vec();
    partial.extend(["--stop-after", "2"]);
    println!("exit {}", cli::main(partial));

    let manifest = out.path().join("demo/manifest.json");
    println!("exit {}", cli::main(["rmtlab", "resume", manifest.to_str().unwrap()]));
    println!("exit {}", cli::main(run));

    let tail = std::fs::read_to_string(out.path().join("demo/tail.csv")).unwrap();
    println!("\n{tail}");
}
