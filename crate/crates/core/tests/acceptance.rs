//! One line per acceptance criterion. Known-false checks are shown but only fail the run with `--include-ignored`.

use adq_core::verify;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        for name in verify::suite_names() {
            println!("{name}: test");
        }
        return;
    }
    let strict = args.iter().any(|a| a == "--include-ignored" || a == "--ignored");
    let filter = args.iter().find(|a| !a.starts_with('-')).map(String::as_str);

    let results = verify::run(filter);
    let mut failed = 0;
    for r in &results {
        println!("{}", r.line());
        if r.counts_as_failure() || (strict && !r.passed) {
            failed += 1;
        }
    }
    let known = results.iter().filter(|r| r.known_false && !r.passed).count();
    println!(
        "\nacceptance: {} checks, {} passed, {} known-false, {} failing",
        results.len(),
        results.iter().filter(|r| r.passed).count(),
        known,
        failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
