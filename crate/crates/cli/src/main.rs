use clap::Parser;
use skewricci_cli::{emit_report, listing, run_suite, Format, SuiteConfig};

/// Pointwise verification suites for Ricci-skew surface connections and
/// their Riemann-extension Walker four-manifolds.
#[derive(Parser)]
#[command(name = "skewricci", version, about)]
struct Args {
    /// Suite to run: rsts-core, killing, riemann-ext, petrov, quintuple,
    /// moduli, special, all
    #[arg(long, default_value = "all")]
    suite: String,

    /// Sample points per check
    #[arg(long, default_value_t = 100)]
    samples: usize,

    /// PRNG seed; reports are byte-identical for a fixed seed and config
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Tolerance override, repeatable: `--tol <check-id>=<value>`
    #[arg(long, value_name = "ID=VALUE")]
    tol: Vec<String>,

    /// Output format: json or text
    #[arg(long, default_value = "text")]
    format: String,

    /// Restrict the catalog, repeatable: --catalog nabla_ab:1,0
    #[arg(long)]
    catalog: Vec<String>,

    /// List suites and catalog ids, then exit
    #[arg(long)]
    list: bool,

    /// Zero out the wall-time field for byte-comparable reports
    #[arg(long)]
    stable_output: bool,
}

fn main() {
    let args = Args::parse();
    if args.list {
        print!("{}", listing());
        std::process::exit(0);
    }
    let format = match args.format.as_str() {
        "json" => Format::Json,
        "text" => Format::Text,
        other => {
            eprintln!("unknown format `{other}` (expected json or text)");
            std::process::exit(2);
        }
    };
    let mut cfg = SuiteConfig::new(&args.suite);
    cfg.samples = args.samples;
    cfg.seed = args.seed;
    cfg.stable_output = args.stable_output;
    if !args.catalog.is_empty() {
        cfg.catalog = args.catalog.clone();
    }
    for t in &args.tol {
        match t.split_once('=') {
            Some((id, v)) => match v.parse::<f64>() {
                Ok(val) => {
                    cfg.tol.insert(id.to_string(), val);
                }
                Err(_) => {
                    eprintln!("bad tolerance value in `{t}`");
                    std::process::exit(2);
                }
            },
            None => {
                eprintln!("bad --tol argument `{t}` (expected ID=VALUE)");
                std::process::exit(2);
            }
        }
    }
    match run_suite(&cfg) {
        Ok(report) => {
            println!("{}", emit_report(&report, format));
            std::process::exit(if report.all_pass() { 0 } else { 1 });
        }
        Err(e) => {
            eprintln!("configuration error: {e}");
            std::process::exit(2);
        }
    }
}
