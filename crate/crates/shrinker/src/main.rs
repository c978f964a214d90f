use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::Parser;

use shrinker::audit::soundness_audit;
use shrinker::bk::{infer_types, parse_bk, parse_types};
use shrinker::discover::{find_unsat_impli, Budget};
use shrinker::emit::{emit_asp, emit_json};
use shrinker::property::Property;
use shrinker::recall::compute_recalls;
use shrinker::total::find_total_facts;

/// Discover pointless-rule properties of a Datalog fact base and emit them as
/// hypothesis-space pruning constraints.
#[derive(Parser, Debug)]
#[command(name = "shrinker", version)]
struct Args {
    /// Fact base: ground facts, one per line, `pred(c1,...,cn).`
    bk_file: PathBuf,

    /// Optional type declarations, `type(pred, index, type_name).`
    #[arg(long)]
    types: Option<PathBuf>,

    /// Maximum literals per template
    #[arg(long, default_value_t = 3)]
    max_literals: usize,

    /// Maximum first-order variables per template
    #[arg(long, default_value_t = 6)]
    max_vars: usize,

    /// Templates tested per batch
    #[arg(long, default_value_t = 1000)]
    batch_size: usize,

    /// Wall-clock budget for discovery, in seconds
    #[arg(long, conflicts_with = "budget_batches")]
    timeout: Option<u64>,

    /// Deterministic batch-count budget (alternative to --timeout)
    #[arg(long)]
    budget_batches: Option<usize>,

    /// Recall bounds above this are reported in JSON but not emitted as ASP
    #[arg(long, default_value_t = 3)]
    recall_cap: usize,

    /// Output stem; writes <stem>.shrink.lp and <stem>.shrink.json
    #[arg(long)]
    out: Option<PathBuf>,

    /// Brute-force audit of the emitted constraints; writes <stem>.audit.json
    #[arg(long)]
    audit: bool,

    /// Maximum body literals of audited rules
    #[arg(long, default_value_t = 3)]
    audit_max_body: usize,

    /// Maximum variables of audited rules
    #[arg(long, default_value_t = 4)]
    audit_max_vars: usize,

    /// Seed recorded alongside audit output for reproducibility bookkeeping
    #[arg(long)]
    seed: Option<u64>,
}

fn run(args: &Args) -> Result<bool, String> {
    let text = std::fs::read_to_string(&args.bk_file)
        .map_err(|e| format!("{}: {e}", args.bk_file.display()))?;
    let fb = parse_bk(&text).map_err(|e| format!("{}: {e}", args.bk_file.display()))?;
    let decls = match &args.types {
        Some(path) => {
            let t = std::fs::read_to_string(path)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            parse_types(&t).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => Vec::new(),
    };
    let types = infer_types(&fb, &decls).map_err(|e| e.to_string())?;
    for pid in fb.pred_ids() {
        if fb.num_facts(pid) == 0 {
            let sig = fb.signature(pid);
            eprintln!(
                "warning: predicate {}/{} has no facts and is excluded from discovery",
                sig.name, sig.arity
            );
        }
    }

    let budget = match (args.budget_batches, args.timeout) {
        (Some(n), _) => Budget::Batches(n),
        (None, Some(secs)) => Budget::Time(Duration::from_secs(secs)),
        (None, None) => Budget::Time(Duration::from_secs(10)),
    };
    let mut props: BTreeSet<Property> =
        find_unsat_impli(&fb, args.max_literals, args.max_vars, args.batch_size, budget);
    let recalls = compute_recalls(&fb).map_err(|e| e.to_string())?;
    props.extend(recalls.into_iter().map(Property::Recall));
    props.extend(find_total_facts(&fb, &types).into_iter().map(Property::Total));

    let stem = args.out.clone().unwrap_or_else(|| args.bk_file.with_extension(""));
    let lp_path = stem.with_extension("shrink.lp");
    let json_path = stem.with_extension("shrink.json");
    std::fs::write(&lp_path, emit_asp(&props, args.recall_cap))
        .map_err(|e| format!("{}: {e}", lp_path.display()))?;
    std::fs::write(&json_path, emit_json(&props, args.recall_cap))
        .map_err(|e| format!("{}: {e}", json_path.display()))?;

    let count = |f: fn(&Property) -> bool| props.iter().filter(|p| f(p)).count();
    println!("unsat: {}", count(|p| matches!(p, Property::Unsat(_))));
    println!("implies: {}", count(|p| matches!(p, Property::Implies(_))));
    println!("recall: {}", count(|p| matches!(p, Property::Recall(_))));
    println!("total: {}", count(|p| matches!(p, Property::Total(_))));

    if !args.audit {
        return Ok(true);
    }
    let report = soundness_audit(
        &fb,
        &types,
        &props,
        args.audit_max_body,
        args.audit_max_vars,
        args.recall_cap,
    )
    .map_err(|e| e.to_string())?;
    let audit_path = stem.with_extension("audit.json");
    let doc = serde_json::json!({ "seed": args.seed, "report": report });
    std::fs::write(&audit_path, format!("{:#}\n", doc))
        .map_err(|e| format!("{}: {e}", audit_path.display()))?;
    println!(
        "audit: {} rules, {} pruned ({:.1}%), {} false prunes",
        report.total_rules,
        report.pruned,
        report.shrinkage * 100.0,
        report.false_prunes.len()
    );
    Ok(report.passed())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: audit found false prunes");
            ExitCode::from(2)
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
