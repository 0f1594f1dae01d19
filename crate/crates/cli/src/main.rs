// SPDX-License-Identifier: Apache-2.0

//! `she`: quantize, compile, budget-check and evaluate shift-accumulation
//! CNN models on the clear-bit gate simulator.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};
use she_core::dataset::{read_images, read_labels, Images};
use she_core::netcompile::{check_budget, compile_with, input_words, CompileError, LayerSpec};
use she_core::quantize::log_quantize;
use she_core::runtime::{emit_report, evaluate, reference_eval, EvalOptions, ReportFormat, ReportRow};
use she_core::{fold_batchnorm, parse_model, ClearBackend, DepthBudget, EvaluationPlan, GateCostModel, ModelSpec};

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_ORACLE: u8 = 4;

#[derive(Parser)]
#[command(name = "she", version, about = "Shift-accumulation LHE CNN compiler and gate-level evaluator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Re-quantize float weights to signed powers of two and report the error.
    Quantize {
        #[command(flatten)]
        common: Common,
        /// Where to write the quantized model (stdout if omitted).
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Fold batch norm, lower to a gate-level plan and print its summary.
    Compile(Common),
    /// Print the per-layer depth ledger; exit 3 when over budget.
    CheckBudget(Common),
    /// Evaluate images gate by gate.
    Eval(Common),
    /// Print the operation-count table for one evaluation.
    Report(Common),
    /// Compare the gate-level result against the integer reference.
    OracleCompare(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Model JSON file.
    #[arg(long)]
    model: PathBuf,
    /// Images as IDX or CSV (one image per row, optional trailing label).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Labels as IDX or CSV.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Maximum multiplicative depth.
    #[arg(long, default_value_t = DepthBudget::DEFAULT_MAX_DEPTH)]
    budget: u64,
    /// TOML gate cost model.
    #[arg(long, env = "SHE_COST_MODEL")]
    cost_model: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads per evaluation.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    workers: u64,
    /// Seed for randomly drawn inputs when no --input is given.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Treat an over-budget plan as an error.
    #[arg(long)]
    strict: bool,
    /// Check every evaluation against the integer reference.
    #[arg(long)]
    compare_oracle: bool,
    /// Evaluate at most this many images (random inputs default to 1).
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// A failure carrying its exit status.
struct Failure {
    code: u8,
    msg: String,
}

fn fail(code: u8, msg: impl Into<String>) -> Failure {
    Failure { code, msg: msg.into() }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Quantize { common, output } => cmd_quantize(&common, output.as_deref()),
        Command::Compile(c) => cmd_compile(&c),
        Command::CheckBudget(c) => cmd_check_budget(&c),
        Command::Eval(c) => cmd_eval(&c),
        Command::Report(c) => cmd_report(&c),
        Command::OracleCompare(c) => cmd_oracle_compare(&c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("she: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn require_file(path: &Path, what: &str) -> Outcome {
    if path.is_file() {
        Ok(())
    } else {
        Err(fail(EXIT_USAGE, format!("{what} {} does not exist", path.display())))
    }
}

fn load_model(c: &Common) -> Result<ModelSpec, Failure> {
    require_file(&c.model, "model")?;
    let bytes = std::fs::read(&c.model).map_err(|e| fail(EXIT_VALIDATION, format!("{}: {e}", c.model.display())))?;
    parse_model(&bytes).map_err(|e| fail(EXIT_VALIDATION, format!("{}: {e}", c.model.display())))
}

fn load_cost(c: &Common) -> Result<GateCostModel, Failure> {
    match &c.cost_model {
        None => Ok(GateCostModel::default()),
        Some(p) => {
            require_file(p, "cost model")?;
            GateCostModel::load(p).map_err(|e| fail(EXIT_VALIDATION, e.to_string()))
        }
    }
}

struct Compiled {
    folded: ModelSpec,
    plan: EvaluationPlan,
    cost: GateCostModel,
}

/// Folds and compiles. Over budget is fatal under `--strict`, else a warning.
fn compile_model(c: &Common) -> Result<Compiled, Failure> {
    let model = load_model(c)?;
    let cost = load_cost(c)?;
    let folded = fold_batchnorm(&model).map_err(|e| fail(EXIT_VALIDATION, e.to_string()))?;
    let plan = match compile_with(&folded, &cost, DepthBudget::new(c.budget), c.strict) {
        Ok(p) => p,
        Err(e @ CompileError::BudgetExceeded { .. }) => return Err(fail(EXIT_BUDGET, e.to_string())),
        Err(e) => return Err(fail(EXIT_VALIDATION, e.to_string())),
    };
    if plan.total_estimate > c.budget {
        eprintln!("she: warning: estimated depth {} exceeds the budget of {}", plan.total_estimate, c.budget);
    }
    Ok(Compiled { folded, plan, cost })
}

fn cmd_quantize(c: &Common, output: Option<&Path>) -> Outcome {
    let mut model = load_model(c)?;
    let cfg = model.quant;
    let mut rows = Vec::new();
    for (index, layer) in model.layers.iter_mut().enumerate() {
        let kind = layer.kind_name();
        let block = match layer {
            LayerSpec::Conv(l) => &mut l.weights,
            LayerSpec::Fc(l) => &mut l.weights,
            _ => continue,
        };
        if let Some(f) = &block.float {
            block.quantized = log_quantize(f, &block.quantized.shape, &cfg);
        }
        let stats = block.error_stats();
        if block.quantized.nonzero_count() == 0 {
            eprintln!("she: warning: layer {index} ({kind}) quantized to all zeros");
        }
        rows.push((index, kind, stats, block.quantized.nonzero_count(), block.quantized.len()));
    }
    let text = model.to_json_string();
    match output {
        Some(p) => std::fs::write(p, &text).map_err(|e| fail(EXIT_VALIDATION, format!("{}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    // Keep stdout clean for the model when it goes there.
    let emit = |line: String| if output.is_some() { println!("{line}") } else { eprintln!("{line}") };
    match c.format {
        Format::Json => {
            let layers: Vec<Value> = rows
                .iter()
                .map(|(index, kind, stats, nonzero, total)| {
                    json!({"index": index, "kind": kind, "nonzero": nonzero, "total": total,
                           "max_rel_error": stats.map(|s| s.max_rel), "mean_rel_error": stats.map(|s| s.mean_rel)})
                })
                .collect();
            emit(json!({ "layers": layers }).to_string());
        }
        Format::Text => {
            emit(format!("{:<6} {:<5} {:>9} {:>12} {:>12}", "layer", "kind", "nonzero", "max_rel", "mean_rel"));
            for (index, kind, stats, nonzero, total) in &rows {
                let (max, mean) = match stats {
                    Some(s) => (format!("{:.6}", s.max_rel), format!("{:.6}", s.mean_rel)),
                    None => ("-".into(), "-".into()),
                };
                emit(format!("{index:<6} {kind:<5} {:>9} {max:>12} {mean:>12}", format!("{nonzero}/{total}")));
            }
        }
    }
    Ok(())
}

fn cmd_compile(c: &Common) -> Outcome {
    let Compiled { plan, .. } = compile_model(c)?;
    match c.format {
        Format::Json => {
            let layers: Vec<Value> = plan
                .layers
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    json!({"index": i, "tag": l.tag.to_string(), "kind": l.kind, "estimate": l.estimate,
                           "ops": l.op_count(), "output_format": l.output_format.to_string()})
                })
                .collect();
            let doc = json!({
                "name": plan.name, "topology": plan.topology, "slots": plan.slot_formats.len(),
                "shift_terms": plan.shift_term_count(), "total_estimate": plan.total_estimate,
                "budget": c.budget, "layers": layers,
            });
            println!("{doc}");
        }
        Format::Text => {
            println!("model: {}  topology: {}", plan.name, plan.topology);
            println!("{:<6} {:<4} {:<10} {:>8} {:>10} output", "layer", "tag", "kind", "ops", "est_depth");
            for (i, l) in plan.layers.iter().enumerate() {
                println!(
                    "{i:<6} {:<4} {:<10} {:>8} {:>10} {}",
                    l.tag,
                    l.kind,
                    l.op_count(),
                    l.estimate,
                    l.output_format
                );
            }
            println!("slots: {}  shift terms: {}", plan.slot_formats.len(), plan.shift_term_count());
            println!("estimated depth: {} (budget {})", plan.total_estimate, c.budget);
        }
    }
    Ok(())
}

fn cmd_check_budget(c: &Common) -> Outcome {
    // The ledger itself reports the overrun, so compile leniently here.
    let lenient = Common { strict: false, ..c.clone() };
    let Compiled { plan, .. } = compile_model(&lenient)?;
    let verdict = check_budget(&plan, DepthBudget::new(c.budget));
    match c.format {
        Format::Json => println!("{}", serde_json::to_string(&verdict).expect("verdict serializes")),
        Format::Text => {
            println!("{}", verdict.to_text());
            if let Some(i) = verdict.first_failing_layer {
                println!("budget first exceeded at layer {i}");
            }
        }
    }
    if verdict.pass {
        Ok(())
    } else {
        Err(fail(EXIT_BUDGET, format!("estimated depth {} exceeds the budget of {}", verdict.total, c.budget)))
    }
}

/// Pixel rows in `[0, 255]`, CHW order, with labels when known.
struct Inputs {
    pixels: Vec<Vec<f64>>,
    labels: Option<Vec<u8>>,
}

fn load_inputs(c: &Common, plan: &EvaluationPlan) -> Result<Inputs, Failure> {
    let shape = plan.input_shape;
    let Some(path) = &c.input else {
        if c.labels.is_some() {
            return Err(fail(EXIT_USAGE, "--labels needs --input"));
        }
        let mut rng = StdRng::seed_from_u64(c.seed);
        let n = c.limit.unwrap_or(1);
        let pixels = (0..n).map(|_| (0..shape.len()).map(|_| rng.random_range(0..=255u8) as f64).collect()).collect();
        return Ok(Inputs { pixels, labels: None });
    };
    require_file(path, "input")?;
    if shape.c != 1 {
        return Err(fail(EXIT_VALIDATION, format!("image files hold one channel, model expects {}", shape.c)));
    }
    let (mut images, embedded) =
        read_images(path, shape.h, shape.w).map_err(|e| fail(EXIT_VALIDATION, format!("{}: {e}", path.display())))?;
    if (images.rows, images.cols) != (shape.h, shape.w) {
        return Err(fail(
            EXIT_VALIDATION,
            format!("images are {}x{}, model expects {}x{}", images.rows, images.cols, shape.h, shape.w),
        ));
    }
    let mut labels = match &c.labels {
        Some(p) => {
            require_file(p, "labels")?;
            Some(read_labels(p).map_err(|e| fail(EXIT_VALIDATION, format!("{}: {e}", p.display())))?)
        }
        None => embedded,
    };
    if let Some(l) = &labels {
        if l.len() != images.len() {
            return Err(fail(EXIT_VALIDATION, format!("{} labels for {} images", l.len(), images.len())));
        }
    }
    if let Some(n) = c.limit {
        images.truncate(n);
        if let Some(l) = &mut labels {
            l.truncate(n);
        }
    }
    Ok(Inputs { pixels: pixels_of(&images), labels })
}

fn pixels_of(images: &Images) -> Vec<Vec<f64>> {
    (0..images.len()).map(|i| images.image_f64(i)).collect()
}

fn options(c: &Common) -> EvalOptions {
    EvalOptions { workers: c.workers as usize, ..EvalOptions::default() }
}

fn cmd_eval(c: &Common) -> Outcome {
    let compiled = compile_model(c)?;
    let inputs = load_inputs(c, &compiled.plan)?;
    let mut correct = 0;
    let mut mismatches = Vec::new();
    let mut reports = Vec::new();
    for (i, pixels) in inputs.pixels.iter().enumerate() {
        let image = input_words(&compiled.plan, pixels);
        let r = evaluate(&compiled.plan, &image, &ClearBackend, &compiled.cost, options(c))
            .map_err(|e| fail(EXIT_VALIDATION, format!("image {i}: {e}")))?;
        let label = inputs.labels.as_ref().map(|l| l[i]);
        if label == Some(r.predicted as u8) {
            correct += 1;
        }
        if c.compare_oracle {
            let o = reference_eval(&compiled.folded, &image).map_err(|e| fail(EXIT_VALIDATION, e.to_string()))?;
            if o.raw_logits != r.raw_logits {
                mismatches.push(i);
            }
        }
        match c.format {
            Format::Json => {
                let mut doc: Value = serde_json::from_str(&emit_report(&r, ReportFormat::Json)).expect("valid json");
                doc["index"] = json!(i);
                if let Some(l) = label {
                    doc["label"] = json!(l);
                }
                reports.push(doc);
            }
            Format::Text => {
                let label = label.map(|l| format!(" (label {l})")).unwrap_or_default();
                println!("image {i}{label}");
                print!("{}", emit_report(&r, ReportFormat::Text));
            }
        }
    }
    let n = inputs.pixels.len();
    let accuracy = inputs.labels.as_ref().map(|_| if n == 0 { 0.0 } else { correct as f64 / n as f64 });
    match c.format {
        Format::Json => {
            let mut doc = json!({ "model": compiled.plan.name, "reports": reports });
            if let Some(a) = accuracy {
                doc["correct"] = json!(correct);
                doc["accuracy"] = json!(a);
            }
            if c.compare_oracle {
                doc["oracle_mismatches"] = json!(mismatches);
            }
            println!("{doc}");
        }
        Format::Text => {
            if let Some(a) = accuracy {
                println!("accuracy: {correct}/{n} = {a:.4}");
            }
            if c.compare_oracle {
                println!("oracle mismatches: {}", mismatches.len());
            }
        }
    }
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(fail(EXIT_ORACLE, format!("{} images differ from the reference: {mismatches:?}", mismatches.len())))
    }
}

fn cmd_report(c: &Common) -> Outcome {
    let compiled = compile_model(c)?;
    let inputs = load_inputs(c, &compiled.plan)?;
    let Some(pixels) = inputs.pixels.first() else {
        return Err(fail(EXIT_VALIDATION, "no images to evaluate"));
    };
    let image = input_words(&compiled.plan, pixels);
    let r = evaluate(&compiled.plan, &image, &ClearBackend, &compiled.cost, options(c))
        .map_err(|e| fail(EXIT_VALIDATION, e.to_string()))?;
    let row = ReportRow::from_report(&r.report);
    match c.format {
        Format::Json => println!("{}", serde_json::to_string(&row).expect("row serializes")),
        Format::Text => print!("{}", row.to_text()),
    }
    Ok(())
}

fn cmd_oracle_compare(c: &Common) -> Outcome {
    let compiled = compile_model(c)?;
    let inputs = load_inputs(c, &compiled.plan)?;
    let mut mismatches = Vec::new();
    let mut overflows = 0;
    for (i, pixels) in inputs.pixels.iter().enumerate() {
        let image = input_words(&compiled.plan, pixels);
        let r = evaluate(&compiled.plan, &image, &ClearBackend, &compiled.cost, options(c))
            .map_err(|e| fail(EXIT_VALIDATION, format!("image {i}: {e}")))?;
        let o = reference_eval(&compiled.folded, &image).map_err(|e| fail(EXIT_VALIDATION, e.to_string()))?;
        overflows += r.overflow_events.len();
        if o.raw_logits != r.raw_logits {
            mismatches.push(json!({"index": i, "circuit": r.raw_logits, "reference": o.raw_logits}));
        }
    }
    let n = inputs.pixels.len();
    match c.format {
        Format::Json => {
            println!("{}", json!({"images": n, "mismatches": mismatches, "overflow_events": overflows}))
        }
        Format::Text => {
            println!("compared {n} images: {} mismatches, {overflows} overflow events", mismatches.len());
            for m in &mismatches {
                println!("image {}: circuit {} reference {}", m["index"], m["circuit"], m["reference"]);
            }
        }
    }
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(fail(EXIT_ORACLE, format!("{} of {n} images differ from the reference", mismatches.len())))
    }
}
