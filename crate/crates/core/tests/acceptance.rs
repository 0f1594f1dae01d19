// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite P1-P8. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use common::{load_model, test_set, words, Fixture};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use she_core::circuitlib::{
    arithmetic_shift, build_adder, build_max, build_mixed_accumulator, build_pc_mult, build_relu, FixedConst,
};
use she_core::netcompile::{message_size, LayerSpec, ModelSpec};
use she_core::runtime::{evaluate, reference_eval, EvalOptions, InferenceResult};
use she_core::{ClearBackend, Evaluator, FixedFormat, GateCostModel, PlainWord};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

const B5: FixedFormat = FixedFormat { total_bits: 5, frac_bits: 0 };

fn five_bit() -> impl Iterator<Item = i64> {
    -16..16
}

fn options(workers: usize) -> EvalOptions {
    EvalOptions { workers, fold: true }
}

fn p1() -> Outcome {
    let start = Instant::now();
    let cost = GateCostModel::default();
    let mut cases = 0;
    let mut mismatches = Vec::new();
    let mut check = |unit: &str, got: i64, want: i64, case: String| {
        cases += 1;
        if got != want {
            mismatches.push(format!("{unit} {case}: got {got}, want {want}"));
        }
    };
    for x in five_bit() {
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        let w = ev.encrypt_word(&PlainWord::from_raw(x, B5));
        let r = build_relu(&mut ev, &w);
        check("relu", ev.reveal_word(&r).unwrap().raw(), x.max(0), format!("{x}"));
        for k in -16..16 {
            // Room for every left shift of a 5-bit word.
            let wide = w.sign_extend(21).unwrap();
            let s = arithmetic_shift(&mut ev, &wide, k);
            let want = if k >= 0 { x * (1 << k) } else { x.div_euclid(1 << -k) };
            check("shift", ev.reveal_word(&s).unwrap().raw(), want, format!("{x} by {k}"));
        }
        for y in five_bit() {
            let v = ev.encrypt_word(&PlainWord::from_raw(y, B5));
            let s = build_adder(&mut ev, &w, &v).unwrap();
            check("adder", ev.reveal_word(&s).unwrap().raw(), x + y, format!("{x}+{y}"));
            let m = build_max(&mut ev, &w, &v).unwrap();
            check("max", ev.reveal_word(&m).unwrap().raw(), x.max(y), format!("max({x},{y})"));
            let p = build_pc_mult(&mut ev, &w, FixedConst { raw: y, format: B5 }).unwrap();
            check("pc_mult", ev.reveal_word(&p).unwrap().raw(), x * y, format!("{x}*{y}"));
        }
    }
    let elapsed = start.elapsed();
    let pass = mismatches.is_empty() && elapsed < Duration::from_secs(60);
    let first = mismatches.first().cloned().unwrap_or_default();
    outcome(pass, format!("{} mismatches in {cases} cases, {:.2?} {first}", mismatches.len(), elapsed))
}

fn p2() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let cost = GateCostModel::default();
    let mut bad = 0;
    for _ in 0..1000 {
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        let bits = rng.random_range(2..=16u32);
        let f = FixedFormat::integer(bits);
        let a = ev.encrypt_word(&PlainWord::from_raw(rng.random_range(f.min_raw()..=f.max_raw()), f));
        let b = ev.encrypt_word(&PlainWord::from_raw(rng.random_range(f.min_raw()..=f.max_raw()), f));
        // A word that already carries depth, so the check is not trivially 0 = 0.
        let x = build_adder(&mut ev, &a, &b).unwrap().sign_extend(32).unwrap();
        let k = rng.random_range(-20..=15);
        let before = ev.snapshot_report();
        let y = arithmetic_shift(&mut ev, &x, k);
        let after = ev.snapshot_report();
        let depth_ok = y.max_depth() <= x.max_depth();
        if after.hgops != before.hgops || after.max_depth != before.max_depth || !depth_ok {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{bad} of 1000 shifts changed hgops or max_depth"))
}

fn p3() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    let cost = GateCostModel::default();
    let cap = 16;
    let mut failures = Vec::new();
    let mut flagged = 0;
    // Trees of 2..=256 inputs, plus much larger ones so the cap is reached.
    let sizes: Vec<usize> =
        (0..300).map(|i| if i < 250 { rng.random_range(2..=256) } else { rng.random_range(2048..=4096) }).collect();
    for n in sizes {
        let extreme = n > 256;
        let values: Vec<i64> =
            (0..n).map(|_| if extreme && rng.random_bool(0.9) { -16 } else { rng.random_range(-16..16) }).collect();
        let mut ev = Evaluator::new(&ClearBackend, &cost);
        let inputs: Vec<_> = values.iter().map(|&v| ev.encrypt_word(&PlainWord::from_raw(v, B5))).collect();
        let acc = build_mixed_accumulator(&mut ev, &inputs, cap).unwrap();
        for (i, w) in acc.level_widths.iter().enumerate() {
            let level = i as u32 + 1;
            if *w != (5 + level).min(cap) {
                failures.push(format!("n={n}: level {level} width {w}"));
            }
        }
        let exact: i64 = values.iter().sum();
        let fits = FixedFormat::integer(cap).fits(exact);
        let out = ev.reveal_word(&acc.word).unwrap().raw();
        if fits && out != exact {
            failures.push(format!("n={n}: sum {out} != {exact}"));
        }
        if !fits {
            flagged += 1;
            if !acc.wrapped {
                failures.push(format!("n={n}: sum {exact} overflowed without a flag"));
            }
        }
    }
    let first = failures.first().cloned().unwrap_or_default();
    outcome(failures.is_empty(), format!("300 trees, {flagged} overflowing; {} failures {first}", failures.len()))
}

fn p4(she: &Fixture) -> Outcome {
    let start = Instant::now();
    let (images, _) = test_set();
    let cost = GateCostModel::default();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let n = 100;
    let mut mismatched = 0;
    for i in 0..n {
        let image = words(&she.plan, &images, i);
        let r = evaluate(&she.plan, &image, &ClearBackend, &cost, options(workers)).unwrap();
        let o = reference_eval(&she.folded, &image).unwrap();
        mismatched += (r.raw_logits != o.raw_logits) as usize;
    }
    let elapsed = start.elapsed();
    outcome(
        mismatched == 0 && elapsed < Duration::from_secs(600),
        format!("{mismatched} of {n} images differ from the reference, {elapsed:.2?}"),
    )
}

/// Nonzero-weight multiply-accumulates whose input tap is a real pixel,
/// counted straight from the weight arrays.
fn oracle_mac_count(m: &ModelSpec) -> usize {
    let mut shape = m.input_shape;
    let mut total = 0;
    for layer in &m.layers {
        match layer {
            LayerSpec::Fc(f) => total += f.weights.quantized.data.iter().filter(|w| !w.zero).count(),
            LayerSpec::Conv(c) => {
                let out = layer.output_shape(shape);
                let k = c.kernel as isize;
                let s = c.stride as isize;
                let pad = |inp: usize, outn: usize| match c.padding {
                    she_core::netcompile::Padding::Valid => 0,
                    she_core::netcompile::Padding::Same => (((outn as isize - 1) * s + k - inp as isize).max(0)) / 2,
                };
                let (py, px) = (pad(shape.h, out.h), pad(shape.w, out.w));
                for (idx, w) in c.weights.quantized.data.iter().enumerate() {
                    if w.zero {
                        continue;
                    }
                    let kx = (idx % c.kernel) as isize;
                    let ky = (idx / c.kernel % c.kernel) as isize;
                    let rows =
                        (0..out.h as isize).filter(|oy| (0..shape.h as isize).contains(&(oy * s + ky - py))).count();
                    let cols =
                        (0..out.w as isize).filter(|ox| (0..shape.w as isize).contains(&(ox * s + kx - px))).count();
                    total += rows * cols;
                }
            }
            _ => {}
        }
        shape = layer.output_shape(shape);
    }
    total
}

fn p5(she: &Fixture) -> Outcome {
    let (images, _) = test_set();
    let cost = GateCostModel::default();
    let r = evaluate(&she.plan, &words(&she.plan, &images, 0), &ClearBackend, &cost, options(4)).unwrap();
    let oracle = oracle_mac_count(&she.folded);
    let shifts = r.report.pc_shift as usize;
    let band = (9_500..=28_500).contains(&shifts);
    outcome(
        r.report.cc_mult == 0 && shifts == oracle && shifts == she.plan.shift_term_count() && band,
        format!("CC_Mult {}, PC_Shift {shifts}, oracle MACs {oracle}, sanity band 9.5K..28.5K", r.report.cc_mult),
    )
}

fn p6(she: &Fixture, dshe: &Fixture) -> Outcome {
    let (images, _) = test_set();
    let cost = GateCostModel::default();
    let mut violations = Vec::new();
    let mut simulated = [0u64; 2];
    for (f, (k, count)) in [she, dshe].into_iter().zip([(0usize, 5usize), (1, 2)]) {
        for i in 0..count {
            let r = evaluate(&f.plan, &words(&f.plan, &images, i), &ClearBackend, &cost, options(8)).unwrap();
            for d in &r.layer_depths {
                if d.added() > d.estimate {
                    violations.push(format!("{} layer {}: {} > {}", f.plan.name, d.index, d.added(), d.estimate));
                }
            }
            if r.report.max_depth > f.plan.total_estimate {
                violations.push(format!("{} total {} > {}", f.plan.name, r.report.max_depth, f.plan.total_estimate));
            }
            simulated[k] = simulated[k].max(r.report.max_depth);
        }
    }
    let (s, d) = (she.plan.total_estimate, dshe.plan.total_estimate);
    let budget = 32_768;
    let pass = violations.is_empty() && s <= budget && d > s && d <= budget && (500..=8_000).contains(&s);
    let first = violations.first().cloned().unwrap_or_default();
    outcome(
        pass,
        format!(
            "estimates SHE {s} (simulated {}), DSHE {d} (simulated {}), budget {budget}, {} bound violations {first}",
            simulated[0],
            simulated[1],
            violations.len()
        ),
    )
}

fn p7() -> Outcome {
    let bytes = message_size(784, 5, 32 * 1024);
    let mib = bytes as f64 / (1024.0 * 1024.0);
    outcome(mib == 122.5, format!("{bytes} bytes = {mib} MB"))
}

fn p8(she: &Fixture) -> Outcome {
    let (images, _) = test_set();
    let cost = GateCostModel::default();
    let mut differing = 0;
    for i in 0..20 {
        let image = words(&she.plan, &images, i);
        let runs: Vec<InferenceResult> =
            [1, 2, 8].iter().map(|&w| evaluate(&she.plan, &image, &ClearBackend, &cost, options(w)).unwrap()).collect();
        differing += runs.windows(2).any(|p| p[0] != p[1]) as usize;
    }
    outcome(differing == 0, format!("{differing} of 20 images differ across 1/2/8 workers"))
}

type Criterion<'a> = (&'static str, &'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() {
    let she = load_model("she_mnist.json");
    let dshe = load_model("dshe_mnist.json");
    let criteria: Vec<Criterion> = vec![
        ("P1", "circuit exhaustive correctness", Box::new(p1)),
        ("P2", "shift freeness", Box::new(p2)),
        ("P3", "mixed accumulator law", Box::new(p3)),
        ("P4", "end-to-end bit-exactness", Box::new(|| p4(&she))),
        ("P5", "multiplication elimination", Box::new(|| p5(&she))),
        ("P6", "depth ledger", Box::new(|| p6(&she, &dshe))),
        ("P7", "message size", Box::new(p7)),
        ("P8", "determinism and parallel merge", Box::new(|| p8(&she))),
    ];
    let mut failed = 0;
    for (id, name, run) in &criteria {
        let o = run();
        failed += !o.pass as usize;
        println!("{id} {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
