//! Subcommand implementations. Each produces one run directory and prints a
//! short human-readable summary to stdout.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qrenyi::bounds;
use qrenyi::montecarlo;
use qrenyi::{
    maximally_entangled, minimize_output_entropy, minimize_product_entropy, sample_channel,
    MinimizationConfig, PureState, RandomUnitaryChannel, RenyiOrder, RngStream,
};

use crate::config::FileConfig;
use crate::record::{fmt_f64, run_id, RunRecord, RunWriter};

/// Usage errors exit with status 2, numerical failures with 3.
#[derive(Debug)]
pub enum CmdError {
    Usage(String),
    Failure(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CmdError {
    fn from(e: E) -> Self {
        CmdError::Failure(e.into())
    }
}

type CmdResult = Result<RunRecord, CmdError>;

fn usage(msg: impl Into<String>) -> CmdError {
    CmdError::Usage(msg.into())
}

fn check_p_open_unit(p: f64, flag: &str) -> Result<(), CmdError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(usage(format!("--{flag} must be in (0, 1), got {p}")));
    }
    Ok(())
}

fn order_from_p(p: f64) -> Result<RenyiOrder, CmdError> {
    RenyiOrder::new(p).map_err(|e| usage(format!("--p invalid: {e}")))
}

fn json_num(x: f64) -> serde_json::Value {
    serde_json::json!(x)
}

struct RunSetup {
    writer: RunWriter,
    record: RunRecord,
}

/// Builds the run directory and the record skeleton from the canonical
/// (command, parameters, seed) triple.
fn setup(
    out: &Path,
    command: &str,
    parameters: BTreeMap<String, serde_json::Value>,
    seed: u64,
) -> Result<RunSetup, CmdError> {
    let id = run_id(command, &parameters, seed);
    let writer = RunWriter::new(out, &id)?;
    let record = RunRecord {
        run_id: id,
        command: command.to_string(),
        parameters,
        master_seed: seed,
        metrics: BTreeMap::new(),
        artifact_paths: Vec::new(),
        timestamp: chrono::Utc::now().to_rfc3339(),
    };
    Ok(RunSetup { writer, record })
}

fn write_state_file(path: &Path, psi: &PureState) -> anyhow::Result<()> {
    let pairs: Vec<[f64; 2]> = psi.amplitudes().iter().map(|z| [z.re, z.im]).collect();
    std::fs::write(path, serde_json::to_string(&pairs)?)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// critical
// ---------------------------------------------------------------------------

pub fn cmd_critical(out: &Path) -> CmdResult {
    let parameters = BTreeMap::new();
    let RunSetup { mut writer, mut record } = setup(out, "critical", parameters, 0)?;

    let c = bounds::find_critical();
    println!("y0 = {}", fmt_f64(c.y0));
    println!("h0 = {}", fmt_f64(c.h0));
    println!("p0 = {}", fmt_f64(c.p0));

    record.metrics.insert("y0".into(), c.y0);
    record.metrics.insert("h0".into(), c.h0);
    record.metrics.insert("p0".into(), c.p0);
    writer.push_row(
        0,
        BTreeMap::from([
            ("y0".to_string(), c.y0),
            ("h0".to_string(), c.h0),
            ("p0".to_string(), c.p0),
        ]),
    );
    Ok(writer.finish(record)?)
}

// ---------------------------------------------------------------------------
// bound
// ---------------------------------------------------------------------------

pub fn cmd_bound(out: &Path, d: usize, p: f64) -> CmdResult {
    if d < 1 {
        return Err(usage(format!("--kraus must be >= 1, got {d}")));
    }
    check_p_open_unit(p, "p")?;

    let parameters = BTreeMap::from([
        ("kraus".to_string(), serde_json::json!(d)),
        ("p".to_string(), json_num(p)),
    ]);
    let RunSetup { mut writer, mut record } = setup(out, "bound", parameters, 0)?;

    let bound = bounds::lemma1_bound(d, p).map_err(anyhow::Error::from)?;
    let mut metrics = BTreeMap::from([("product_entropy_bound".to_string(), bound)]);
    // The deficit threshold needs at least two unitaries.
    if d >= 2 {
        let ds = bounds::deltas_threshold(d, p).map_err(anyhow::Error::from)?;
        metrics.insert("delta_s_threshold".to_string(), ds);
        println!(
            "D = {d}, p = {p}: bound = {}, deltaS = {}",
            fmt_f64(bound),
            fmt_f64(ds)
        );
    } else {
        println!("D = {d}, p = {p}: bound = {}", fmt_f64(bound));
    }

    record.metrics = metrics.clone();
    writer.push_row(0, metrics);
    Ok(writer.finish(record)?)
}

// ---------------------------------------------------------------------------
// scan
// ---------------------------------------------------------------------------

pub fn cmd_scan(out: &Path, d: usize, p_min: f64, p_max: f64, p_steps: usize) -> CmdResult {
    if d < 2 {
        return Err(usage(format!("--kraus must be >= 2 for scan, got {d}")));
    }
    if p_steps < 1 {
        return Err(usage("--p-steps must be >= 1".to_string()));
    }
    check_p_open_unit(p_min, "p-min")?;
    check_p_open_unit(p_max, "p-max")?;
    if p_min > p_max {
        return Err(usage(format!("--p-min ({p_min}) exceeds --p-max ({p_max})")));
    }

    let parameters = BTreeMap::from([
        ("kraus".to_string(), serde_json::json!(d)),
        ("p_min".to_string(), json_num(p_min)),
        ("p_max".to_string(), json_num(p_max)),
        ("p_steps".to_string(), serde_json::json!(p_steps)),
    ]);
    let RunSetup { mut writer, mut record } = setup(out, "scan", parameters, 0)?;

    let critical = bounds::find_critical();
    for step in 0..p_steps {
        let p = if p_steps == 1 {
            p_min
        } else {
            p_min + (p_max - p_min) * step as f64 / (p_steps - 1) as f64
        };
        let bound = bounds::lemma1_bound(d, p).map_err(anyhow::Error::from)?;
        let ds = bounds::deltas_threshold(d, p).map_err(anyhow::Error::from)?;
        let delta = bounds::delta_from_deltas(d, p, ds).map_err(anyhow::Error::from)?;
        let rate = bounds::deficit_rate(p, d, ds).map_err(anyhow::Error::from)?;
        let in_window = bounds::in_violation_window(p, &critical);
        writer.push_row(
            step,
            BTreeMap::from([
                ("p".to_string(), p),
                ("product_entropy_bound".to_string(), bound),
                ("delta_s_threshold".to_string(), ds),
                ("delta_leading".to_string(), delta),
                ("deficit_rate".to_string(), rate),
                ("in_violation_window".to_string(), if in_window { 1.0 } else { 0.0 }),
            ]),
        );
    }
    record.metrics.insert("p0".into(), critical.p0);
    record.metrics.insert("rows".into(), p_steps as f64);
    println!("scan: D = {d}, {p_steps} points over [{p_min}, {p_max}]");
    Ok(writer.finish(record)?)
}

// ---------------------------------------------------------------------------
// sample-channel
// ---------------------------------------------------------------------------

pub fn cmd_sample_channel(out: &Path, d: usize, n: usize, seed: u64) -> CmdResult {
    if d < 1 {
        return Err(usage(format!("--kraus must be >= 1, got {d}")));
    }
    if n < 1 {
        return Err(usage(format!("--dim must be >= 1, got {n}")));
    }
    let parameters = BTreeMap::from([
        ("kraus".to_string(), serde_json::json!(d)),
        ("dim".to_string(), serde_json::json!(n)),
    ]);
    let RunSetup { mut writer, mut record } = setup(out, "sample-channel", parameters, seed)?;

    let stream = RngStream::new(seed);
    let ch = sample_channel(d, n, &stream.substream(0)).map_err(anyhow::Error::from)?;
    let path = writer.artifact_path("channel.json");
    ch.write_file(&path).map_err(anyhow::Error::from)?;

    let weights = ch.weights().weights();
    let max_w = weights.iter().cloned().fold(f64::MIN, f64::max);
    let min_w = weights.iter().cloned().fold(f64::MAX, f64::min);
    let weight_entropy: f64 = -weights
        .iter()
        .map(|&w| if w > 0.0 { w * w.ln() } else { 0.0 })
        .sum::<f64>();

    let metrics = BTreeMap::from([
        ("max_weight".to_string(), max_w),
        ("min_weight".to_string(), min_w),
        ("weight_entropy".to_string(), weight_entropy),
    ]);
    record.metrics = metrics.clone();
    record.artifact_paths.push(path.display().to_string());
    writer.push_row(0, metrics);
    println!("sampled channel D = {d}, N = {n} -> {}", path.display());
    Ok(writer.finish(record)?)
}

// ---------------------------------------------------------------------------
// minimize
// ---------------------------------------------------------------------------

pub struct MinimizeArgsResolved {
    pub channel_file: Option<PathBuf>,
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub p: f64,
    pub seed: u64,
    pub cfg: MinimizationConfig,
}

pub fn cmd_minimize(out: &Path, args: MinimizeArgsResolved) -> CmdResult {
    let order = order_from_p(args.p)?;
    args.cfg
        .validate()
        .map_err(|e| usage(format!("--starts/optimizer config invalid: {e}")))?;

    let stream = RngStream::new(args.seed);
    let (ch, mut parameters, channel_artifact) = match &args.channel_file {
        Some(path) => {
            let ch = RandomUnitaryChannel::read_file(path)
                .map_err(|e| usage(format!("--channel {}: {e}", path.display())))?;
            let params = BTreeMap::from([
                ("channel".to_string(), serde_json::json!(path.display().to_string())),
                ("p".to_string(), json_num(args.p)),
                ("starts".to_string(), serde_json::json!(args.cfg.starts)),
            ]);
            (ch, params, None)
        }
        None => {
            let d = args.d.ok_or_else(|| usage("--kraus required when no --channel is given"))?;
            let n = args.n.ok_or_else(|| usage("--dim required when no --channel is given"))?;
            if d < 1 || n < 1 {
                return Err(usage("--kraus and --dim must be >= 1".to_string()));
            }
            let ch = sample_channel(d, n, &stream.substream(0)).map_err(anyhow::Error::from)?;
            let params = BTreeMap::from([
                ("kraus".to_string(), serde_json::json!(d)),
                ("dim".to_string(), serde_json::json!(n)),
                ("p".to_string(), json_num(args.p)),
                ("starts".to_string(), serde_json::json!(args.cfg.starts)),
            ]);
            (ch, params, Some("channel.json"))
        }
    };
    parameters.insert("max_iters".to_string(), serde_json::json!(args.cfg.max_iters));

    let RunSetup { mut writer, mut record } = setup(out, "minimize", parameters, args.seed)?;
    if let Some(name) = channel_artifact {
        let path = writer.artifact_path(name);
        ch.write_file(&path).map_err(anyhow::Error::from)?;
        record.artifact_paths.push(path.display().to_string());
    }

    let est = minimize_output_entropy(&ch, &order, &args.cfg, &stream.substream(1))
        .map_err(anyhow::Error::from)?;

    let witness_path = writer.artifact_path("witness.json");
    write_state_file(&witness_path, &est.witness)?;
    record.artifact_paths.push(witness_path.display().to_string());

    for (i, v) in est.all_start_values.iter().enumerate() {
        writer.push_row(i, BTreeMap::from([("value".to_string(), *v)]));
    }
    record.metrics.insert("value".into(), est.value);
    record.metrics.insert("start_index".into(), est.start_index as f64);
    record.metrics.insert("iterations".into(), est.iterations as f64);
    record
        .metrics
        .insert("converged".into(), if est.converged { 1.0 } else { 0.0 });

    println!(
        "min output entropy (p = {}): {}  [start {, converged: {}]",
        args.p,
        fmt_f64(est.value),
        est.converged
    );
    Ok(writer.finish(record)?)
}

// ---------------------------------------------------------------------------
// violation-search
// ---------------------------------------------------------------------------

pub struct ViolationArgsResolved {
    pub d: usize,
    pub n: usize,
    pub p: f64,
    pub channels: usize,
    pub seed: u64,
    pub cfg: MinimizationConfig,
}

pub fn cmd_violation_search(out: &Path, args: ViolationArgsResolved) -> CmdResult {
    if args.d < 1 {
        return Err(usage(format!("--kraus must be >= 1, got {}", args.d)));
    }
    if args.n < 1 || args.n > qrenyi::minimize::PRODUCT_DIM_GUARD {
        return Err(usage(format!(
            "--dim must be in [1, {}] for the product stage, got {}",
            qrenyi::minimize::PRODUCT_DIM_GUARD,
            args.n
        )));
    }
    if args.channels < 1 {
        return Err(usage("--channels must be >= 1".to_string()));
    }
    let order = order_from_p(args.p)?;
    args.cfg
        .validate()
        .map_err(|e| usage(format!("optimizer config invalid: {e}")))?;

    let parameters = BTreeMap::from([
        ("kraus".to_string(), serde_json::json!(args.d)),
        ("dim".to_string(), serde_json::json!(args.n)),
        ("p".to_string(), json_num(args.p)),
        ("channels".to_string(), serde_json::json!(args.channels)),
        ("starts".to_string(), serde_json::json!(args.cfg.starts)),
        ("max_iters".to_string(), serde_json::json!(args.cfg.max_iters)),
    ]);
    let RunSetup { mut writer, mut record } = setup(out, "violation-search", parameters, args.seed)?;

    let stream = RngStream::new(args.seed);
    let phi = maximally_entangled(args.n);
    let mut gaps = Vec::with_capacity(args.channels);

    println!("channel        H1_single         H_phi             H2_product        gap = 2*H1 - H2");
    for c in 0..args.channels {
        let cell = stream.substream(c as u64);
        let ch = sample_channel(args.d, args.n, &cell.substream(0)).map_err(anyhow::Error::from)?;
        let single = minimize_output_entropy(&ch, &order, &args.cfg, &cell.substream(1))
            .map_err(anyhow::Error::from)?;
        let h_phi = qrenyi::minimize::product_output_entropy(&ch, &phi, &order)
            .map_err(anyhow::Error::from)?;
        let product = minimize_product_entropy(&ch, &order, &args.cfg, &cell.substream(2))
            .map_err(anyhow::Error::from)?;
        let gap = 2.0 * single.value - product.value;
        gaps.push(gap);

        println!(
            "{c:<8} {:>17.12} {:>17.12} {:>17.12} {:>+17.12}",
            single.value, h_phi, product.value, gap
        );
        writer.push_row(
            c,
            BTreeMap::from([
                ("h1_single".to_string(), single.value),
                ("h_phi".to_string(), h_phi),
                ("h2_product".to_string(), product.value),
                ("gap".to_string(), gap),
            ]),
        );
    }

    let mut sorted = gaps.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let min_gap = sorted[0];
    let max_gap = sorted[sorted.len() - 1];
    let median_gap = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    println!(
        "summary: min gap {}, median gap {}, max gap {}",
        fmt_f64(min_gap),
        fmt_f64(median_gap),
        fmt_f64(max_gap)
    );
    println!("note: H1 is itself an upper bound, so a positive gap is evidence, not a certificate");

    record.metrics.insert("min_gap".into(), min_gap);
    record.metrics.insert("median_gap".into(), median_gap);
    record.metrics.insert("max_gap".into(), max_gap);
    Ok(writer.finish(record)?)
}

// ---------------------------------------------------------------------------
// concentration
// ---------------------------------------------------------------------------

pub fn cmd_concentration(
    out: &Path,
    d: usize,
    dims: Vec<usize>,
    trials: usize,
    seed: u64,
) -> CmdResult {
    if d < 1 {
        return Err(usage(format!("--kraus must be >= 1, got {d}")));
    }
    if dims.is_empty() {
        return Err(usage("--dims must list at least one N".to_string()));
    }
    if dims.iter().any(|&n| n <= d) {
        return Err(usage(format!("--dims entries must exceed --kraus = {d}")));
    }
    if trials < 1 {
        return Err(usage("--trials must be >= 1".to_string()));
    }

    let parameters = BTreeMap::from([
        ("kraus".to_string(), serde_json::json!(d)),
        ("dims".to_string(), serde_json::json!(dims)),
        ("trials".to_string(), serde_json::json!(trials)),
    ]);
    let RunSetup { mut writer, mut record } = setup(out, "concentration", parameters, seed)?;

    let stream = RngStream::new(seed);
    let reports = montecarlo::concentration_experiment(d, &dims, trials, &stream)
        .map_err(anyhow::Error::from)?;

    let mut trial_index = 0;
    for report in &reports {
        for dev in &report.deviations {
            writer.push_row(
                trial_index,
                BTreeMap::from([
                    ("n".to_string(), report.n as f64),
                    ("deviation".to_string(), *dev),
                ]),
            );
            trial_index += 1;
        }
        record
            .metrics
            .insert(format!("median_deviation_n{}", report.n), report.median_deviation);
        record
            .metrics
            .insert(format!("scaled_median_n{}", report.n), report.scaled_median);
        println!(
            "N = {:>5}: median max|q - 1/D| = {}, scaled by sqrt(ln N / N): {}",
            report.n,
            fmt_f64(report.median_deviation),
            fmt_f64(report.scaled_median)
        );
        let path = writer.artifact_path(&format!("report_n{}.json", report.n));
        std::fs::write(&path, serde_json::to_string_pretty(report)?)?;
        record.artifact_paths.push(path.display().to_string());
    }
    Ok(writer.finish(record)?)
}

// ---------------------------------------------------------------------------
// near-event
// ---------------------------------------------------------------------------

pub struct NearEventArgsResolved {
    pub d: usize,
    pub n: usize,
    pub p: f64,
    pub y0: f64,
    pub trials: usize,
    pub seed: u64,
    pub cfg: MinimizationConfig,
}

pub fn cmd_near_event(out: &Path, args: NearEventArgsResolved) -> CmdResult {
    if args.d < 1 || args.n <= args.d {
        return Err(usage(format!(
            "need --dim > --kraus >= 1, got D = {}, N = {}",
            args.d, args.n
        )));
    }
    if !(0.0..=1.0).contains(&args.y0) {
        return Err(usage(format!("--y0 must be in [0, 1], got {}", args.y0)));
    }
    if args.trials < 1 {
        return Err(usage("--trials must be >= 1".to_string()));
    }
    let order = order_from_p(args.p)?;

    let parameters = BTreeMap::from([
        ("kraus".to_string(), serde_json::json!(args.d)),
        ("dim".to_string(), serde_json::json!(args.n)),
        ("p".to_string(), json_num(args.p)),
        ("y0".to_string(), json_num(args.y0)),
        ("trials".to_string(), serde_json::json!(args.trials)),
        ("starts".to_string(), serde_json::json!(args.cfg.starts)),
    ]);
    let RunSetup { mut writer, mut record } = setup(out, "near-event", parameters, args.seed)?;

    let stream = RngStream::new(args.seed);
    let ch = sample_channel(args.d, args.n, &stream.substream(0)).map_err(anyhow::Error::from)?;
    let est = minimize_output_entropy(&ch, &order, &args.cfg, &stream.substream(1))
        .map_err(anyhow::Error::from)?;
    let psi0 = est.witness;

    let psi0_path = writer.artifact_path("psi0.json");
    write_state_file(&psi0_path, &psi0)?;
    record.artifact_paths.push(psi0_path.display().to_string());

    let report = montecarlo::near_event_experiment(&ch, &psi0, args.y0, args.trials, &stream.substream(2))
        .map_err(anyhow::Error::from)?;

    // Secondary least-squares fits for the same trials.
    let p_spec = qrenyi::eigenvalues(&ch.conjugate_apply(&psi0).map_err(anyhow::Error::from)?)
        .map_err(anyhow::Error::from)?;
    for t in 0..args.trials {
        let chi = qrenyi::random_pure_state(args.n, &stream.substream(2).substream(t as u64))
            .map_err(anyhow::Error::from)?;
        let q_spec = qrenyi::eigenvalues(&ch.conjugate_apply(&chi).map_err(anyhow::Error::from)?)
            .map_err(anyhow::Error::from)?;
        let (ls_y, ls_resid) = montecarlo::fit_interpolation_least_squares(&q_spec, &p_spec);
        writer.push_row(
            t,
            BTreeMap::from([
                ("y_star".to_string(), report.fitted_y[t]),
                ("residual".to_string(), report.residuals[t]),
                ("ls_y".to_string(), ls_y),
                ("ls_residual".to_string(), ls_resid),
            ]),
        );
    }

    let mut sorted = report.residuals.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_residual = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };

    record.metrics.insert("fraction_above_y0".into(), report.fraction_above_y0);
    record.metrics.insert("median_residual".into(), median_residual);
    record.metrics.insert("reference_entropy".into(), est.value);
    println!(
        "near-event: fraction with y* >= {} is {}, median residual {}",
        args.y0,
        fmt_f64(report.fraction_above_y0),
        fmt_f64(median_residual)
    );
    Ok(writer.finish(record)?)
}
