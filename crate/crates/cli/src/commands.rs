//! Pipeline commands: generate, label, train, evaluate, export plots.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thzbeam_core::{
    generate_codebook, read_dataset, sample_scenario, write_dataset, Codebook, DatasetSample,
    FACTOR_COUNT,
};
use thzbeam_learn::{
    baseline_probs, cascade_probs, db_to_linear, evaluate_beamforming, evaluate_estimator,
    gt_probs, make_labels, snr_grid, train_baseline, train_estimator, train_predictor,
    train_test_split, BaselineModel, BeamformingEval, EpochLoss, EstimatorModel, EvalProbs,
    EvalRow, PredictorModel,
};
use thzbeam_nn::{load_model, save_model};

use crate::error::CliError;
use crate::runconfig::RunConfig;

pub struct Ctx {
    pub config: RunConfig,
    pub out: PathBuf,
}

impl Ctx {
    pub fn new(config: RunConfig, out: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&out)
            .map_err(|e| CliError::io(format!("cannot create {}: {e}", out.display())))?;
        Ok(Ctx { config, out })
    }

    fn path(&self, rel: &Path) -> PathBuf {
        self.out.join(rel)
    }

    fn eval_path(&self, name: &str) -> PathBuf {
        self.path(&self.config.paths.eval_dir).join(name)
    }

    /// Run manifest: config echo, seed and wall time. Written next to the
    /// artifact so the artifact itself stays byte-reproducible.
    fn write_manifest(&self, artifact: &Path, command: &str, started: Instant) -> Result<(), CliError> {
        let manifest = artifact.with_extension(format!(
            "{}manifest.txt",
            artifact
                .extension()
                .map(|e| format!("{}.", e.to_string_lossy()))
                .unwrap_or_default()
        ));
        let body = format!(
            "command: {command}\nseed: {}\nwall_time_s: {:.3}\n\n[config]\n{}",
            self.config.seed,
            started.elapsed().as_secs_f64(),
            self.config.to_toml()
        );
        fs::write(&manifest, body)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", manifest.display())))?;
        Ok(())
    }

    fn thz_codebook(&self) -> Result<Codebook, CliError> {
        Ok(generate_codebook(
            &self.config.scenario.thz.array,
            self.config.thz_quantization(),
        )?)
    }

    fn read_samples(&self, rel: &Path) -> Result<Vec<DatasetSample>, CliError> {
        let path = self.path(rel);
        let (_, samples) = read_dataset(&path, &self.config.scenario).map_err(|e| match e {
            thzbeam_core::CoreError::Format(msg) => CliError::dim(msg),
            other => other.into(),
        })?;
        Ok(samples)
    }

    fn split(&self, n: usize) -> (Vec<usize>, Vec<usize>) {
        train_test_split(n, self.config.split.train_fraction, self.config.seed)
    }
}

fn write_text(path: &Path, body: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, body)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

fn loss_trace_csv(trace: &[EpochLoss]) -> String {
    let mut out = String::from("epoch,train_loss,test_loss\n");
    for e in trace {
        out.push_str(&format!(
            "{},{:.12e},{:.12e}\n",
            e.epoch, e.train_loss, e.test_loss
        ));
    }
    out
}

/// Generates the dataset file plus a human-readable summary.
pub fn cmd_gen_data(ctx: &Ctx) -> Result<(), CliError> {
    let started = Instant::now();
    let samples: Vec<DatasetSample> = sample_scenario(&ctx.config.scenario)?
        .into_iter()
        .map(DatasetSample::from_dual_band)
        .collect();
    let path = ctx.path(&ctx.config.paths.dataset);
    write_dataset(&path, &ctx.config.scenario, &samples)?;
    write_text(
        &path.with_extension("summary.txt"),
        &dataset_summary(&samples),
    )?;
    ctx.write_manifest(&path, "gen-data", started)?;
    println!("wrote {} samples to {}", samples.len(), path.display());
    Ok(())
}

fn dataset_summary(samples: &[DatasetSample]) -> String {
    let mut out = format!("samples: {}\n", samples.len());
    if samples.is_empty() {
        return out;
    }
    let names = thzbeam_core::FACTOR_NAMES;
    let mut lo = [f64::INFINITY; FACTOR_COUNT];
    let mut hi = [f64::NEG_INFINITY; FACTOR_COUNT];
    let mut active = 0usize;
    for s in samples {
        active += s.thz_factors.active_count();
        for p in s.thz_factors.active_paths() {
            for (i, v) in p.to_row().iter().enumerate() {
                lo[i] = lo[i].min(*v);
                hi[i] = hi[i].max(*v);
            }
        }
    }
    out.push_str(&format!(
        "mean active THz paths: {:.3}\n",
        active as f64 / samples.len() as f64
    ));
    out.push_str("THz factor ranges (active paths):\n");
    for (i, name) in names.iter().enumerate() {
        out.push_str(&format!("  {name}: [{:.6e}, {:.6e}]\n", lo[i], hi[i]));
    }
    out
}

/// Labels every sample with the exhaustive-search beam index.
pub fn cmd_label(ctx: &Ctx) -> Result<(), CliError> {
    let started = Instant::now();
    let mut samples = ctx.read_samples(&ctx.config.paths.dataset.clone())?;
    let codebook = ctx.thz_codebook()?;
    let snr = db_to_linear(ctx.config.beamforming.label_snr_db);
    make_labels(&mut samples, &codebook, snr)?;
    let path = ctx.path(&ctx.config.paths.labeled_dataset);
    write_dataset(&path, &ctx.config.scenario, &samples)?;
    ctx.write_manifest(&path, "label", started)?;
    println!(
        "labeled {} samples against {} beams at {} dB",
        samples.len(),
        codebook.len(),
        ctx.config.beamforming.label_snr_db
    );
    Ok(())
}

pub fn cmd_train_estimator(ctx: &Ctx) -> Result<(), CliError> {
    let started = Instant::now();
    let samples = ctx.read_samples(&ctx.config.paths.dataset.clone())?;
    let (train_idx, test_idx) = ctx.split(samples.len());
    let settings = ctx.config.estimator_settings();
    let (model, trace) = train_estimator(&samples, &train_idx, &test_idx, &settings)?;
    let path = ctx.path(&ctx.config.paths.estimator_model);
    save_model(&path, &model.to_model_file())?;
    write_text(&path.with_extension("loss.csv"), &loss_trace_csv(&trace))?;
    ctx.write_manifest(&path, "train-estimator", started)?;
    let last = trace.last().expect("nonempty trace");
    println!(
        "estimator trained: {} epochs, train MSE {:.6}, test MSE {:.6}",
        trace.len(),
        last.train_loss,
        last.test_loss
    );
    Ok(())
}

pub fn cmd_train_beam(ctx: &Ctx) -> Result<(), CliError> {
    let started = Instant::now();
    let samples = ctx.read_samples(&ctx.config.paths.labeled_dataset.clone())?;
    let codebook = ctx.thz_codebook()?;
    let (train_idx, test_idx) = ctx.split(samples.len());
    let settings = ctx.config.predictor_settings();
    let (mut model, trace) =
        train_predictor(&samples, &train_idx, &test_idx, &settings, codebook.len())?;
    let path = ctx.path(&ctx.config.paths.predictor_model);
    save_model(&path, &model.to_model_file())?;
    write_text(&path.with_extension("loss.csv"), &loss_trace_csv(&trace))?;
    ctx.write_manifest(&path, "train-beam", started)?;
    let acc = model.top1_accuracy(&samples, &test_idx)?;
    println!(
        "beam predictor trained: {} epochs, test top-1 accuracy {:.4}",
        trace.len(),
        acc
    );
    Ok(())
}

pub fn cmd_train_baseline(ctx: &Ctx) -> Result<(), CliError> {
    let started = Instant::now();
    let samples = ctx.read_samples(&ctx.config.paths.labeled_dataset.clone())?;
    let codebook = ctx.thz_codebook()?;
    let (train_idx, test_idx) = ctx.split(samples.len());
    let settings = ctx.config.baseline_settings();
    let (model, trace) = train_baseline(
        &samples,
        &train_idx,
        &test_idx,
        &settings,
        codebook.len(),
        ctx.config.scenario.seed,
        ctx.config.scenario.thz_noise_variance(),
    )?;
    let path = ctx.path(&ctx.config.paths.baseline_model);
    save_model(&path, &model.to_model_file())?;
    write_text(&path.with_extension("loss.csv"), &loss_trace_csv(&trace))?;
    ctx.write_manifest(&path, "train-baseline", started)?;
    println!(
        "baseline trained: {} epochs, final test CE {:.4}",
        trace.len(),
        trace.last().expect("nonempty trace").test_loss
    );
    Ok(())
}

fn eval_rows_csv(rows: &[EvalRow]) -> String {
    let mut out = String::from(
        "snr_db,ub_rate,proposed_top1,proposed_top3_mean,baseline_top1,baseline_top3_mean,proposed_top1_acc,baseline_top1_acc\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{:.2},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.6},{:.6}\n",
            r.snr_db,
            r.ub_rate,
            r.proposed_top1,
            r.proposed_top3_mean,
            r.baseline_top1,
            r.baseline_top3_mean,
            r.proposed_top1_acc,
            r.baseline_top1_acc
        ));
    }
    out
}

fn scatter_csv(points: &[(f64, f64)], true_name: &str, pred_name: &str) -> String {
    let mut out = format!("{true_name},{pred_name}\n");
    for (t, p) in points {
        out.push_str(&format!("{:.12e},{:.12e}\n", t, p));
    }
    out
}

pub struct EvalArtifacts {
    pub eval: BeamformingEval,
}

/// Runs the full evaluation: factor errors against the blind baseline,
/// beamforming tables for the cascade and ground-truth variants, and
/// scatter data for the plots.
pub fn cmd_eval(ctx: &Ctx, oracle: bool) -> Result<EvalArtifacts, CliError> {
    let started = Instant::now();
    let samples = ctx.read_samples(&ctx.config.paths.labeled_dataset.clone())?;
    let codebook = ctx.thz_codebook()?;
    let (train_idx, test_idx) = ctx.split(samples.len());

    let mut estimator =
        EstimatorModel::from_model_file(load_model(&ctx.path(&ctx.config.paths.estimator_model))?)?;
    let mut predictor =
        PredictorModel::from_model_file(load_model(&ctx.path(&ctx.config.paths.predictor_model))?)?;
    let mut baseline =
        BaselineModel::from_model_file(load_model(&ctx.path(&ctx.config.paths.baseline_model))?)?;

    check_model_dims(&samples, &estimator, &predictor, &baseline, codebook.len())?;

    // estimator factor errors vs the blind mean predictor
    let est_eval = evaluate_estimator(&mut estimator, &samples, &train_idx, &test_idx)?;
    write_text(&ctx.eval_path("factor_errors.csv"), &est_eval.report.to_csv())?;
    write_text(&ctx.eval_path("blind_errors.csv"), &est_eval.blind_report.to_csv())?;
    let mut text = est_eval
        .report
        .to_text("Prediction error for THz channel factors (test split)");
    text.push('\n');
    text.push_str(&est_eval.blind_report.to_text("Blind mean-predictor baseline"));
    write_text(&ctx.eval_path("factor_errors.txt"), &text)?;
    write_text(
        &ctx.eval_path("scatter_aoa.csv"),
        &scatter_csv(&est_eval.scatter_aoa, "true_aoa_az_rad", "pred_aoa_az_rad"),
    )?;
    write_text(
        &ctx.eval_path("scatter_toa.csv"),
        &scatter_csv(&est_eval.scatter_toa, "true_toa_s", "pred_toa_s"),
    )?;

    // beamforming across the SNR grid
    let grid = snr_grid(
        ctx.config.beamforming.eval_snr_db_start,
        ctx.config.beamforming.eval_snr_db_stop,
        ctx.config.beamforming.eval_snr_db_step,
    )?;
    let probs = EvalProbs {
        cascade: cascade_probs(&mut estimator, &mut predictor, &samples, &test_idx)?,
        gt: gt_probs(&mut predictor, &samples, &test_idx)?,
        baseline: baseline_probs(
            &mut baseline,
            &samples,
            &test_idx,
            ctx.config.scenario.seed,
            ctx.config.scenario.thz_noise_variance(),
        )?,
    };
    let eval = evaluate_beamforming(
        &samples,
        &test_idx,
        &codebook,
        &grid,
        ctx.config.beamforming.top_k,
        &probs,
        oracle,
    )?;
    write_text(&ctx.eval_path("beamforming.csv"), &eval_rows_csv(&eval.rows))?;
    write_text(
        &ctx.eval_path("beamforming_gt.csv"),
        &eval_rows_csv(&eval.gt_rows),
    )?;
    let summary = format!(
        "test samples: {}\ncodebook beams: {}\nrandom top-1 baseline: {:.6}\n\
         top-1 accuracy (ground-truth factors): {:.6}\n\
         top-1 accuracy (cascade, estimated factors): {:.6}\n\
         cascade accuracy degradation: {:.6}\n\
         top-1 accuracy (thz-matrix baseline): {:.6}\n",
        test_idx.len(),
        codebook.len(),
        1.0 / codebook.len() as f64,
        eval.gt_acc,
        eval.cascade_acc,
        eval.gt_acc - eval.cascade_acc,
        eval.baseline_acc,
    );
    write_text(&ctx.eval_path("summary.txt"), &summary)?;
    ctx.write_manifest(&ctx.eval_path("beamforming.csv"), "eval", started)?;
    println!("{summary}");
    Ok(EvalArtifacts { eval })
}

fn check_model_dims(
    samples: &[DatasetSample],
    estimator: &EstimatorModel,
    predictor: &PredictorModel,
    baseline: &BaselineModel,
    codebook_size: usize,
) -> Result<(), CliError> {
    let first = samples
        .first()
        .ok_or_else(|| CliError::Other("dataset is empty".into()))?;
    let mut diffs = Vec::new();
    if estimator.subcarriers != first.h_sub6.subcarriers
        || estimator.antennas != first.h_sub6.antennas
    {
        diffs.push(format!(
            "estimator input: expected {}x{}, model has {}x{}",
            first.h_sub6.subcarriers,
            first.h_sub6.antennas,
            estimator.subcarriers,
            estimator.antennas
        ));
    }
    let factor_dim = first.thz_factors.budget() * FACTOR_COUNT;
    if estimator.num_paths != first.thz_factors.budget() {
        diffs.push(format!(
            "estimator paths: expected {}, model has {}",
            first.thz_factors.budget(),
            estimator.num_paths
        ));
    }
    if predictor.input_dim != factor_dim {
        diffs.push(format!(
            "predictor input: expected {factor_dim}, model has {}",
            predictor.input_dim
        ));
    }
    if predictor.num_classes != codebook_size {
        diffs.push(format!(
            "predictor classes: expected {codebook_size}, model has {}",
            predictor.num_classes
        ));
    }
    if baseline.num_classes != codebook_size
        || baseline.subcarriers != first.h_thz_true.subcarriers
        || baseline.antennas != first.h_thz_true.antennas
    {
        diffs.push(format!(
            "baseline dims: expected {}x{} -> {codebook_size}, model has {}x{} -> {}",
            first.h_thz_true.subcarriers,
            first.h_thz_true.antennas,
            baseline.subcarriers,
            baseline.antennas,
            baseline.num_classes
        ));
    }
    if diffs.is_empty() {
        Ok(())
    } else {
        Err(CliError::dim(diffs.join("; ")))
    }
}

/// Converts the evaluation CSVs into plot-ready whitespace-separated data
/// files plus a gnuplot script.
pub fn cmd_export_plots(ctx: &Ctx) -> Result<(), CliError> {
    let rates_csv = fs::read_to_string(ctx.eval_path("beamforming.csv"))
        .map_err(|e| CliError::io(format!("cannot read beamforming.csv: {e}")))?;
    let rates = parse_csv(&rates_csv)?;
    if rates.is_empty() {
        return Err(CliError::Other(
            "beamforming.csv has no data rows; nothing to plot".into(),
        ));
    }
    // build everything in memory first so a failure writes no partial file
    let mut dat = String::from(
        "# snr_db ub_rate proposed_top1 proposed_top3_mean baseline_top1 baseline_top3_mean\n",
    );
    for row in &rates {
        if row.len() < 6 {
            return Err(CliError::Other("beamforming.csv row too short".into()));
        }
        dat.push_str(&format!(
            "{} {} {} {} {} {}\n",
            row[0], row[1], row[2], row[3], row[4], row[5]
        ));
    }
    let gp = "set xlabel 'SNR (dB)'\n\
              set ylabel 'Spectral efficiency (bits/s/Hz)'\n\
              set key left top\n\
              plot 'rates_vs_snr.dat' using 1:2 with linespoints title 'upper bound', \\\n\
                   '' using 1:3 with linespoints title 'proposed top-1', \\\n\
                   '' using 1:4 with linespoints title 'proposed top-3 mean', \\\n\
                   '' using 1:5 with linespoints title 'baseline top-1', \\\n\
                   '' using 1:6 with linespoints title 'baseline top-3 mean'\n";
    let plots_dir = ctx.path(&ctx.config.paths.plots_dir);
    let mut scatters = Vec::new();
    for name in ["scatter_aoa", "scatter_toa"] {
        let csv = fs::read_to_string(ctx.eval_path(&format!("{name}.csv")))
            .map_err(|e| CliError::io(format!("cannot read {name}.csv: {e}")))?;
        let rows = parse_csv(&csv)?;
        if rows.is_empty() {
            return Err(CliError::Other(format!("{name}.csv has no data rows")));
        }
        let mut body = String::from("# true predicted\n");
        for row in &rows {
            body.push_str(&format!("{} {}\n", row[0], row[1]));
        }
        scatters.push((format!("{name}.dat"), body));
    }
    write_text(&plots_dir.join("rates_vs_snr.dat"), &dat)?;
    write_text(&plots_dir.join("rates_vs_snr.gp"), gp)?;
    for (name, body) in scatters {
        write_text(&plots_dir.join(name), &body)?;
    }
    println!("plot files written to {}", plots_dir.display());
    Ok(())
}

/// Minimal CSV parsing: header line, comma fields, no quoting (none of our
/// artifacts need it).
fn parse_csv(text: &str) -> Result<Vec<Vec<String>>, CliError> {
    let mut lines = text.lines();
    let _header = lines
        .next()
        .ok_or_else(|| CliError::Other("empty CSV file".into()))?;
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        rows.push(line.split(',').map(|s| s.trim().to_string()).collect());
    }
    Ok(rows)
}
