use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use treelet::data::{global_normalize, parse_csv, DataMatrix, Metric, Scale};
use treelet::dendrogram::Dendrogram;
use treelet::eval::{
    compare_report, nearest_centroid_cv, shuffled_labels, CompareConfig, CompareReport, CvConfig,
    CvMode, CvReport, FeatureScore, Timings,
};
use treelet::simgen::{log_transform, SimSpec};
use treelet::treelet::{treelet_fit, BasisDocument, Retention, TreeletConfig};
use treelet::Linkage;

use crate::args::*;
use crate::output::{path_string, sha256_hex, to_json, Artifacts, Provenance, RunConfig};
use crate::CliError;

pub const SEED_ENV: &str = "TREELET_SEED";

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(a) => fit(a),
        Command::Transform(a) => transform(a),
        Command::Simulate(a) => simulate(a),
        Command::Compare(a) => compare(a),
        Command::Cv(a) => cv(a),
    }
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => {
            v.trim().parse().map(Some).map_err(|_| {
                CliError::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))
            })
        }
        Err(_) => Ok(None),
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    Ok(match flag {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    })
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::from(treelet::Error::MissingFile(path.to_path_buf()))
        } else {
            CliError::Data(format!("reading {}: {e}", path.display()))
        }
    })
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Data(format!("{}: invalid JSON: {e}", path.display())))
}

/// `dir/name.csv` -> `dir/name.labels.json`.
pub fn sidecar_path(input: &Path) -> PathBuf {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    input.with_file_name(format!("{stem}.labels.json"))
}

fn sidecar_scale(input: &Path) -> Result<Scale, CliError> {
    let path = sidecar_path(input);
    if !path.exists() {
        return Ok(Scale::Log);
    }
    let v = read_json(&path)?;
    Ok(match v.get("scale").and_then(Value::as_str) {
        Some("raw") => Scale::Raw,
        _ => Scale::Log,
    })
}

struct Loaded {
    data: DataMatrix,
    digest: String,
}

fn load_input(ingest: &Ingest) -> Result<Loaded, CliError> {
    let bytes = read_bytes(&ingest.input)?;
    let digest = sha256_hex(&bytes);
    let mut data = parse_csv(&bytes)?.with_scale(sidecar_scale(&ingest.input)?);
    if ingest.log {
        data = log_transform(&data)?;
    } else if data.scale() == Scale::Raw {
        return Err(CliError::Data(format!(
            "{} is raw-scale (per {}); rerun with --log to apply log_transform",
            ingest.input.display(),
            sidecar_path(&ingest.input).display()
        )));
    }
    if ingest.normalize {
        data = global_normalize(&data);
    }
    Ok(Loaded { data, digest })
}

fn read_label_values(path: &Path) -> Result<Vec<i64>, CliError> {
    let v = read_json(path)?;
    let arr = match &v {
        Value::Array(a) => a,
        Value::Object(o) => match o.get("labels") {
            Some(Value::Array(a)) => a,
            _ => {
                return Err(CliError::Data(format!(
                    "{}: expected an array or an object with a `labels` array",
                    path.display()
                )))
            }
        },
        _ => {
            return Err(CliError::Data(format!(
                "{}: expected an array of labels",
                path.display()
            )))
        }
    };
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_i64()
                .filter(|v| *v >= 0)
                .ok_or_else(|| CliError::Data(format!("{}: labels[{i}] = {x}", path.display())))
        })
        .collect()
}

fn treelet_config(a: &TreeletArgs) -> TreeletConfig {
    TreeletConfig {
        metric: match a.metric {
            MetricArg::Cov => Metric::Covariance,
            MetricArg::Abscorr => Metric::AbsCorrelation,
        },
        retention: match a.retention {
            RetentionArg::Maxvar => Retention::MaxVariance,
            RetentionArg::Lowindex => Retention::LowIndex,
        },
    }
}

fn base_config(command: &'static str, common: &Common, seed: u64) -> RunConfig {
    RunConfig {
        command,
        output_dir: path_string(&common.output_dir),
        seed,
        ..Default::default()
    }
}

fn with_ingest(mut cfg: RunConfig, ingest: &Ingest) -> RunConfig {
    cfg.input = Some(path_string(&ingest.input));
    cfg.log = ingest.log;
    cfg.normalize = ingest.normalize;
    cfg
}

fn with_treelet(mut cfg: RunConfig, t: &TreeletArgs, level: usize) -> RunConfig {
    cfg.metric = Some(t.metric);
    cfg.retention = Some(t.retention);
    cfg.level = Some(level);
    cfg
}

fn report_written(paths: Vec<PathBuf>) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

#[derive(Serialize)]
struct WithProvenance<'a, T: Serialize> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    body: T,
}

fn fit(a: FitArgs) -> Result<(), CliError> {
    let seed = resolve_seed(a.common.seed)?;
    let loaded = load_input(&a.ingest)?;
    let data = &loaded.data;
    let level = a.treelet.level.unwrap_or(data.p().saturating_sub(1));
    let result = treelet_fit(data, level, treelet_config(&a.treelet))?;

    let config = with_treelet(
        with_ingest(base_config("fit", &a.common, seed), &a.ingest),
        &a.treelet,
        level,
    );
    let prov = Provenance::new(config, loaded.digest);

    let mut out = Artifacts::default();
    out.add(
        "basis.json",
        to_json(&WithProvenance {
            provenance: &prov,
            body: result.basis.to_document(data.var_names()),
        })?,
    );
    out.add(
        "dendrogram.json",
        to_json(&WithProvenance {
            provenance: &prov,
            body: &result.dendrogram,
        })?,
    );
    out.add(
        "dendrogram.nwk",
        newick_with_provenance(&prov, &result.dendrogram)?,
    );
    report_written(out.commit(&a.common.output_dir)?);
    Ok(())
}

fn newick_with_provenance(prov: &Provenance, dend: &Dendrogram) -> Result<Vec<u8>, CliError> {
    let meta = serde_json::to_string(prov)
        .map_err(|e| CliError::Data(format!("serialization failed: {e}")))?
        .replace(['[', ']'], "");
    Ok(format!("[{meta}]\n{}\n", dend.to_newick()).into_bytes())
}

#[derive(Serialize)]
struct TransformMeta {
    level: usize,
    coarse_indices: Vec<usize>,
    detail_indices: Vec<usize>,
    columns: Vec<String>,
}

fn transform(a: TransformArgs) -> Result<(), CliError> {
    let seed = resolve_seed(a.common.seed)?;
    let loaded = load_input(&a.ingest)?;
    let data = &loaded.data;
    let doc: BasisDocument = serde_json::from_value(read_json(&a.basis)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", a.basis.display())))?;
    let basis = doc.to_basis()?;
    if doc.var_names != data.var_names() {
        return Err(CliError::Data(format!(
            "input columns do not match the basis variables ({} vs {})",
            data.p(),
            doc.p
        )));
    }
    let level = a.level.unwrap_or(basis.levels());
    let coeffs = basis.transform(data, level)?;

    let active = basis.active_at(level);
    let columns: Vec<String> = doc
        .var_names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            if active.binary_search(&i).is_ok() {
                format!("s_{name}")
            } else {
                format!("d_{name}")
            }
        })
        .collect();
    let table = DataMatrix::new(coeffs, columns.clone(), Scale::Log)?;

    let mut config = with_ingest(base_config("transform", &a.common, seed), &a.ingest);
    config.basis = Some(path_string(&a.basis));
    config.level = Some(level);
    let prov = Provenance::new(config, loaded.digest);

    let mut out = Artifacts::default();
    out.add("coefficients.csv", table.to_csv_string().into_bytes());
    out.add(
        "transform.json",
        to_json(&WithProvenance {
            provenance: &prov,
            body: TransformMeta {
                level,
                coarse_indices: active.to_vec(),
                detail_indices: basis.diff_indices()[..level].to_vec(),
                columns,
            },
        })?,
    );
    report_written(out.commit(&a.common.output_dir)?);
    Ok(())
}

fn seed_slot(spec: &mut Value) -> Option<&mut serde_json::Map<String, Value>> {
    let model = spec.get("model").and_then(Value::as_str).map(str::to_owned);
    let obj = spec.as_object_mut()?;
    if model.as_deref() == Some("global_factor") {
        obj.get_mut("block")?.as_object_mut()
    } else {
        Some(obj)
    }
}

#[derive(Serialize)]
struct LabelsSidecar<'a> {
    model: &'a str,
    scale: Scale,
    n: usize,
    p: usize,
    var_names: &'a [String],
    labels: &'a [usize],
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let bytes = read_bytes(&a.spec)?;
    let mut raw: Value = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Data(format!("{}: invalid JSON: {e}", a.spec.display())))?;

    let env = env_seed()?;
    let seed = {
        let slot = seed_slot(&mut raw).ok_or_else(|| {
            CliError::Data(format!("{}: spec must be an object", a.spec.display()))
        })?;
        let file_seed = slot.get("seed").and_then(Value::as_u64);
        let seed = a.common.seed.or(file_seed).or(env).unwrap_or(0);
        slot.insert("seed".into(), Value::from(seed));
        seed
    };
    let model = raw
        .get("model")
        .and_then(Value::as_str)
        .unwrap_or("")
        .to_string();
    let spec: SimSpec = serde_json::from_value(raw)
        .map_err(|e| CliError::Data(format!("{}: invalid spec: {e}", a.spec.display())))?;
    let sim = spec.generate()?;

    let mut config = base_config("simulate", &a.common, seed);
    config.spec = Some(path_string(&a.spec));
    let prov = Provenance::new(config, sha256_hex(&bytes));

    let mut out = Artifacts::default();
    out.add("data.csv", sim.data.to_csv_string().into_bytes());
    out.add(
        "data.labels.json",
        to_json(&WithProvenance {
            provenance: &prov,
            body: LabelsSidecar {
                model: &model,
                scale: sim.data.scale(),
                n: sim.data.n(),
                p: sim.data.p(),
                var_names: sim.data.var_names(),
                labels: &sim.labels,
            },
        })?,
    );
    report_written(out.commit(&a.common.output_dir)?);
    Ok(())
}

#[derive(Serialize)]
struct CompareBody<'a> {
    report: &'a CompareReport,
}

fn compare(a: CompareArgs) -> Result<(), CliError> {
    let seed = resolve_seed(a.common.seed)?;
    let loaded = load_input(&a.ingest)?;
    let data = &loaded.data;
    let labels: Vec<usize> = read_label_values(&a.labels)?
        .into_iter()
        .map(|v| v as usize)
        .collect();
    let level = a.treelet.level.unwrap_or(data.p().saturating_sub(1));
    let cfg = CompareConfig {
        treelet: treelet_config(&a.treelet),
        level: Some(level),
        linkage: match a.linkage {
            LinkageArg::Average => Linkage::Average,
            LinkageArg::Complete => Linkage::Complete,
        },
        ..Default::default()
    };
    let (report, timings): (CompareReport, Timings) = compare_report(data, &labels, &cfg)?;

    let mut config = with_treelet(
        with_ingest(base_config("compare", &a.common, seed), &a.ingest),
        &a.treelet,
        level,
    );
    config.labels = Some(path_string(&a.labels));
    config.linkage = Some(a.linkage);
    let prov = Provenance::new(config, loaded.digest);

    let mut energy = String::from("k,treelet,pca\n");
    for (k, (t, p)) in report
        .treelet
        .energy
        .iter()
        .zip(&report.pca.energy)
        .enumerate()
    {
        energy.push_str(&format!("{k},{t:?},{p:?}\n"));
    }

    let mut out = Artifacts::default();
    out.add(
        "compare.json",
        to_json(&WithProvenance {
            provenance: &prov,
            body: CompareBody { report: &report },
        })?,
    );
    out.add("energy.csv", energy.into_bytes());
    out.add("timing.json", to_json(&timings)?);
    report_written(out.commit(&a.common.output_dir)?);
    Ok(())
}

#[derive(Serialize)]
struct CvRep {
    rep: usize,
    seed: u64,
    report: CvReport,
}

#[derive(Serialize)]
struct CvSummary {
    reps: usize,
    mean_accuracy: f64,
    within_chance: usize,
}

#[derive(Serialize)]
struct CvBody {
    summary: CvSummary,
    runs: Vec<CvRep>,
}

fn cv(a: CvArgs) -> Result<(), CliError> {
    let seed = resolve_seed(a.common.seed)?;
    if a.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    if a.common.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let loaded = load_input(&a.ingest)?;
    let data = &loaded.data;
    if a.folds > data.n() || a.folds < 2 {
        return Err(CliError::Usage(format!(
            "--folds must lie in 2..={} (the number of rows), got {}",
            data.n(),
            a.folds
        )));
    }
    let y: Vec<u8> = read_label_values(&a.labels)?
        .into_iter()
        .map(|v| {
            u8::try_from(v)
                .ok()
                .filter(|c| *c <= 1)
                .ok_or_else(|| CliError::Data(format!("class label {v} is not 0 or 1")))
        })
        .collect::<Result<_, _>>()?;
    let level = a.treelet.level.unwrap_or(data.p().saturating_sub(1));
    let base = CvConfig {
        folds: a.folds,
        k: a.k,
        mode: match a.mode {
            ModeArg::Clean => CvMode::Clean,
            ModeArg::Leaky => CvMode::Leaky,
        },
        seed,
        level: Some(level),
        treelet: treelet_config(&a.treelet),
        score: match a.score {
            ScoreArg::Separation => FeatureScore::Separation,
            ScoreArg::Variance => FeatureScore::Variance,
        },
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.common.threads)
        .build()
        .map_err(|e| CliError::Data(format!("thread pool: {e}")))?;
    let runs: Vec<CvRep> = pool.install(|| {
        (0..a.reps)
            .into_par_iter()
            .map(|rep| {
                let rep_seed = seed.wrapping_add(rep as u64);
                let labels = if a.permute_labels {
                    shuffled_labels(&y, rep_seed)
                } else {
                    y.clone()
                };
                let cfg = CvConfig {
                    seed: rep_seed,
                    ..base
                };
                nearest_centroid_cv(data, &labels, &cfg).map(|report| CvRep {
                    rep,
                    seed: rep_seed,
                    report,
                })
            })
            .collect::<treelet::Result<Vec<_>>>()
    })?;

    let summary = CvSummary {
        reps: runs.len(),
        mean_accuracy: runs.iter().map(|r| r.report.mean_accuracy).sum::<f64>() / runs.len() as f64,
        within_chance: runs.iter().filter(|r| r.report.within_chance()).count(),
    };
    let mut folds_csv = String::from("rep,seed,fold,accuracy\n");
    for r in &runs {
        for (f, acc) in r.report.per_fold_accuracy.iter().enumerate() {
            folds_csv.push_str(&format!("{},{},{},{:?}\n", r.rep, r.seed, f, acc));
        }
    }

    let mut config = with_treelet(
        with_ingest(base_config("cv", &a.common, seed), &a.ingest),
        &a.treelet,
        level,
    );
    config.labels = Some(path_string(&a.labels));
    config.k = Some(a.k);
    config.folds = Some(a.folds);
    config.mode = Some(a.mode);
    config.score = Some(a.score);
    config.reps = Some(a.reps);
    config.permute_labels = a.permute_labels;
    let prov = Provenance::new(config, loaded.digest);

    let mut out = Artifacts::default();
    out.add(
        "cv.json",
        to_json(&WithProvenance {
            provenance: &prov,
            body: CvBody { summary, runs },
        })?,
    );
    out.add("cv_folds.csv", folds_csv.into_bytes());
    report_written(out.commit(&a.common.output_dir)?);
    Ok(())
}
