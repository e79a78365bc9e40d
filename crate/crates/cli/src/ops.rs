//! Command implementations and the error-to-exit-code mapping.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use mvrf::evaluation::{run_protocol, EvalReport, ProtocolRun, ReportMeta, SplitPlan};
use mvrf::io::{
    generate_synthetic, load_dataset, load_external_column, load_model, load_query_rows,
    save_model, SynthSpec, ViewManifest,
};
use mvrf::{train_multiview, Combiner, Error, ForestConfig, MultiViewDataset};

use crate::{
    Cli, Command, DataArgs, EvaluateArgs, ForestArgs, PredictArgs, ProtocolArgs, SweepArgs,
    TrainArgs,
};

pub enum CliError {
    Usage(String),
    Data(Error),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Data(err) => write!(f, "{err}"),
            CliError::Internal(msg) => write!(f, "internal: {msg}"),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Library failures while loading or running. Undefined out-of-bag
/// accuracy never reaches the surface through supported paths, so it
/// marks a bug rather than bad data.
fn data_err(err: Error) -> CliError {
    match err {
        Error::UndefinedOobAccuracy => {
            CliError::Internal("out-of-bag accuracy was undefined".to_string())
        }
        other => CliError::Data(other),
    }
}

fn internal(err: Error) -> CliError {
    CliError::Internal(err.to_string())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    match cli.command {
        Command::Evaluate(args) => evaluate(args),
        Command::SweepA(args) => sweep_a(args),
        Command::Train(args) => train(args),
        Command::Predict(args) => predict(args),
    }
}

fn evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let methods = parse_methods(&args.methods)?;
    let (plan, config, neighbors) = protocol_setup(&args.forest, &args.protocol)?;
    let datasets = load_sources(&args.data)?;
    let runs = protocol_runs(&datasets, &methods, &plan, &config, neighbors)?;
    let external = match &args.external {
        Some(path) => Some(load_external_column(path).map_err(data_err)?),
        None => None,
    };
    let report = EvalReport::new(report_meta(&config, neighbors, &plan), runs, external)
        .map_err(data_err)?;
    let markdown = report.to_markdown().map_err(internal)?;
    write_outputs(
        &args.out,
        &[
            ("report.md", &markdown),
            ("accuracies.csv", &report.to_csv()),
        ],
    )?;
    print!("{markdown}");
    Ok(())
}

fn sweep_a(args: SweepArgs) -> Result<(), CliError> {
    let methods: Vec<Combiner> = parse_a_grid(&args.a_grid)?
        .into_iter()
        .map(Combiner::GlobalLocalBlend)
        .collect();
    let (plan, config, neighbors) = protocol_setup(&args.forest, &args.protocol)?;
    let datasets = load_sources(&args.data)?;
    let runs = protocol_runs(&datasets, &methods, &plan, &config, neighbors)?;
    let report =
        EvalReport::sweep(report_meta(&config, neighbors, &plan), runs).map_err(data_err)?;
    let markdown = report.to_markdown().map_err(internal)?;
    write_outputs(
        &args.out,
        &[("sweep.md", &markdown), ("sweep.csv", &report.to_csv())],
    )?;
    print!("{markdown}");
    Ok(())
}

fn train(args: TrainArgs) -> Result<(), CliError> {
    if args.forest.trees == 0 {
        return Err(usage("--trees must be at least 1"));
    }
    let datasets = load_sources(&args.data)?;
    if datasets.len() != 1 {
        return Err(usage(format!(
            "train expects exactly one dataset, got {}",
            datasets.len()
        )));
    }
    let seed = resolve_seed(args.forest.seed);
    let config = ForestConfig {
        n_trees: args.forest.trees,
        seed,
        ..ForestConfig::default()
    };
    let ensemble = train_multiview(&datasets[0], &config).map_err(data_err)?;
    for (name, weight) in datasets[0]
        .view_names()
        .iter()
        .zip(ensemble.static_weights())
    {
        println!("view {name}: oob accuracy {weight:.4}");
    }
    fs::create_dir_all(&args.out).map_err(|e| file_err(&args.out, e))?;
    let path = args.out.join("model.json");
    save_model(&ensemble, &path).map_err(data_err)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn predict(args: PredictArgs) -> Result<(), CliError> {
    if args.neighbors == 0 {
        return Err(usage("--neighbors must be at least 1"));
    }
    let combiner = parse_combiner(args.method.trim())?;
    let ensemble = load_model(&args.model).map_err(data_err)?;
    let manifest = ViewManifest::from_path(&args.manifest).map_err(data_err)?;
    let rows = load_query_rows(&args.data, &manifest).map_err(data_err)?;
    let n_views = ensemble.n_views();
    let mut csv = String::from("row,label,fallback");
    for q in 0..n_views {
        csv.push_str(&format!(",view{q}_label,view{q}_weight"));
    }
    csv.push('\n');
    for (i, row) in rows.iter().enumerate() {
        let sample: Vec<&[f64]> = row.iter().map(Vec::as_slice).collect();
        let record = ensemble
            .predict(&sample, combiner, args.neighbors)
            .map_err(data_err)?;
        csv.push_str(&format!(
            "{i},{},{}",
            record.label, record.majority_fallback
        ));
        for q in 0..n_views {
            csv.push_str(&format!(
                ",{},{}",
                record.view_labels[q], record.weights.weights[q]
            ));
        }
        csv.push('\n');
    }
    write_outputs(&args.out, &[("predictions.csv", &csv)])
}

fn protocol_setup(
    forest: &ForestArgs,
    protocol: &ProtocolArgs,
) -> Result<(SplitPlan, ForestConfig, usize), CliError> {
    if forest.trees == 0 {
        return Err(usage("--trees must be at least 1"));
    }
    if forest.neighbors == 0 {
        return Err(usage("--neighbors must be at least 1"));
    }
    if protocol.repeats == 0 {
        return Err(usage("--repeats must be at least 1"));
    }
    if !(protocol.fraction > 0.0 && protocol.fraction < 1.0) {
        return Err(usage("--fraction must lie strictly between 0 and 1"));
    }
    let seed = resolve_seed(forest.seed);
    let plan = SplitPlan {
        repeats: protocol.repeats,
        fraction: protocol.fraction,
        stratified: true,
        seed,
    };
    let config = ForestConfig {
        n_trees: forest.trees,
        seed,
        ..ForestConfig::default()
    };
    Ok((plan, config, forest.neighbors))
}

/// Reports must always carry a seed, so a missing one is drawn from the
/// OS and echoed for reproduction.
fn resolve_seed(seed: Option<u64>) -> u64 {
    match seed {
        Some(seed) => seed,
        None => {
            let seed: u64 = rand::random();
            eprintln!("seed: {seed} (auto-generated; pass --seed {seed} to reproduce)");
            seed
        }
    }
}

fn load_sources(args: &DataArgs) -> Result<Vec<MultiViewDataset>, CliError> {
    if args.data.is_empty() && args.synth.is_empty() {
        return Err(usage(
            "no dataset given: pass --data with --manifest, or --synth",
        ));
    }
    if args.data.is_empty() {
        if !args.manifest.is_empty() {
            return Err(usage("--manifest given without --data"));
        }
    } else if args.manifest.len() != 1 && args.manifest.len() != args.data.len() {
        return Err(usage(format!(
            "{} data table(s) need one shared or {} matching --manifest flags, got {}",
            args.data.len(),
            args.data.len(),
            args.manifest.len()
        )));
    }
    let mut datasets = Vec::new();
    for (i, path) in args.data.iter().enumerate() {
        let manifest_path = if args.manifest.len() == 1 {
            &args.manifest[0]
        } else {
            &args.manifest[i]
        };
        let manifest = ViewManifest::from_path(manifest_path).map_err(data_err)?;
        let (data, _) = load_dataset(path, &manifest).map_err(data_err)?;
        datasets.push(data.with_name(stem(path)));
    }
    for path in &args.synth {
        let spec = SynthSpec::from_path(path).map_err(data_err)?;
        datasets.push(generate_synthetic(&spec).map_err(data_err)?.data);
    }
    Ok(datasets)
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(
        || path.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

fn protocol_runs(
    datasets: &[MultiViewDataset],
    methods: &[Combiner],
    plan: &SplitPlan,
    config: &ForestConfig,
    neighbors: usize,
) -> Result<Vec<ProtocolRun>, CliError> {
    datasets
        .iter()
        .map(|data| run_protocol(data, methods, plan, config, neighbors).map_err(data_err))
        .collect()
}

fn report_meta(config: &ForestConfig, neighbors: usize, plan: &SplitPlan) -> ReportMeta {
    ReportMeta {
        n_trees: config.n_trees,
        n_neighbor: neighbors,
        repeats: plan.repeats,
        fraction: plan.fraction,
        seed: plan.seed,
    }
}

fn parse_combiner(token: &str) -> Result<Combiner, CliError> {
    let combiner = Combiner::from_str(token).map_err(|e| usage(e.to_string()))?;
    combiner.validate().map_err(|e| usage(e.to_string()))?;
    Ok(combiner)
}

fn parse_methods(text: &str) -> Result<Vec<Combiner>, CliError> {
    let mut methods = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        if !token.is_empty() {
            methods.push(parse_combiner(token)?);
        }
    }
    if methods.is_empty() {
        return Err(usage("--methods must name at least one combiner"));
    }
    Ok(methods)
}

fn parse_a_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let mut grid = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        let a: f64 = token
            .parse()
            .map_err(|_| usage(format!("--a-grid entry '{token}' is not a number")))?;
        if !(0.0..=1.0).contains(&a) {
            return Err(usage(format!("--a-grid entry {a} lies outside [0, 1]")));
        }
        grid.push(a);
    }
    if grid.is_empty() {
        return Err(usage("--a-grid must name at least one exponent"));
    }
    Ok(grid)
}

fn write_outputs(dir: &Path, files: &[(&str, &str)]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| file_err(dir, e))?;
    for (name, contents) in files {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| file_err(&path, e))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn file_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Data(Error::File {
        path: path.display().to_string(),
        source,
    })
}
