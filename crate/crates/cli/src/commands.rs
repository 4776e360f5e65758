use std::collections::BTreeMap;

use serde::Serialize;
use tonsure_core::association::full_subset;
use tonsure_core::ingest::{default_delimiter, load_pair, ColumnSpec};
use tonsure_core::null::{gen_gaussian_pair, gh_transform, sample_skewness, GaussianPairSpec, GandHSpec, NullSpec, GENERATOR_ID};
use tonsure_core::scans::{
    run_beta_scan, run_octant_scan, run_tail_scan, run_tonsure_scan, BetaScanConfig, NamedCurve, OctantScanConfig,
    TailScanConfig, TonsureScanConfig,
};
use tonsure_core::{pearson, spearman, Metric, PairedSeries, ScanCurve, Space};

use crate::args::{BetaArgs, Command, InputArgs, NullArgs, OctantsArgs, OutputArgs, SimulateArgs, TaildepArgs, TonsureArgs};
use crate::error::CliError;
use crate::output::{curve_rows, sha256_file, write_octant_table, write_rows, InputRecord, Manifest, OutputDir};
use crate::plot::line_chart;

pub fn dispatch(command: Command) -> Result<(), CliError> {
    let name = command.name();
    match command {
        Command::Tonsure(a) => tonsure(name, a),
        Command::Taildep(a) => taildep(name, a),
        Command::Octants(a) => octants(name, a),
        Command::Beta(a) => beta(name, a),
        Command::Simulate(a) => simulate(name, a),
    }
}

/// Resolved flags in command-line order. Feeds both the manifest config
/// table and its `rerun` line.
#[derive(Default)]
struct Resolved(Vec<(&'static str, String)>);

impl Resolved {
    fn set(&mut self, flag: &'static str, value: impl ToString) {
        self.0.push((flag, value.to_string()));
    }

    fn manifest(self, command: &str, inputs: Vec<InputRecord>, metadata: BTreeMap<String, String>) -> Manifest {
        let mut rerun = format!("tonsure {command}");
        for (flag, value) in &self.0 {
            rerun.push_str(&format!(" --{flag} {value}"));
        }
        Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            generator: GENERATOR_ID.to_string(),
            rerun,
            config: self.0.into_iter().map(|(k, v)| (k.replace('-', "_"), v)).collect(),
            inputs,
            metadata,
            outputs: BTreeMap::new(),
        }
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn load(input: &InputArgs, resolved: &mut Resolved) -> Result<(PairedSeries, Vec<InputRecord>), CliError> {
    let spec = |r: &crate::args::InputRef, t: crate::args::TransformArg| {
        let mut s = ColumnSpec::new(r.path.clone(), r.column.clone());
        s.transform = t.into();
        s.delimiter = input.delimiter.unwrap_or_else(|| default_delimiter(&r.path));
        s
    };
    let x = spec(&input.input_x, input.transform_x);
    let y = spec(&input.input_y, input.transform_y);
    let (series, _) = load_pair(&x, &y, input.align.into())?;

    resolved.set("input-x", &input.input_x);
    resolved.set("input-y", &input.input_y);
    resolved.set("transform-x", x.transform.as_str());
    resolved.set("transform-y", y.transform.as_str());
    if let Some(d) = input.delimiter {
        resolved.set("delimiter", delimiter_name(d));
    }
    resolved.set(
        "align",
        match input.align {
            crate::args::AlignArg::Key => "key",
            crate::args::AlignArg::Positional => "positional",
        },
    );

    let mut records = Vec::new();
    for (role, spec) in [("x", &x), ("y", &y)] {
        records.push(InputRecord {
            role: role.to_string(),
            path: spec.path.display().to_string(),
            column: spec.column.to_string(),
            transform: spec.transform.as_str().to_string(),
            sha256: sha256_file(&spec.path)?,
        });
    }
    Ok((series, records))
}

fn delimiter_name(d: u8) -> String {
    match d {
        b'\t' => "tab".into(),
        b',' => "comma".into(),
        b';' => "semicolon".into(),
        other => (other as char).to_string(),
    }
}

fn null_spec(args: &NullArgs, default_on: bool, resolved: &mut Resolved) -> Result<Option<NullSpec>, CliError> {
    let on = args.null.map_or(default_on, |s| s.is_on());
    resolved.set("null", if on { "on" } else { "off" });
    resolved.set("replicates", args.replicates);
    resolved.set("seed", args.seed);
    if !on {
        return Ok(None);
    }
    if args.replicates == 0 {
        return Err(CliError::Usage("--replicates must be at least 1 with --null on".into()));
    }
    Ok(Some(NullSpec {
        replicates: args.replicates,
        seed: args.seed,
        ..Default::default()
    }))
}

fn require_values(scan: &ScanCurve) -> Result<(), CliError> {
    let any = scan.curves.iter().any(|c| c.points.iter().any(|p| p.value.is_some()));
    if any {
        Ok(())
    } else {
        Err(CliError::Degenerate("no grid level produced a value".into()))
    }
}

fn emit(
    command: &str,
    output: &OutputArgs,
    mut resolved: Resolved,
    inputs: Vec<InputRecord>,
    scan: &ScanCurve,
    charts: &[(&str, &str, &str, Vec<&NamedCurve>)],
    extra: impl FnOnce(&mut OutputDir) -> Result<(), CliError>,
) -> Result<(), CliError> {
    resolved.set("plots", output.plots.as_str());
    let mut out = OutputDir::create(&output.out)?;
    write_rows(&out.file("curves.csv"), &curve_rows(scan))?;
    extra(&mut out)?;
    if output.plots.is_on() {
        for (file, title, y_label, curves) in charts {
            if !curves.is_empty() {
                let svg = line_chart(title, scan.kind.x_label(), y_label, curves);
                out.write_text(file, &svg)?;
            }
        }
    }
    out.finish(resolved.manifest(command, inputs, scan.metadata.clone()))
}

fn tonsure(command: &str, a: TonsureArgs) -> Result<(), CliError> {
    let mut resolved = Resolved::default();
    let (series, inputs) = load(&a.input, &mut resolved)?;
    let cfg = TonsureScanConfig {
        metric: a.metric.into(),
        space: a.space.into(),
        measures: a.measures.clone(),
        step_percent: a.step,
        min_survivors: a.min_survivors,
    };
    resolved.set("metric", cfg.metric.as_str());
    resolved.set("space", cfg.space.as_str());
    resolved.set("measures", join(&cfg.measures));
    resolved.set("step", cfg.step_percent);
    resolved.set("min-survivors", cfg.min_survivors);
    let null = null_spec(&a.null, true, &mut resolved)?;

    let scan = run_tonsure_scan(&series, &cfg, null.as_ref())?;
    require_values(&scan)?;
    let title = format!(
        "Tonsured association ({}, {})",
        cfg.metric.as_str().to_uppercase(),
        cfg.space.as_str()
    );
    let charts = [("tonsure.svg", title.as_str(), "association", scan.curves.iter().collect())];
    emit(command, &a.output, resolved, inputs, &scan, &charts, |_| Ok(()))
}

fn taildep(command: &str, a: TaildepArgs) -> Result<(), CliError> {
    let mut resolved = Resolved::default();
    let (series, inputs) = load(&a.input, &mut resolved)?;
    let cfg = TailScanConfig {
        regions: a.regions.clone(),
        u_grid: a.u_grid.resolve(series.len()),
    };
    resolved.set("regions", join(&cfg.regions));
    resolved.set("u-grid", join(&cfg.u_grid));
    let null = null_spec(&a.null, true, &mut resolved)?;

    let scan = run_tail_scan(&series, &cfg, null.as_ref())?;
    let corner = |c: &&NamedCurve| c.name.parse::<tonsure_core::TailRegion>().is_ok_and(|r| r.is_corner());
    let charts = [
        (
            "tail_dependence.svg",
            "Tail dependence",
            "lambda",
            scan.curves.iter().filter(corner).collect(),
        ),
        (
            "tail_insulation.svg",
            "Tail insulation",
            "lambda",
            scan.curves.iter().filter(|c| !corner(c)).collect(),
        ),
    ];
    emit(command, &a.output, resolved, inputs, &scan, &charts, |_| Ok(()))
}

fn octants(command: &str, a: OctantsArgs) -> Result<(), CliError> {
    let mut resolved = Resolved::default();
    let (series, inputs) = load(&a.input, &mut resolved)?;
    let cfg = OctantScanConfig {
        step_percent: a.step,
        min_survivors: a.min_survivors,
    };
    resolved.set("step", cfg.step_percent);
    resolved.set("min-survivors", cfg.min_survivors);
    let null = null_spec(&a.null, true, &mut resolved)?;

    let result = run_octant_scan(&series, &cfg, null.as_ref())?;
    if result.summaries.is_empty() {
        return Err(CliError::Degenerate("every tonsure level has an empty octant group".into()));
    }
    let scan = &result.curve;
    let charts = [
        (
            "octant_counts.svg",
            "Octant populations",
            "count",
            scan.curves.iter().filter(|c| c.name != "ratio").collect(),
        ),
        (
            "octant_ratio.svg",
            "Octant group ratio",
            "N_a / N_b",
            scan.curves.iter().filter(|c| c.name == "ratio").collect(),
        ),
    ];
    emit(command, &a.output, resolved, inputs, scan, &charts, |out| {
        write_octant_table(&out.file("octants.csv"), &result.summaries)
    })
}

fn beta(command: &str, a: BetaArgs) -> Result<(), CliError> {
    let mut resolved = Resolved::default();
    let (series, inputs) = load(&a.input, &mut resolved)?;
    let cfg = BetaScanConfig {
        thresholds: a.thresholds.clone(),
    };
    resolved.set("thresholds", join(&cfg.thresholds));
    let null = null_spec(&a.null, false, &mut resolved)?;

    let scan = run_beta_scan(&series, &cfg, null.as_ref())?;
    require_values(&scan)?;
    let charts = [("beta.svg", "Tonsured beta", "beta", scan.curves.iter().collect())];
    emit(command, &a.output, resolved, inputs, &scan, &charts, |_| Ok(()))
}

#[derive(Serialize)]
struct PairRow {
    index: usize,
    x: f64,
    y: f64,
    gh_x: f64,
    gh_y: f64,
}

#[derive(Serialize)]
struct SurfaceRow {
    g_x: f64,
    g_y: f64,
    skew_x: f64,
    skew_y: f64,
    pearson: f64,
    spearman: f64,
}

fn simulate(command: &str, a: SimulateArgs) -> Result<(), CliError> {
    let mut resolved = Resolved::default();
    resolved.set("n", a.n);
    resolved.set("rho", a.rho);
    resolved.set("seed", a.seed);
    resolved.set("g", a.g);
    resolved.set("h", a.h);
    if !a.g_grid.is_empty() {
        resolved.set("g-grid", join(&a.g_grid));
    }

    let base = gen_gaussian_pair(&GaussianPairSpec {
        n: a.n,
        rho: a.rho,
        seed: a.seed,
    })?;
    let gh = GandHSpec::new(a.g, a.h);
    let gx = gh_transform(base.xs(), &gh)?;
    let gy = gh_transform(base.ys(), &gh)?;
    let rows: Vec<PairRow> = (0..base.len())
        .map(|i| PairRow {
            index: i,
            x: base.xs()[i],
            y: base.ys()[i],
            gh_x: gx[i],
            gh_y: gy[i],
        })
        .collect();

    let mut surface = Vec::new();
    let all = full_subset(base.len());
    for &g_x in &a.g_grid {
        let tx = gh_transform(base.xs(), &GandHSpec::new(g_x, a.h))?;
        for &g_y in &a.g_grid {
            let ty = gh_transform(base.ys(), &GandHSpec::new(g_y, a.h))?;
            let s = PairedSeries::new(tx.clone(), ty.clone())?;
            surface.push(SurfaceRow {
                g_x,
                g_y,
                skew_x: sample_skewness(&tx),
                skew_y: sample_skewness(&ty),
                pearson: pearson(&s, &all)?.value,
                spearman: spearman(&s, &all)?.value,
            });
        }
    }

    let mut out = OutputDir::create(&a.out)?;
    write_rows(&out.file("pairs.csv"), &rows)?;
    if !surface.is_empty() {
        write_rows(&out.file("surface.csv"), &surface)?;
    }
    let mut metadata = BTreeMap::new();
    metadata.insert("content_hash".to_string(), base.content_hash());
    metadata.insert("metric".to_string(), Metric::L2.as_str().to_string());
    metadata.insert("space".to_string(), Space::Values.as_str().to_string());
    out.finish(resolved.manifest(command, Vec::new(), metadata))
}
