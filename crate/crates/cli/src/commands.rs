use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use infband::combinat::{enumerate_pair_partitions_capped, genus, is_noncrossing};
use infband::counting::BandGeometry;
use infband::freeharm::{
    deformed_typeb, evaluate_typeb, free_convolve, typeb_convolve, Atom, DensityPoint, GridSpec, Measure, PerturbationSpec, SignedMeasure,
    TypeBDistribution,
};
use infband::moments::{exact_trace_moment, infinitesimal_correction_limit};
use infband::quotient::{build_quotient, is_double_tree};
use infband::rmtsim::{f_statistic, histogram, run_experiment, EnsembleSpec, Perturbation};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Command, ConvolveArgs, Format, GridArgs, LimitArgs, MomentsArgs, PartitionsArgs, SimulateArgs, TableOutput, TypebArgs};
use crate::error::{CliError, CliResult};
use crate::output::{with_suffix, write_json, write_table};
use crate::spec::MeasureSpec;

/// Measured cost of one dense `N = 2000` realization on one core, in seconds.
const SECONDS_PER_REP_AT_2000: f64 = 0.4;
/// Runs estimated to take longer than this print a warning first.
const COST_WARNING_SECONDS: f64 = 120.0;

pub struct Context {
    pub invocation: Command,
    pub threads: Option<usize>,
}

impl Context {
    fn manifest(&self, outputs: &[PathBuf], results: Value) -> Value {
        json!({
            "command": self.invocation.name(),
            "invocation": self.invocation,
            "threads": self.threads,
            "version": infband::VERSION,
            "timestamp": Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "results": results,
        })
    }

    /// Table commands write their manifest beside the table, or to standard
    /// error as one line when the table goes to standard output.
    fn emit_table_manifest(&self, output: &TableOutput, results: Value) -> CliResult<()> {
        match &output.out {
            Some(path) => write_json(&path.with_extension("manifest.json"), &self.manifest(std::slice::from_ref(path), results)),
            None => {
                eprintln!("manifest: {}", serde_json::to_string(&self.manifest(&[], results))?);
                Ok(())
            }
        }
    }
}

pub fn run(ctx: &Context) -> CliResult<()> {
    match &ctx.invocation {
        Command::Partitions(a) => partitions(ctx, a),
        Command::Moments(a) => moments(ctx, a),
        Command::Limit(a) => limit(ctx, a),
        Command::Simulate(a) => simulate(ctx, a),
        Command::Convolve(a) => convolve(ctx, a),
        Command::Typeb(a) => typeb(ctx, a),
        Command::Rerun(_) => Err(CliError::Usage("rerun must be resolved before dispatch".into())),
    }
}

#[derive(Serialize)]
struct PartitionRow {
    partition: String,
    cycle_count: usize,
    genus: usize,
    is_noncrossing: bool,
    is_double_tree: bool,
}

fn partitions(ctx: &Context, a: &PartitionsArgs) -> CliResult<()> {
    let rows: Vec<PartitionRow> = enumerate_pair_partitions_capped(a.ell, a.cap)?
        .map(|pp| {
            let profile = genus(&pp);
            PartitionRow {
                partition: pp.to_string(),
                cycle_count: profile.cycle_count,
                genus: profile.genus,
                is_noncrossing: is_noncrossing(&pp),
                is_double_tree: is_double_tree(&build_quotient(&pp)),
            }
        })
        .filter(|r| a.genus.is_none_or(|g| r.genus == g) && (!a.noncrossing || r.is_noncrossing))
        .collect();
    write_table(a.output.out.as_deref(), &rows, a.output.format)?;
    ctx.emit_table_manifest(&a.output, json!({ "rows": rows.len() }))
}

#[derive(Serialize)]
struct MomentRow {
    ell: usize,
    #[serde(rename = "N")]
    n: usize,
    b: usize,
    mode: String,
    sigma2: f64,
    exact: f64,
    catalan_term: f64,
    correction: f64,
}

#[derive(Serialize)]
struct MomentRecord {
    #[serde(flatten)]
    row: MomentRow,
    /// `E[Tr Ξ^{2ℓ}]` and the correction at `σ = 1`, as exact fractions.
    exact_at_unit_variance: String,
    correction_at_unit_variance: String,
}

fn moments(ctx: &Context, a: &MomentsArgs) -> CliResult<()> {
    let geom = BandGeometry::new(a.n, a.b, a.mode)?;
    let records = a
        .ell
        .iter()
        .map(|&ell| {
            let m = exact_trace_moment(ell, &geom, a.sigma2)?;
            Ok(MomentRecord {
                row: MomentRow {
                    ell,
                    n: a.n,
                    b: a.b,
                    mode: a.mode.to_string(),
                    sigma2: a.sigma2,
                    exact: m.value(),
                    catalan_term: m.catalan_value(),
                    correction: m.correction(),
                },
                exact_at_unit_variance: m.exact.to_string(),
                correction_at_unit_variance: m.correction_exact().to_string(),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let exact: Vec<(usize, &str)> = records.iter().map(|r| (r.row.ell, r.exact_at_unit_variance.as_str())).collect();
    let results = json!({ "xi": geom.xi(), "exact_at_unit_variance": exact });
    match a.output.format {
        Format::Json => write_table(a.output.out.as_deref(), &records, a.output.format)?,
        Format::Csv => {
            let rows: Vec<&MomentRow> = records.iter().map(|r| &r.row).collect();
            write_table(a.output.out.as_deref(), &rows, a.output.format)?
        }
    }
    ctx.emit_table_manifest(&a.output, results)
}

#[derive(Serialize)]
struct LimitRow {
    partition: String,
    integral: Option<f64>,
    stderr: f64,
    contribution: f64,
}

fn limit(ctx: &Context, a: &LimitArgs) -> CliResult<()> {
    let lim = infinitesimal_correction_limit(a.ell, a.c, a.sigma2, a.samples, a.seed)?;
    let (lo, hi) = lim.sandwich()?;
    eprintln!(
        "m_{}(σ² = {}, c = {}) = {} ± {} from {} genus-one partitions (bounds [{lo}, {hi}])",
        2 * a.ell,
        a.sigma2,
        a.c,
        lim.value,
        lim.stderr,
        lim.terms.len()
    );
    let results = json!({ "value": lim.value, "stderr": lim.stderr, "genus_one_count": lim.terms.len(), "bounds": [lo, hi] });
    match a.output.format {
        Format::Json => {
            let record = json!({ "limit": lim, "genus_one_count": lim.terms.len(), "bounds": [lo, hi] });
            write_table(a.output.out.as_deref(), std::slice::from_ref(&record), a.output.format)?;
        }
        Format::Csv => {
            let mut rows: Vec<LimitRow> = lim
                .terms
                .iter()
                .map(|t| LimitRow {
                    partition: t.partition.clone(),
                    integral: Some(t.integral),
                    stderr: t.stderr,
                    contribution: t.contribution,
                })
                .collect();
            rows.push(LimitRow { partition: "total".into(), integral: None, stderr: lim.stderr, contribution: lim.value });
            write_table(a.output.out.as_deref(), &rows, a.output.format)?;
        }
    }
    ctx.emit_table_manifest(&a.output, results)
}

/// Rough wall-clock estimate for a simulation run.
fn estimated_seconds(n: usize, reps: usize) -> f64 {
    let per_rep = SECONDS_PER_REP_AT_2000 * (n as f64 / 2000.0).powi(3);
    per_rep * reps as f64 / rayon::current_num_threads() as f64
}

fn simulate(ctx: &Context, a: &SimulateArgs) -> CliResult<()> {
    if a.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let perturbation = if a.delocalized { Perturbation::Delocalized(a.theta) } else { Perturbation::Diagonal(vec![a.theta]) };
    let spec = EnsembleSpec { band: BandGeometry::new(a.n, a.b, a.mode)?, sigma2: a.sigma2, perturbation, seed: a.seed, reps: a.reps };
    spec.validate()?;
    f_statistic(a.kind, 0.0, &spec)?;
    let estimate = estimated_seconds(a.n, a.reps);
    if estimate > COST_WARNING_SECONDS {
        let threads = rayon::current_num_threads();
        eprintln!(
            "warning: N = {}, {} reps is estimated to take about {:.0} minutes with {threads} worker thread{}",
            a.n,
            a.reps,
            estimate / 60.0,
            if threads == 1 { "" } else { "s" }
        );
    }
    let summary = run_experiment(&spec, a.kind)?;
    let f: Vec<f64> = summary.records.iter().map(|r| r.f).collect();
    let bins = histogram(&f, a.hist_lo, a.hist_hi, a.bins)?;
    let ext = a.format.extension();
    let realizations = a.out.join(format!("realizations.{ext}"));
    let hist = a.out.join(format!("histogram.{ext}"));
    write_table(Some(&realizations), &summary.records, a.format)?;
    write_table(Some(&hist), &bins, a.format)?;
    let results = json!({ "spec": summary.manifest.spec, "kind": a.kind, "aggregates": summary.aggregates });
    write_json(&a.out.join("manifest.json"), &ctx.manifest(&[realizations, hist], results))?;
    if let Some(agg) = summary.aggregates {
        println!(
            "reps {}: mean λ₁ {:.6}, F mean {:.6}, F variance {:.6}, KS distance {:.6}",
            a.reps, agg.lambda1_mean, agg.f_mean, agg.f_variance, agg.ks_distance
        );
    }
    Ok(())
}

fn grid(g: &GridArgs) -> CliResult<GridSpec> {
    Ok(GridSpec::with_ladder(g.grid_lo, g.grid_hi, g.grid_n, vec![g.eta, g.eta / 2.0, g.eta / 4.0])?)
}

/// Writes `PREFIX.density.*`, `PREFIX.atoms.json` and `PREFIX.manifest.json`.
fn write_density_outputs(
    ctx: &Context,
    prefix: &Path,
    format: Format,
    density: &[DensityPoint],
    atoms: Value,
    results: Value,
) -> CliResult<()> {
    let density_path = with_suffix(prefix, &format!(".density.{}", format.extension()));
    let atoms_path = with_suffix(prefix, ".atoms.json");
    write_table(Some(&density_path), density, format)?;
    write_json(&atoms_path, &atoms)?;
    write_json(&with_suffix(prefix, ".manifest.json"), &ctx.manifest(&[density_path, atoms_path], results))
}

fn atoms_json(atoms: &[Atom]) -> Value {
    json!({ "atoms": atoms })
}

fn convolve(ctx: &Context, a: &ConvolveArgs) -> CliResult<()> {
    let mu1 = a.mu1.parse::<MeasureSpec>()?.probability()?;
    let mu2 = a.mu2.parse::<MeasureSpec>()?.probability()?;
    let out = free_convolve(&mu1, &mu2, &grid(&a.grid)?)?;
    for atom in &out.atoms {
        println!("atom at {} with weight {}", atom.loc, atom.weight);
    }
    println!("max subordination residual {:.3e}", out.max_residual);
    write_density_outputs(
        ctx,
        &a.out,
        a.format,
        &out.density,
        atoms_json(&out.atoms),
        json!({ "max_residual": out.max_residual, "atoms": out.atoms }),
    )
}

fn typeb(ctx: &Context, a: &TypebArgs) -> CliResult<()> {
    let mu = a.mu.parse::<MeasureSpec>()?;
    let nu = a.nu.parse::<MeasureSpec>()?.signed()?;
    let pert = PerturbationSpec::new(a.theta.clone(), a.delocalized)?;
    let grid = grid(&a.grid)?;
    if let MeasureSpec::Semicircle(sigma) = mu {
        let report = deformed_typeb(sigma, &nu, &pert, &grid)?;
        let density: Vec<DensityPoint> = report.grid.iter().map(|p| DensityPoint { x: p.x, density: p.density, err: p.err }).collect();
        for atom in &report.atoms {
            println!("atom at {} with weight {}", atom.loc, atom.weight);
        }
        println!("max discrepancy from the closed form {:.3e}", report.max_discrepancy);
        let atoms = json!({ "atoms": report.atoms, "outliers": report.outliers, "predicted_atoms": report.closed_form.atoms });
        let results = json!({ "max_discrepancy": report.max_discrepancy, "atoms": report.atoms, "outliers": report.outliers });
        return write_density_outputs(ctx, &a.out, a.format, &density, atoms, results);
    }
    let mut dist = TypeBDistribution::new(mu.probability()?, nu);
    for &theta in &pert.all_thetas() {
        let spike = TypeBDistribution::new(Measure::dirac(0.0), SignedMeasure::from_atoms(&[(theta, 1.0), (0.0, -1.0)]));
        dist = typeb_convolve(&dist, &spike);
    }
    let report = evaluate_typeb(&dist, &grid)?;
    for atom in &report.nu_atoms {
        println!("atom at {} with weight {}", atom.loc, atom.weight);
    }
    write_density_outputs(ctx, &a.out, a.format, &report.nu_density, atoms_json(&report.nu_atoms), json!({ "atoms": report.nu_atoms }))
}

/// Loads the invocation and thread count recorded in a manifest.
pub fn load_manifest(path: &Path) -> CliResult<(Command, Option<usize>)> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{} is not a manifest: {e}", path.display())))?;
    let invocation =
        value.get("invocation").cloned().ok_or_else(|| CliError::Usage(format!("{} has no recorded invocation", path.display())))?;
    let command: Command =
        serde_json::from_value(invocation).map_err(|e| CliError::Usage(format!("{} has an unreadable invocation: {e}", path.display())))?;
    if matches!(command, Command::Rerun(_)) {
        return Err(CliError::Usage("a manifest cannot record another rerun".into()));
    }
    let threads = value.get("threads").and_then(Value::as_u64).map(|t| t as usize);
    Ok((command, threads))
}
