use clap::{Parser, Subcommand};
use harmrec::config::RunConfig;
use harmrec::error::Error;
use harmrec::mesh;
use harmrec::metrics;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "harmrec", about = "Poisson recovery from interior point measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Path to the JSON run configuration.
    #[arg(long, global = true, default_value = "run.json")]
    config: PathBuf,
    /// Output directory for CSV tables and JSON sidecars.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 0 picks the hardware default.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed for the optional measurement-noise knob.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Representer convergence study for a single measurement point.
    Riesz,
    /// Full recovery across levels with error columns against the exact field.
    Recover,
    /// Representer error for a family of points approaching the boundary.
    Proximity,
    /// Write the mesh hierarchy's finest level as plain text.
    MeshDump,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // ignore failure: the global pool may already be initialized
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Parse(_) | Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_sci(v: Option<f64>) -> String {
    v.map(sci).unwrap_or_default()
}

fn run(cli: &Cli) -> Result<(), Error> {
    let config = RunConfig::load(&cli.config)?;
    std::fs::create_dir_all(&cli.out)?;
    match cli.command {
        Command::Riesz => cmd_riesz(cli, &config),
        Command::Recover => cmd_recover(cli, &config),
        Command::Proximity => cmd_proximity(cli, &config),
        Command::MeshDump => cmd_mesh_dump(cli, &config),
    }
}

fn write_out(cli: &Cli, name: &str, content: &str) -> Result<(), Error> {
    std::fs::write(cli.out.join(name), content)?;
    Ok(())
}

fn cmd_riesz(cli: &Cli, config: &RunConfig) -> Result<(), Error> {
    let point = config
        .point
        .ok_or_else(|| Error::Config("point is required for the riesz command".into()))?;
    let report = metrics::representer_study(
        config.domain,
        point,
        config.levels.k_min,
        config.levels.k_max,
        config.surrogate_level()?,
        config.d,
    )?;

    let mut csv = String::from("level,h,err_h1,err_linf,err_linf_d,rate_h1,rate_linf,rate_linf_d\n");
    for row in &report.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.level,
            sci(row.h),
            sci(row.err_h1),
            sci(row.err_linf),
            sci(row.err_linf_d),
            opt_sci(row.rate_h1),
            opt_sci(row.rate_linf),
            opt_sci(row.rate_linf_d),
        ));
    }
    write_out(cli, "riesz.csv", &csv)?;

    let [r_h1, r_linf, r_linf_d] = report.ls_rates();
    let sidecar = json!({
        "config": config,
        "report": report,
        "ls_rates": {"h1": r_h1, "linf": r_linf, "linf_d": r_linf_d},
    });
    write_out(cli, "riesz.json", &serde_json::to_string_pretty(&sidecar).unwrap())
}

fn cmd_recover(cli: &Cli, config: &RunConfig) -> Result<(), Error> {
    let f = config.source()?;
    let exact = config.exact()?;
    let measurements = config.measurement_set(cli.seed)?;
    let rows = metrics::recovery_study(
        config.domain,
        &f,
        &exact,
        &measurements,
        config.levels.k_min,
        config.levels.k_max,
        config.d,
        config.tau_rel,
    )?;

    let mut csv =
        String::from("level,h,err_linf,err_linf_d,max_residual,discarded,condition_estimate\n");
    let mut warnings: Vec<String> = Vec::new();
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.level,
            sci(row.h),
            sci(row.err_linf),
            sci(row.err_linf_d),
            sci(row.max_residual),
            row.discarded,
            sci(row.condition_estimate),
        ));
        if row.discarded > 0 {
            warnings.push(format!(
                "level {}: observation matrix rank-deficient at tau_rel = {} ({} singular values discarded)",
                row.level, config.tau_rel, row.discarded
            ));
        }
    }
    write_out(cli, "recover.csv", &csv)?;

    let sidecar = json!({
        "config": config,
        "seed": cli.seed,
        "measurement_points": measurements.points,
        "measurement_values": measurements.values,
        "rows": rows,
        "warnings": warnings,
    });
    write_out(cli, "recover.json", &serde_json::to_string_pretty(&sidecar).unwrap())
}

fn cmd_proximity(cli: &Cli, config: &RunConfig) -> Result<(), Error> {
    if config.proximity_points.is_empty() {
        return Err(Error::Config(
            "proximity_points is required for the proximity command".into(),
        ));
    }
    let rows = metrics::boundary_proximity_study(
        config.domain,
        &config.proximity_points,
        config.levels.k_max,
        config.surrogate_level()?,
    )?;

    let mut csv = String::from("x,y,d,err_h1,err_linf\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            sci(row.point[0]),
            sci(row.point[1]),
            sci(row.boundary_distance),
            sci(row.err_h1),
            sci(row.err_linf),
        ));
    }
    write_out(cli, "proximity.csv", &csv)?;

    let sidecar = json!({"config": config, "rows": rows});
    write_out(cli, "proximity.json", &serde_json::to_string_pretty(&sidecar).unwrap())
}

fn cmd_mesh_dump(cli: &Cli, config: &RunConfig) -> Result<(), Error> {
    let mesh = mesh::generate(config.domain, config.levels.k_max)?;
    write_out(cli, "mesh.txt", &mesh.dump())
}
