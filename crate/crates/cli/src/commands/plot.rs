use std::path::PathBuf;

use clap::Args;
use meshalign_core::io::{line_plot, read_json, write_bytes, Series};
use meshalign_core::metrics::MetricsReport;

use crate::error::{CliError, CliResult};
use crate::run::{manifest, require, seal, write_sidecars};

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["loss_curve", "report"]))]
pub struct PlotArgs {
    /// Loss curve written by `optimize` (CSV).
    #[arg(long)]
    loss_curve: Option<PathBuf>,
    /// Metrics report written by `evaluate` (JSON).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Linear instead of logarithmic loss axis.
    #[arg(long)]
    linear: bool,
    #[arg(long)]
    out: PathBuf,
}

/// Columns of a loss curve CSV, skipping `#` comment lines.
fn loss_series(text: &str, path: &str) -> CliResult<Vec<Series>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| CliError::Input(format!("{path}: empty loss curve")))?
        .split(',')
        .collect();
    let wanted = ["total", "j2d", "chamfer", "contact", "penetration", "smoothness", "foot_snap"];
    let cols: Vec<(usize, &str)> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| wanted.contains(h))
        .map(|(i, h)| (i, *h))
        .collect();
    if header.first() != Some(&"iteration") || cols.is_empty() {
        return Err(CliError::Input(format!("{path}: not a loss curve")));
    }
    let mut series: Vec<Series> = cols
        .iter()
        .map(|(_, h)| Series {
            label: h.to_string(),
            points: Vec::new(),
        })
        .collect();
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |i: usize| -> CliResult<f64> {
            fields
                .get(i)
                .and_then(|f| f.trim().parse().ok())
                .ok_or_else(|| CliError::Input(format!("{path}: bad row {}", n + 2)))
        };
        let x = parse(0)?;
        for (s, (i, _)) in series.iter_mut().zip(&cols) {
            s.points.push((x, parse(*i)?));
        }
    }
    Ok(series)
}

pub fn run(args: PlotArgs) -> CliResult {
    let (input, svg) = if let Some(p) = &args.loss_curve {
        require(p)?;
        let text = std::fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
        let series = loss_series(&text, &p.display().to_string())?;
        (p.clone(), line_plot("Kinematic optimization", "iteration", "loss", &series, !args.linear))
    } else {
        let p = args.report.clone().expect("clap enforces one source");
        require(&p)?;
        let report: MetricsReport = read_json(&p)?;
        (p, super::evaluate::segment_plot(&report))
    };
    let outputs = vec![args.out.clone()];
    let mut m = manifest("plot", None);
    m.add_input("source", &input)?;
    let run = seal(&mut m, &outputs);
    write_bytes(&args.out, format!("<!-- run {run} -->\n{svg}").as_bytes())?;
    write_sidecars(&m, &outputs)?;
    Ok(())
}
