//! Figure data emitters.
//!
//! Each figure becomes one CSV per series (or a single JSON document with
//! `--format json`). Leading `#` comments document the parameters; series
//! parameters that are not fixed by the model itself are marked
//! `reconstructed`.

use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use qsp::pricing::cost_general;
use qsp::referendum::outcome_probability_bought;
use qsp::scalar::CompensatedSum;
use qsp::{analysis, DemoFamily};

use crate::output::{json_document, CliError};
use crate::{Cli, Format, PlotdataArgs};

/// k2 used for the demo-family cost figures.
const DEMO_K2: f64 = 0.01;
/// Knot count of the demo-family figures.
const DEMO_KNOTS: usize = 1000;

struct Series {
    stem: String,
    comments: Vec<String>,
    header: &'static str,
    rows: Vec<Vec<Value>>,
}

pub fn run(cli: &Cli, args: &PlotdataArgs) -> Result<(), CliError> {
    let series = match args.figure {
        4 => figure4(),
        5 => figure5(),
        6 => figure6(),
        7 => figure7(),
        9 => figure9(),
        10 => figure10(),
        other => {
            return Err(CliError::usage(format!(
                "unknown figure id {other}; valid ids: 4, 5, 6, 7, 9, 10"
            )))
        }
    };
    let dir = out_dir(args);
    fs::create_dir_all(&dir)?;
    let written = match cli.format {
        Format::Csv => write_csv_files(&dir, &series)?,
        Format::Json => vec![write_json_file(&dir, args.figure, &series)?],
    };
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn out_dir(args: &PlotdataArgs) -> PathBuf {
    args.out_dir.clone().unwrap_or_else(|| {
        env::var_os("QSP_OUT_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."))
    })
}

fn write_csv_files(dir: &Path, series: &[Series]) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::with_capacity(series.len());
    for s in series {
        let mut text = String::new();
        for comment in &s.comments {
            text.push_str("# ");
            text.push_str(comment);
            text.push('\n');
        }
        text.push_str(s.header);
        text.push('\n');
        for row in &s.rows {
            let cells: Vec<String> = row.iter().map(render_cell).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        let path = dir.join(format!("{}.csv", s.stem));
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

fn write_json_file(dir: &Path, figure: u32, series: &[Series]) -> Result<PathBuf, CliError> {
    let doc = json!({
        "figure": figure,
        "series": series
            .iter()
            .map(|s| {
                json!({
                    "name": s.stem,
                    "comments": s.comments,
                    "columns": s.header.split(',').collect::<Vec<_>>(),
                    "rows": s.rows,
                })
            })
            .collect::<Vec<_>>(),
    });
    let path = dir.join(format!("fig{figure}.json"));
    fs::write(&path, json_document(&doc))?;
    Ok(path)
}

fn render_cell(value: &Value) -> String {
    match value {
        Value::Number(n) => n.to_string(),
        other => other.to_string().trim_matches('"').to_string(),
    }
}

fn probability(y: f64, n: u32, i: u32) -> f64 {
    outcome_probability_bought(y, n, i).expect("emitter parameters are valid")
}

/// Outcome probability against the yes probability, one series per
/// electorate size; the curve steepens into a step as `n` grows.
fn figure4() -> Vec<Series> {
    [1u32, 11, 101, 999]
        .into_iter()
        .map(|n| Series {
            stem: format!("fig4_n{n}"),
            comments: vec![
                "figure 4: outcome probability vs average-voter yes probability".to_string(),
                format!("series: n = {n}"),
                "y grid: 0 to 1, step 0.01".to_string(),
                "reconstructed: the n series is chosen by this tool".to_string(),
            ],
            header: "y,p",
            rows: (0..=100u32)
                .map(|iy| {
                    let y = f64::from(iy) / 100.0;
                    vec![json!(y), json!(probability(y, n, 0))]
                })
                .collect(),
        })
        .collect()
}

/// Outcome probability against the electorate size near the tipping point;
/// the y = 0.5 series shows the odd/even sawtooth.
fn figure5() -> Vec<Series> {
    [0.49f64, 0.5, 0.51]
        .into_iter()
        .map(|y| Series {
            stem: format!("fig5_y{y}"),
            comments: vec![
                "figure 5: outcome probability vs voter count".to_string(),
                format!("series: y = {y}"),
                "n: 1 to 1000".to_string(),
                "reconstructed: the y series {0.49, 0.5, 0.51} is chosen by this tool".to_string(),
            ],
            header: "n,p",
            rows: (1..=1000u32)
                .map(|n| vec![json!(n), json!(probability(y, n, 0))])
                .collect(),
        })
        .collect()
}

fn tenths() -> impl Iterator<Item = f64> {
    (1..=9u32).map(|t| f64::from(t) / 10.0)
}

/// Outcome probability against bought votes at n = 100.
fn figure6() -> Vec<Series> {
    tenths()
        .map(|y| Series {
            stem: format!("fig6_y{y}"),
            comments: vec![
                "figure 6: outcome probability vs bought votes".to_string(),
                format!("series: y = {y}"),
                "n = 100, i: 0 to 60".to_string(),
            ],
            header: "i,p",
            rows: (0..=60u32)
                .map(|i| vec![json!(i), json!(probability(y, 100, i))])
                .collect(),
        })
        .collect()
}

/// Marginal probability of each bought vote at n = 100.
fn figure7() -> Vec<Series> {
    tenths()
        .map(|y| Series {
            stem: format!("fig7_y{y}"),
            comments: vec![
                "figure 7: marginal probability of the i-th bought vote".to_string(),
                format!("series: y = {y}"),
                "n = 100, i: 1 to 60".to_string(),
            ],
            header: "i,dp",
            rows: (1..=60u32)
                .map(|i| {
                    let dp = probability(y, 100, i) - probability(y, 100, i - 1);
                    vec![json!(i), json!(dp)]
                })
                .collect(),
        })
        .collect()
}

fn demo_comments(figure: u32, family: DemoFamily, what: &str) -> Vec<String> {
    vec![
        format!("figure {figure}: {what}"),
        format!("series: {} demo family, {} knots", family.name(), DEMO_KNOTS),
        format!("k2 = {DEMO_K2}"),
        "reconstructed: demo curve families and k2 are illustrative, not measured data"
            .to_string(),
    ]
}

/// The four demo probability shapes and their per-vote prices.
fn figure9() -> Vec<Series> {
    let mut series = Vec::with_capacity(8);
    for family in DemoFamily::ALL {
        let curve = family.curve(DEMO_KNOTS);
        series.push(Series {
            stem: format!("fig9_{}_p", family.name()),
            comments: demo_comments(9, family, "probability curves"),
            header: "i,p",
            rows: curve
                .samples()
                .iter()
                .enumerate()
                .map(|(i, &p)| vec![json!(i), json!(p)])
                .collect(),
        });
        series.push(Series {
            stem: format!("fig9_{}_c", family.name()),
            comments: demo_comments(9, family, "per-vote cost"),
            header: "i,c",
            rows: (1..=curve.max_index())
                .map(|i| {
                    let c = cost_general(&curve, DEMO_K2, i).expect("demo curves price cleanly");
                    vec![json!(i), json!(c)]
                })
                .collect(),
        });
    }
    series
}

/// Cumulative spend per family with the coarse vote-count reference line.
fn figure10() -> Vec<Series> {
    DemoFamily::ALL
        .into_iter()
        .map(|family| {
            let curve = family.curve(DEMO_KNOTS);
            let witness =
                analysis::big_o_witness(&curve, DEMO_K2).expect("demo curves have a witness");
            let mut running = CompensatedSum::new();
            let mut comments = demo_comments(10, family, "cumulative cost of the first m votes");
            comments.push(format!(
                "reference_m_i2 column: M * m^2 with M = {} ({} regime)",
                witness.m, witness.regime
            ));
            Series {
                stem: format!("fig10_{}", family.name()),
                comments,
                header: "m,total_cost,reference_m_i2",
                rows: (1..=curve.max_index())
                    .map(|m| {
                        running.add(
                            cost_general(&curve, DEMO_K2, m).expect("demo curves price cleanly"),
                        );
                        let reference = witness.m * (m as f64) * (m as f64);
                        vec![json!(m), json!(running.value()), json!(reference)]
                    })
                    .collect(),
            }
        })
        .collect()
}
