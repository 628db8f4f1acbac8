//! The model, price, analyze and lattice subcommands.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write as _};

use serde_json::{json, Value};

use qsp::analysis::{
    analyze as run_analysis, granularity, granularity_json, granularity_sweep, report_json,
    tight_witness, write_sweep_csv, GranularityReport,
};
use qsp::curve::{read_curve_csv, ProbabilityCurve};
use qsp::lattice::{build_lattice_with_cap, LatticeSpec, LatticeTable, DEFAULT_CELL_CAP};
use qsp::pricing::{
    i_max_general, rational_buyer, schedule_to_json, write_schedule_csv, CostSchedule, Price,
    PricingParams,
};
use qsp::referendum::ReferendumModel;
use qsp::DemoFamily;

use crate::output::{emit, json_document, CliError};
use crate::{AnalyzeArgs, Cli, Format, LatticeAction, LatticeBuildArgs, ModelArgs, PriceArgs};

pub fn model(cli: &Cli, args: &ModelArgs) -> Result<(), CliError> {
    let model = ReferendumModel::new(args.y, args.n)?;
    let content = match (args.i, args.i_range) {
        (None, None) => match cli.format {
            Format::Csv => format!("{}\n", model.outcome_probability()),
            Format::Json => json_document(&json!({
                "y": args.y,
                "n": args.n,
                "p": model.outcome_probability(),
            })),
        },
        (Some(i), None) => match cli.format {
            Format::Csv => format!("{}\n", model.with_bought(i)),
            Format::Json => json_document(&json!({
                "y": args.y,
                "n": args.n,
                "i": i,
                "p": model.with_bought(i),
            })),
        },
        (None, Some((lo, hi))) => {
            let mut prev = if lo >= 1 {
                Some(model.with_bought(lo - 1))
            } else {
                None
            };
            let mut rows = Vec::with_capacity((hi - lo + 1) as usize);
            for i in lo..=hi {
                let p = model.with_bought(i);
                let dp = prev.map(|q| p - q);
                rows.push((i, p, dp));
                prev = Some(p);
            }
            match cli.format {
                Format::Csv => {
                    let mut text = String::from("i,p,dp\n");
                    for (i, p, dp) in rows {
                        match dp {
                            Some(dp) => writeln!(text, "{i},{p},{dp}").expect("string write"),
                            None => writeln!(text, "{i},{p},").expect("string write"),
                        }
                    }
                    text
                }
                Format::Json => {
                    let rows: Vec<Value> = rows
                        .into_iter()
                        .map(|(i, p, dp)| json!({ "i": i, "p": p, "dp": dp }))
                        .collect();
                    json_document(&json!({ "y": args.y, "n": args.n, "rows": rows }))
                }
            }
        }
        (Some(_), Some(_)) => unreachable!("clap marks --i and --i-range as conflicting"),
    };
    emit(cli.out.as_ref(), &content)
}

fn load_curve(path: &std::path::Path) -> Result<ProbabilityCurve<f64>, CliError> {
    let file = File::open(path).map_err(CliError::from)?;
    Ok(read_curve_csv(BufReader::new(file))?)
}

pub fn price(cli: &Cli, args: &PriceArgs) -> Result<(), CliError> {
    let curve = load_curve(&args.curve)?;
    let schedule = CostSchedule::qsp(&curve, args.k2)?;

    let mut i_max = None;
    let mut trace = None;
    if let Some(v) = args.v {
        let params = PricingParams::new(args.k2, v)?;
        i_max = Some(i_max_general(&curve, &params)?);
        if args.trace {
            trace = Some(rational_buyer(&schedule, &curve, v)?);
        }
    }

    let content = match cli.format {
        Format::Csv => {
            let mut bytes = Vec::new();
            write_schedule_csv(&schedule, &mut bytes).expect("vec write");
            let mut text = String::from_utf8(bytes).expect("schedule CSV is UTF-8");
            if let Some(v) = args.v {
                writeln!(text, "# v = {v}").expect("string write");
                writeln!(text, "# i_max = {}", i_max.expect("set with --v")).expect("string write");
            }
            if let Some(trace) = &trace {
                for d in &trace.decisions {
                    let price = match d.price {
                        Price::Affordable(c) => c.to_string(),
                        Price::Unaffordable => "inf".to_string(),
                    };
                    writeln!(
                        text,
                        "# trace {}: gain={} price={} bought={}",
                        d.index, d.gain, price, d.bought
                    )
                    .expect("string write");
                }
            }
            text
        }
        Format::Json => {
            let mut doc = json!({ "k2": args.k2, "schedule": schedule_to_json(&schedule) });
            if let Some(v) = args.v {
                doc["v"] = json!(v);
                doc["i_max"] = json!(i_max.expect("set with --v"));
            }
            if let Some(trace) = &trace {
                doc["trace"] = Value::Array(
                    trace
                        .decisions
                        .iter()
                        .map(|d| {
                            let price = match d.price {
                                Price::Affordable(c) => json!(c),
                                Price::Unaffordable => json!("inf"),
                            };
                            json!({
                                "i": d.index,
                                "gain": d.gain,
                                "price": price,
                                "bought": d.bought,
                            })
                        })
                        .collect(),
                );
                doc["i_stop"] = json!(trace.stop_index);
            }
            json_document(&doc)
        }
    };
    emit(cli.out.as_ref(), &content)
}

fn analyze_curve(args: &AnalyzeArgs) -> Result<ProbabilityCurve<f64>, CliError> {
    match (&args.curve, &args.demo) {
        (Some(path), None) => load_curve(path),
        (None, Some(name)) => {
            let family = DemoFamily::from_name(name).ok_or_else(|| {
                CliError::usage(format!(
                    "unknown demo family `{name}`; valid: {}",
                    DemoFamily::ALL.map(|f| f.name()).join(", ")
                ))
            })?;
            if args.knots < 2 {
                return Err(CliError::usage("--knots must be at least 2"));
            }
            Ok(family.curve(args.knots - 1))
        }
        _ => Err(CliError::usage("give exactly one of --curve or --demo")),
    }
}

pub fn analyze(cli: &Cli, args: &AnalyzeArgs) -> Result<(), CliError> {
    let curve = analyze_curve(args)?;

    if let Some((start, stop, count)) = args.sweep_k2 {
        let values = args.v_list.as_deref().expect("clap requires --v-list");
        let grid: Vec<f64> = (0..count)
            .map(|j| {
                if count == 1 {
                    start
                } else {
                    start + (stop - start) * j as f64 / (count - 1) as f64
                }
            })
            .collect();
        let entries = granularity_sweep(&curve, &grid, values);
        let content = match cli.format {
            Format::Csv => {
                let mut bytes = Vec::new();
                write_sweep_csv(&entries, &mut bytes).expect("vec write");
                String::from_utf8(bytes).expect("sweep CSV is UTF-8")
            }
            Format::Json => {
                let rows: Vec<Value> = entries
                    .iter()
                    .map(|e| match &e.report {
                        Some(report) => json!({
                            "k2": e.k2,
                            "valid": true,
                            "max_value_allowed": e.max_value_allowed,
                            "min_pairwise_diff": report.min_pairwise_diff,
                            "flattened": report.flattened,
                            "optimal": report.optimal,
                        }),
                        None => json!({
                            "k2": e.k2,
                            "valid": false,
                            "max_value_allowed": e.max_value_allowed,
                        }),
                    })
                    .collect();
                json_document(&Value::Array(rows))
            }
        };
        return emit(cli.out.as_ref(), &content);
    }

    let (i_max, granularity_report): (u64, Option<GranularityReport<f64>>) =
        match (&args.i_max, &args.v_list) {
            (Some(i_max), None) => (*i_max, None),
            (None, Some(values)) => {
                let report = granularity(&curve, args.k2, values)?;
                let widest = report.entries.iter().map(|&(_, m)| m).max().unwrap_or(0);
                (widest, Some(report))
            }
            _ => return Err(CliError::usage("give exactly one of --i-max or --v-list")),
        };

    let tight = tight_witness(&curve, args.k2)?;
    let content = if i_max >= 1 {
        let analysis = run_analysis(&curve, args.k2, i_max)?;
        match cli.format {
            Format::Csv => {
                let mut text = String::from("key,value\n");
                writeln!(text, "k2,{}", args.k2).expect("string write");
                writeln!(text, "i_max,{i_max}").expect("string write");
                writeln!(text, "total_direct,{}", analysis.total_direct).expect("string write");
                writeln!(text, "total_closed,{}", analysis.total_closed).expect("string write");
                writeln!(text, "a_avg,{}", analysis.a_avg).expect("string write");
                writeln!(text, "b_avg,{}", analysis.b_avg).expect("string write");
                writeln!(text, "m_witness,{}", analysis.m_witness).expect("string write");
                writeln!(text, "regime,{}", analysis.regime).expect("string write");
                writeln!(text, "tight_m,{tight}").expect("string write");
                if let Some(report) = &granularity_report {
                    append_granularity_csv(&mut text, report);
                }
                text
            }
            Format::Json => {
                let mut doc = report_json(&analysis, tight, granularity_report.as_ref());
                doc["k2"] = json!(args.k2);
                doc["i_max"] = json!(i_max);
                json_document(&doc)
            }
        }
    } else {
        // Every value flattened to zero votes: totals are empty sums and the
        // averages are undefined.
        let report = granularity_report.as_ref().expect("only v-lists reach here");
        match cli.format {
            Format::Csv => {
                let mut text = String::from("key,value\n");
                writeln!(text, "k2,{}", args.k2).expect("string write");
                writeln!(text, "i_max,0").expect("string write");
                writeln!(text, "total_direct,0").expect("string write");
                writeln!(text, "total_closed,0").expect("string write");
                writeln!(text, "tight_m,{tight}").expect("string write");
                append_granularity_csv(&mut text, report);
                text
            }
            Format::Json => {
                let doc = json!({
                    "k2": args.k2,
                    "i_max": 0,
                    "total_direct": 0.0,
                    "total_closed": 0.0,
                    "tight_m": tight,
                    "granularity": granularity_json(report),
                });
                json_document(&doc)
            }
        }
    };
    emit(cli.out.as_ref(), &content)
}

fn append_granularity_csv(text: &mut String, report: &GranularityReport<f64>) {
    match report.min_pairwise_diff {
        Some(d) => writeln!(text, "granularity.min_pairwise_diff,{d}").expect("string write"),
        None => writeln!(text, "granularity.min_pairwise_diff,").expect("string write"),
    }
    writeln!(text, "granularity.flattened,{}", report.flattened).expect("string write");
    writeln!(text, "granularity.optimal,{}", report.optimal).expect("string write");
    for (v, m) in &report.entries {
        writeln!(text, "granularity.v.{v},{m}").expect("string write");
    }
}

pub fn lattice(cli: &Cli, action: &LatticeAction) -> Result<(), CliError> {
    match action {
        LatticeAction::Build(args) => lattice_build(cli, args),
        LatticeAction::Export { input } => {
            let table = LatticeTable::load(input)?;
            match cli.out.as_ref() {
                Some(path) => {
                    let mut out = BufWriter::new(File::create(path)?);
                    table.write_csv(&mut out)?;
                    out.flush()?;
                }
                None => {
                    let stdout = std::io::stdout();
                    let mut out = BufWriter::new(stdout.lock());
                    table.write_csv(&mut out)?;
                    out.flush()?;
                }
            }
            Ok(())
        }
        LatticeAction::Query { input, y, n, i } => {
            let table = LatticeTable::load(input)?;
            let p = table.query(*y, *n, *i)?;
            let content = match cli.format {
                Format::Csv => format!("{p}\n"),
                Format::Json => json_document(&json!({ "y": y, "n": n, "i": i, "p": p })),
            };
            emit(cli.out.as_ref(), &content)
        }
    }
}

fn lattice_build(cli: &Cli, args: &LatticeBuildArgs) -> Result<(), CliError> {
    let path = cli
        .out
        .as_ref()
        .ok_or_else(|| CliError::usage("lattice build needs --out FILE"))?;
    let spec = LatticeSpec {
        y_start: args.y_start,
        y_step: args.y_step,
        y_count: args.y_count,
        n_max: args.n_max,
        i_cap: args.i_cap,
    };
    let cap = if args.allow_large {
        u64::MAX
    } else {
        DEFAULT_CELL_CAP
    };
    let table = build_lattice_with_cap(&spec, cap)?;
    table.save(path)?;
    println!("built {} cells -> {}", spec.cell_count(), path.display());
    Ok(())
}

