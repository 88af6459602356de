use std::io::Write;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use superuniform::baselines::{bentkus_pvalue, bentkus_pvalue_unclamped, hoeffding_tight_pvalue};
use superuniform::fwer::{FwerPlan, Procedure};
use superuniform::mc::{simulate_superuniformity, LossDistribution, McReport, PValueMethod};
use superuniform::prw::{prw_pvalue, prw_pvalue_unclamped, TestSpec};

use crate::input::{fmt_rounded, parse_grid, read_losses, read_pvalues, round_half_away};
use crate::{
    Command, CompareArgs, Format, FwerArgs, MethodArg, PlotdataArgs, ProcedureArg, PvalueArgs,
    ValidateArgs, DIGITS_ENV,
};

const DEFAULT_DIGITS: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    ValidationFailed,
}

pub fn run(command: Command, out: &mut dyn Write) -> Result<Status> {
    match command {
        Command::Pvalue(args) => pvalue(&args, out),
        Command::Compare(args) => compare(&args, out),
        Command::Plotdata(args) => plotdata(&args, out),
        Command::Fwer(args) => fwer(&args, out),
        Command::Validate(args) => validate(&args, out),
    }
}

fn digits(flag: Option<u32>) -> Result<u32> {
    if let Some(d) = flag {
        return Ok(d);
    }
    match std::env::var(DIGITS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{DIGITS_ENV}={v} is not a digit count")),
        Err(_) => Ok(DEFAULT_DIGITS),
    }
}

fn test_spec(n: u64, alpha: f64) -> Result<TestSpec> {
    if n == 0 {
        bail!("--n must be >= 1");
    }
    TestSpec::new(n, alpha).with_context(|| format!("--alpha {alpha}"))
}

#[derive(Debug, Clone, Serialize)]
struct PvalueRow {
    rhat: f64,
    n: u64,
    alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    prw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hoeffding_tight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bentkus: Option<f64>,
}

fn pvalue(args: &PvalueArgs, out: &mut dyn Write) -> Result<Status> {
    let (rhat, n) = match (&args.losses, args.rhat) {
        (Some(path), _) => {
            let losses = read_losses(path)?;
            let n = losses.len() as u64;
            if let Some(flag_n) = args.n {
                if flag_n != n {
                    bail!(
                        "--n {flag_n} disagrees with the {n} losses in {}",
                        path.display()
                    );
                }
            }
            (losses.iter().sum::<f64>() / n as f64, n)
        }
        (None, Some(rhat)) => {
            if !(0.0..=1.0).contains(&rhat) {
                bail!("--rhat {rhat} outside [0, 1]");
            }
            (rhat, args.n.context("--rhat requires --n")?)
        }
        (None, None) => bail!("either --rhat with --n, or --losses, is required"),
    };
    let spec = test_spec(n, args.alpha)?;
    let want = |m: MethodArg| args.method == m || args.method == MethodArg::All;
    let row = PvalueRow {
        rhat,
        n,
        alpha: args.alpha,
        prw: want(MethodArg::Prw)
            .then(|| {
                if args.unclamped {
                    prw_pvalue_unclamped(rhat, &spec)
                } else {
                    prw_pvalue(rhat, &spec)
                }
            })
            .transpose()?,
        hoeffding_tight: want(MethodArg::HoeffdingTight)
            .then(|| hoeffding_tight_pvalue(rhat, &spec))
            .transpose()?,
        bentkus: want(MethodArg::Bentkus)
            .then(|| {
                if args.unclamped {
                    bentkus_pvalue_unclamped(rhat, &spec)
                } else {
                    bentkus_pvalue(rhat, &spec)
                }
            })
            .transpose()?,
    };
    let digits = digits(args.digits)?;
    match args.format {
        Format::Json => {
            let rounded = PvalueRow {
                prw: row.prw.map(|v| round_half_away(v, digits)),
                hoeffding_tight: row.hoeffding_tight.map(|v| round_half_away(v, digits)),
                bentkus: row.bentkus.map(|v| round_half_away(v, digits)),
                ..row.clone()
            };
            serde_json::to_writer_pretty(&mut *out, &rounded)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let cols = [
                ("prw", row.prw),
                ("hoeffding_tight", row.hoeffding_tight),
                ("bentkus", row.bentkus),
            ];
            let (names, values): (Vec<&str>, Vec<String>) = cols
                .iter()
                .filter_map(|(name, v)| v.map(|v| (*name, fmt_rounded(v, digits))))
                .unzip();
            writeln!(out, "rhat,{}", names.join(","))?;
            writeln!(out, "{rhat},{}", values.join(","))?;
        }
    }
    Ok(Status::Success)
}

#[derive(Debug, Serialize)]
struct CompareRow {
    rhat: f64,
    prw: f64,
    hoeffding_tight: f64,
    bentkus: f64,
}

#[derive(Debug, Serialize)]
struct CompareDoc {
    n: u64,
    alpha: f64,
    digits: u32,
    rows: Vec<CompareRow>,
}

fn compare(args: &CompareArgs, out: &mut dyn Write) -> Result<Status> {
    let spec = test_spec(args.n, args.alpha)?;
    let grid = parse_grid(&args.grid)?;
    let digits = digits(args.digits)?;
    let mut rows = Vec::with_capacity(grid.len());
    for rhat in grid {
        let r = superuniform::compare(rhat, &spec)?;
        rows.push(CompareRow {
            rhat: r.rhat,
            prw: r.prw,
            hoeffding_tight: r.hoeffding_tight,
            bentkus: r.bentkus,
        });
    }
    match args.format {
        Format::Csv => {
            writeln!(out, "rhat,prw,hoeffding_tight,bentkus")?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_rounded(r.rhat, digits),
                    fmt_rounded(r.prw, digits),
                    fmt_rounded(r.hoeffding_tight, digits),
                    fmt_rounded(r.bentkus, digits)
                )?;
            }
        }
        Format::Json => {
            for r in &mut rows {
                r.rhat = round_half_away(r.rhat, digits);
                r.prw = round_half_away(r.prw, digits);
                r.hoeffding_tight = round_half_away(r.hoeffding_tight, digits);
                r.bentkus = round_half_away(r.bentkus, digits);
            }
            let doc = CompareDoc {
                n: args.n,
                alpha: args.alpha,
                digits,
                rows,
            };
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)?;
        }
    }
    Ok(Status::Success)
}

#[derive(Debug, Serialize)]
struct PlotRow {
    rhat: f64,
    prw: f64,
    hoeffding_tight: f64,
    bentkus: f64,
    capped: bool,
}

#[derive(Debug, Serialize)]
struct PlotDoc {
    n: u64,
    alpha: f64,
    cap: f64,
    rows: Vec<PlotRow>,
}

fn plotdata(args: &PlotdataArgs, out: &mut dyn Write) -> Result<Status> {
    let spec = test_spec(args.n, args.alpha)?;
    let ctx = spec.context();
    let grid = parse_grid(&args.grid)?;
    let mut rows = Vec::with_capacity(grid.len());
    for rhat in grid {
        let (prw, bentkus) = if args.unclamped {
            (
                prw_pvalue_unclamped(rhat, &spec)?,
                bentkus_pvalue_unclamped(rhat, &spec)?,
            )
        } else {
            (prw_pvalue(rhat, &spec)?, bentkus_pvalue(rhat, &spec)?)
        };
        rows.push(PlotRow {
            rhat,
            prw,
            hoeffding_tight: hoeffding_tight_pvalue(rhat, &spec)?,
            bentkus,
            capped: ctx.is_capped(rhat),
        });
    }
    match args.format {
        Format::Csv => {
            writeln!(out, "rhat,prw,hoeffding_tight,bentkus,capped")?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.rhat, r.prw, r.hoeffding_tight, r.bentkus, r.capped
                )?;
            }
        }
        Format::Json => {
            let doc = PlotDoc {
                n: args.n,
                alpha: args.alpha,
                cap: ctx.t_max(),
                rows,
            };
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)?;
        }
    }
    Ok(Status::Success)
}

#[derive(Debug, Serialize)]
struct FwerRow {
    index: usize,
    pvalue: f64,
    local_level: f64,
    rejected: bool,
}

#[derive(Debug, Serialize)]
struct FwerDoc {
    procedure: Procedure,
    delta: f64,
    rejections: usize,
    hypotheses: Vec<FwerRow>,
}

fn fwer(args: &FwerArgs, out: &mut dyn Write) -> Result<Status> {
    let pvalues = read_pvalues(&args.pvalues)?;
    let procedure = match args.procedure {
        ProcedureArg::FixedSequence => Procedure::FixedSequence,
        ProcedureArg::Fallback => Procedure::Fallback,
        ProcedureArg::Bonferroni => Procedure::Bonferroni,
    };
    if procedure == Procedure::Fallback && args.weights.is_none() {
        bail!("--procedure fallback requires --weights");
    }
    let plan = FwerPlan::new(pvalues.clone(), args.weights.clone(), args.delta)
        .context("invalid --delta/--weights")?;
    let outcome = plan.run(procedure)?;
    let rows: Vec<FwerRow> = pvalues
        .iter()
        .zip(outcome.local_levels.iter().zip(&outcome.rejected))
        .enumerate()
        .map(|(i, (&pvalue, (&local_level, &rejected)))| FwerRow {
            index: i + 1,
            pvalue,
            local_level,
            rejected,
        })
        .collect();
    match args.format {
        Format::Csv => {
            writeln!(out, "index,pvalue,local_level,rejected")?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{}",
                    r.index, r.pvalue, r.local_level, r.rejected
                )?;
            }
        }
        Format::Json => {
            let doc = FwerDoc {
                procedure,
                delta: args.delta,
                rejections: outcome.rejections(),
                hypotheses: rows,
            };
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)?;
        }
    }
    Ok(Status::Success)
}

#[derive(Debug, Serialize)]
struct ValidateDoc<'a> {
    #[serde(flatten)]
    report: &'a McReport,
    pass: bool,
}

fn validate(args: &ValidateArgs, out: &mut dyn Write) -> Result<Status> {
    let dist: LossDistribution = args
        .dist
        .parse()
        .with_context(|| format!("--dist {}", args.dist))?;
    let spec = test_spec(args.n, args.alpha)?;
    let method = match args.method {
        MethodArg::Prw => PValueMethod::Prw,
        MethodArg::Bentkus => PValueMethod::Bentkus,
        MethodArg::HoeffdingTight => PValueMethod::HoeffdingTight,
        MethodArg::All => bail!("--method all is not supported by validate; pick one method"),
    };
    if dist.mean() <= args.alpha {
        bail!(
            "--dist {} has mean {} <= alpha {}: H0 (R > alpha) is false, so validation would measure power, not super-uniformity",
            args.dist,
            dist.mean(),
            args.alpha
        );
    }
    let report = simulate_superuniformity(&dist, &spec, method, &args.delta, args.reps, args.seed)?;
    let pass = report.passes();
    match args.format {
        Format::Csv => {
            writeln!(out, "delta,exceedance,stderr,pass")?;
            for ((d, e), s) in report
                .delta_grid
                .iter()
                .zip(&report.exceedance)
                .zip(&report.stderr)
            {
                writeln!(out, "{d},{e},{s},{}", *e <= d + 3.0 * s)?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(
                &mut *out,
                &ValidateDoc {
                    report: &report,
                    pass,
                },
            )?;
            writeln!(out)?;
        }
    }
    eprintln!(
        "{}: {} {} n={} alpha={} reps={} seed={}",
        if pass { "PASS" } else { "FAIL" },
        method,
        report.distribution,
        report.n,
        report.alpha,
        report.reps,
        report.seed
    );
    Ok(if pass {
        Status::Success
    } else {
        Status::ValidationFailed
    })
}
