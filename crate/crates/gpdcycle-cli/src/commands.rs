//! Subcommand implementations.

use std::path::{Path, PathBuf};

use gpdcycle::empirical::{gini_raw, population_shares, YearConfig};
use gpdcycle::fitting::{fit_full, FitConfig};
use gpdcycle::goodwin::{derivative_table, estimate_lv, uv_from_fit, UvPoint, UvSeries};
use gpdcycle::ingest::{read_income_csv_file, RunConfig};
use gpdcycle::sim::{integrate, sample_gpd, LvRates, SimConfig};
use gpdcycle::{Error, GpdParams, IncomeSample, Result};

use crate::records::{kv_field, parse_kv, write_csv, write_kv, RunManifest};
use crate::{CycleArgs, FitArgs, ReportArgs, SampleArgs, SimulateArgs};

const NORMALIZED_UNITS: &str =
    "incomes in unit-mean normalized units; u, v, shares in percent; rates per year";

/// Everything recorded for one fitted year.
struct YearRecord {
    year: i32,
    n: usize,
    mean_income: f64,
    params: GpdParams,
    gini_fit: f64,
    gini_raw: f64,
    mean_check: f64,
    mean_check_ok: bool,
    gompertz_rss: f64,
    pareto_rss: f64,
    iterations: usize,
    converged: bool,
    minwage_norm: f64,
    x_d_norm: f64,
    share_below_xd: f64,
    share_below_minwage: f64,
    share_below_xt: f64,
    u: f64,
    v: f64,
}

impl YearRecord {
    fn kv_pairs(&self) -> Vec<(&'static str, String)> {
        let p = &self.params;
        vec![
            ("year", self.year.to_string()),
            ("n", self.n.to_string()),
            ("mean_income", self.mean_income.to_string()),
            ("x_t", p.threshold().to_string()),
            ("eta", p.eta().to_string()),
            ("b", p.b().to_string()),
            ("alpha", p.alpha().to_string()),
            ("pareto_scale", p.pareto_scale().to_string()),
            ("gini_fit", self.gini_fit.to_string()),
            ("gini_raw", self.gini_raw.to_string()),
            ("mean_check", self.mean_check.to_string()),
            ("mean_check_ok", self.mean_check_ok.to_string()),
            ("gompertz_rss", self.gompertz_rss.to_string()),
            ("pareto_rss", self.pareto_rss.to_string()),
            ("iterations", self.iterations.to_string()),
            ("converged", self.converged.to_string()),
            ("minwage_norm", self.minwage_norm.to_string()),
            ("x_d_norm", self.x_d_norm.to_string()),
            ("share_below_xd", (100.0 * self.share_below_xd).to_string()),
            ("share_below_minwage", (100.0 * self.share_below_minwage).to_string()),
            ("share_below_xt", (100.0 * self.share_below_xt).to_string()),
            ("u", self.u.to_string()),
            ("v", self.v.to_string()),
        ]
    }

    fn summary_row(&self) -> String {
        let p = &self.params;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.year,
            p.threshold(),
            p.eta(),
            p.b(),
            p.alpha(),
            self.gini_raw,
            self.gini_fit,
            self.mean_check,
            self.u,
            self.v,
            self.converged,
            self.iterations,
        )
    }
}

const SUMMARY_HEADER: &str =
    "year,x_t,eta,b,alpha,gini_raw,gini_fit,mean_check,u,v,converged,iterations";

fn fit_one_year(sample: &IncomeSample, config: &RunConfig, max_iterations: usize) -> Result<YearRecord> {
    let year = sample.year();
    let minwage = *config.minimum_wage.get(&year).ok_or_else(|| {
        Error::Data(format!("config has no `minwage.{year}` entry for a year present in the input"))
    })?;
    let normalized = sample.normalize()?;
    let mean_income = normalized.scale().expect("normalize records the scale");

    let fit_cfg = FitConfig {
        max_iterations,
        fixed_threshold: config.fixed_threshold.get(&year).copied(),
        ..FitConfig::default()
    };
    let fit = fit_full(&normalized, &fit_cfg)?;
    let params = fit.params;

    let year_cfg = YearConfig::new(year, minwage, config.x_d_fraction)?;
    let (share_xd, share_mw, share_xt) = population_shares(&normalized, &year_cfg, &params)?;
    let x_d_norm = year_cfg.x_d_normalized(mean_income);
    let uv = uv_from_fit(&params, x_d_norm, year)?;

    Ok(YearRecord {
        year,
        n: sample.len(),
        mean_income,
        params,
        gini_fit: params.gini()?,
        gini_raw: gini_raw(&normalized)?,
        mean_check: fit.mean_check,
        mean_check_ok: fit.mean_check_ok(),
        gompertz_rss: fit.gompertz_rss,
        pareto_rss: fit.pareto_rss,
        iterations: fit.iterations,
        converged: fit.converged,
        minwage_norm: year_cfg.minimum_wage_normalized(mean_income),
        x_d_norm,
        share_below_xd: share_xd,
        share_below_minwage: share_mw,
        share_below_xt: share_xt,
        u: uv.u,
        v: uv.v,
    })
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let samples = read_income_csv_file(&args.input)?;
    let mut config = RunConfig::load(&args.config)?;
    for (year, x_t) in &args.xt {
        config.fixed_threshold.insert(*year, *x_t);
    }

    std::fs::create_dir_all(&args.outdir)?;
    let mut invocation = format!(
        "fit --input {} --config {} --outdir {}",
        args.input.display(),
        args.config.display(),
        args.outdir.display()
    );
    for (year, x_t) in &args.xt {
        invocation.push_str(&format!(" --xt {year}={x_t}"));
    }
    let manifest = RunManifest {
        subcommand: "fit",
        invocation,
        input: Some(args.input.clone()),
        config: Some(args.config.clone()),
        outdir: args.outdir.clone(),
        seed: None,
    };

    let mut rows = Vec::new();
    let mut failures: Vec<(i32, Error)> = Vec::new();
    for sample in &samples {
        match fit_one_year(sample, &config, args.max_iterations) {
            Ok(record) => {
                let path = args.outdir.join(format!("fit_{}.kv", record.year));
                write_kv(&path, &manifest, NORMALIZED_UNITS, &record.kv_pairs())?;
                println!(
                    "{}: x_t = {:.4}, gini = {:.4}, mean check = {:.4}",
                    record.year,
                    record.params.threshold(),
                    record.gini_fit,
                    record.mean_check
                );
                rows.push(record.summary_row());
            }
            Err(err) => {
                eprintln!("{}: {err}", sample.year());
                failures.push((sample.year(), err));
            }
        }
    }

    write_csv(
        &args.outdir.join("summary.csv"),
        &manifest,
        NORMALIZED_UNITS,
        SUMMARY_HEADER,
        &rows,
    )?;

    if failures.is_empty() {
        return Ok(());
    }
    let summary = failures
        .iter()
        .map(|(year, err)| format!("year {year}: {err}"))
        .collect::<Vec<_>>()
        .join("; ");
    if failures.iter().any(|(_, e)| matches!(e, Error::NonConvergence(_))) {
        Err(Error::NonConvergence(summary))
    } else {
        Err(Error::Data(summary))
    }
}

/// Read one `fit_<year>.kv` record back into a `(year, u, v)` point plus
/// the fitted parameters.
fn read_fit_record(path: &Path) -> Result<(UvPoint, GpdParams)> {
    let text = std::fs::read_to_string(path)?;
    let record = parse_kv(&text)?;
    let year: i32 = kv_field(&record, "year", path)?;
    let u: f64 = kv_field(&record, "u", path)?;
    let v: f64 = kv_field(&record, "v", path)?;
    let x_t: f64 = kv_field(&record, "x_t", path)?;
    let eta: f64 = kv_field(&record, "eta", path)?;
    let b: f64 = kv_field(&record, "b", path)?;
    let alpha: f64 = kv_field(&record, "alpha", path)?;
    Ok((UvPoint::new(year, u, v)?, GpdParams::new(x_t, eta, b, alpha)?))
}

fn read_fit_dir(dir: &Path) -> Result<Vec<(UvPoint, GpdParams)>> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.starts_with("fit_") && n.ends_with(".kv"))
                .unwrap_or(false)
        })
        .collect();
    entries.sort();
    if entries.is_empty() {
        return Err(Error::Data(format!(
            "no fit_<year>.kv records found in {}",
            dir.display()
        )));
    }
    let mut out = Vec::with_capacity(entries.len());
    for path in entries {
        out.push(read_fit_record(&path)?);
    }
    out.sort_by_key(|(pt, _)| pt.year);
    Ok(out)
}

/// Read a `year,u,v` CSV (as written by this tool) into a series.
fn read_uv_csv(path: &Path) -> Result<Vec<UvPoint>> {
    let text = std::fs::read_to_string(path)?;
    let mut points = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "year,u,v" {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected header `year,u,v`, got `{line}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let year: i32 = fields[0].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("`{}` is not a year", fields[0]),
        })?;
        let u: f64 = fields[1].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("`{}` is not a number", fields[1]),
        })?;
        let v: f64 = fields[2].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("`{}` is not a number", fields[2]),
        })?;
        points.push(UvPoint::new(year, u, v)?);
    }
    if points.is_empty() {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }
    Ok(points)
}

pub fn cmd_cycle(args: &CycleArgs) -> Result<()> {
    let (points, invocation, input) = match (&args.fits, &args.uv) {
        (Some(dir), None) => {
            let records = read_fit_dir(dir)?;
            let pts = records.into_iter().map(|(pt, _)| pt).collect();
            (
                pts,
                format!("cycle --fits {} --outdir {}", dir.display(), args.outdir.display()),
                dir.clone(),
            )
        }
        (None, Some(csv)) => (
            read_uv_csv(csv)?,
            format!("cycle --uv {} --outdir {}", csv.display(), args.outdir.display()),
            csv.clone(),
        ),
        _ => {
            return Err(Error::Data(
                "cycle needs exactly one of --fits <dir> or --uv <csv>".into(),
            ))
        }
    };

    let series = UvSeries::new(points)?;
    let coefficients = estimate_lv(&series)?;
    let derivatives = derivative_table(&series)?;

    std::fs::create_dir_all(&args.outdir)?;
    let manifest = RunManifest {
        subcommand: "cycle",
        invocation,
        input: Some(input),
        config: None,
        outdir: args.outdir.clone(),
        seed: None,
    };

    let uv_rows: Vec<String> = series
        .points()
        .iter()
        .map(|p| format!("{},{},{}", p.year, p.u, p.v))
        .collect();
    write_csv(
        &args.outdir.join("uv.csv"),
        &manifest,
        NORMALIZED_UNITS,
        "year,u,v",
        &uv_rows,
    )?;

    let deriv_rows: Vec<String> = derivatives
        .iter()
        .map(|r| format!("{},{},{},{},{}", r.year, r.u, r.v, r.du_over_u, r.dv_over_v))
        .collect();
    write_csv(
        &args.outdir.join("derivatives.csv"),
        &manifest,
        NORMALIZED_UNITS,
        "year,u,v,du_over_u,dv_over_v",
        &deriv_rows,
    )?;

    write_kv(
        &args.outdir.join("cycle.kv"),
        &manifest,
        NORMALIZED_UNITS,
        &[
            ("a1", coefficients.a1.to_string()),
            ("b1", coefficients.b1.to_string()),
            ("a2", coefficients.a2.to_string()),
            ("b2", coefficients.b2.to_string()),
            ("u_c", coefficients.u_c.to_string()),
            ("v_c", coefficients.v_c.to_string()),
            ("period_years", coefficients.period.to_string()),
            ("r1_fit_rss", coefficients.r1_fit_rss.to_string()),
            ("r2_fit_rss", coefficients.r2_fit_rss.to_string()),
        ],
    )?;

    println!(
        "center (u_c, v_c) = ({:.2}, {:.2}), period = {:.2} years",
        coefficients.u_c, coefficients.v_c, coefficients.period
    );
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = SimConfig {
        rates: LvRates {
            a1: args.a1,
            b1: args.b1,
            a2: args.a2,
            b2: args.b2,
        },
        initial: (args.x0, args.y0),
        dt: args.dt,
        t_end: args.t_end,
    };
    let trajectory = integrate(&cfg)?;

    std::fs::create_dir_all(&args.outdir)?;
    let manifest = RunManifest {
        subcommand: "simulate",
        invocation: format!(
            "simulate --a1 {} --b1 {} --a2 {} --b2 {} --x0 {} --y0 {} --dt {} --t-end {} --outdir {}",
            args.a1,
            args.b1,
            args.a2,
            args.b2,
            args.x0,
            args.y0,
            args.dt,
            args.t_end,
            args.outdir.display()
        ),
        input: None,
        config: None,
        outdir: args.outdir.clone(),
        seed: None,
    };

    let rows: Vec<String> = trajectory
        .times
        .iter()
        .zip(&trajectory.states)
        .zip(&trajectory.conserved)
        .map(|((t, (x, y)), h)| format!("{t},{x},{y},{h}"))
        .collect();
    write_csv(
        &args.outdir.join("trajectory.csv"),
        &manifest,
        "t in years; x, y in the input state units; H is the conserved quantity",
        "t,x,y,H",
        &rows,
    )?;
    println!(
        "integrated {} steps; conserved-quantity drift {:.3e}",
        trajectory.times.len() - 1,
        trajectory.max_conserved_drift()
    );
    Ok(())
}

pub fn cmd_sample(args: &SampleArgs) -> Result<()> {
    let params = GpdParams::new(args.threshold, args.eta, args.b, args.alpha)?;
    let sample = sample_gpd(&params, args.n, args.seed)?;

    std::fs::create_dir_all(&args.outdir)?;
    let manifest = RunManifest {
        subcommand: "sample",
        invocation: format!(
            "sample --threshold {} --eta {} --b {} --alpha {} --n {} --seed {} --year {} --mean-income {} --outdir {}",
            args.threshold,
            args.eta,
            args.b,
            args.alpha,
            args.n,
            args.seed,
            args.year,
            args.mean_income,
            args.outdir.display()
        ),
        input: None,
        config: None,
        outdir: args.outdir.clone(),
        seed: Some(args.seed),
    };

    let rows: Vec<String> = sample
        .values()
        .iter()
        .map(|v| format!("{},{}", args.year, v * args.mean_income))
        .collect();
    write_csv(
        &args.outdir.join("sample.csv"),
        &manifest,
        "income in the distribution's normalized units scaled by --mean-income",
        "year,income",
        &rows,
    )?;
    println!("wrote {} draws for year {}", args.n, args.year);
    Ok(())
}

pub fn cmd_report(args: &ReportArgs) -> Result<()> {
    let records = read_fit_dir(&args.fits)?;

    std::fs::create_dir_all(&args.outdir)?;
    let manifest = RunManifest {
        subcommand: "report",
        invocation: format!(
            "report --fits {} --outdir {} --grid-points {}",
            args.fits.display(),
            args.outdir.display(),
            args.grid_points
        ),
        input: Some(args.fits.clone()),
        config: None,
        outdir: args.outdir.clone(),
        seed: None,
    };

    let mut table_rows = Vec::with_capacity(records.len());
    for (pt, params) in &records {
        // plot-ready Lorenz curve on a quantile grid
        let grid: Vec<f64> = (0..args.grid_points)
            .map(|i| params.quantile(i as f64 / args.grid_points as f64))
            .collect::<Result<_>>()?;
        let curve = params.lorenz(&grid)?;
        let rows: Vec<String> = curve
            .points
            .iter()
            .map(|(pop, inc)| format!("{},{}", 100.0 * pop, 100.0 * inc))
            .collect();
        write_csv(
            &args.outdir.join(format!("lorenz_{}.csv", pt.year)),
            &manifest,
            "population and income shares in percent",
            "population_share,income_share",
            &rows,
        )?;
        table_rows.push(format!(
            "{},{},{},{},{},{},{},{}",
            pt.year,
            params.threshold(),
            params.eta(),
            params.b(),
            params.alpha(),
            params.gini()?,
            pt.u,
            pt.v
        ));
    }
    write_csv(
        &args.outdir.join("report.csv"),
        &manifest,
        NORMALIZED_UNITS,
        "year,x_t,eta,b,alpha,gini_fit,u,v",
        &table_rows,
    )?;
    println!("reported {} years", records.len());
    Ok(())
}
