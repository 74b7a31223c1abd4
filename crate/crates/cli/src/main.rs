mod config;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use countcompat::compat::{
    check_car_structure, check_linear_poisson, check_random_coeff, separability_residual, CompatVerdict, ConditionalPair,
};
use countcompat::families::FamilyDescriptor;
use countcompat::lince::{
    choose_support_bound, classify_theta_domain, necessary_conditions, solve_feasibility, solve_feasibility_nd,
    LpOutcome,
};
use countcompat::oracle::{affine_deviation, conditional_expectation, moments};
use countcompat::simulate::{default_burnin, gibbs_compat_diagnostic, gibbs_run, sample_family, ConditionalSpec};
use countcompat::{Joint, LinearCe};

use config::{parse_model_config, Model};
use report::{Format, Report};

#[derive(Parser)]
#[command(name = "countcompat", version, about = "Compatibility of conditional count-data specifications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Model config file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for reports and CSV artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Necessary conditions and region of a linear conditional-mean spec.
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Builds a family's joint pmf.
    Build {
        #[command(flatten)]
        common: Common,
        /// Support bound N of the tensor {0..N}^n.
        #[arg(long)]
        trunc: Option<usize>,
    },
    /// Decides compatibility of a conditional specification.
    CheckCompat {
        #[command(flatten)]
        common: Common,
        /// Grid for the separability residual.
        #[arg(long, default_value_t = 20)]
        trunc: usize,
    },
    /// Bounded-support feasibility LP for a linear conditional-mean spec.
    SolveLp {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trunc: Option<usize>,
    },
    /// Conditional expectations and affine fits of a joint pmf.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trunc: Option<usize>,
    },
    /// I.i.d. draws from a family.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Gibbs chain and compatibility diagnostic.
    Gibbs {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100_000)]
        sweeps: usize,
        #[arg(long)]
        burnin: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Exit 0 for compatible/feasible results, 1 for incompatible/infeasible.
struct Outcome {
    report: Report,
    positive: bool,
}

impl Outcome {
    fn ok(report: Report) -> Self {
        Self { report, positive: true }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<bool> {
    let (common, outcome) = match command {
        Command::Classify { common } => {
            let model = load(&common)?;
            (common, classify(&model)?)
        }
        Command::Build { common, trunc } => {
            let model = load(&common)?;
            let o = build(&model, trunc, &common)?;
            (common, o)
        }
        Command::CheckCompat { common, trunc } => {
            let model = load(&common)?;
            (common, check_compat(&model, trunc)?)
        }
        Command::SolveLp { common, trunc } => {
            let model = load(&common)?;
            let o = solve_lp(&model, trunc, &common)?;
            (common, o)
        }
        Command::Oracle { common, trunc } => {
            let model = load(&common)?;
            let o = oracle(&model, trunc, &common)?;
            (common, o)
        }
        Command::Sample { common, count, seed } => {
            let model = load(&common)?;
            let o = sample(&model, count, seed, &common)?;
            (common, o)
        }
        Command::Gibbs {
            common,
            sweeps,
            burnin,
            seed,
        } => {
            let model = load(&common)?;
            let o = gibbs(&model, sweeps, burnin, seed, &common)?;
            (common, o)
        }
    };
    let text = outcome.report.render(common.format);
    let name = match common.format {
        Format::Text => "report.txt",
        Format::Csv => "report.csv",
    };
    write_artifact(&common.out, name, &text)?;
    print!("{text}");
    Ok(outcome.positive)
}

fn load(common: &Common) -> Result<Model> {
    Ok(parse_model_config(&common.config)?)
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn family(model: &Model) -> Result<&FamilyDescriptor> {
    match model {
        Model::Family(d) => Ok(d),
        other => bail!("this command needs a family= config, got {}", other.kind()),
    }
}

fn linear_ce(model: &Model) -> Result<&LinearCe> {
    match model {
        Model::LinearCe(s) => Ok(s),
        other => bail!("this command needs spec=linear_ce, got {}", other.kind()),
    }
}

fn classify(model: &Model) -> Result<Outcome> {
    let spec = linear_ce(model)?;
    let nec = necessary_conditions(spec);
    let mut r = Report::new();
    r.put("spec", "linear_ce").put("n", spec.dim());
    for ((i, j), case) in &nec.pairs {
        r.put(format!("pair_{i}{j}"), case);
    }
    for m in &nec.minors {
        let idx: Vec<String> = m.indices.iter().map(usize::to_string).collect();
        r.num(format!("minor_{}", idx.join("")), m.value);
    }
    r.put("necessary_conditions", if nec.holds() { "hold" } else { "violated" });
    if spec.dim() == 2 && nec.holds() {
        let (a, b, c, d) = spec.abcd()?;
        if a > 0.0 && c > 0.0 {
            let dom = classify_theta_domain(a, b, c, d)?;
            r.put("theta_region", dom.region);
            if let Some(p) = dom.params {
                r.put("solution", FamilyDescriptor::Theta(p));
            }
        }
        match choose_support_bound(a, b, c, d) {
            Ok(n) => r.put("support_bound", n),
            Err(e) => r.put("support_bound", format!("none ({e})")),
        };
    }
    Ok(Outcome {
        positive: nec.holds(),
        report: r,
    })
}

fn build(model: &Model, trunc: Option<usize>, common: &Common) -> Result<Outcome> {
    let desc = family(model)?;
    let bound = match trunc {
        Some(b) => b,
        None => desc.default_bound()?,
    };
    let pmf = desc.build_pmf(bound)?;
    let mut r = Report::new();
    r.put("family", desc).put("dim", desc.dim()).put("bound", bound);
    r.num("captured_mass", pmf.captured_mass());
    match desc.predicted_ce() {
        Ok(ces) => {
            for ce in ces {
                r.list(format!("ce_slopes_x{}", ce.target), &ce.slopes);
                r.num(format!("ce_intercept_x{}", ce.target), ce.intercept);
            }
        }
        Err(e) => {
            r.put("ce", e);
        }
    }
    let path = write_artifact(&common.out, "pmf.csv", &pmf.to_csv())?;
    r.put("pmf", path.display());
    Ok(Outcome::ok(r))
}

fn verdict_report(r: &mut Report, v: &CompatVerdict) {
    r.put("verdict", if v.compatible { "compatible" } else { "incompatible" });
    r.put("reason", &v.reason);
    if let Some(s) = &v.solution {
        r.put("solution", s);
    }
}

fn check_compat(model: &Model, grid: usize) -> Result<Outcome> {
    let mut r = Report::new();
    r.put("spec", model.kind());
    let (verdict, pair) = match model {
        Model::LinearPoisson { a, b, c, d } => (
            check_linear_poisson(*a, *b, *c, *d),
            Some(ConditionalPair::from_linear_poisson(*a, *b, *c, *d, grid)?),
        ),
        Model::Car(s) => {
            let pair = (s.dim() == 2).then(|| ConditionalPair::from_car_spec(s, grid, grid)).transpose()?;
            (check_car_structure(s)?, pair)
        }
        Model::RandomCoeff(s) => (check_random_coeff(s), None),
        Model::LinearCe(s) => {
            let (a, b, c, d) = s.abcd()?;
            (check_linear_poisson(a, b, c, d), Some(ConditionalPair::from_linear_poisson(a, b, c, d, grid)?))
        }
        other => bail!("check-compat needs a conditional spec, got {}", other.kind()),
    };
    verdict_report(&mut r, &verdict);
    if let Some(pair) = pair {
        match separability_residual(&pair) {
            Ok(s) => r.num("separability_residual", s.residual).put("separability_grid", s.grid),
            Err(e) => r.put("separability_residual", format!("undefined ({e})")),
        };
    }
    Ok(Outcome {
        positive: verdict.compatible,
        report: r,
    })
}

fn solve_lp(model: &Model, trunc: Option<usize>, common: &Common) -> Result<Outcome> {
    let spec = linear_ce(model)?;
    let bound = match trunc {
        Some(b) => b,
        None if spec.dim() == 2 => {
            let (a, b, c, d) = spec.abcd()?;
            choose_support_bound(a, b, c, d)?
        }
        None => bail!("--trunc is required for n >= 3"),
    };
    let outcome = if spec.dim() == 2 {
        solve_feasibility(spec, bound)?
    } else {
        solve_feasibility_nd(spec, bound)?
    };
    let mut r = Report::new();
    r.put("spec", "linear_ce").put("n", spec.dim()).put("bound", bound);
    match outcome {
        LpOutcome::Feasible(sol) => {
            r.put("status", "feasible").num("residual", sol.residual);
            for t in 0..spec.dim() {
                if let Ok(fit) = affine_deviation(&sol.pmf, t) {
                    r.list(format!("fitted_slopes_x{t}"), &fit.slopes);
                    r.num(format!("fitted_intercept_x{t}"), fit.intercept);
                }
            }
            let path = write_artifact(&common.out, "pmf.csv", &sol.pmf.to_csv())?;
            r.put("pmf", path.display());
            Ok(Outcome::ok(r))
        }
        LpOutcome::Infeasible(cert) => {
            let path = write_artifact(&common.out, "certificate.csv", &format!("{}\n", cert.to_csv_line()))?;
            r.put("status", "infeasible").put("certificate", path.display());
            if spec.dim() == 2 {
                r.num("certificate_margin", countcompat::lince::certificate_margin(&cert, spec)?);
            }
            Ok(Outcome {
                positive: false,
                report: r,
            })
        }
    }
}

fn oracle(model: &Model, trunc: Option<usize>, common: &Common) -> Result<Outcome> {
    let pmf: Joint = match model {
        Model::Pmf(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Joint::from_csv(&text)?
        }
        Model::Family(d) => {
            let bound = match trunc {
                Some(b) => b,
                None => d.default_bound()?,
            };
            d.build_pmf(bound)?
        }
        other => bail!("oracle needs family= or pmf=, got {}", other.kind()),
    };
    let mut r = Report::new();
    r.put("dim", pmf.dim()).put("bound", pmf.bound()).num("captured_mass", pmf.captured_mass());
    let m = moments(&pmf);
    r.list("mean", &m.mean);
    for t in 0..pmf.dim() {
        let table = conditional_expectation(&pmf, t)?;
        let path = write_artifact(&common.out, &format!("ce_x{t}.csv"), &table.to_csv())?;
        r.put(format!("ce_table_x{t}"), path.display());
        match affine_deviation(&pmf, t) {
            Ok(fit) => {
                r.list(format!("fitted_slopes_x{t}"), &fit.slopes);
                r.num(format!("fitted_intercept_x{t}"), fit.intercept);
                r.num(format!("affine_deviation_x{t}"), fit.max_abs_deviation);
            }
            Err(e) => {
                r.put(format!("affine_deviation_x{t}"), format!("undefined ({e})"));
            }
        }
    }
    Ok(Outcome::ok(r))
}

fn sample(model: &Model, count: usize, seed: u64, common: &Common) -> Result<Outcome> {
    let desc = family(model)?;
    let s = sample_family(desc, count, seed)?;
    let path = write_artifact(&common.out, "samples.csv", &s.to_csv())?;
    let means: Vec<f64> = (0..s.dim()).map(|i| s.mean(i)).collect();
    let mut r = Report::new();
    r.put("family", desc).put("count", count).put("seed", seed).list("sample_mean", &means);
    r.put("samples", path.display());
    Ok(Outcome::ok(r))
}

fn conditional_spec(model: &Model) -> Result<ConditionalSpec> {
    Ok(match model {
        Model::LinearPoisson { a, b, c, d } => ConditionalSpec::LinearPoisson {
            a: *a,
            b: *b,
            c: *c,
            d: *d,
        },
        Model::Car(s) => ConditionalSpec::Car(s.clone()),
        Model::RandomCoeff(s) => ConditionalSpec::RandomCoeff(s.clone()),
        other => bail!("gibbs needs spec=linear_poisson, car or random_coeff, got {}", other.kind()),
    })
}

fn gibbs(model: &Model, sweeps: usize, burnin: Option<usize>, seed: u64, common: &Common) -> Result<Outcome> {
    let spec = conditional_spec(model)?;
    let burnin = burnin.unwrap_or_else(|| default_burnin(sweeps));
    let chain = gibbs_run(&spec, sweeps, burnin, seed)?;
    let chain_path = write_artifact(&common.out, "chain.csv", &chain.to_csv())?;
    let means: Vec<f64> = (0..chain.dim()).map(|i| chain.mean(i)).collect();
    let mut r = Report::new();
    r.put("spec", model.kind()).put("sweeps", sweeps).put("burnin", burnin).put("seed", seed);
    r.list("chain_mean", &means).put("chain", chain_path.display());
    match gibbs_compat_diagnostic(&spec, sweeps, seed) {
        Ok(diag) => {
            let path = write_artifact(&common.out, "diagnostic.csv", &diag.to_csv())?;
            r.num("discrepancy", diag.discrepancy).put("configurations", diag.rows.len());
            r.put("diagnostic", path.display());
        }
        Err(e @ countcompat::Error::InconclusiveDiagnostic { .. }) => {
            r.put("discrepancy", format!("inconclusive ({e})"));
        }
        Err(e) => return Err(e.into()),
    }
    Ok(Outcome::ok(r))
}
