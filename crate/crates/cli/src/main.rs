//! `decoherence`: figure data, collective functionals and verification
//! suites for the periodic spin chain.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use decoherence_core::collective::{fourier_slice, DEFAULT_EXACT_CAP};
use decoherence_core::verify::{run_all, VerifyOptions};
use decoherence_core::{
    collective_df_gaussian, degree_of_decoherence, gamma_factor, gaussian_coefficients,
    m1_sweep_range, smeared_coefficients, ChainConfig, ChainPropagator, ComponentDF, Error,
    ExactDFTable, PairRule, SweepRow,
};

const OUT_DIR_ENV: &str = "DECOHERENCE_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "decoherence",
    version,
    about = "Decoherence functionals for collective spin-chain histories"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Number of sites.
    #[arg(long = "m", global = true, default_value_t = 1000)]
    m: usize,
    /// Region-1 size for single-point commands (default M/2).
    #[arg(long = "m1", global = true)]
    m1: Option<usize>,
    #[arg(long, global = true, default_value_t = 1.0)]
    chi: f64,
    #[arg(
        long,
        global = true,
        default_value_t = 1000.0,
        allow_negative_numbers = true
    )]
    t: f64,
    /// Initial site in region 1 (requires --k2).
    #[arg(long, global = true, requires = "k2")]
    k1: Option<usize>,
    /// Initial site in region 2 (requires --k1).
    #[arg(long, global = true, requires = "k1")]
    k2: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = RuleArg::Endpoints)]
    pair_rule: RuleArg,
    /// Number of components.
    #[arg(long = "n", global = true)]
    n: Option<usize>,
    /// Coarse-graining width as a fraction of N.
    #[arg(long = "f", global = true)]
    f: Option<f64>,
    /// Coarse-graining width in occupation units (overrides f·N).
    #[arg(long, global = true)]
    sigma: Option<f64>,
    /// Time-`t` occupation slice for `collective` (default round(N·pt)).
    #[arg(long = "n2", global = true)]
    n2: Option<usize>,
    /// Output file; defaults to $DECOHERENCE_OUT_DIR/<command>.<ext> or stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, global = true, default_value_t = decoherence_core::spectral::DEFAULT_ORACLE_CAP)]
    oracle_cap: usize,
    #[arg(long, global = true, default_value_t = decoherence_core::conservation::DEFAULT_QUAD_STEPS)]
    quad_steps: usize,
    #[arg(long, global = true, default_value_t = 2024)]
    seed: u64,
    /// Treat numerical-degeneracy warnings as failures.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq)]
enum Command {
    /// The four probabilities against M1.
    Figure1,
    /// |d| / sqrt(p_yy p_ny) against M1.
    Figure2,
    /// |Im d|² / Γ against M1.
    Figure3,
    /// Full M1 sweep table.
    Sweep,
    /// Exact N-component functional on one n2 slice, or its Gaussian form.
    Collective {
        /// Emit the smeared Gaussian form instead of the exact values.
        #[arg(long)]
        gaussian: bool,
    },
    /// Degree of decoherence over a grid of N and f.
    Epsilon,
    /// Run every oracle and invariant suite.
    Verify,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Figure1 => "figure1",
            Command::Figure2 => "figure2",
            Command::Figure3 => "figure3",
            Command::Sweep => "sweep",
            Command::Collective { .. } => "collective",
            Command::Epsilon => "epsilon",
            Command::Verify => "verify",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum RuleArg {
    Endpoints,
    Centered,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Usage problems exit with 2, everything else with 1.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_)
            | Error::InvalidPair { .. }
            | Error::SiteOutOfRange { .. }
            | Error::OccupationOutOfRange { .. }
            | Error::CapExceeded { .. }
            | Error::InvalidArgument(_) => Failure::Usage(e.into()),
            other => Failure::Runtime(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

struct Output {
    body: String,
    warnings: Vec<String>,
    failed: bool,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn json_body<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

impl Cli {
    fn rule(&self) -> PairRule {
        match (self.k1, self.k2) {
            (Some(k1), Some(k2)) => PairRule::Fixed { k1, k2 },
            _ => match self.pair_rule {
                RuleArg::Endpoints => PairRule::EndPoints,
                RuleArg::Centered => PairRule::Centered,
            },
        }
    }

    fn chain(&self) -> Result<ChainConfig, Failure> {
        let m1 = self.m1.unwrap_or(self.m / 2);
        Ok(ChainConfig::new(self.m, m1, self.chi, self.t)?)
    }

    fn component(&self) -> Result<ComponentDF, Failure> {
        let cfg = self.chain()?;
        let pair = self.rule().pair(&cfg)?;
        Ok(ChainPropagator::new(cfg)?.component_df(pair)?)
    }

    fn sweep(&self) -> Result<Vec<SweepRow>, Failure> {
        if self.m < 2 {
            return Err(Error::InvalidConfig(format!("M = {} < 2", self.m)).into());
        }
        let rule = self.rule();
        Ok(m1_sweep_range(
            self.m,
            self.chi,
            self.t,
            rule,
            rule.valid_m1(self.m),
        )?)
    }
}

fn sweep_warnings(rows: &[SweepRow]) -> Vec<String> {
    let mut warnings = Vec::new();
    let nan = rows.iter().filter(|r| r.fig3.is_nan()).count();
    if nan > 0 {
        warnings.push(format!("{nan} rows have undefined Γ (fig3 = NaN)"));
    }
    let negative = rows.iter().filter(|r| r.fig3 < 0.0).count();
    if negative > 0 {
        warnings.push(format!("{negative} rows have negative Γ"));
    }
    let flat = rows.iter().filter(|r| r.df.im_d().abs() < 1e-12).count();
    if flat == rows.len() && !rows.is_empty() {
        warnings.push(
            "Im d vanishes on every row; figure3 is identically zero for this pair rule".into(),
        );
    }
    warnings
}

fn figure(cli: &Cli, cmd: Command) -> Result<Output, Failure> {
    let rows = cli.sweep()?;
    let warnings = sweep_warnings(&rows);
    let body = match (cmd, cli.format) {
        (Command::Figure1, Format::Csv) => csv(
            &["M1", "p_yy", "p_ny", "p_yn", "p_nn"],
            rows.iter().map(|r| {
                vec![r.m1.to_string(), num(r.df.p_yy), num(r.df.p_ny), num(r.df.p_yn), num(r.df.p_nn)]
            }),
        ),
        (Command::Figure2, Format::Csv) => {
            csv(&["M1", "ratio"], rows.iter().map(|r| vec![r.m1.to_string(), num(r.ratio)]))
        }
        (Command::Figure3, Format::Csv) => {
            csv(&["M1", "fig3"], rows.iter().map(|r| vec![r.m1.to_string(), num(r.fig3)]))
        }
        (Command::Sweep, Format::Csv) => csv(
            &["M1", "k1", "k2", "p_yy", "p_ny", "p_yn", "p_nn", "re_d", "im_d", "ratio", "fig3"],
            rows.iter().map(|r| {
                vec![
                    r.m1.to_string(),
                    r.pair.k1.to_string(),
                    r.pair.k2.to_string(),
                    num(r.df.p_yy),
                    num(r.df.p_ny),
                    num(r.df.p_yn),
                    num(r.df.p_nn),
                    num(r.df.re_d()),
                    num(r.df.im_d()),
                    num(r.ratio),
                    num(r.fig3),
                ]
            }),
        ),
        (Command::Figure1, Format::Json) => json_body(
            &rows
                .iter()
                .map(|r| json!({"M1": r.m1, "p_yy": r.df.p_yy, "p_ny": r.df.p_ny, "p_yn": r.df.p_yn, "p_nn": r.df.p_nn}))
                .collect::<Vec<_>>(),
        )?,
        (Command::Figure2, Format::Json) => {
            json_body(&rows.iter().map(|r| json!({"M1": r.m1, "ratio": r.ratio})).collect::<Vec<_>>())?
        }
        (Command::Figure3, Format::Json) => {
            json_body(&rows.iter().map(|r| json!({"M1": r.m1, "fig3": finite_or_null(r.fig3)})).collect::<Vec<_>>())?
        }
        (_, Format::Json) => json_body(
            &rows
                .iter()
                .map(|r| {
                    json!({
                        "M1": r.m1, "k1": r.pair.k1, "k2": r.pair.k2,
                        "p_yy": r.df.p_yy, "p_ny": r.df.p_ny, "p_yn": r.df.p_yn, "p_nn": r.df.p_nn,
                        "re_d": r.df.re_d(), "im_d": r.df.im_d(),
                        "ratio": r.ratio, "fig3": finite_or_null(r.fig3),
                    })
                })
                .collect::<Vec<_>>(),
        )?,
        _ => unreachable!("figure() only handles sweep commands"),
    };
    Ok(Output {
        body,
        warnings,
        failed: false,
    })
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

fn collective(cli: &Cli, gaussian: bool) -> Result<Output, Failure> {
    let df = cli.component()?;
    let n = cli.n.unwrap_or(200);
    if n == 0 || n > DEFAULT_EXACT_CAP {
        return Err(
            Error::InvalidArgument(format!("N = {n} outside 1..={DEFAULT_EXACT_CAP}")).into(),
        );
    }
    let n2 = cli
        .n2
        .unwrap_or_else(|| (n as f64 * df.pt()).round() as usize);
    if n2 > n {
        return Err(Error::OccupationOutOfRange { value: n2, n }.into());
    }
    let mut warnings = Vec::new();
    if df.im_d().abs() < 1e-12 {
        warnings.push("Im d = 0: component functional is exactly consistent and the Gaussian form is degenerate".into());
    }

    if !gaussian {
        let table = ExactDFTable::from_fourier_slices(&df, n, &[n2])?;
        let body = match cli.format {
            Format::Csv => csv(
                &["n1", "n2", "n1p", "re", "im"],
                table.entries().map(|(a, b, c, z)| {
                    vec![
                        a.to_string(),
                        b.to_string(),
                        c.to_string(),
                        num(z.re),
                        num(z.im),
                    ]
                }),
            ),
            Format::Json => json_body(&json!({
                "N": n,
                "component": df,
                "entries": table.entries().map(|(a, b, c, z)| json!([a, b, c, z.re, z.im])).collect::<Vec<_>>(),
            }))?,
        };
        return Ok(Output {
            body,
            warnings,
            failed: false,
        });
    }

    let gc = gaussian_coefficients(&df, n).map_err(|e| match e {
        Error::GaussianDegenerate => {
            Failure::Runtime(anyhow!("{e}; choose a pair with odd separation"))
        }
        other => other.into(),
    })?;
    let sigma = cli.sigma.unwrap_or(cli.f.unwrap_or(0.01) * n as f64);
    let sc = smeared_coefficients(&gc, sigma)?;
    if sc.ta <= sc.tb {
        warnings.push(format!(
            "no off-diagonal suppression: alpha~ - beta~ = {:.3e}",
            sc.ta - sc.tb
        ));
    }
    let exact = fourier_slice(&df, n, n2)?;
    let rows: Vec<(usize, usize, f64, f64)> = (0..=n)
        .flat_map(|n1| (0..=n).map(move |n1p| (n1, n1p)))
        .map(|(n1, n1p)| {
            let g = collective_df_gaussian(&sc, n, gc.p0, gc.pt, n1 as f64, n2 as f64, n1p as f64);
            (n1, n1p, g.re, g.im)
        })
        .collect();
    let body = match cli.format {
        Format::Csv => csv(
            &["n1", "n2", "n1p", "re", "im", "exact_re", "exact_im"],
            rows.iter().map(|&(n1, n1p, re, im)| {
                let z = exact[n1 * (n + 1) + n1p];
                vec![
                    n1.to_string(),
                    n2.to_string(),
                    n1p.to_string(),
                    num(re),
                    num(im),
                    num(z.re),
                    num(z.im),
                ]
            }),
        ),
        Format::Json => json_body(&json!({
            "N": n,
            "n2": n2,
            "component": df,
            "coefficients": gc,
            "smeared": sc,
        }))?,
    };
    Ok(Output {
        body,
        warnings,
        failed: false,
    })
}

fn epsilon(cli: &Cli) -> Result<Output, Failure> {
    let df = cli.component()?;
    let ns: Vec<usize> = match cli.n {
        Some(n) => vec![n],
        None => vec![100, 1_000, 10_000, 100_000, 1_000_000],
    };
    let fs: Vec<f64> = match cli.f {
        Some(f) => vec![f],
        None => vec![0.001, 0.003, 0.01, 0.03, 0.1],
    };
    let gamma = gamma_factor(&df)?;
    let mut warnings = Vec::new();
    if gamma < 0.0 {
        warnings.push(format!("negative Γ = {gamma:.6e}"));
    }
    let mut rows = Vec::new();
    for &n in &ns {
        for &f in &fs {
            rows.push(degree_of_decoherence(&df, n, f)?);
        }
    }
    if rows.iter().any(|r| r.degenerate) {
        warnings.push("Im d = 0: epsilon reported as 0 (degenerate)".into());
    }
    let body = match cli.format {
        Format::Csv => csv(
            &[
                "N",
                "f",
                "sigma",
                "gamma",
                "epsilon",
                "ln_epsilon",
                "epsilon_coefficients",
                "degenerate",
            ],
            rows.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    num(r.f),
                    num(r.sigma),
                    num(r.gamma_factor),
                    num(r.epsilon),
                    num(r.ln_epsilon),
                    r.epsilon_coefficients
                        .map(num)
                        .unwrap_or_else(|| "NaN".into()),
                    r.degenerate.to_string(),
                ]
            }),
        ),
        Format::Json => json_body(&rows)?,
    };
    Ok(Output {
        body,
        warnings,
        failed: false,
    })
}

fn verify(cli: &Cli) -> Result<Output, Failure> {
    if cli.oracle_cap < 4 || cli.quad_steps < 2 {
        return Err(
            Error::InvalidArgument("need --oracle-cap ≥ 4 and --quad-steps ≥ 2".into()).into(),
        );
    }
    let results = run_all(VerifyOptions {
        oracle_cap: cli.oracle_cap,
        quad_steps: cli.quad_steps,
        seed: cli.seed,
    });
    let failed = results.iter().any(|r| !r.passed);
    let body = match cli.format {
        Format::Csv => {
            let mut s = String::new();
            for r in &results {
                let _ = writeln!(
                    s,
                    "{} {:<20} worst {:.3e} (tol {:.1e})  {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.worst,
                    r.tolerance,
                    r.detail
                );
            }
            let passed = results.iter().filter(|r| r.passed).count();
            let _ = writeln!(s, "{passed}/{} suites passed", results.len());
            s
        }
        Format::Json => json_body(&results)?,
    };
    Ok(Output {
        body,
        warnings: Vec::new(),
        failed,
    })
}

fn destination(cli: &Cli) -> Option<PathBuf> {
    cli.output.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{}.{}", cli.command.name(), cli.format.ext())))
    })
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    if !cli.chi.is_finite() || !cli.t.is_finite() {
        return Err(Error::InvalidConfig("chi and t must be finite".into()).into());
    }
    match cli.command {
        cmd @ (Command::Figure1 | Command::Figure2 | Command::Figure3 | Command::Sweep) => {
            figure(cli, cmd)
        }
        Command::Collective { gaussian } => collective(cli, gaussian),
        Command::Epsilon => epsilon(cli),
        Command::Verify => verify(cli),
    }
}

fn emit(cli: &Cli, out: &Output) -> anyhow::Result<()> {
    match destination(cli) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
            }
            std::fs::write(&path, &out.body).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(out.body.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            if let Err(e) = emit(&cli, &out) {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
            if out.failed || (cli.strict && !out.warnings.is_empty()) {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
