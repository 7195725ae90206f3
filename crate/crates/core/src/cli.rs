//! Command-line front end. Arguments (or a JSON config file) become a
//! [`RunConfig`]; defaults are filled in before anything runs, and the
//! resolved config is embedded in every report.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::armour::{compute_armour, sample_window, sample_x, DEFAULT_CAP};
use crate::bounds::{self, BoundsParams};
use crate::error::{Error, Result};
use crate::estimators::{self, per_replicate, Mode, TailReport};
use crate::exact1d::{self, ArmourCase};
use crate::field::{Seed, Site, UniformField};
use crate::lattice::BoxRegion;
use crate::parking::{jam, jam_box, BoundaryCondition};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Covariance samples used to estimate σ² when `lil` is not given one.
const LIL_SIGMA2_SAMPLES: u64 = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    /// Dense 0/1 text; `simulate` only.
    Grid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Simulate,
    Density,
    Covariance,
    Clt,
    Lil,
    Concentration,
    Coupling,
    Bounds,
    Exact,
    Oracle,
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Density => "density",
            Command::Covariance => "covariance",
            Command::Clt => "clt",
            Command::Lil => "lil",
            Command::Concentration => "concentration",
            Command::Coupling => "coupling",
            Command::Bounds => "bounds",
            Command::Exact => "exact",
            Command::Oracle => "oracle",
            Command::Selftest => "selftest",
        }
    }

    /// Config keys the command reads.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Command::Simulate => &["d", "n", "seed", "cap", "mode"],
            Command::Density | Command::Clt => &["d", "n", "replicates", "seed", "cap", "mode"],
            Command::Covariance => &["d", "r-max", "replicates", "seed", "cap"],
            Command::Lil => &["d", "n-list", "replicates", "seed", "cap", "sigma2", "r-max"],
            Command::Concentration => &["d", "n", "replicates", "eps", "seed", "cap", "mode"],
            Command::Coupling => &["d", "n", "replicates", "m", "seed", "cap"],
            Command::Bounds => &["d", "n", "eps", "k", "l"],
            Command::Exact => &["max-extent"],
            Command::Oracle => &["size", "left", "right"],
            Command::Selftest => &["seed", "corrupt-field"],
        }
    }
}

/// One experiment. Unset fields take per-command defaults in
/// [`RunConfig::resolve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<Seed>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_extent: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrupt_field: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(command: Command) -> RunConfig {
        RunConfig {
            command,
            d: None,
            n: None,
            replicates: None,
            seed: None,
            cap: None,
            mode: None,
            eps: None,
            m: None,
            n_list: None,
            r_max: None,
            sigma2: None,
            k: None,
            l: None,
            size: None,
            left: None,
            right: None,
            max_extent: None,
            corrupt_field: None,
            format: None,
            output: None,
            threads: None,
        }
    }

    fn present_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let mut add = |set: bool, k| {
            if set {
                keys.push(k)
            }
        };
        add(self.d.is_some(), "d");
        add(self.n.is_some(), "n");
        add(self.replicates.is_some(), "replicates");
        add(self.seed.is_some(), "seed");
        add(self.cap.is_some(), "cap");
        add(self.mode.is_some(), "mode");
        add(self.eps.is_some(), "eps");
        add(self.m.is_some(), "m");
        add(self.n_list.is_some(), "n-list");
        add(self.r_max.is_some(), "r-max");
        add(self.sigma2.is_some(), "sigma2");
        add(self.k.is_some(), "k");
        add(self.l.is_some(), "l");
        add(self.size.is_some(), "size");
        add(self.left.is_some(), "left");
        add(self.right.is_some(), "right");
        add(self.max_extent.is_some(), "max-extent");
        add(self.corrupt_field.is_some(), "corrupt-field");
        keys
    }

    /// Rejects keys the command does not read and fills in every default.
    pub fn resolve(mut self) -> Result<RunConfig> {
        use Command::*;
        let cmd = self.command;
        if let Some(k) = self.present_keys().into_iter().find(|k| !cmd.keys().contains(k)) {
            return Err(Error::invalid(
                "config",
                format!("`{k}` is not used by `{}`", cmd.name()),
            ));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("threads", "must be at least 1"));
        }
        let has = |k: &str| cmd.keys().contains(&k);
        if has("d") {
            self.d.get_or_insert(1);
        }
        let d = self.d.unwrap_or(1);
        if has("n") {
            self.n.get_or_insert(match cmd {
                Simulate | Bounds => 10,
                Clt => 200,
                Coupling => 100,
                _ => 50,
            });
        }
        if has("replicates") {
            self.replicates.get_or_insert(match cmd {
                Covariance => 100_000,
                Clt => 5_000,
                Lil => 100,
                _ => 10_000,
            });
        }
        if has("seed") {
            self.seed.get_or_insert(Seed(0));
        }
        if has("cap") {
            self.cap.get_or_insert(DEFAULT_CAP);
        }
        if has("mode") {
            self.mode.get_or_insert(Mode::Thermodynamic);
        }
        if has("eps") {
            self.eps.get_or_insert_with(|| match cmd {
                Bounds => vec![10.0],
                _ => (1..=10).map(|k| 5.0 * k as f64).collect(),
            });
        }
        if has("m") {
            self.m.get_or_insert_with(|| (0..=6).map(|k| 2.0 * k as f64).collect());
        }
        if has("n-list") {
            let top = if d == 1 { 9 } else { 5 };
            self.n_list
                .get_or_insert_with(|| (0..=top).map(|k| 1u32 << k).collect());
        }
        if has("r-max") && (cmd == Covariance || self.sigma2.is_none()) {
            self.r_max.get_or_insert(if d == 1 { 10 } else { 4 });
        }
        if has("k") {
            self.k.get_or_insert(1);
            self.l.get_or_insert(1);
        }
        if has("size") {
            self.size.get_or_insert(3);
            self.left.get_or_insert(0);
            self.right.get_or_insert(0);
        }
        if has("max-extent") {
            self.max_extent.get_or_insert(4);
        }
        if self.corrupt_field == Some(false) {
            self.corrupt_field = None;
        }
        let format = *self.format.get_or_insert(match cmd {
            Bounds | Exact | Oracle => Format::Json,
            _ => Format::Csv,
        });
        if format == Format::Grid && cmd != Simulate {
            return Err(Error::invalid("format", "grid output is only available for `simulate`"));
        }
        if cmd == Bounds && self.eps.as_ref().map_or(0, |e| e.len()) != 1 {
            return Err(Error::invalid("eps", "`bounds` takes exactly one value"));
        }
        for (name, v) in [("left", self.left), ("right", self.right)] {
            if matches!(v, Some(x) if x > 1) {
                return Err(Error::invalid(name, "boundary values are 0 or 1"));
            }
        }
        Ok(self)
    }

    /// The config as embedded in reports: worker count and output path
    /// do not affect results and are left out.
    pub fn provenance(&self) -> RunConfig {
        let mut c = self.clone();
        c.threads = None;
        c.output = None;
        c
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "parkjam",
    version,
    about = "Parking process on Z^d: jamming, armours, estimators and bounds"
)]
pub struct Cli {
    /// Worker threads (default: available parallelism). Never changes results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Run the JSON config in this file instead of a subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Option<Cmd>,
}

#[derive(Args, Debug, Default)]
pub struct FieldArgs {
    /// Lattice dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Base seed, decimal or 0x-hex. Replicate r uses seed + r.
    #[arg(long)]
    pub seed: Option<Seed>,
    /// Armour search radius.
    #[arg(long)]
    pub cap: Option<u32>,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Jam one box and print the configuration.
    Simulate {
        #[command(flatten)]
        field: FieldArgs,
        /// Box radius.
        #[arg(long)]
        n: Option<u32>,
        /// `thermodynamic` (infinite-volume marginals) or `free` (empty exterior).
        #[arg(long)]
        mode: Option<Mode>,
    },
    /// Occupation density of Λ_n.
    Density {
        #[command(flatten)]
        field: FieldArgs,
        /// Box radius.
        #[arg(long)]
        n: Option<u32>,
        /// Independent replicates, seeds `seed`, `seed + 1`, ...
        #[arg(long)]
        replicates: Option<u64>,
        /// `thermodynamic` (infinite-volume marginals) or `free` (empty exterior).
        #[arg(long)]
        mode: Option<Mode>,
    },
    /// Covariances Cov(X(0), X(i)) and the truncated σ² sum.
    Covariance {
        #[command(flatten)]
        field: FieldArgs,
        /// Largest displacement in max norm.
        #[arg(long)]
        r_max: Option<u32>,
        /// Independently sampled windows.
        #[arg(long, alias = "replicates")]
        samples: Option<u64>,
    },
    /// KS test of standardized counts against N(0,1).
    Clt {
        #[command(flatten)]
        field: FieldArgs,
        /// Box radius.
        #[arg(long)]
        n: Option<u32>,
        /// Independent replicates, seeds `seed`, `seed + 1`, ...
        #[arg(long)]
        replicates: Option<u64>,
        /// `thermodynamic` (infinite-volume marginals) or `free` (empty exterior).
        #[arg(long)]
        mode: Option<Mode>,
    },
    /// Law of the iterated logarithm paths over nested boxes.
    Lil {
        #[command(flatten)]
        field: FieldArgs,
        /// Comma-separated box radii, each at least 1.
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<u32>>,
        /// Independent replicates, seeds `seed`, `seed + 1`, ...
        #[arg(long)]
        replicates: Option<u64>,
        /// Normalising variance; estimated from covariances when omitted.
        #[arg(long)]
        sigma2: Option<f64>,
        /// Covariance radius for the σ² estimate.
        #[arg(long)]
        r_max: Option<u32>,
    },
    /// Empirical concentration tails against the analytic bound.
    Concentration {
        #[command(flatten)]
        field: FieldArgs,
        /// Box radius.
        #[arg(long)]
        n: Option<u32>,
        /// Independent replicates, seeds `seed`, `seed + 1`, ...
        #[arg(long)]
        replicates: Option<u64>,
        /// Comma-separated deviation thresholds.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        /// `thermodynamic` (infinite-volume marginals) or `free` (empty exterior).
        #[arg(long)]
        mode: Option<Mode>,
    },
    /// P(|N_n - N̄_n| > M) on a shared field (d = 1).
    Coupling {
        #[command(flatten)]
        field: FieldArgs,
        /// Box radius.
        #[arg(long)]
        n: Option<u32>,
        /// Independent replicates, seeds `seed`, `seed + 1`, ...
        #[arg(long)]
        replicates: Option<u64>,
        /// Comma-separated discrepancy thresholds.
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<f64>>,
    },
    /// Evaluate every closed-form bound.
    Bounds {
        /// Lattice dimension.
        #[arg(long)]
        d: Option<usize>,
        /// Box radius.
        #[arg(long)]
        n: Option<u32>,
        /// Deviation threshold.
        #[arg(long)]
        eps: Option<f64>,
        /// Size of the first set in the mixing bounds.
        #[arg(long)]
        k: Option<u64>,
        /// Size of the second set in the mixing bounds.
        #[arg(long)]
        l: Option<u64>,
    },
    /// Exact d = 1 armour case table and density.
    Exact {
        /// Largest armour extent on either side.
        #[arg(long)]
        max_extent: Option<u64>,
    },
    /// Exact law of the jammed count on a short path.
    Oracle {
        /// Path length, at most 10.
        #[arg(long)]
        size: Option<usize>,
        /// Frozen value left of the path.
        #[arg(long)]
        left: Option<u8>,
        /// Frozen value right of the path.
        #[arg(long)]
        right: Option<u8>,
    },
    /// Quick consistency checks.
    Selftest {
        /// Base seed, decimal or 0x-hex.
        #[arg(long)]
        seed: Option<Seed>,
        #[arg(long, hide = true)]
        corrupt_field: bool,
    },
}

impl Cmd {
    fn into_config(self) -> RunConfig {
        let mut c;
        let set_field = |c: &mut RunConfig, f: FieldArgs| {
            c.d = f.d;
            c.seed = f.seed;
            c.cap = f.cap;
        };
        match self {
            Cmd::Simulate { field, n, mode } => {
                c = RunConfig::new(Command::Simulate);
                set_field(&mut c, field);
                c.n = n;
                c.mode = mode;
            }
            Cmd::Density {
                field,
                n,
                replicates,
                mode,
            } => {
                c = RunConfig::new(Command::Density);
                set_field(&mut c, field);
                c.n = n;
                c.replicates = replicates;
                c.mode = mode;
            }
            Cmd::Covariance { field, r_max, samples } => {
                c = RunConfig::new(Command::Covariance);
                set_field(&mut c, field);
                c.r_max = r_max;
                c.replicates = samples;
            }
            Cmd::Clt {
                field,
                n,
                replicates,
                mode,
            } => {
                c = RunConfig::new(Command::Clt);
                set_field(&mut c, field);
                c.n = n;
                c.replicates = replicates;
                c.mode = mode;
            }
            Cmd::Lil {
                field,
                n_list,
                replicates,
                sigma2,
                r_max,
            } => {
                c = RunConfig::new(Command::Lil);
                set_field(&mut c, field);
                c.n_list = n_list;
                c.replicates = replicates;
                c.sigma2 = sigma2;
                c.r_max = r_max;
            }
            Cmd::Concentration {
                field,
                n,
                replicates,
                eps,
                mode,
            } => {
                c = RunConfig::new(Command::Concentration);
                set_field(&mut c, field);
                c.n = n;
                c.replicates = replicates;
                c.eps = eps;
                c.mode = mode;
            }
            Cmd::Coupling {
                field,
                n,
                replicates,
                m,
            } => {
                c = RunConfig::new(Command::Coupling);
                set_field(&mut c, field);
                c.n = n;
                c.replicates = replicates;
                c.m = m;
            }
            Cmd::Bounds { d, n, eps, k, l } => {
                c = RunConfig::new(Command::Bounds);
                c.d = d;
                c.n = n;
                c.eps = eps.map(|e| vec![e]);
                c.k = k;
                c.l = l;
            }
            Cmd::Exact { max_extent } => {
                c = RunConfig::new(Command::Exact);
                c.max_extent = max_extent;
            }
            Cmd::Oracle { size, left, right } => {
                c = RunConfig::new(Command::Oracle);
                c.size = size;
                c.left = left;
                c.right = right;
            }
            Cmd::Selftest { seed, corrupt_field } => {
                c = RunConfig::new(Command::Selftest);
                c.seed = seed;
                c.corrupt_field = Some(corrupt_field);
            }
        }
        c
    }
}

/// Builds the run config from parsed arguments. Global flags override the
/// matching entries of a config file.
pub fn config_from_cli(cli: Cli) -> Result<RunConfig> {
    let mut cfg = match (cli.config, cli.command) {
        (Some(_), Some(_)) => {
            return Err(Error::invalid(
                "config",
                "give either a subcommand or --config, not both",
            ))
        }
        (None, None) => return Err(Error::invalid("command", "a subcommand or --config is required")),
        (None, Some(cmd)) => cmd.into_config(),
        (Some(path), None) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| Error::invalid("config", format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Error::invalid("config", format!("{}: {e}", path.display())))?
        }
    };
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if cli.output.is_some() {
        cfg.output = cli.output;
    }
    if cli.format.is_some() {
        cfg.format = cli.format;
    }
    cfg.resolve()
}

/// A rendered report; `ok` is false when a selftest check failed.
pub struct Report {
    pub body: Vec<u8>,
    pub ok: bool,
}

/// Runs a resolved config on a pool of `cfg.threads` workers.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    pool.install(|| execute(cfg))
}

/// Entry point shared by the binary and the tests. Returns the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    let result = config_from_cli(cli).and_then(|cfg| {
        let report = run(&cfg)?;
        match &cfg.output {
            Some(path) => fs::write(path, &report.body)?,
            None => stdout.write_all(&report.body)?,
        }
        Ok(report.ok)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => {
            let _ = writeln!(stderr, "error: selftest failed");
            2
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_usage() {
                1
            } else {
                2
            }
        }
    }
}

fn provenance_lines(cfg: &RunConfig) -> String {
    format!(
        "# parkjam {VERSION}\n# config {}\n",
        serde_json::to_string(&cfg.provenance()).expect("config serializes")
    )
}

/// CSV body with `# key: value` notes and the provenance trailer.
fn csv(cfg: &RunConfig, header: &str, rows: &[String], notes: &[(&str, String)]) -> Vec<u8> {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for r in rows {
        out.push_str(r);
        out.push('\n');
    }
    for (k, v) in notes {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out.push_str(&provenance_lines(cfg));
    out.into_bytes()
}

fn json_report(cfg: &RunConfig, result: Value) -> Result<Vec<u8>> {
    let doc = json!({
        "parkjam": VERSION,
        "config": cfg.provenance(),
        "result": result,
    });
    let mut out = serde_json::to_vec_pretty(&doc)?;
    out.push(b'\n');
    Ok(out)
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn coords_header(d: usize) -> String {
    (1..=d).map(|k| format!("x{k}")).collect::<Vec<_>>().join(",")
}

fn coords_row(s: &Site) -> String {
    s.coords().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

fn execute(cfg: &RunConfig) -> Result<Report> {
    let format = cfg.format.expect("resolved");
    let d = cfg.d.unwrap_or(1);
    let seed = cfg.seed.unwrap_or(Seed(0));
    let cap = cfg.cap.unwrap_or(DEFAULT_CAP);
    let n = cfg.n.unwrap_or(0);
    let replicates = cfg.replicates.unwrap_or(0);
    let mode = cfg.mode.unwrap_or(Mode::Thermodynamic);
    let body = match cfg.command {
        Command::Simulate => {
            let field = UniformField::new(seed, d)?;
            let b = BoxRegion::centered(d, n)?;
            let c = match mode {
                Mode::Thermodynamic => sample_window(&field, &b, cap)?,
                Mode::FreeBoundary => jam_box(&field, &b)?,
            };
            match format {
                Format::Json => json_report(cfg, serde_json::to_value(c.to_doc())?)?,
                Format::Grid => {
                    let mut out = c.to_grid(&b)?;
                    out.push_str(&provenance_lines(cfg));
                    out.into_bytes()
                }
                Format::Csv => {
                    let rows: Vec<String> = c
                        .sites()
                        .iter()
                        .zip(c.occupancy())
                        .map(|(s, x)| format!("{},{x}", coords_row(s)))
                        .collect();
                    let header = format!("{},occupancy", coords_header(d));
                    csv(cfg, &header, &rows, &[("occupied", c.count_occupied().to_string())])
                }
            }
        }
        Command::Density => {
            let e = estimators::estimate_density(d, n, replicates, seed, mode, cap)?;
            match format {
                Format::Json => json_report(cfg, serde_json::to_value(&e)?)?,
                _ => csv(
                    cfg,
                    "mean,stderr,replicates,n,d,mode",
                    &[format!(
                        "{},{},{},{},{},{}",
                        e.mean, e.stderr, e.replicates, e.n, e.d, e.mode
                    )],
                    &[],
                ),
            }
        }
        Command::Covariance => {
            let r_max = cfg.r_max.expect("resolved");
            let t = estimators::estimate_covariance(d, r_max, replicates, seed, cap)?;
            match format {
                Format::Json => json_report(cfg, serde_json::to_value(&t)?)?,
                _ => {
                    let rows: Vec<String> = t
                        .entries
                        .iter()
                        .map(|e| {
                            format!(
                                "{},{},{},{}",
                                coords_row(&e.displacement),
                                e.displacement.max_norm(),
                                e.covariance,
                                e.stderr
                            )
                        })
                        .collect();
                    let header = format!("{},norm,covariance,stderr", coords_header(d));
                    let notes = [
                        ("p0", t.p0.to_string()),
                        ("sigma2_truncated", t.sigma2_truncated.to_string()),
                        ("sigma2_by_radius", join(&t.sigma2_by_radius)),
                        ("sigma2_stderr_by_radius", join(&t.sigma2_stderr_by_radius)),
                        (
                            "truncation_radius",
                            t.truncation_radius.map_or("none".into(), |r| r.to_string()),
                        ),
                    ];
                    csv(cfg, &header, &rows, &notes)
                }
            }
        }
        Command::Clt => {
            let r = estimators::clt_diagnostic(d, n, replicates, seed, mode, cap)?;
            match format {
                Format::Json => json_report(cfg, serde_json::to_value(&r)?)?,
                _ => csv(
                    cfg,
                    "statistic,p_value,raw_statistic,raw_p_value,mean,sd,replicates,n,d,mode",
                    &[format!(
                        "{},{},{},{},{},{},{},{},{},{}",
                        r.ks.statistic,
                        r.ks.p_value,
                        r.ks_raw.statistic,
                        r.ks_raw.p_value,
                        r.mean,
                        r.sd,
                        r.replicates,
                        r.n,
                        r.d,
                        r.mode
                    )],
                    &[],
                ),
            }
        }
        Command::Lil => {
            let n_list = cfg.n_list.clone().expect("resolved");
            let (sigma2, source) = match cfg.sigma2 {
                Some(s) => (s, "given"),
                None => {
                    let r_max = cfg.r_max.expect("resolved");
                    let t = estimators::estimate_covariance(d, r_max, LIL_SIGMA2_SAMPLES, seed, cap)?;
                    (t.sigma2(), "covariance")
                }
            };
            let r = estimators::lil_diagnostic(d, &n_list, replicates, seed, sigma2, cap)?;
            match format {
                Format::Json => {
                    let mut v = serde_json::to_value(&r)?;
                    v["sigma2_source"] = json!(source);
                    json_report(cfg, v)?
                }
                _ => {
                    let rows: Vec<String> = r
                        .paths
                        .iter()
                        .enumerate()
                        .flat_map(|(i, p)| {
                            let r = &r;
                            p.iter()
                                .enumerate()
                                .map(move |(k, x)| format!("{i},{},{},{x}", r.n_list[k], r.volumes[k]))
                        })
                        .collect();
                    let notes = [
                        ("rho", r.rho.to_string()),
                        ("rho_exact", r.rho_exact.to_string()),
                        ("sigma2", r.sigma2.to_string()),
                        ("sigma2_source", source.to_string()),
                        ("running_max", join(&r.running_max)),
                        ("running_max_abs", join(&r.running_max_abs)),
                    ];
                    csv(cfg, "replicate,n,volume,r", &rows, &notes)
                }
            }
        }
        Command::Concentration => {
            let eps = cfg.eps.clone().expect("resolved");
            let t = estimators::concentration_empirics(d, n, replicates, &eps, seed, mode, cap)?;
            tail_report(cfg, format, "eps", &t)?
        }
        Command::Coupling => {
            let m = cfg.m.clone().expect("resolved");
            let t = estimators::coupling_discrepancy(d, n, replicates, seed, &m, cap)?;
            tail_report(cfg, format, "m", &t)?
        }
        Command::Bounds => {
            let p = BoundsParams {
                d: d as u32,
                n,
                eps: cfg.eps.as_ref().expect("resolved")[0],
                k: cfg.k.expect("resolved"),
                l: cfg.l.expect("resolved"),
            };
            let r = bounds::bounds_report(&p)?;
            match format {
                Format::Json => json_report(cfg, serde_json::to_value(&r)?)?,
                _ => {
                    let rows: Vec<String> = r
                        .parameters
                        .iter()
                        .map(|(k, v)| format!("parameter,{k},{v}"))
                        .chain(r.values.iter().map(|(k, v)| format!("bound,{k},{v}")))
                        .collect();
                    csv(cfg, "kind,name,value", &rows, &[])
                }
            }
        }
        Command::Exact => exact_report(cfg, format)?,
        Command::Oracle => {
            let size = cfg.size.expect("resolved");
            let boundary = BoundaryCondition::from_pairs([
                (Site::at(-1), cfg.left.unwrap_or(0)),
                (Site::at(size as i32), cfg.right.unwrap_or(0)),
            ])?;
            let dist = exact1d::enumerate_jam(size, &boundary)?;
            match format {
                // The bare distribution, so it can be consumed directly.
                Format::Json => {
                    let mut out = serde_json::to_vec_pretty(&dist.to_string_map())?;
                    out.push(b'\n');
                    out
                }
                _ => {
                    let rows: Vec<String> = dist
                        .support
                        .iter()
                        .map(|(k, p)| format!("{k},{p},{}", p.to_f64().unwrap_or(f64::NAN)))
                        .collect();
                    csv(
                        cfg,
                        "count,probability,value",
                        &rows,
                        &[("mean", dist.mean().to_string())],
                    )
                }
            }
        }
        Command::Selftest => {
            let checks = selftest(seed, cfg.corrupt_field.unwrap_or(false))?;
            let ok = checks.iter().all(|c| c.pass);
            let body = match format {
                Format::Json => json_report(cfg, json!({ "checks": checks, "pass": ok }))?,
                _ => {
                    let rows: Vec<String> = checks
                        .iter()
                        .map(|c| {
                            format!(
                                "{},{},{},{},{},{}",
                                c.name,
                                c.value,
                                c.relation.as_str(),
                                c.target,
                                c.tolerance,
                                if c.pass { "pass" } else { "FAIL" }
                            )
                        })
                        .collect();
                    csv(cfg, "check,value,relation,target,tolerance,status", &rows, &[])
                }
            };
            return Ok(Report { body, ok });
        }
    };
    Ok(Report { body, ok: true })
}

fn tail_report(cfg: &RunConfig, format: Format, column: &str, t: &TailReport) -> Result<Vec<u8>> {
    Ok(match format {
        Format::Json => json_report(cfg, serde_json::to_value(t)?)?,
        _ => {
            let rows: Vec<String> = t
                .rows
                .iter()
                .map(|r| format!("{},{},{},{},{}", r.threshold, r.exceed, r.empirical, r.stderr, r.bound))
                .collect();
            let mut notes = Vec::new();
            if let Some(rho) = t.rho {
                notes.push(("rho", rho.to_string()));
                notes.push(("rho_exact", t.rho_exact.to_string()));
            }
            csv(cfg, &format!("{column},exceed,empirical,stderr,bound"), &rows, &notes)
        }
    })
}

#[derive(Serialize)]
struct CaseRow {
    left: u64,
    right: u64,
    family: exact1d::CaseFamily,
    probability: f64,
    exact: String,
    occupancy: u8,
}

fn exact_report(cfg: &RunConfig, format: Format) -> Result<Vec<u8>> {
    let max = cfg.max_extent.expect("resolved");
    let cases: Vec<CaseRow> = (0..=max)
        .flat_map(|m| (0..=max).map(move |n| ArmourCase::new(m, n)))
        .map(|c| CaseRow {
            left: c.left,
            right: c.right,
            family: c.family(),
            probability: exact1d::case_probability(&c),
            exact: exact1d::case_probability_exact(&c).to_string(),
            occupancy: c.occupancy(),
        })
        .collect();
    let sums = exact1d::case_family_sums();
    let rho = exact1d::exact_rho()?;
    let closed = exact1d::rho_closed_form();
    Ok(match format {
        Format::Json => json_report(
            cfg,
            json!({
                "cases": cases,
                "family_sums": sums,
                "rho": rho,
                "rho_closed_form": closed,
            }),
        )?,
        _ => {
            let rows: Vec<String> = cases
                .iter()
                .map(|c| {
                    let family = serde_json::to_value(c.family).expect("enum serializes");
                    format!(
                        "{},{},{},{},{},{}",
                        c.left,
                        c.right,
                        family.as_str().unwrap_or(""),
                        c.probability,
                        c.exact,
                        c.occupancy
                    )
                })
                .collect();
            let notes = [
                ("singleton", sums.singleton.to_string()),
                ("one_sided_each", sums.one_sided_each.to_string()),
                ("two_sided", sums.two_sided.to_string()),
                ("even_one_sided_each", sums.even_one_sided_each.to_string()),
                ("even_two_sided", sums.even_two_sided.to_string()),
                ("rho", rho.to_string()),
                ("rho_closed_form", closed.to_string()),
            ];
            csv(cfg, "left,right,family,probability,exact,occupancy", &rows, &notes)
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `|value - target| <= tolerance`.
    Within,
    /// `value <= target + tolerance`.
    AtMost,
}

impl Relation {
    fn as_str(self) -> &'static str {
        match self {
            Relation::Within => "within",
            Relation::AtMost => "at-most",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub relation: Relation,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &'static str, value: f64, relation: Relation, target: f64, tolerance: f64) -> Check {
        let pass = match relation {
            Relation::Within => (value - target).abs() <= tolerance,
            Relation::AtMost => value <= target + tolerance,
        };
        Check {
            name,
            value,
            relation,
            target,
            tolerance,
            pass,
        }
    }
}

/// Fast checks of the whole pipeline. `corrupt` swaps in a broken field
/// to confirm the checks can fail.
pub fn selftest(seed: Seed, corrupt: bool) -> Result<Vec<Check>> {
    let field = |r: u64, d: usize| {
        let s = seed.replicate(r);
        if corrupt {
            UniformField::corrupted(s, d)
        } else {
            UniformField::new(s, d)
        }
    };
    let rho = exact1d::rho_closed_form();
    let mut checks = Vec::new();

    let assembled = exact1d::exact_rho().unwrap_or(f64::NAN);
    checks.push(Check::new("exact-rho", assembled, Relation::Within, rho, 1e-12));

    let b1 = bounds::constant_B(1)?;
    checks.push(Check::new(
        "constant-b-d1",
        b1,
        Relation::Within,
        4.0 * std::f64::consts::E - 3.0,
        1e-12,
    ));

    let r = 200_000u64;
    let xs = per_replicate(r, |i| sample_x(&field(i, 1)?, &Site::at(0), DEFAULT_CAP))?;
    let p = xs.iter().map(|&x| x as u64).sum::<u64>() as f64 / r as f64;
    let se = (rho * (1.0 - rho) / r as f64).sqrt();
    checks.push(Check::new("density-d1", p, Relation::Within, rho, 4.0 * se));

    let singles = per_replicate(r, |i| {
        Ok(compute_armour(&field(i, 1)?, &[Site::at(0)], DEFAULT_CAP)?.len() == 1)
    })?;
    let p = singles.iter().filter(|&&s| s).count() as f64 / r as f64;
    let se = (2.0 / 9.0 / r as f64).sqrt();
    checks.push(Check::new("armour-singleton", p, Relation::Within, 1.0 / 3.0, 4.0 * se));

    let s3 = exact1d::enumerate_jam(3, &BoundaryCondition::zero())?.mean();
    let five_thirds = BigRational::new(BigInt::from(5), BigInt::from(3));
    checks.push(Check::new(
        "oracle-mean-s3",
        s3.to_f64().unwrap_or(f64::NAN),
        Relation::Within,
        5.0 / 3.0,
        if s3 == five_thirds { 0.0 } else { -1.0 },
    ));

    let size = 5;
    let exact = exact1d::enumerate_jam(size, &BoundaryCondition::zero())?.to_f64();
    let path: Vec<Site> = (0..size as i32).map(Site::at).collect();
    let r = 100_000u64;
    let counts = per_replicate(r, |i| {
        Ok(jam(&field(i, 1)?, &path, &BoundaryCondition::zero())?.count_occupied())
    })?;
    let mut freq = vec![0u64; size + 1];
    for c in counts {
        freq[c as usize] += 1;
    }
    let worst_z = (0..=size as u64)
        .map(|k| {
            let q = exact.get(&k).copied().unwrap_or(0.0);
            let f = freq[k as usize] as f64 / r as f64;
            let se = (q * (1.0 - q) / r as f64).sqrt();
            if se == 0.0 {
                if f == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (f - q).abs() / se
            }
        })
        .fold(0.0, f64::max);
    checks.push(Check::new("oracle-vs-jam-s5", worst_z, Relation::AtMost, 4.0, 0.0));

    let window = BoxRegion::centered(2, 8)?;
    let o = Site::origin(2)?;
    let mismatches = per_replicate(1000, |i| {
        let f = field(i, 2)?;
        let a = compute_armour(&f, &[o], DEFAULT_CAP)?;
        if !a.within(&window) {
            return Ok(0u64);
        }
        let x = sample_x(&f, &o, DEFAULT_CAP)?;
        Ok((Some(x) != jam_box(&f, &window)?.get(&o)) as u64)
    })?;
    checks.push(Check::new(
        "armour-vs-box-d2",
        mismatches.iter().sum::<u64>() as f64,
        Relation::AtMost,
        0.0,
        0.0,
    ));

    let worst_dev = exact1d::oracle_mean_curve(8)?
        .into_iter()
        .map(|(s, m)| (m.to_f64().unwrap_or(f64::NAN) - rho * s as f64).abs())
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "oracle-mean-deviation",
        worst_dev,
        Relation::AtMost,
        bounds::mean_dev_bound(1, 1)?,
        0.0,
    ));

    Ok(checks)
}
