//! Command-line front end: argument parsing, matrix files and reports.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fmarkov::dilation::{
    build_coupling, compress_first_order, coupling_preserves_measure, joint_law_check, noise_register_compress,
    CouplingMap, DEFAULT_BOX_LIMIT,
};
use fmarkov::finprob::{
    bernoulli_factorization_check, bernoulli_generator_sites, ergodic_factorization_check, intertwining_check,
    markovianity_check, random_site_observable, stationary_distribution, transition_recover_n, triangular_array_check,
    FiltrationWitness, SiteModel, Stationary, StochasticMatrix, WeightVector, WindowModel,
};
use fmarkov::fword::{equal, is_identity, normal_form_with_limit, parse_word, PartialShift, DEFAULT_STEP_LIMIT};
use fmarkov::pl::word_to_pl;
use fmarkov::scalar::{format_rational, parse_rational};
use fmarkov::sites::{
    act_word, certify_fixed_support, check_bijectivity, coupling_region_fixed, parse_site_for, verify_relation, RepName,
};
use fmarkov::suite::{moving_observable, run_all, SuiteOptions};
use fmarkov::{Error, Rational};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "fmarkov",
    version,
    about = "Exact checks for Thompson's group F and its Markov dilations"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for every randomized sweep.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Rewriting steps for normal forms, or noise boxes for `dilate`.
    #[arg(long, global = true)]
    pub limit: Option<usize>,
    /// Report `timing_ms` as null, so output is byte-stable.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Normal form of a word.
    Nf { word: String },
    /// Equality of two words in F.
    Eq { u: String, v: String },
    /// Image of a word under the (m, n) partial shift.
    Shift {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
        word: String,
    },
    /// Image of a site under a word.
    Act {
        #[arg(long)]
        rep: RepName,
        #[arg(long)]
        word: String,
        #[arg(long)]
        site: String,
    },
    /// Certify the fixed-point set of `g_k` on a window.
    Fixed {
        #[arg(long)]
        rep: RepName,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 128)]
        window: u64,
    },
    /// Check the defining relations on a window of sites.
    Relations {
        #[arg(long)]
        rep: RepName,
        #[arg(long, default_value_t = 6)]
        kmax: u64,
        #[arg(long, default_value_t = 256)]
        window: u64,
        /// Also check `k = l` for the group actions, where the relation fails.
        #[arg(long)]
        diagonal: bool,
    },
    /// Markov property of the stationary chain on times -L..=L.
    Markov {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(long, default_value_t = 3)]
        window: i64,
    },
    /// Triangular-array conditions up to a depth.
    Triangle {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(long, default_value_t = 3)]
        depth: i64,
    },
    /// Factorization across disjoint shifted copies of the generator sites.
    Bernoulli {
        #[command(flatten)]
        model: ModelArgs,
        /// Powers I as "a,b".
        #[arg(long, default_value = "-1,0", allow_hyphen_values = true)]
        i: String,
        /// Powers J as "a,b".
        #[arg(long, default_value = "1,2", allow_hyphen_values = true)]
        j: String,
        /// Rows of generator cells.
        #[arg(long, default_value_t = 1)]
        rows: u64,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Intertwining of the push by g_k with the conditional expectations.
    Intertwine {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Eventual factorization along the orbit of g_k.
    Ergodic {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Build the interval coupling of a chain and check it.
    Dilate {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(long, default_value_t = 2)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = DilateCheck::All)]
        check: DilateCheck,
    },
    /// Run the whole acceptance suite.
    VerifyAll {
        /// One tenth of the samples.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Args, Debug)]
pub struct MatrixArg {
    /// JSON file {"d", "rows", "q"?}.
    #[arg(long)]
    pub matrix: String,
}

#[derive(Args, Debug)]
pub struct ModelArgs {
    /// Cell weights, comma separated.
    #[arg(long, default_value = "1/3,2/3")]
    pub chi: String,
    /// Mark weights, comma separated.
    #[arg(long, default_value = "1/4,3/4")]
    pub phi: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DilateCheck {
    Measure,
    Compress,
    Joint,
    All,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {msg}")]
    Input { path: String, msg: String },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input { .. } => 2,
            CliError::Core(Error::ResourceLimit { .. }) | CliError::Internal(_) => 3,
            CliError::Core(_) => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub condition: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: Vec<String>,
    pub status: Status,
    pub conditions: Vec<Condition>,
    pub witnesses: Vec<Witness>,
    #[serde(default)]
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub timing_ms: Option<u64>,
    pub version: String,
}

impl Report {
    fn new(argv: &[String]) -> Self {
        Report {
            command: argv.to_vec(),
            status: Status::Pass,
            conditions: Vec::new(),
            witnesses: Vec::new(),
            result: Value::Null,
            error: None,
            timing_ms: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    fn check(&mut self, name: impl Into<String>, pass: bool) -> &mut Self {
        self.conditions.push(Condition {
            name: name.into(),
            pass,
            detail: None,
        });
        self
    }

    fn check_detail(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.conditions.push(Condition {
            name: name.into(),
            pass,
            detail: Some(detail.into()),
        });
    }

    fn witness(&mut self, condition: impl Into<String>, value: impl Into<String>) {
        self.witnesses.push(Witness {
            condition: condition.into(),
            value: value.into(),
        });
    }

    fn settle(&mut self) {
        self.status = if self.conditions.iter().all(|c| c.pass) {
            Status::Pass
        } else {
            Status::Fail
        };
    }
}

/// Parses `argv` (without the program name), runs the command and returns
/// the exit code with its report. Exit codes: 0 pass, 1 fail, 2 usage or
/// input error, 3 resource limit or internal error.
pub fn run(argv: &[String]) -> (i32, Report) {
    let (code, report, _) = run_with_format(argv);
    (code, report)
}

fn run_with_format(argv: &[String]) -> (i32, Report, Format) {
    let mut report = Report::new(argv);
    let cli = match Cli::try_parse_from(std::iter::once("fmarkov".to_string()).chain(argv.iter().cloned())) {
        Ok(cli) => cli,
        Err(e) => {
            report.status = Status::Error;
            report.error = Some(e.render().to_string().trim_end().to_string());
            let format = if argv.windows(2).any(|w| w[0] == "--format" && w[1] == "text") {
                Format::Text
            } else {
                Format::Json
            };
            return (2, report, format);
        }
    };
    let start = Instant::now();
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| dispatch(&cli, &mut report)));
    let result = match outcome {
        Ok(r) => r,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(CliError::Internal(msg))
        }
    };
    if !cli.no_timing {
        report.timing_ms = Some(start.elapsed().as_millis() as u64);
    }
    let code = match result {
        Ok(()) => {
            report.settle();
            i32::from(report.status == Status::Fail)
        }
        Err(e) => {
            report.status = Status::Error;
            report.error = Some(e.to_string());
            e.exit_code()
        }
    };
    (code, report, cli.format)
}

/// Runs and renders in the requested format; this is what the binary prints.
pub fn run_to_string(argv: &[String]) -> (i32, String) {
    if let Err(e) = Cli::try_parse_from(std::iter::once("fmarkov".to_string()).chain(argv.iter().cloned())) {
        use clap::error::ErrorKind;
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            return (0, e.render().to_string());
        }
    }
    let (code, report, format) = run_with_format(argv);
    (code, emit_report(&report, format))
}

/// Renders `report`. JSON output is pretty-printed with a fixed field order.
pub fn emit_report(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = String::new();
            let status = match report.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Error => "error",
            };
            let _ = writeln!(s, "fmarkov {}: {status}", report.command.join(" "));
            if let Some(e) = &report.error {
                let _ = writeln!(s, "error: {e}");
            }
            for c in &report.conditions {
                let mark = if c.pass { "ok  " } else { "FAIL" };
                match &c.detail {
                    Some(d) => {
                        let _ = writeln!(s, "  [{mark}] {} ({d})", c.name);
                    }
                    None => {
                        let _ = writeln!(s, "  [{mark}] {}", c.name);
                    }
                }
            }
            for w in &report.witnesses {
                let _ = writeln!(s, "  witness {}: {}", w.condition, w.value);
            }
            if !report.result.is_null() {
                let _ = writeln!(s, "  result: {}", report.result);
            }
            if let Some(t) = report.timing_ms {
                let _ = writeln!(s, "  time: {t} ms");
            }
            s
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    d: usize,
    rows: Vec<Vec<Value>>,
    #[serde(default)]
    q: Option<Vec<Value>>,
}

fn rational_entry(v: &Value, path: &str, at: &str) -> Result<Rational, CliError> {
    let bad = |msg: String| CliError::Input {
        path: path.to_string(),
        msg,
    };
    match v {
        Value::String(s) => parse_rational(s).map_err(|e| bad(format!("{at}: {e}"))),
        Value::Number(n) if n.is_i64() => Ok(Rational::from_integer(n.as_i64().unwrap_or_default().into())),
        other => Err(bad(format!(
            "{at}: expected a rational string or an integer, got {other}"
        ))),
    }
}

/// Reads a matrix file. When `q` is absent the stationary vector is solved
/// for exactly and must be unique.
pub fn load_matrix(path: impl AsRef<Path>) -> Result<(StochasticMatrix<Rational>, WeightVector<Rational>), CliError> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let input = |msg: String| CliError::Input {
        path: shown.clone(),
        msg,
    };
    let text = std::fs::read_to_string(path).map_err(|e| input(e.to_string()))?;
    let file: MatrixFile = serde_json::from_str(&text).map_err(|e| input(format!("schema: {e}")))?;
    if file.d == 0 {
        return Err(input("d must be positive".into()));
    }
    if file.rows.len() != file.d {
        return Err(input(format!("expected {} rows, found {}", file.d, file.rows.len())));
    }
    let mut rows = Vec::with_capacity(file.d);
    for (i, row) in file.rows.iter().enumerate() {
        if row.len() != file.d {
            return Err(input(format!("row {i} has {} entries, expected {}", row.len(), file.d)));
        }
        let parsed = row
            .iter()
            .enumerate()
            .map(|(j, v)| rational_entry(v, &shown, &format!("rows[{i}][{j}]")))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(parsed);
    }
    let r = StochasticMatrix::new(rows).map_err(|e| input(e.to_string()))?;
    let q = match file.q {
        Some(q) => {
            let parsed = q
                .iter()
                .enumerate()
                .map(|(i, v)| rational_entry(v, &shown, &format!("q[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            if parsed.len() != file.d {
                return Err(input(format!("q has {} entries, expected {}", parsed.len(), file.d)));
            }
            let q = WeightVector::new(parsed).map_err(|e| input(e.to_string()))?;
            r.check_stationary(&q).map_err(|e| input(e.to_string()))?;
            q
        }
        None => match stationary_distribution(&r).map_err(|e| input(e.to_string()))? {
            Stationary::Unique(q) => q,
            Stationary::NotUnique { dimension, .. } => {
                return Err(input(format!(
                    "stationary vectors form a {dimension}-dimensional space; give q explicitly"
                )))
            }
        },
    };
    Ok((r, q))
}

fn weights_arg(text: &str, flag: &str) -> Result<WeightVector<Rational>, CliError> {
    let values = text
        .split(',')
        .map(parse_rational)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(format!("--{flag}: {e}")))?;
    WeightVector::new(values).map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
}

fn pair_arg(text: &str, flag: &str) -> Result<(i64, i64), CliError> {
    let bad = || CliError::Usage(format!("--{flag}: expected \"a,b\" with a <= b, got {text:?}"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    let a: i64 = a.trim().parse().map_err(|_| bad())?;
    let b: i64 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn site_model(args: &ModelArgs) -> Result<SiteModel<Rational>, CliError> {
    Ok(SiteModel::new(
        weights_arg(&args.chi, "chi")?,
        weights_arg(&args.phi, "phi")?,
    ))
}

fn word_arg(text: &str) -> Result<fmarkov::fword::GroupWord, CliError> {
    parse_word(text).map_err(|e| CliError::Usage(format!("word {text:?}: {e}")))
}

fn events(w: &[(i64, usize)]) -> String {
    w.iter().map(|(t, v)| format!("X{t}={v}")).collect::<Vec<_>>().join(" ")
}

fn filtration_witness(w: &FiltrationWitness<Rational>) -> String {
    format!(
        "given [{}], event [{}]: {} vs {}",
        events(&w.given),
        events(&w.event),
        format_rational(&w.lhs),
        format_rational(&w.rhs)
    )
}

fn matrix_json(r: &StochasticMatrix<Rational>) -> Value {
    Value::from(
        r.rows()
            .iter()
            .map(|row| Value::from(row.iter().map(format_rational).collect::<Vec<_>>()))
            .collect::<Vec<_>>(),
    )
}

fn layout_json(cm: &CouplingMap<Rational>) -> Value {
    Value::from(
        cm.blocks()
            .iter()
            .map(|b| {
                json!({
                    "from": b.from,
                    "to": b.to,
                    "source": [format_rational(&b.source.left), format_rational(&b.source.right)],
                    "target": [format_rational(&b.target.left), format_rational(&b.target.right)],
                })
            })
            .collect::<Vec<_>>(),
    )
}

fn dispatch(cli: &Cli, report: &mut Report) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    match &cli.command {
        Command::Nf { word } => {
            let w = word_arg(word)?;
            let nf = normal_form_with_limit(&w, cli.limit.unwrap_or(DEFAULT_STEP_LIMIT))?;
            let back = nf.to_word();
            report.check("pl_oracle_agrees", word_to_pl(&back) == word_to_pl(&w));
            report.result = json!({
                "input": w.to_string(),
                "normal_form": nf.to_string(),
                "neg_exponents": nf.neg(),
                "pos_exponents": nf.pos(),
            });
        }
        Command::Eq { u, v } => {
            let (u, v) = (word_arg(u)?, word_arg(v)?);
            let by_nf = equal(&u, &v)?;
            let by_pl = word_to_pl(&u) == word_to_pl(&v);
            report.check("equal", by_nf);
            report.check("pl_oracle_agrees", by_nf == by_pl);
            report.result = json!({ "u": u.to_string(), "v": v.to_string(), "equal": by_nf });
        }
        Command::Shift { m, n, word } => {
            let sh = PartialShift::new(*m, *n).map_err(|e| CliError::Usage(e.to_string()))?;
            let w = word_arg(word)?;
            let img = sh.apply(&w);
            let trivial_in = is_identity(&w)?;
            let trivial_out = is_identity(&img)?;
            report.check("identity_preserved_and_reflected", trivial_in == trivial_out);
            report.result = json!({
                "image": img.to_string(),
                "image_normal_form": normal_form_with_limit(&img, cli.limit.unwrap_or(DEFAULT_STEP_LIMIT))?.to_string(),
            });
        }
        Command::Act { rep, word, site } => {
            let w = word_arg(word)?;
            let s = parse_site_for(*rep, site).map_err(|e| CliError::Usage(format!("--site: {e}")))?;
            let out = act_word(*rep, &w, s)?;
            if !rep.is_monoid() {
                let back = act_word(*rep, &w.inverse(), out.site)?;
                report.check("inverse_returns", back.site == s);
                if let Some(w) = (back.site != s).then(|| back.site.to_string()) {
                    report.witness("inverse_returns", w);
                }
            }
            report.result = json!({
                "site": out.site.to_string(),
                "coupling_events": out.coupling_events,
            });
            if report.conditions.is_empty() {
                report.check("defined", true);
            }
        }
        Command::Fixed { rep, k, window } => {
            let c = certify_fixed_support(*rep, *k, *window)?;
            report.check_detail("support_matches_orbits", c.pass(), format!("{} sites", c.sites_checked));
            for s in &c.mismatches {
                report.witness("support_matches_orbits", s.to_string());
            }
            report.result = json!({ "support": c.support.describe() });
        }
        Command::Relations {
            rep,
            kmax,
            window,
            diagonal,
        } => relations(report, *rep, *kmax, *window, *diagonal)?,
        Command::Markov { matrix, window } => {
            if *window < 1 {
                return Err(CliError::Usage("--window must be at least 1".into()));
            }
            let (r, q) = load_matrix(&matrix.matrix)?;
            let model = WindowModel::markov(&q, &r, -window, *window)?;
            let rep = markovianity_check(&model)?;
            for tc in &rep.times {
                let name = format!("markov_at_{}", tc.time);
                report.check(name.clone(), tc.pass);
                if let Some(w) = &tc.witness {
                    report.witness(name, filtration_witness(w));
                }
            }
            report.result = json!({
                "window": [-window, *window],
                "q": q.as_slice().iter().map(format_rational).collect::<Vec<_>>(),
            });
        }
        Command::Triangle { matrix, depth } => {
            if *depth < 1 {
                return Err(CliError::Usage("--depth must be at least 1".into()));
            }
            let (r, q) = load_matrix(&matrix.matrix)?;
            let model = WindowModel::markov(&q, &r, -depth, *depth)?;
            let tri = triangular_array_check(&model, *depth)?;
            for cell in &tri.cells {
                let name = format!("cell_{}_{}", cell.m, cell.n);
                report.check(name.clone(), cell.pass);
                if let Some(w) = &cell.witness {
                    report.witness(name, filtration_witness(w));
                }
            }
            let bad_shift = tri.shifts.iter().find(|s| !s.pass);
            report.check_detail(
                "shift_covariance",
                bad_shift.is_none(),
                format!("{} shifted cells", tri.shifts.len()),
            );
            if let Some(s) = bad_shift {
                report.witness("shift_covariance", format!("[{}, {}] at time {}", s.m, s.n, s.time));
            }
            for n in 1..=(*depth as u32).min(3) {
                let rec = transition_recover_n(&model, n)?;
                report.check(format!("recover_r^{n}"), rec == r.pow(n));
            }
        }
        Command::Bernoulli {
            model,
            i,
            j,
            rows,
            samples,
        } => {
            let model = site_model(model)?;
            let (i, j) = (pair_arg(i, "i")?, pair_arg(j, "j")?);
            let base = bernoulli_generator_sites(*rows, true);
            let r = bernoulli_factorization_check(&model, &base, i, j, *samples, &mut rng)?;
            report.check_detail(
                "supports_disjoint",
                r.supports_disjoint,
                format!("I = {i:?}, J = {j:?}"),
            );
            report.check_detail(
                "factorizes",
                r.pass(),
                format!("{} of {} samples fail", r.failures, r.samples),
            );
        }
        Command::Intertwine { model, k, n, samples } => {
            if k >= n {
                return Err(CliError::Usage(format!("need k < n, got k = {k}, n = {n}")));
            }
            let model = site_model(model)?;
            let r = intertwining_check(&model, *k, *n, *samples, &mut rng)?;
            report.check_detail(
                "intertwines",
                r.pass(),
                format!("{} of {} samples fail", r.failures, r.samples),
            );
        }
        Command::Ergodic { model, k, samples } => {
            let model = site_model(model)?;
            let (mut tail, mut cesaro, mut factor) = (0, 0, 0);
            for s in 0..*samples {
                let f = moving_observable(&model, *k, &mut rng)?;
                let g = random_site_observable(&model, k + 3, &mut rng)?;
                let r = ergodic_factorization_check(&model, *k, &f, &g)?;
                tail += usize::from(!r.tail_exact);
                cesaro += usize::from(!r.cesaro_bound);
                factor += usize::from(!r.factorizes());
                if !r.pass() || !r.factorizes() {
                    report.witness(
                        "ergodic",
                        format!(
                            "sample {s}: limit {} vs product {}",
                            format_rational(&r.limit),
                            format_rational(&r.product)
                        ),
                    );
                }
            }
            report.check_detail("tail_exact", tail == 0, format!("{tail} of {samples} samples fail"));
            report.check_detail(
                "cesaro_bound",
                cesaro == 0,
                format!("{cesaro} of {samples} samples fail"),
            );
            report.check_detail("factorizes", factor == 0, format!("{factor} of {samples} samples fail"));
        }
        Command::Dilate { matrix, steps, check } => {
            let (r, q) = load_matrix(&matrix.matrix)?;
            let cm = build_coupling(&q, &r)?;
            let limit = cli.limit.unwrap_or(DEFAULT_BOX_LIMIT);
            let all = *check == DilateCheck::All;
            if all || *check == DilateCheck::Measure {
                let m = coupling_preserves_measure(&cm);
                report.check("measure_preserving", m.pass);
                if let Some(reason) = m.reason {
                    report.witness("measure_preserving", reason);
                }
            }
            if all || *check == DilateCheck::Compress {
                let d = r.d();
                let basis = (0..d).map(|i| {
                    (0..d)
                        .map(|j| Rational::from_integer(i64::from(i == j).into()))
                        .collect()
                });
                let mut first = true;
                let mut noise = true;
                for e in basis.collect::<Vec<Vec<Rational>>>() {
                    first &= compress_first_order(&cm, &e)? == r.apply(&e);
                    noise &= noise_register_compress(&cm, *steps, &e, limit)? == r.pow(*steps as u32).apply(&e);
                }
                report.check("compression_is_r", first);
                report.check(format!("register_compression_is_r^{steps}"), noise);
            }
            if all || *check == DilateCheck::Joint {
                let j = joint_law_check(&cm, *steps, limit)?;
                report.check_detail("joint_law", j.pass, format!("{} paths", j.paths));
                if let Some((path, a, b)) = j.mismatch {
                    report.witness(
                        "joint_law",
                        format!("{path:?}: {} vs {}", format_rational(&a), format_rational(&b)),
                    );
                }
            }
            report.result = json!({
                "d": r.d(),
                "rows": matrix_json(&r),
                "q": q.as_slice().iter().map(format_rational).collect::<Vec<_>>(),
                "layout": layout_json(&cm),
            });
        }
        Command::VerifyAll { quick } => {
            let results = run_all(&SuiteOptions {
                seed: cli.seed,
                quick: *quick,
            })?;
            for r in &results {
                let name = format!("criterion_{}", r.number);
                report.check_detail(name.clone(), r.pass, format!("{}: {} checks", r.title, r.checks));
                for f in &r.failures {
                    report.witness(name.clone(), f.clone());
                }
            }
            report.result = Value::from(
                results
                    .iter()
                    .map(|r| json!({ "criterion": r.number, "notes": r.notes }))
                    .collect::<Vec<_>>(),
            );
        }
    }
    Ok(())
}

fn relations(report: &mut Report, rep: RepName, kmax: u64, window: u64, diagonal: bool) -> Result<(), CliError> {
    for k in 0..=kmax {
        let first_l = if rep.is_monoid() || diagonal { k } else { k + 1 };
        for l in first_l..=kmax {
            let r = verify_relation(rep, k, l, window)?;
            let name = format!("g{k}_g{l}");
            report.check(name.clone(), r.pass());
            if let Some(s) = r.witness {
                report.witness(name, s.to_string());
            }
        }
    }
    if !rep.is_monoid() {
        for k in 0..=kmax {
            let bad = check_bijectivity(k, window);
            let name = format!("bijective_g{k}");
            report.check(name.clone(), bad.is_none());
            if let Some(s) = bad {
                report.witness(name, s.to_string());
            }
        }
    }
    if rep.has_coupling() {
        for k in 1..=kmax {
            report.check(format!("coupling_region_fixed_g{k}"), coupling_region_fixed(k)?);
        }
    }
    Ok(())
}
