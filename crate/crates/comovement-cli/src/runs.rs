//! Subcommand execution.

use crate::output::{
    emit, emit_aux, render_check_csv, render_check_table, render_mc_csv, render_mc_table,
    to_json_pretty, CheckOutcome, Format, McOutcome,
};
use crate::{Command, CommonOpts, McCommand, CONFIG_ENV};
use anyhow::{bail, Context, Result};
use comovement::decompose::{decompose, decompose_completed, table1, Completion, Decomposition};
use comovement::exact::{
    check_biased_formula, check_c1_factorization, check_halving_recursion, check_sign_symmetry,
    ExactReport,
};
use comovement::finance::{align, analyze, parse_csv, parse_csv_single, CsvConfig};
use comovement::mc::{
    biased_walk_tests, calibrate_events, chi_square_uniform, estimate_delta_t,
    independence_test_xyt, mc_block_pmf, sample_events, BlockCounts, DEFAULT_SIGNIFICANCE,
};
use comovement::model::ModelSpec;
use comovement::rational::parse_rational;
use comovement::{JointPath, Rational};
use serde::Deserialize;
use std::path::PathBuf;

/// Defaults loaded from the JSON file named by `COMOVEMENT_CONFIG`.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigDefaults {
    seed: Option<u64>,
    reps: Option<u64>,
    alpha: Option<f64>,
    threads: Option<usize>,
    format: Option<String>,
}

impl ConfigDefaults {
    fn load() -> Result<ConfigDefaults> {
        match std::env::var_os(CONFIG_ENV) {
            Some(path) => {
                let bytes = std::fs::read_to_string(&path)
                    .with_context(|| format!("reading {CONFIG_ENV} file {path:?}"))?;
                serde_json::from_str(&bytes)
                    .with_context(|| format!("parsing {CONFIG_ENV} file {path:?}"))
            }
            None => Ok(ConfigDefaults::default()),
        }
    }
}

struct Resolved {
    seed: Option<u64>,
    reps: Option<u64>,
    alpha: f64,
    format: Format,
    out: Option<PathBuf>,
}

impl Resolved {
    fn new(
        common: &CommonOpts,
        config: &ConfigDefaults,
        default_format: Format,
    ) -> Result<Resolved> {
        let format = match common.format.as_deref().or(config.format.as_deref()) {
            Some(name) => Format::parse(name)?,
            None => default_format,
        };
        Ok(Resolved {
            seed: common.seed.or(config.seed),
            reps: config.reps,
            alpha: common
                .alpha
                .or(config.alpha)
                .unwrap_or(DEFAULT_SIGNIFICANCE),
            format,
            out: common.out.clone(),
        })
    }

    fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            anyhow::anyhow!(
                "this subcommand is stochastic: pass --seed or set one in the {CONFIG_ENV} file"
            )
        })
    }

    fn reps(&self, flag: Option<u64>, fallback: u64) -> u64 {
        flag.or(self.reps).unwrap_or(fallback)
    }
}

/// Parses the `--model` argument: shorthand, `@file`, or inline JSON.
pub fn parse_model(raw: &str) -> Result<ModelSpec> {
    let raw = raw.trim();
    if let Some(path) = raw.strip_prefix('@') {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        return Ok(serde_json::from_str(&text)?);
    }
    if raw.starts_with('{') {
        return Ok(serde_json::from_str(raw)?);
    }
    let mut parts = raw.split(':');
    let kind = parts.next().unwrap_or_default();
    let args: Vec<&str> = parts.collect();
    let rational = |s: &str| -> Result<Rational> {
        parse_rational(s).map_err(|e| anyhow::anyhow!("bad rational {s:?}: {e}"))
    };
    let model = match (kind, args.as_slice()) {
        ("constant", [theta]) => ModelSpec::constant(rational(theta)?),
        ("qhistory" | "q-history", []) => ModelSpec::q_history_default(),
        ("qhistory" | "q-history", [base, bump]) => {
            ModelSpec::q_history(rational(base)?, rational(bump)?)
        }
        ("adversarial" | "sign-adversarial", []) => ModelSpec::sign_adversarial_default(),
        ("adversarial" | "sign-adversarial", [first, up, down]) => {
            ModelSpec::sign_adversarial(rational(first)?, rational(up)?, rational(down)?)
        }
        ("biased", [p, theta]) => ModelSpec::biased(rational(p)?, rational(theta)?),
        ("gaussian", [rho]) => ModelSpec::gaussian(rho.parse::<f64>().context("bad rho")?),
        _ => bail!("unrecognized model {raw:?}; see --help for the shorthand grammar"),
    };
    model.check_params()?;
    Ok(model)
}

fn install_pool<T: Send>(
    threads: Option<usize>,
    run: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .context("building thread pool")?
            .install(run),
        None => run(),
    }
}

pub fn dispatch(command: Command, common: &CommonOpts) -> Result<bool> {
    let config = ConfigDefaults::load()?;
    match command {
        Command::Simulate { model, n } => {
            let opts = Resolved::new(common, &config, Format::Csv)?;
            let model = parse_model(&model)?;
            let path = model.simulate(n, opts.seed()?)?;
            let content = match opts.format {
                Format::Json => to_json_pretty(&path)?,
                Format::Csv | Format::Table => path_csv(&path),
            };
            emit(&content, opts.out.as_ref())?;
            Ok(true)
        }
        Command::Decompose {
            from_table1,
            input,
            complete,
        } => {
            let opts = Resolved::new(common, &config, Format::Csv)?;
            let path = if from_table1 {
                table1()
            } else {
                let input = input.context("pass --input <file> or --from-table1")?;
                read_path_file(&input)?
            };
            let d = if complete {
                let mut completion = Completion::from_seed(opts.seed()?, 0);
                decompose_completed(&path, &mut completion)
            } else {
                decompose(&path)
            };
            let content = match opts.format {
                Format::Json => to_json_pretty(&DecomposeDocument::new(&path, &d))?,
                Format::Csv | Format::Table => d.to_csv(&path),
            };
            emit(&content, opts.out.as_ref())?;
            Ok(true)
        }
        Command::OracleCheck {
            model,
            n,
            all: _,
            check,
            n_indices,
            m_indices,
            horizon_cap,
        } => {
            let opts = Resolved::new(common, &config, Format::Table)?;
            let model = parse_model(&model)?;
            if n > horizon_cap {
                bail!(
                    "horizon {n} exceeds the cap {horizon_cap}; raise --horizon-cap if you mean it"
                );
            }
            let threads = common.threads.or(config.threads);
            let outcomes = install_pool(threads, || {
                run_oracle_checks(&model, n, &check, &n_indices, &m_indices)
            })?;
            let all_ok = outcomes.iter().all(|o| o.ok);
            let content = match opts.format {
                Format::Json => to_json_pretty(&outcomes)?,
                Format::Csv => render_check_csv(&outcomes),
                Format::Table => render_check_table(&outcomes),
            };
            emit(&content, opts.out.as_ref())?;
            Ok(all_ok)
        }
        Command::McTest { which } => {
            let opts = Resolved::new(common, &config, Format::Table)?;
            let threads = common.threads.or(config.threads);
            let (outcomes, plotdata) = install_pool(threads, || run_mc(&which, &opts))?;
            let all_ok = outcomes.iter().all(|o| o.ok);
            let content = match opts.format {
                Format::Json => to_json_pretty(&outcomes)?,
                Format::Csv => render_mc_csv(&outcomes),
                Format::Table => render_mc_table(&outcomes),
            };
            emit(&content, opts.out.as_ref())?;
            if let Some(csv) = plotdata {
                emit_aux(&csv, opts.out.as_ref(), "plotdata.csv")?;
            }
            Ok(all_ok)
        }
        Command::Analyze {
            input,
            input2,
            time_col,
            col_a,
            col_b,
            window,
        } => {
            let opts = Resolved::new(common, &config, Format::Table)?;
            let (s1, s2) = match input2 {
                None => {
                    let bytes = std::fs::read(&input)
                        .with_context(|| format!("reading {}", input.display()))?;
                    let config = CsvConfig {
                        time_column: time_col,
                        price_columns: col_a.zip(col_b),
                    };
                    parse_csv(&bytes, &config)?
                }
                Some(second) => {
                    let first_bytes = std::fs::read(&input)
                        .with_context(|| format!("reading {}", input.display()))?;
                    let second_bytes = std::fs::read(&second)
                        .with_context(|| format!("reading {}", second.display()))?;
                    let a = parse_csv_single(&first_bytes, time_col.as_deref(), col_a.as_deref())?;
                    let b = parse_csv_single(&second_bytes, time_col.as_deref(), col_b.as_deref())?;
                    align(&a, &b)?
                }
            };
            let report = analyze(&s1, &s2, window)?;
            let content = match opts.format {
                Format::Json => to_json_pretty(&report)?,
                Format::Csv => trend_series_csv(&report),
                Format::Table => trend_table(&report),
            };
            emit(&content, opts.out.as_ref())?;
            Ok(true)
        }
    }
}

fn path_csv(path: &JointPath) -> String {
    let mut out = String::from("n,B,W\n");
    for (i, (b, w)) in path.b_values().iter().zip(path.w_values()).enumerate() {
        out.push_str(&format!("{},{},{}\n", i + 1, b, w));
    }
    out
}

fn read_path_file(input: &PathBuf) -> Result<JointPath> {
    let text =
        std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    if input.extension().is_some_and(|e| e == "json") {
        return Ok(serde_json::from_str(&text)?);
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let b_idx = headers.iter().position(|h| h.trim() == "B");
    let w_idx = headers.iter().position(|h| h.trim() == "W");
    let (Some(b_idx), Some(w_idx)) = (b_idx, w_idx) else {
        bail!("path csv needs columns named B and W (as written by `simulate --format csv`)");
    };
    let (mut b, mut w) = (Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record?;
        b.push(record.get(b_idx).unwrap_or("").trim().parse::<i64>()?);
        w.push(record.get(w_idx).unwrap_or("").trim().parse::<i64>()?);
    }
    Ok(JointPath::from_values(&b, &w)?)
}

#[derive(serde::Serialize)]
struct DecomposeDocument<'a> {
    b: Vec<i64>,
    w: Vec<i64>,
    #[serde(flatten)]
    decomposition: &'a Decomposition,
}

impl<'a> DecomposeDocument<'a> {
    fn new(path: &JointPath, d: &'a Decomposition) -> DecomposeDocument<'a> {
        DecomposeDocument {
            b: path.b_values(),
            w: path.w_values(),
            decomposition: d,
        }
    }
}

fn run_oracle_checks(
    model: &ModelSpec,
    horizon: usize,
    check: &str,
    n_indices: &[usize],
    m_indices: &[usize],
) -> Result<Vec<CheckOutcome>> {
    if !model.is_exact() {
        bail!(
            "the exhaustive oracle needs an exact-rational model, not {}",
            model.kind_name()
        );
    }
    let is_biased = model.marginal_p() != comovement::rat(1, 2);
    let negative_control = matches!(model, ModelSpec::SignAdversarial { .. });
    let mut outcomes = Vec::new();
    let mut push = |report: ExactReport, expected_pass: bool| {
        outcomes.push(CheckOutcome::new(report, expected_pass));
    };
    let single_index = n_indices.first().copied().unwrap_or(1);
    match check {
        "sign-symmetry" => {
            push(check_sign_symmetry(model, horizon, single_index)?, true);
        }
        "biased-formula" => {
            push(check_biased_formula(model, horizon, single_index)?, true);
        }
        "halving" => {
            let (n_idx, m_idx) = default_pairs(n_indices, m_indices);
            push(
                check_halving_recursion(model, horizon, &n_idx, &m_idx)?,
                true,
            );
        }
        "factorization" => {
            let (n_idx, m_idx) = default_pairs(n_indices, m_indices);
            push(
                check_c1_factorization(model, horizon, &n_idx, &m_idx)?,
                !negative_control,
            );
        }
        "all" => {
            if is_biased {
                for n in [1, 2] {
                    push(check_biased_formula(model, horizon, n)?, true);
                }
            } else {
                for n in 1..=horizon.min(3) {
                    push(check_sign_symmetry(model, horizon, n)?, true);
                }
                let combos: [(&[usize], &[usize]); 4] =
                    [(&[1], &[]), (&[], &[1]), (&[1], &[1]), (&[1, 2], &[1])];
                for (n_idx, m_idx) in combos {
                    push(check_halving_recursion(model, horizon, n_idx, m_idx)?, true);
                }
                let fact_horizon = horizon.min(6);
                for (n_idx, m_idx) in [(&[1][..], &[1][..]), (&[][..], &[1][..])] {
                    push(
                        check_c1_factorization(model, fact_horizon, n_idx, m_idx)?,
                        !negative_control,
                    );
                }
            }
        }
        other => bail!("unknown check {other:?}"),
    }
    Ok(outcomes)
}

fn default_pairs(n_indices: &[usize], m_indices: &[usize]) -> (Vec<usize>, Vec<usize>) {
    if n_indices.is_empty() && m_indices.is_empty() {
        (vec![1], vec![1])
    } else {
        (n_indices.to_vec(), m_indices.to_vec())
    }
}

fn run_mc(which: &McCommand, opts: &Resolved) -> Result<(Vec<McOutcome>, Option<String>)> {
    match which {
        McCommand::BlockPmf {
            model,
            k,
            l,
            n,
            reps,
            emit,
        } => {
            let model = parse_model(model)?;
            let reps = opts.reps(*reps, 1_000_000);
            let counts = mc_block_pmf(&model, *k, *l, *n, reps, opts.seed()?)?;
            let report = chi_square_uniform(&counts, opts.alpha)?;
            let plotdata = emit.as_deref().map(|_| block_plotdata(&counts));
            Ok((vec![McOutcome::new(report, true)], plotdata))
        }
        McCommand::DeltaT { rho, reps, emit } => {
            let reps = opts.reps(*reps, 1_000_000);
            let report = estimate_delta_t(*rho, reps, opts.seed()?, opts.alpha)?;
            let plotdata = emit.as_deref().map(|_| {
                format!(
                    "rho,estimate,target,stderr\n{},{},{},{}\n",
                    rho,
                    report.estimate.unwrap_or(f64::NAN),
                    report.target.unwrap_or(f64::NAN),
                    report.std_error.unwrap_or(f64::NAN),
                )
            });
            Ok((vec![McOutcome::new(report, true)], plotdata))
        }
        McCommand::Independence {
            model,
            k,
            l,
            pattern_len,
            n,
            reps,
        } => {
            let model = parse_model(model)?;
            let reps = opts.reps(*reps, 1_000_000);
            let report = independence_test_xyt(
                &model,
                *k,
                *l,
                *pattern_len,
                *n,
                reps,
                opts.seed()?,
                opts.alpha,
            )?;
            let expected_pass = !matches!(model, ModelSpec::SignAdversarial { .. });
            Ok((vec![McOutcome::new(report, expected_pass)], None))
        }
        McCommand::Biased { p, theta, n, reps } => {
            let p = parse_rational(p).map_err(|e| anyhow::anyhow!(e))?;
            let theta = parse_rational(theta).map_err(|e| anyhow::anyhow!(e))?;
            let reps = opts.reps(*reps, 100_000);
            let (x_report, y_report) =
                biased_walk_tests(p, theta, *n, reps, opts.seed()?, opts.alpha)?;
            Ok((
                vec![
                    McOutcome::new(x_report, true),
                    McOutcome::new(y_report, true),
                ],
                None,
            ))
        }
        McCommand::Calibration {
            model,
            n,
            events,
            event_seed,
            reps,
        } => {
            let model = parse_model(model)?;
            let reps = opts.reps(*reps, 1_000_000);
            let events = sample_events(*n, *events, *event_seed);
            let reports = calibrate_events(&model, *n, &events, reps, opts.seed()?, opts.alpha)?;
            Ok((
                reports
                    .into_iter()
                    .map(|r| McOutcome::new(r, true))
                    .collect(),
                None,
            ))
        }
    }
}

/// Cell frequencies and the uniform target, one row per sign vector.
fn block_plotdata(counts: &BlockCounts) -> String {
    let mut out = String::from("cell,signs,count,frequency,target\n");
    let total: u64 = counts.counts.iter().sum();
    let target = 1.0 / counts.cells() as f64;
    for (cell, &count) in counts.counts.iter().enumerate() {
        let mut signs = String::new();
        for i in 0..(counts.k + counts.l) {
            if i == counts.k {
                signs.push('|');
            }
            signs.push(if cell & (1 << i) != 0 { '+' } else { '-' });
        }
        out.push_str(&format!(
            "{cell},{signs},{count},{},{target}\n",
            count as f64 / total as f64
        ));
    }
    out
}

/// The analyzed pair as the standard decomposition table.
fn trend_series_csv(report: &comovement::finance::TrendReport) -> String {
    let s = &report.series;
    let path = JointPath::from_values(&s.b, &s.w).expect("series from a valid decomposition");
    decompose(&path).to_csv(&path)
}

fn trend_table(report: &comovement::finance::TrendReport) -> String {
    let line = |name: &str, st: &comovement::finance::WindowStats| {
        format!(
            "{name} steps {}..{}: common {} / counter {} (ratio {:.4}), \
             trend {:+}, relative strength {:+}, regime {:?}\n",
            st.start_step,
            st.end_step,
            st.common_moves,
            st.counter_moves,
            st.comovement_ratio,
            st.market_trend,
            st.relative_strength,
            st.regime
        )
    };
    format!(
        "{}{}",
        line("full  ", &report.full),
        line("window", &report.window)
    )
}
