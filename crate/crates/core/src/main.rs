//! Command-line front end: quote ingestion, calibration (MED, MRED, or
//! calls-only), pricing, smiles, surfaces, sampling, and side-by-side
//! comparison tables.
//!
//! Quote files carry discounted prices; every calibration runs on
//! undiscounted prices and displayed prices are re-discounted. Implied
//! volatilities are always computed on undiscounted prices against the
//! slice forward.

// Validation uses `!(x > 0.0)` so that NaN fails alongside nonpositives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use maxent::density::Density;
use maxent::quotes::{build_slice, read_quote_file, MaturitySlice, RawQuote};
use maxent::{bk, bs, med, mred, surface};
use maxent::{Error, Prior, Result};

#[derive(Parser)]
#[command(
    name = "maxent",
    version,
    about = "Calibrate maximum-entropy densities from option quotes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a flat-volatility quote file (bid = ask = Black-Scholes mid)
    Genmarket(GenmarketArgs),
    /// Calibrate a density and report its parameters
    Calibrate(CalibrateArgs),
    /// Price calls, digitals, and deltas from a calibrated density
    Price(PriceArgs),
    /// Implied-volatility smile of a calibrated density
    Smile(SmileArgs),
    /// Implied-volatility surface from at-the-money quotes alone
    Surface(SurfaceArgs),
    /// Draw deterministic samples from a calibrated density
    Sample(SampleArgs),
    /// Market vs. model calls and implied vols, one row per quoted strike
    Compare(CompareArgs),
    /// Market vs. calls-only and calls+digitals densities, digital-first layout
    CompareBk(CompareBkArgs),
}

/// Input file plus slice metadata overrides and calibration selection.
#[derive(Args)]
struct InputOpts {
    /// Quote CSV file
    file: PathBuf,
    /// Year-fraction to expiry (default: the file's #meta T)
    #[arg(long)]
    maturity: Option<f64>,
    /// Discount factor (default: the file's #meta DF, else 1)
    #[arg(long)]
    df: Option<f64>,
    /// Undiscounted forward (default: the file's #meta F or a strike-0 row)
    #[arg(long)]
    forward: Option<f64>,
    /// Calibration strikes, `a,b,c` or `lo:hi:step` (default: all quoted)
    #[arg(long)]
    strikes: Option<String>,
    /// Replace digitals with symmetric call-spread estimates at this half-width
    #[arg(long, value_name = "WIDTH")]
    spread_digitals: Option<f64>,
}

/// Calibration method selection.
#[derive(Args)]
struct MethodOpts {
    /// Calibration method
    #[arg(long, value_enum, default_value_t = Method::Med)]
    method: Method,
    /// Prior for --method mred: `lognormal:sigma=<vol>` or `med:<file>`
    #[arg(long)]
    prior: Option<String>,
    /// Quadrature truncation override for --method mred
    #[arg(long)]
    truncation: Option<f64>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Maximum entropy from calls and digitals
    Med,
    /// Minimum relative entropy to a prior
    Mred,
    /// Calls-only maximum entropy (Buchen-Kelly)
    Bk,
}

#[derive(Args)]
struct GenmarketArgs {
    /// Forward
    #[arg(long)]
    forward: f64,
    /// Flat annualized volatility
    #[arg(long)]
    sigma: f64,
    /// Year-fraction to expiry
    #[arg(long)]
    maturity: f64,
    /// Discount factor
    #[arg(long, default_value_t = 1.0)]
    df: f64,
    /// Strikes, `a,b,c` or `lo:hi:step`
    #[arg(long)]
    strikes: String,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    input: InputOpts,
    #[command(flatten)]
    method: MethodOpts,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PriceArgs {
    #[command(flatten)]
    input: InputOpts,
    #[command(flatten)]
    method: MethodOpts,
    /// Strikes to price (default: every quoted strike)
    #[arg(long)]
    at: Option<String>,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SmileArgs {
    #[command(flatten)]
    input: InputOpts,
    #[command(flatten)]
    method: MethodOpts,
    /// Strikes to evaluate (default: every quoted strike)
    #[arg(long)]
    at: Option<String>,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SurfaceArgs {
    /// Forward
    #[arg(long)]
    forward: f64,
    /// ATM volatility, one value or one per maturity, `a,b,c`
    #[arg(long)]
    sigma_atm: String,
    /// Maturities in years, `a,b,c` or `lo:hi:step`
    #[arg(long)]
    maturities: String,
    /// Strike grid (default: 31 log-spaced strikes over moneyness [0.5, 2])
    #[arg(long)]
    strikes: Option<String>,
    /// Also write a gnuplot nonuniform-matrix file here
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    input: InputOpts,
    #[command(flatten)]
    method: MethodOpts,
    /// Number of draws
    #[arg(short, long, default_value_t = 1000)]
    n: usize,
    /// RNG seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputOpts,
    /// Second calls-only strike set, adding bk2_call and bk2_iv columns
    #[arg(long)]
    bk_strikes: Option<String>,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareBkArgs {
    #[command(flatten)]
    input: InputOpts,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Validation { .. } | Error::Arbitrage { .. } => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let (text, out) = match &cli.command {
        Command::Genmarket(a) => (cmd_genmarket(a)?, &a.out),
        Command::Calibrate(a) => (cmd_calibrate(a)?, &a.out),
        Command::Price(a) => (cmd_price(a)?, &a.out),
        Command::Smile(a) => (cmd_smile(a)?, &a.out),
        Command::Surface(a) => (cmd_surface(a)?, &a.out),
        Command::Sample(a) => (cmd_sample(a)?, &a.out),
        Command::Compare(a) => (cmd_compare(a)?, &a.out),
        Command::CompareBk(a) => (cmd_compare_bk(a)?, &a.out),
    };
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Six significant digits, plain decimal notation.
fn sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let decimals = (5 - x.abs().log10().floor() as i64).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Strike/maturity formatting: whole numbers without a fraction.
fn knum(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e12 {
        format!("{}", x as i64)
    } else {
        sig(x)
    }
}

fn sig_opt(v: Option<f64>) -> String {
    v.map(sig).unwrap_or_default()
}

/// Parse `a,b,c` or `lo:hi:step` (inclusive) into a number list.
fn parse_number_list(spec: &str) -> Result<Vec<f64>> {
    let one = |s: &str| -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad number `{s}` in `{spec}`")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [_] => spec.split(',').map(one).collect(),
        [lo, hi, step] => {
            let (lo, hi, step) = (one(lo)?, one(hi)?, one(step)?);
            if !(step > 0.0) || hi < lo {
                return Err(Error::Parse(format!(
                    "range `{spec}` must be lo:hi:step with step > 0 and hi >= lo"
                )));
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| lo + step * i as f64).collect())
        }
        _ => Err(Error::Parse(format!(
            "`{spec}` is neither a comma list nor lo:hi:step"
        ))),
    }
}

/// A loaded quote file with resolved metadata.
struct Market {
    /// All quote rows, sorted by strike.
    quotes: Vec<RawQuote>,
    maturity: f64,
    df: f64,
    /// Undiscounted forward, when known ahead of slice construction.
    forward: Option<f64>,
}

fn load_market(opts: &InputOpts) -> Result<Market> {
    let parsed = read_quote_file(&opts.file)?;
    let maturity = opts.maturity.or(parsed.meta.maturity).ok_or_else(|| {
        Error::Domain("maturity unknown: pass --maturity or a #meta T= line".into())
    })?;
    let df = opts.df.or(parsed.meta.discount_factor).unwrap_or(1.0);
    let forward = opts.forward.or(parsed.meta.forward);
    let mut quotes = parsed.quotes;
    quotes.sort_by(|a, b| a.strike.total_cmp(&b.strike));
    Ok(Market {
        quotes,
        maturity,
        df,
        forward,
    })
}

fn find_quote(quotes: &[RawQuote], strike: f64) -> Result<RawQuote> {
    quotes
        .iter()
        .find(|q| (q.strike - strike).abs() <= 1e-9 * (1.0 + strike.abs()))
        .copied()
        .ok_or_else(|| Error::Domain(format!("no quote at strike {strike} in the input file")))
}

fn call_mid(q: &RawQuote) -> f64 {
    q.call_mid().expect("the parser enforces a call side")
}

/// Apply strike selection and optional call-spread digitals. Spread digitals
/// are computed from the full file's calls, so the selection may be sparse.
fn selected_quotes(
    market: &Market,
    selection: &Option<String>,
    spread_width: Option<f64>,
) -> Result<Vec<RawQuote>> {
    let mut picked: Vec<RawQuote> = match selection {
        None => market.quotes.clone(),
        Some(spec) => parse_number_list(spec)?
            .iter()
            .map(|&k| find_quote(&market.quotes, k))
            .collect::<Result<_>>()?,
    };
    if let Some(width) = spread_width {
        if !(width > 0.0) {
            return Err(Error::Domain(format!(
                "spread width must be positive, got {width}"
            )));
        }
        for q in picked.iter_mut().filter(|q| q.strike > 0.0) {
            let below = call_mid(&find_quote(&market.quotes, q.strike - width)?);
            let above = call_mid(&find_quote(&market.quotes, q.strike + width)?);
            let digital = (below - above) / (2.0 * width);
            q.digital_bid = Some(digital);
            q.digital_ask = Some(digital);
        }
    }
    Ok(picked)
}

fn market_slice(market: &Market, quotes: &[RawQuote]) -> Result<MaturitySlice> {
    build_slice(quotes, market.df, market.maturity, market.forward)
}

/// Calls-only arrays `(strikes, calls)` with the synthetic zero strike.
fn bk_arrays(market: &Market, quotes: &[RawQuote]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut strikes = vec![0.0];
    let mut calls = vec![f64::NAN];
    let mut forward = market.forward;
    for q in quotes {
        let undiscounted = call_mid(q) / market.df;
        if q.strike == 0.0 {
            forward = Some(undiscounted);
            continue;
        }
        strikes.push(q.strike);
        calls.push(undiscounted);
    }
    calls[0] = forward.ok_or(Error::MissingForward)?;
    Ok((strikes, calls))
}

enum Calibrated {
    Med(med::MedDensity),
    Mred(mred::MredDensity),
    Bk(bk::BkDensity),
}

impl Calibrated {
    fn density(&self) -> &dyn Density {
        match self {
            Calibrated::Med(d) => d,
            Calibrated::Mred(d) => d,
            Calibrated::Bk(d) => d,
        }
    }

    /// Parameter CSV: scalar diagnostics as leading `#` lines, then one row
    /// per bucket or multiplier.
    fn report(&self) -> String {
        match self {
            Calibrated::Med(d) => {
                let mut out = format!("#entropy,{}\n", sig(d.entropy()));
                out += "strike,alpha,beta\n";
                for b in &d.buckets {
                    out += &format!("{},{},{}\n", knum(b.lower), sig(b.alpha), sig(b.beta));
                }
                out
            }
            Calibrated::Mred(d) => {
                let mut out = format!("#divergence,{}\n", sig(d.divergence()));
                out += "strike,gamma,delta\n";
                for i in 0..d.bounds.len() {
                    out += &format!(
                        "{},{},{}\n",
                        knum(d.bounds[i]),
                        sig(d.gammas[i]),
                        sig(d.deltas[i])
                    );
                }
                out
            }
            Calibrated::Bk(d) => {
                let mut out = format!("#mu,{}\n#max_residual,{}\n", sig(d.mu), sig(d.residual));
                out += "strike,lambda\n";
                for (k, l) in d.strikes.iter().zip(&d.lambdas) {
                    out += &format!("{},{}\n", knum(*k), sig(*l));
                }
                out
            }
        }
    }
}

fn parse_prior(spec: &str, slice: &MaturitySlice) -> Result<Prior> {
    if let Some(rest) = spec.strip_prefix("lognormal:") {
        let sigma: f64 = rest
            .strip_prefix("sigma=")
            .ok_or_else(|| {
                Error::Parse(format!("log-normal prior needs `sigma=<vol>`, got `{rest}`"))
            })?
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad prior volatility in `{rest}`")))?;
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!(
                "prior volatility must be positive, got {sigma}"
            )));
        }
        Ok(Prior::LogNormal {
            forward: slice.forward(),
            sigma,
            maturity: slice.maturity,
        })
    } else if let Some(path) = spec.strip_prefix("med:") {
        let parsed = read_quote_file(Path::new(path))?;
        let maturity = parsed.meta.maturity.unwrap_or(slice.maturity);
        let df = parsed.meta.discount_factor.unwrap_or(1.0);
        let mut quotes = parsed.quotes;
        quotes.sort_by(|a, b| a.strike.total_cmp(&b.strike));
        let prior_slice = build_slice(
            &quotes,
            df,
            maturity,
            parsed.meta.forward.or(Some(slice.forward())),
        )?;
        Ok(Prior::Med(med::calibrate(&prior_slice)?))
    } else {
        Err(Error::Parse(format!(
            "prior `{spec}` must be lognormal:sigma=<vol> or med:<file>"
        )))
    }
}

fn run_calibration(market: &Market, quotes: &[RawQuote], opts: &MethodOpts) -> Result<Calibrated> {
    match opts.method {
        Method::Med => Ok(Calibrated::Med(med::calibrate(&market_slice(
            market, quotes,
        )?)?)),
        Method::Mred => {
            let slice = market_slice(market, quotes)?;
            let spec = opts
                .prior
                .as_deref()
                .ok_or_else(|| Error::Domain("--method mred needs --prior".into()))?;
            let prior = parse_prior(spec, &slice)?;
            Ok(Calibrated::Mred(match opts.truncation {
                Some(t) => mred::calibrate_truncated(&slice, prior, t)?,
                None => mred::calibrate(&slice, prior)?,
            }))
        }
        Method::Bk => {
            // Digitals, when quoted, warm-start the calls-only Newton but are
            // never constraints.
            let warm = quotes
                .iter()
                .all(|q| q.strike == 0.0 || q.digital_mid().is_some())
                && quotes.iter().any(|q| q.strike > 0.0);
            if warm {
                if let Ok(density) =
                    market_slice(market, quotes).and_then(|s| bk::calibrate_slice(&s))
                {
                    return Ok(Calibrated::Bk(density));
                }
            }
            let (strikes, calls) = bk_arrays(market, quotes)?;
            Ok(Calibrated::Bk(bk::calibrate(&strikes, &calls)?))
        }
    }
}

/// Strikes priced by default: every quoted strike above zero.
fn quoted_strikes(market: &Market) -> Vec<f64> {
    market
        .quotes
        .iter()
        .map(|q| q.strike)
        .filter(|&k| k > 0.0)
        .collect()
}

fn cmd_genmarket(a: &GenmarketArgs) -> Result<String> {
    if !(a.forward > 0.0 && a.sigma > 0.0 && a.maturity > 0.0) {
        return Err(Error::Domain(
            "forward, sigma, and maturity must be positive".into(),
        ));
    }
    if !(a.df > 0.0 && a.df <= 1.0) {
        return Err(Error::Domain(format!(
            "discount factor {} not in (0, 1]",
            a.df
        )));
    }
    let strikes = parse_number_list(&a.strikes)?;
    let mut out = format!("#meta,T={},DF={},F={}\n", a.maturity, a.df, a.forward);
    out += "strike,call_bid,call_ask,digital_bid,digital_ask\n";
    // Quote files are data, not reports: full precision keeps the
    // calibrate-then-price round trip lossless (digitals near 1 would
    // otherwise collapse onto the strike-0 bound).
    for k in strikes {
        let call = a.df * bs::bs_call(a.forward, k, a.sigma, a.maturity);
        let digital = a.df * bs::bs_digital(a.forward, k, a.sigma, a.maturity);
        out += &format!("{},{call},{call},{digital},{digital}\n", knum(k));
    }
    Ok(out)
}

fn cmd_calibrate(a: &CalibrateArgs) -> Result<String> {
    let market = load_market(&a.input)?;
    let quotes = selected_quotes(&market, &a.input.strikes, a.input.spread_digitals)?;
    Ok(run_calibration(&market, &quotes, &a.method)?.report())
}

fn cmd_price(a: &PriceArgs) -> Result<String> {
    let market = load_market(&a.input)?;
    let quotes = selected_quotes(&market, &a.input.strikes, a.input.spread_digitals)?;
    let calibrated = run_calibration(&market, &quotes, &a.method)?;
    let at = match &a.at {
        Some(spec) => parse_number_list(spec)?,
        None => quoted_strikes(&market),
    };
    let density = calibrated.density();
    let mut out = String::from("strike,call,digital,delta\n");
    for k in at {
        out += &format!(
            "{},{},{},{}\n",
            knum(k),
            sig(market.df * density.call(k)),
            sig(market.df * density.digital(k)),
            sig(density.delta(k, market.df))
        );
    }
    Ok(out)
}

fn cmd_smile(a: &SmileArgs) -> Result<String> {
    let market = load_market(&a.input)?;
    let quotes = selected_quotes(&market, &a.input.strikes, a.input.spread_digitals)?;
    let calibrated = run_calibration(&market, &quotes, &a.method)?;
    let at = match &a.at {
        Some(spec) => parse_number_list(spec)?,
        None => quoted_strikes(&market),
    };
    let vols = surface::smile(calibrated.density(), &at, market.maturity);
    let mut out = String::from("strike,vol\n");
    for (k, v) in at.iter().zip(vols) {
        out += &format!("{},{}\n", knum(*k), sig_opt(v));
    }
    Ok(out)
}

fn cmd_surface(a: &SurfaceArgs) -> Result<String> {
    let sigmas = parse_number_list(&a.sigma_atm)?;
    let maturities = parse_number_list(&a.maturities)?;
    let grid = match &a.strikes {
        Some(spec) => parse_number_list(spec)?,
        None => surface::default_strike_grid(a.forward),
    };
    let vg = surface::atm_surface(a.forward, &sigmas, &maturities, &grid)?;
    if let Some(path) = &a.matrix {
        // gnuplot nonuniform matrix: column count then strikes, then one
        // row per maturity; NaN marks failed inversions.
        let mut matrix = format!("{}", vg.strikes.len());
        for k in &vg.strikes {
            matrix += &format!(" {}", sig(*k));
        }
        matrix.push('\n');
        for (t, row) in vg.maturities.iter().zip(&vg.vols) {
            matrix += &sig(*t);
            for v in row {
                matrix += &format!(" {}", v.map(sig).unwrap_or_else(|| "NaN".into()));
            }
            matrix.push('\n');
        }
        fs::write(path, matrix)?;
    }
    let mut out = String::from("maturity,strike,vol\n");
    for (t, row) in vg.maturities.iter().zip(&vg.vols) {
        for (k, v) in vg.strikes.iter().zip(row) {
            out += &format!("{},{},{}\n", sig(*t), knum(*k), sig_opt(*v));
        }
    }
    Ok(out)
}

fn cmd_sample(a: &SampleArgs) -> Result<String> {
    let market = load_market(&a.input)?;
    let quotes = selected_quotes(&market, &a.input.strikes, a.input.spread_digitals)?;
    let calibrated = run_calibration(&market, &quotes, &a.method)?;
    let draws = calibrated.density().sample(a.n, a.seed);
    let mut out = String::from("value\n");
    for x in draws {
        out += &sig(x);
        out.push('\n');
    }
    Ok(out)
}

fn cmd_compare(a: &CompareArgs) -> Result<String> {
    let market = load_market(&a.input)?;
    let quotes = selected_quotes(&market, &a.input.strikes, a.input.spread_digitals)?;
    let slice = market_slice(&market, &quotes)?;
    let med_density = med::calibrate(&slice)?;
    let bk_density = bk::calibrate_slice(&slice)?;
    let second = match &a.bk_strikes {
        Some(spec) => {
            let picked =
                selected_quotes(&market, &Some(spec.clone()), a.input.spread_digitals)?;
            let second_slice = market_slice(&market, &picked)?;
            Some(bk::calibrate_slice(&second_slice)?)
        }
        None => None,
    };

    let forward = slice.forward();
    let maturity = market.maturity;
    let iv = |undiscounted: f64, k: f64| bs::implied_vol(undiscounted, forward, k, maturity).ok();
    let mut out = String::from("strike,market_call,market_iv,med_call,med_iv,bk_call,bk_iv");
    if second.is_some() {
        out += ",bk2_call,bk2_iv";
    }
    out.push('\n');
    for q in market.quotes.iter().filter(|q| q.strike > 0.0) {
        let k = q.strike;
        let quoted = call_mid(q);
        let mut cells = vec![
            knum(k),
            sig(quoted),
            sig_opt(iv(quoted / market.df, k)),
        ];
        let mut models: Vec<&dyn Density> = vec![&med_density, &bk_density];
        if let Some(b) = &second {
            models.push(b);
        }
        for model in models {
            let undiscounted = model.call(k);
            cells.push(sig(market.df * undiscounted));
            cells.push(sig_opt(iv(undiscounted, k)));
        }
        out += &cells.join(",");
        out.push('\n');
    }
    Ok(out)
}

fn cmd_compare_bk(a: &CompareBkArgs) -> Result<String> {
    let market = load_market(&a.input)?;
    let quotes = selected_quotes(&market, &a.input.strikes, a.input.spread_digitals)?;
    let slice = market_slice(&market, &quotes)?;
    let med_density = med::calibrate(&slice)?;
    let bk_density = bk::calibrate_slice(&slice)?;
    let mut out =
        String::from("strike,market_digital,market_call,bk_digital,bk_call,med_digital,med_call\n");
    for q in market.quotes.iter().filter(|q| q.strike > 0.0) {
        let k = q.strike;
        let cells = [
            knum(k),
            sig_opt(q.digital_mid()),
            sig(call_mid(q)),
            sig(market.df * bk_density.digital(k)),
            sig(market.df * bk_density.call(k)),
            sig(market.df * med_density.digital(k)),
            sig(market.df * med_density.call(k)),
        ];
        out += &cells.join(",");
        out.push('\n');
    }
    Ok(out)
}
