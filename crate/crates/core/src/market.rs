//! Price data and the per-window market model.
//!
//! Prices are a dense `[day × asset]` matrix. Rebalancing anchors are row
//! indices `delta_t` rows apart; trading-day arithmetic is purely positional.
//! For rebalancing step `t` the model holds
//!
//! - `mu[t][a] = ln(P[anchor(t+1)][a] / P[anchor(t)][a])`, and
//! - `sigma[t]`, the unbiased sample covariance of the `delta_t` daily log
//!   returns in the window ending at `anchor(t)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed;

pub const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed csv at line {line}: {message}")]
    MalformedCsv { line: u64, message: String },
    #[error("non-positive price {value} for {ticker} on {date}")]
    NonPositivePrice {
        date: String,
        ticker: String,
        value: f64,
    },
    #[error("missing price for {ticker} on {date}")]
    MissingCell { date: String, ticker: String },
    #[error("duplicate price for {ticker} on {date}")]
    DuplicateCell { date: String, ticker: String },
    #[error("insufficient history: need {needed} rows, have {available}")]
    InsufficientHistory { needed: usize, available: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Dense daily closing prices.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    tickers: Vec<String>,
    dates: Vec<NaiveDate>,
    /// `prices[day][asset]`
    prices: Vec<Vec<f64>>,
}

impl PriceSeries {
    pub fn new(
        tickers: Vec<String>,
        dates: Vec<NaiveDate>,
        prices: Vec<Vec<f64>>,
    ) -> Result<Self, MarketError> {
        if prices.len() != dates.len() {
            return Err(MarketError::InvalidArgument(format!(
                "{} price rows for {} dates",
                prices.len(),
                dates.len()
            )));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MarketError::InvalidArgument(
                "dates must be strictly increasing".into(),
            ));
        }
        for (row, date) in prices.iter().zip(&dates) {
            if row.len() != tickers.len() {
                return Err(MarketError::InvalidArgument(format!(
                    "row for {date} has {} prices, expected {}",
                    row.len(),
                    tickers.len()
                )));
            }
            for (value, ticker) in row.iter().zip(&tickers) {
                if !(*value > 0.0) || !value.is_finite() {
                    return Err(MarketError::NonPositivePrice {
                        date: date.format(DATE_FORMAT).to_string(),
                        ticker: ticker.clone(),
                        value: *value,
                    });
                }
            }
        }
        Ok(Self {
            tickers,
            dates,
            prices,
        })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[Vec<f64>] {
        &self.prices
    }

    pub fn price(&self, day: usize, asset: usize) -> f64 {
        self.prices[day][asset]
    }

    pub fn n_days(&self) -> usize {
        self.dates.len()
    }

    pub fn n_assets(&self) -> usize {
        self.tickers.len()
    }

    /// Keeps the first `n` tickers in lexicographic order.
    pub fn select_assets(&self, n: usize) -> Result<Self, MarketError> {
        if n == 0 || n > self.n_assets() {
            return Err(MarketError::InvalidArgument(format!(
                "cannot select {n} of {} assets",
                self.n_assets()
            )));
        }
        let mut order: Vec<usize> = (0..self.n_assets()).collect();
        order.sort_by(|&a, &b| self.tickers[a].cmp(&self.tickers[b]));
        order.truncate(n);
        Ok(Self {
            tickers: order.iter().map(|&i| self.tickers[i].clone()).collect(),
            dates: self.dates.clone(),
            prices: self
                .prices
                .iter()
                .map(|row| order.iter().map(|&i| row[i]).collect())
                .collect(),
        })
    }

    /// Multiplies every price of one asset by `factor`.
    pub fn rescale_asset(&self, asset: usize, factor: f64) -> Result<Self, MarketError> {
        let mut prices = self.prices.clone();
        for row in &mut prices {
            row[asset] *= factor;
        }
        Self::new(self.tickers.clone(), self.dates.clone(), prices)
    }
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    date: String,
    ticker: String,
    close: String,
}

pub fn load_prices_csv(path: impl AsRef<Path>) -> Result<PriceSeries, MarketError> {
    let file = File::open(path)?;
    parse_prices_csv(file)
}

/// Parses `date,ticker,close` rows into a dense series.
///
/// Rows may come in any order; dates and tickers are sorted in the result.
pub fn parse_prices_csv<R: Read>(reader: R) -> Result<PriceSeries, MarketError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let malformed = |line: u64, message: String| MarketError::MalformedCsv { line, message };
    let headers = rdr
        .headers()
        .map_err(|e| malformed(1, e.to_string()))?
        .clone();
    let expected = ["date", "ticker", "close"];
    if headers.len() != expected.len() || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(malformed(
            1,
            format!("expected header `date,ticker,close`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        ));
    }

    let mut cells: BTreeMap<(NaiveDate, String), f64> = BTreeMap::new();
    let mut tickers = BTreeSet::new();
    let mut dates = BTreeSet::new();
    for (i, record) in rdr.deserialize::<CsvRow>().enumerate() {
        let line = i as u64 + 2;
        let row = record.map_err(|e| malformed(line, e.to_string()))?;
        let date = NaiveDate::parse_from_str(&row.date, DATE_FORMAT)
            .map_err(|e| malformed(line, format!("bad date {:?}: {e}", row.date)))?;
        if row.ticker.is_empty() {
            return Err(malformed(line, "empty ticker".into()));
        }
        let close: f64 = row
            .close
            .parse()
            .map_err(|_| malformed(line, format!("bad close {:?}", row.close)))?;
        if !close.is_finite() || close <= 0.0 {
            return Err(MarketError::NonPositivePrice {
                date: row.date,
                ticker: row.ticker,
                value: close,
            });
        }
        if cells.insert((date, row.ticker.clone()), close).is_some() {
            return Err(MarketError::DuplicateCell {
                date: row.date,
                ticker: row.ticker,
            });
        }
        tickers.insert(row.ticker);
        dates.insert(date);
    }

    let tickers: Vec<String> = tickers.into_iter().collect();
    let dates: Vec<NaiveDate> = dates.into_iter().collect();
    let mut prices = Vec::with_capacity(dates.len());
    for date in &dates {
        let mut row = Vec::with_capacity(tickers.len());
        for ticker in &tickers {
            match cells.get(&(*date, ticker.clone())) {
                Some(&p) => row.push(p),
                None => {
                    return Err(MarketError::MissingCell {
                        date: date.format(DATE_FORMAT).to_string(),
                        ticker: ticker.clone(),
                    })
                }
            }
        }
        prices.push(row);
    }
    PriceSeries::new(tickers, dates, prices)
}

/// Writes the series in the same `date,ticker,close` long format the loader
/// reads. Prices use the shortest round-trip decimal representation.
pub fn write_prices_csv<W: Write>(series: &PriceSeries, writer: W) -> Result<(), MarketError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| MarketError::Io(std::io::Error::other(e));
    wtr.write_record(["date", "ticker", "close"]).map_err(io)?;
    for (date, row) in series.dates.iter().zip(&series.prices) {
        let date = date.format(DATE_FORMAT).to_string();
        for (ticker, price) in series.tickers.iter().zip(row) {
            wtr.write_record([date.as_str(), ticker.as_str(), &price.to_string()])
                .map_err(io)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// First date of synthetic series.
fn synthetic_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2023, 1, 2).expect("valid date")
}

/// Geometric random walk prices.
///
/// Asset `a` draws its parameters from its own ChaCha8 stream seeded with
/// `derive(seed, a)`: start price uniform in `[20, 200)`, daily drift uniform
/// in `[-0.001, 0.002)`, daily volatility uniform in `[0.005, 0.025)`. Daily
/// log increments are normal with mean `drift - vol²/2` and deviation `vol`.
/// Dates are consecutive weekdays from 2023-01-02; tickers are `SYN00`,
/// `SYN01`, ...
pub fn generate_synthetic_prices(
    n_assets: usize,
    n_days: usize,
    seed: u64,
) -> Result<PriceSeries, MarketError> {
    if n_assets == 0 || n_days < 2 {
        return Err(MarketError::InvalidArgument(format!(
            "synthetic prices need n_assets >= 1 and n_days >= 2 (got {n_assets}, {n_days})"
        )));
    }
    let width = (n_assets.saturating_sub(1)).to_string().len().max(2);
    let tickers: Vec<String> = (0..n_assets).map(|a| format!("SYN{a:0width$}")).collect();

    let mut dates = Vec::with_capacity(n_days);
    let mut day = synthetic_start();
    while dates.len() < n_days {
        if !matches!(day.weekday(), Weekday::Sat | Weekday::Sun) {
            dates.push(day);
        }
        day += Duration::days(1);
    }

    let mut columns = Vec::with_capacity(n_assets);
    for a in 0..n_assets {
        let mut rng = seed::rng(seed::derive(seed, a as u64));
        let start: f64 = rng.random_range(20.0..200.0);
        let drift: f64 = rng.random_range(-0.001..0.002);
        let vol: f64 = rng.random_range(0.005..0.025);
        let step = Normal::new(drift - 0.5 * vol * vol, vol).expect("positive volatility");
        let mut log_price = start.ln();
        let mut column = Vec::with_capacity(n_days);
        column.push(start);
        for _ in 1..n_days {
            log_price += step.sample(&mut rng);
            column.push(log_price.exp());
        }
        columns.push(column);
    }
    let prices = (0..n_days)
        .map(|d| columns.iter().map(|c| c[d]).collect())
        .collect();
    PriceSeries::new(tickers, dates, prices)
}

/// Rebalancing anchors as row indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RebalanceGrid {
    delta_t_days: usize,
    n_t: usize,
    anchor_indices: Vec<usize>,
}

impl RebalanceGrid {
    /// Grid whose first anchor is the earliest row with a full trailing
    /// window, i.e. anchors `delta_t, 2·delta_t, ..., (n_t+1)·delta_t`.
    pub fn new(delta_t_days: usize, n_t: usize) -> Result<Self, MarketError> {
        Self::with_first_anchor(delta_t_days, n_t, delta_t_days)
    }

    pub fn with_first_anchor(
        delta_t_days: usize,
        n_t: usize,
        first_anchor: usize,
    ) -> Result<Self, MarketError> {
        if delta_t_days < 2 {
            return Err(MarketError::InvalidArgument(
                "delta_t_days must be at least 2 for an unbiased covariance".into(),
            ));
        }
        if n_t == 0 {
            return Err(MarketError::InvalidArgument("n_t must be positive".into()));
        }
        if first_anchor < delta_t_days {
            return Err(MarketError::InvalidArgument(format!(
                "first anchor {first_anchor} leaves less than {delta_t_days} rows of history"
            )));
        }
        let anchor_indices = (0..=n_t).map(|k| first_anchor + k * delta_t_days).collect();
        Ok(Self {
            delta_t_days,
            n_t,
            anchor_indices,
        })
    }

    pub fn delta_t_days(&self) -> usize {
        self.delta_t_days
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn anchor_indices(&self) -> &[usize] {
        &self.anchor_indices
    }

    /// Number of price rows the grid needs.
    pub fn required_rows(&self) -> usize {
        self.anchor_indices.last().copied().unwrap_or(0) + 1
    }
}

/// Per-step expected log returns and covariance matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketModel {
    /// `mu[t][a]`
    pub mu: Vec<Vec<f64>>,
    /// `sigma[t][a][b]`
    pub sigma: Vec<Vec<Vec<f64>>>,
}

impl MarketModel {
    pub fn new(mu: Vec<Vec<f64>>, sigma: Vec<Vec<Vec<f64>>>) -> Result<Self, MarketError> {
        if mu.len() != sigma.len() || mu.is_empty() {
            return Err(MarketError::InvalidArgument(
                "mu and sigma must cover the same non-zero number of steps".into(),
            ));
        }
        let n_a = mu[0].len();
        for (t, (m, s)) in mu.iter().zip(&sigma).enumerate() {
            if m.len() != n_a || s.len() != n_a || s.iter().any(|row| row.len() != n_a) {
                return Err(MarketError::InvalidArgument(format!(
                    "step {t} does not have {n_a} assets"
                )));
            }
            for a in 0..n_a {
                for b in 0..a {
                    if (s[a][b] - s[b][a]).abs() > 1e-12 {
                        return Err(MarketError::InvalidArgument(format!(
                            "sigma[{t}] is not symmetric at ({a},{b})"
                        )));
                    }
                }
            }
        }
        Ok(Self { mu, sigma })
    }

    /// The all-zero model: only penalty and transaction terms survive.
    pub fn zeros(n_t: usize, n_a: usize) -> Self {
        Self {
            mu: vec![vec![0.0; n_a]; n_t],
            sigma: vec![vec![vec![0.0; n_a]; n_a]; n_t],
        }
    }

    pub fn n_t(&self) -> usize {
        self.mu.len()
    }

    pub fn n_a(&self) -> usize {
        self.mu.first().map_or(0, Vec::len)
    }
}

pub fn build_market_model(
    series: &PriceSeries,
    grid: &RebalanceGrid,
) -> Result<MarketModel, MarketError> {
    let needed = grid.required_rows();
    if series.n_days() < needed {
        return Err(MarketError::InsufficientHistory {
            needed,
            available: series.n_days(),
        });
    }
    let n_a = series.n_assets();
    let dt = grid.delta_t_days();
    let anchors = grid.anchor_indices();

    let mut mu = Vec::with_capacity(grid.n_t());
    let mut sigma = Vec::with_capacity(grid.n_t());
    for t in 0..grid.n_t() {
        let (now, next) = (anchors[t], anchors[t + 1]);
        mu.push(
            (0..n_a)
                .map(|a| (series.price(next, a) / series.price(now, a)).ln())
                .collect(),
        );

        // daily returns for days now-dt+1 ..= now
        let returns: Vec<Vec<f64>> = (now + 1 - dt..=now)
            .map(|s| {
                (0..n_a)
                    .map(|a| (series.price(s, a) / series.price(s - 1, a)).ln())
                    .collect()
            })
            .collect();
        sigma.push(sample_covariance(&returns));
    }
    Ok(MarketModel { mu, sigma })
}

/// Unbiased two-pass covariance of `rows[sample][asset]`.
fn sample_covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len() as f64;
    let n_a = rows.first().map_or(0, Vec::len);
    let means: Vec<f64> = (0..n_a)
        .map(|a| rows.iter().map(|r| r[a]).sum::<f64>() / n)
        .collect();
    let mut cov = vec![vec![0.0; n_a]; n_a];
    for a in 0..n_a {
        for b in a..n_a {
            let s: f64 = rows
                .iter()
                .map(|r| (r[a] - means[a]) * (r[b] - means[b]))
                .sum();
            cov[a][b] = s / (n - 1.0);
            cov[b][a] = cov[a][b];
        }
    }
    cov
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, DATE_FORMAT).unwrap()
    }

    #[test]
    fn parses_dense_two_by_two() {
        let text = "date,ticker,close\n2023-01-02,A,10\n2023-01-02,B,20\n2023-01-03,A,11\n2023-01-03,B,22\n";
        let series = parse_prices_csv(text.as_bytes()).unwrap();
        assert_eq!(series.tickers(), ["A", "B"]);
        assert_eq!(series.prices(), [vec![10.0, 20.0], vec![11.0, 22.0]]);
        assert_eq!(series.dates(), [date("2023-01-02"), date("2023-01-03")]);
    }

    #[test]
    fn zero_close_is_rejected() {
        let text = "date,ticker,close\n2023-01-02,A,0\n";
        assert!(matches!(
            parse_prices_csv(text.as_bytes()),
            Err(MarketError::NonPositivePrice { .. })
        ));
    }

    #[test]
    fn missing_cell_is_reported() {
        let text = "date,ticker,close\n2023-01-02,A,10\n2023-01-02,B,20\n2023-01-03,A,11\n";
        match parse_prices_csv(text.as_bytes()) {
            Err(MarketError::MissingCell { date, ticker }) => {
                assert_eq!(date, "2023-01-03");
                assert_eq!(ticker, "B");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_cell_is_reported() {
        let text = "date,ticker,close\n2023-01-02,A,10\n2023-01-02,A,11\n";
        assert!(matches!(
            parse_prices_csv(text.as_bytes()),
            Err(MarketError::DuplicateCell { .. })
        ));
    }

    #[test]
    fn bad_header_and_rows_are_malformed() {
        for text in [
            "day,ticker,close\n2023-01-02,A,10\n",
            "date,ticker,close\n2023-13-02,A,10\n",
            "date,ticker,close\n2023-01-02,A,ten\n",
            "date,ticker,close\n2023-01-02,A\n",
        ] {
            assert!(
                matches!(parse_prices_csv(text.as_bytes()), Err(MarketError::MalformedCsv { .. })),
                "{text}"
            );
        }
    }

    #[test]
    fn quoted_fields_are_accepted() {
        let text = "date,ticker,close\n\"2023-01-02\",\"A,1\",\"10.5\"\n";
        let series = parse_prices_csv(text.as_bytes()).unwrap();
        assert_eq!(series.tickers(), ["A,1"]);
        assert_eq!(series.price(0, 0), 10.5);
    }

    #[test]
    fn synthetic_is_deterministic() {
        let a = generate_synthetic_prices(7, 210, 42).unwrap();
        let b = generate_synthetic_prices(7, 210, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_prices(7, 210, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn synthetic_minimal_shape() {
        let s = generate_synthetic_prices(1, 2, 0).unwrap();
        assert_eq!(s.n_days(), 2);
        assert_eq!(s.n_assets(), 1);
        assert!(s.prices().iter().flatten().all(|&p| p > 0.0));
        assert!(generate_synthetic_prices(0, 10, 0).is_err());
        assert!(generate_synthetic_prices(1, 1, 0).is_err());
    }

    #[test]
    fn synthetic_return_volatility_is_plausible() {
        let s = generate_synthetic_prices(3, 100, 7).unwrap();
        for a in 0..3 {
            let r: Vec<f64> = (1..100)
                .map(|d| (s.price(d, a) / s.price(d - 1, a)).ln())
                .collect();
            let mean = r.iter().sum::<f64>() / r.len() as f64;
            let var = r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r.len() - 1) as f64;
            let sd = var.sqrt();
            assert!((1e-4..=0.2).contains(&sd), "asset {a}: sd {sd}");
        }
    }

    fn series_from_columns(columns: &[Vec<f64>]) -> PriceSeries {
        let n_days = columns[0].len();
        let dates = (0..n_days)
            .map(|d| synthetic_start() + Duration::days(d as i64))
            .collect();
        let tickers = (0..columns.len()).map(|a| format!("T{a}")).collect();
        let prices = (0..n_days)
            .map(|d| columns.iter().map(|c| c[d]).collect())
            .collect();
        PriceSeries::new(tickers, dates, prices).unwrap()
    }

    #[test]
    fn constant_prices_give_zero_model() {
        let s = series_from_columns(&[vec![5.0; 31], vec![7.0; 31]]);
        let grid = RebalanceGrid::new(10, 2).unwrap();
        let m = build_market_model(&s, &grid).unwrap();
        assert!(m.mu.iter().flatten().all(|&x| x == 0.0));
        assert!(m.sigma.iter().flatten().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn identical_paths_are_perfectly_correlated() {
        let s = generate_synthetic_prices(1, 40, 3).unwrap();
        let col: Vec<f64> = (0..40).map(|d| s.price(d, 0)).collect();
        let twin = series_from_columns(&[col.clone(), col]);
        let m = build_market_model(&twin, &RebalanceGrid::new(5, 6).unwrap()).unwrap();
        for t in 0..6 {
            assert_eq!(m.sigma[t][0][1], m.sigma[t][0][0]);
        }
    }

    #[test]
    fn doubling_gives_ln_two() {
        // anchors 3, 6: price doubles between them
        let col: Vec<f64> = (0..7).map(|d| if d >= 6 { 2.0 } else { 1.0 }).collect();
        let s = series_from_columns(&[col]);
        let m = build_market_model(&s, &RebalanceGrid::new(3, 1).unwrap()).unwrap();
        assert!((m.mu[0][0] - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn short_series_is_insufficient() {
        let s = generate_synthetic_prices(2, 60, 1).unwrap();
        let grid = RebalanceGrid::new(30, 2).unwrap();
        assert!(matches!(
            build_market_model(&s, &grid),
            Err(MarketError::InsufficientHistory { needed: 91, available: 60 })
        ));
    }

    #[test]
    fn grid_rejects_degenerate_windows() {
        assert!(RebalanceGrid::new(1, 2).is_err());
        assert!(RebalanceGrid::new(5, 0).is_err());
        assert!(RebalanceGrid::with_first_anchor(5, 1, 4).is_err());
        let g = RebalanceGrid::new(30, 2).unwrap();
        assert_eq!(g.anchor_indices(), [30, 60, 90]);
    }

    #[test]
    fn select_assets_takes_lexicographic_prefix() {
        let text = "date,ticker,close\n2023-01-02,ZZ,1\n2023-01-02,AA,2\n2023-01-02,MM,3\n";
        let s = parse_prices_csv(text.as_bytes()).unwrap();
        let sub = s.select_assets(2).unwrap();
        assert_eq!(sub.tickers(), ["AA", "MM"]);
        assert_eq!(sub.prices(), [vec![2.0, 3.0]]);
    }
}
