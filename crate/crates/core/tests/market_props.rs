use dpo_vqe::market::{
    build_market_model, generate_synthetic_prices, load_prices_csv, parse_prices_csv,
    write_prices_csv, MarketError, RebalanceGrid,
};
use proptest::prelude::*;

/// Sample covariance by the textbook `Σ(x-x̄)(y-ȳ)/(n-1)` over explicit
/// log-return columns.
fn covariance_oracle(prices: &[Vec<f64>], from: usize, to: usize, a: usize, b: usize) -> f64 {
    let ret = |k: usize, s: usize| (prices[s][k] / prices[s - 1][k]).ln();
    let xs: Vec<f64> = (from..=to).map(|s| ret(a, s)).collect();
    let ys: Vec<f64> = (from..=to).map(|s| ret(b, s)).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n - 1.0)
}

#[test]
fn model_matches_oracle() {
    let series = generate_synthetic_prices(4, 120, 7).unwrap();
    let grid = RebalanceGrid::new(20, 4).unwrap();
    let model = build_market_model(&series, &grid).unwrap();
    let anchors = grid.anchor_indices();
    for t in 0..4 {
        for a in 0..4 {
            let expected = (series.price(anchors[t + 1], a) / series.price(anchors[t], a)).ln();
            assert!((model.mu[t][a] - expected).abs() < 1e-14);
            for b in 0..4 {
                let cov = covariance_oracle(series.prices(), anchors[t] - 19, anchors[t], a, b);
                assert!((model.sigma[t][a][b] - cov).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn csv_round_trip_through_file() {
    let series = generate_synthetic_prices(3, 40, 11).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("prices.csv");
    write_prices_csv(&series, std::fs::File::create(&path).unwrap()).unwrap();
    assert_eq!(load_prices_csv(&path).unwrap(), series);
}

#[test]
fn row_order_does_not_matter() {
    let series = generate_synthetic_prices(3, 30, 5).unwrap();
    let mut buf = Vec::new();
    write_prices_csv(&series, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let header = lines.remove(0);
    lines.reverse();
    let shuffled = format!("{header}\n{}\n", lines.join("\n"));
    assert_eq!(parse_prices_csv(shuffled.as_bytes()).unwrap(), series);
}

#[test]
fn short_history_is_rejected() {
    let series = generate_synthetic_prices(2, 50, 1).unwrap();
    let grid = RebalanceGrid::new(30, 2).unwrap();
    assert!(matches!(
        build_market_model(&series, &grid),
        Err(MarketError::InsufficientHistory { needed: 91, available: 50 })
    ));
}

#[test]
fn missing_cell_is_reported() {
    let text = "date,ticker,close\n2024-01-02,A,1\n2024-01-02,B,2\n2024-01-03,A,1.5\n";
    assert!(matches!(
        parse_prices_csv(text.as_bytes()),
        Err(MarketError::MissingCell { .. })
    ));
}

proptest! {
    #[test]
    fn rescaling_an_asset_leaves_model_unchanged(seed in 0u64..1000, asset in 0usize..3, factor in 0.01f64..100.0) {
        let series = generate_synthetic_prices(3, 70, seed).unwrap();
        let grid = RebalanceGrid::new(10, 5).unwrap();
        let base = build_market_model(&series, &grid).unwrap();
        let scaled = build_market_model(&series.rescale_asset(asset, factor).unwrap(), &grid).unwrap();
        for t in 0..5 {
            for a in 0..3 {
                prop_assert!((base.mu[t][a] - scaled.mu[t][a]).abs() < 1e-12);
                for b in 0..3 {
                    prop_assert!((base.sigma[t][a][b] - scaled.sigma[t][a][b]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn covariance_is_symmetric_psd_diagonal(seed in 0u64..1000) {
        let series = generate_synthetic_prices(4, 40, seed).unwrap();
        let model = build_market_model(&series, &RebalanceGrid::new(8, 3).unwrap()).unwrap();
        for s in &model.sigma {
            for a in 0..4 {
                prop_assert!(s[a][a] >= 0.0);
                for b in 0..4 {
                    prop_assert_eq!(s[a][b], s[b][a]);
                    prop_assert!(s[a][b].powi(2) <= s[a][a] * s[b][b] * (1.0 + 1e-9) + 1e-300);
                }
            }
        }
    }

    #[test]
    fn synthetic_series_is_reproducible(seed: u64) {
        let a = generate_synthetic_prices(2, 20, seed).unwrap();
        prop_assert_eq!(&a, &generate_synthetic_prices(2, 20, seed).unwrap());
        prop_assert!(a.prices().iter().flatten().all(|p| *p > 0.0));
    }
}
