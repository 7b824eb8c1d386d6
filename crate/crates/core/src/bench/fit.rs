use crate::types::ReportRow;

/// Rows that enter the rate fit: finite errors, minus the trailing rows at
/// the error floor. A row is at the floor when its error failed to drop by at
/// least 20% per halving of `H` relative to the row before it. Expects rows
/// sorted by decreasing `H`.
pub fn pre_floor_rows(rows: &[ReportRow]) -> Vec<&ReportRow> {
    let finite: Vec<&ReportRow> = rows
        .iter()
        .filter(|r| r.max_error.is_finite() && r.max_error > 0.0 && r.h > 0.0)
        .collect();
    let mut end = finite.len();
    while end >= 2 {
        let (prev, cur) = (finite[end - 2], finite[end - 1]);
        let halvings = (prev.h / cur.h).log2();
        if cur.max_error <= prev.max_error * 0.8f64.powf(halvings) {
            break;
        }
        end -= 1;
    }
    finite.into_iter().take(end).collect()
}

/// Least-squares slope of `log(error)` against `log(H)` over the pre-floor
/// rows; `NaN` when fewer than two rows remain.
pub fn fit_rate(rows: &[ReportRow]) -> f64 {
    let used = pre_floor_rows(rows);
    if used.len() < 2 {
        return f64::NAN;
    }
    let n = used.len() as f64;
    let xs: Vec<f64> = used.iter().map(|r| r.h.ln()).collect();
    let ys: Vec<f64> = used.iter().map(|r| r.max_error.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(h: f64, e: f64) -> ReportRow {
        ReportRow {
            h,
            m: 1,
            max_error: e,
            slow_calls: 0,
            total_calls: 0,
            wall_time: 0.0,
        }
    }

    #[test]
    fn recovers_power_law() {
        let rows: Vec<ReportRow> = (0..6)
            .map(|k| {
                let h = 0.1 * 0.5f64.powi(k);
                row(h, 3.0 * h.powi(4))
            })
            .collect();
        assert!((fit_rate(&rows) - 4.0).abs() < 1e-10);
    }

    #[test]
    fn floor_rows_are_dropped() {
        let mut rows: Vec<ReportRow> = (0..5)
            .map(|k| {
                let h = 0.1 * 0.5f64.powi(k);
                row(h, h.powi(3))
            })
            .collect();
        rows.push(row(0.1 / 32.0, 1.1e-6));
        rows.push(row(0.1 / 64.0, 0.9e-6));
        assert_eq!(pre_floor_rows(&rows).len(), 5);
        assert!((fit_rate(&rows) - 3.0).abs() < 1e-10);
    }

    #[test]
    fn divergent_rows_excluded() {
        let rows = vec![row(0.4, f64::INFINITY), row(0.2, 0.2f64.powi(2)), row(0.1, 0.01f64)];
        assert!((fit_rate(&rows) - 2.0).abs() < 1e-10);
        assert!(fit_rate(&rows[..2]).is_nan());
    }
}
