//! Parsers for the `lo:hi:count` penalty grids and `lo:hi:step` ranges.

fn three_fields(s: &str) -> Result<[&str; 3], String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, c] => Ok([a.trim(), b.trim(), c.trim()]),
        _ => Err(format!("expected three ':'-separated fields, got {s:?}")),
    }
}

fn number(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("{s:?} is not a finite number")),
    }
}

/// `lo:hi:count`, log-spaced with both ends included.
pub fn parse_log_grid(s: &str) -> Result<Vec<f64>, String> {
    let [lo, hi, count] = three_fields(s)?;
    let (lo, hi) = (number(lo)?, number(hi)?);
    let count: usize = count.parse().map_err(|_| format!("{count:?} is not a count"))?;
    if !(lo > 0.0 && hi >= lo) {
        return Err(format!("grid needs 0 < lo <= hi, got {lo}:{hi}"));
    }
    match count {
        0 => Err("grid count must be at least 1".into()),
        1 if lo == hi => Ok(vec![lo]),
        1 => Err("a single-point grid needs lo == hi".into()),
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            let step = (b - a) / (count - 1) as f64;
            let mut g: Vec<f64> = (0..count).map(|i| 10f64.powf(a + step * i as f64)).collect();
            g[0] = lo;
            g[count - 1] = hi;
            Ok(g)
        }
    }
}

/// `lo:hi:step`, arithmetic from `lo` up to and including `hi`.
pub fn parse_range(s: &str) -> Result<Vec<f64>, String> {
    let [lo, hi, step] = three_fields(s)?;
    let (lo, hi, step) = (number(lo)?, number(hi)?, number(step)?);
    if !(step > 0.0 && hi >= lo) {
        return Err(format!("range needs lo <= hi and step > 0, got {lo}:{hi}:{step}"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > 10_000_000 {
        return Err(format!("range has {count} points"));
    }
    Ok((0..count).map(|i| lo + step * i as f64).collect())
}

/// Comma-separated list of finite numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|t| number(t.trim())).collect()
}
