//! File formats used by the command-line tool: a mixed-frequency panel
//! CSV, a `key=value` estimation config, and CSV serialization of draw
//! stores and result tables.
//!
//! Panel CSV layout: header `period,<name>,...`; one row per
//! high-frequency period. A column with any empty cell is treated as
//! low-frequency: its non-empty cells are inter-temporal aggregates
//! observed in that period, and every high-frequency cell of the column
//! is missing. Columns without empty cells are ordinary observed series.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::bench::BenchmarkResult;
use crate::constraint::AggregationScheme;
use crate::error::{MfError, Result};
use crate::gibbs::{DrawStore, GibbsConfig, PosteriorSummary, RunMeta, YuMethod};
use crate::model::{Aggregate, MixedPanel};

/// Reads a panel CSV; returns the panel and the period labels.
pub fn read_panel_csv(path: &Path) -> Result<(MixedPanel, Vec<String>)> {
    let text = fs::read_to_string(path)?;
    parse_panel_csv(&text)
}

/// Parses panel CSV text; `row`/`col` in errors are 1-based file
/// coordinates (the header is row 1).
pub fn parse_panel_csv(text: &str) -> Result<(MixedPanel, Vec<String>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| MfError::ParseError {
        row: 1,
        col: 1,
        msg: "empty file".into(),
    })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 2 {
        return Err(MfError::ParseError {
            row: 1,
            col: 1,
            msg: "header needs a period column and at least one series".into(),
        });
    }
    let names: Vec<String> = cols[1..].iter().map(|s| s.to_string()).collect();
    let n = names.len();

    let mut labels = Vec::new();
    let mut cells: Vec<Vec<Option<f64>>> = Vec::new();
    for (li, line) in lines {
        let row = li + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != n + 1 {
            return Err(MfError::ParseError {
                row,
                col: fields.len(),
                msg: format!("expected {} fields, found {}", n + 1, fields.len()),
            });
        }
        labels.push(fields[0].to_string());
        let mut parsed = Vec::with_capacity(n);
        for (c, field) in fields[1..].iter().enumerate() {
            if field.is_empty() {
                parsed.push(None);
            } else {
                let v: f64 = field.parse().map_err(|_| MfError::ParseError {
                    row,
                    col: c + 2,
                    msg: format!("not a number: {field:?}"),
                })?;
                parsed.push(Some(v));
            }
        }
        cells.push(parsed);
    }
    let t_len = cells.len();
    if t_len == 0 {
        return Err(MfError::ParseError {
            row: 2,
            col: 1,
            msg: "no data rows".into(),
        });
    }

    let low_freq: Vec<bool> = (0..n)
        .map(|i| cells.iter().any(|r| r[i].is_none()))
        .collect();
    let mut values = vec![f64::NAN; t_len * n];
    let mut mask = vec![false; t_len * n];
    let mut aggregates = Vec::new();
    for (t, rowvals) in cells.iter().enumerate() {
        for i in 0..n {
            match (low_freq[i], rowvals[i]) {
                (false, Some(v)) => {
                    values[t * n + i] = v;
                    mask[t * n + i] = true;
                }
                (true, Some(v)) => aggregates.push(Aggregate {
                    var: i,
                    period: t + 1,
                    value: v,
                }),
                (true, None) => {}
                (false, None) => unreachable!(),
            }
        }
    }
    let panel = MixedPanel::new(t_len, names, values, mask, aggregates)?;
    Ok((panel, labels))
}

/// Writes a panel CSV (the inverse of [`read_panel_csv`]). `labels`
/// defaults to 1-based period numbers.
pub fn write_panel_csv(panel: &MixedPanel, labels: Option<&[String]>, path: &Path) -> Result<()> {
    let t_len = panel.t_len();
    let n = panel.n();
    let mut agg: HashMap<(usize, usize), f64> = HashMap::new();
    for a in panel.aggregates() {
        agg.insert((a.period - 1, a.var), a.value);
    }
    let mut out = String::from("period");
    for name in panel.names() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for t in 0..t_len {
        match labels {
            Some(l) => out.push_str(&l[t]),
            None => {
                let _ = write!(out, "{}", t + 1);
            }
        }
        for i in 0..n {
            out.push(',');
            if panel.is_observed(t, i) {
                let _ = write!(out, "{}", panel.value(t, i));
            } else if let Some(v) = agg.get(&(t, i)) {
                let _ = write!(out, "{v}");
            }
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Estimation settings parsed from a `key=value` config file.
#[derive(Debug, Clone)]
pub struct EstimateConfig {
    pub lags: usize,
    pub scheme: AggregationScheme,
    pub method: YuMethod,
    pub n_draws: usize,
    pub n_burn: usize,
    pub thin: usize,
    pub seed: u64,
}

impl EstimateConfig {
    pub fn to_gibbs(&self) -> GibbsConfig {
        let mut g = GibbsConfig::new(self.n_draws, self.n_burn, self.seed, self.lags, self.method);
        g.thin = self.thin;
        g
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses `key=value` lines; `#` starts a comment. `lags` is
    /// required; everything else has defaults. Unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map: HashMap<&str, &str> = HashMap::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                MfError::ConfigError(format!("expected key=value, got {line:?}"))
            })?;
            map.insert(k.trim(), v.trim());
        }
        const KNOWN: [&str; 9] = [
            "lags", "scheme", "constraint_mode", "o_diag", "n_draws", "n_burn", "thin", "seed",
            "method",
        ];
        for k in map.keys() {
            if !KNOWN.contains(k) {
                return Err(MfError::ConfigError(format!("unknown key: {k}")));
            }
        }

        fn num<T: std::str::FromStr>(map: &HashMap<&str, &str>, key: &str, default: T) -> Result<T> {
            match map.get(key) {
                None => Ok(default),
                Some(v) => v
                    .parse()
                    .map_err(|_| MfError::ConfigError(format!("bad value for {key}: {v:?}"))),
            }
        }

        let lags: usize = map
            .get("lags")
            .ok_or_else(|| MfError::ConfigError("missing required key: lags".into()))?
            .parse()
            .map_err(|_| MfError::ConfigError("bad value for lags".into()))?;
        let scheme = match map.get("scheme") {
            None => AggregationScheme::LogDiffTriangle,
            Some(s) => AggregationScheme::parse(s)?,
        };
        let n_draws = num(&map, "n_draws", 2000usize)?;
        let n_burn = num(&map, "n_burn", n_draws / 2)?;
        let thin = num(&map, "thin", 1usize)?;
        let seed = num(&map, "seed", 0u64)?;
        let o_diag = num(&map, "o_diag", crate::constraint::DEFAULT_O_DIAG)?;
        let method = match (map.get("method").copied(), map.get("constraint_mode").copied()) {
            (Some("kf"), _) => YuMethod::KalmanFilter,
            (Some("precision") | None, mode) => match mode {
                Some("hard") => YuMethod::PrecisionHard,
                Some("soft") | None => YuMethod::PrecisionSoft { o_diag },
                Some(other) => {
                    return Err(MfError::ConfigError(format!(
                        "constraint_mode must be hard or soft, got {other:?}"
                    )))
                }
            },
            (Some(other), _) => {
                return Err(MfError::ConfigError(format!(
                    "method must be precision or kf, got {other:?}"
                )))
            }
        };
        Ok(EstimateConfig {
            lags,
            scheme,
            method,
            n_draws,
            n_burn,
            thin,
            seed,
        })
    }
}

fn csv_join(vals: impl IntoIterator<Item = String>) -> String {
    vals.into_iter().collect::<Vec<_>>().join(",")
}

/// Writes a draw store into `dir` as `u_cells.csv`, `yu_draws.csv`,
/// `b_draws.csv`, `sigma_draws.csv`, and `meta.txt`.
pub fn write_draw_store(store: &DrawStore, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;

    let mut cells = String::from("period,var,name\n");
    for &(t, i) in &store.u_cells {
        let _ = writeln!(cells, "{},{},{}", t + 1, i + 1, store.names[i]);
    }
    fs::write(dir.join("u_cells.csv"), cells)?;

    let header = csv_join(
        store
            .u_cells
            .iter()
            .map(|&(t, i)| format!("p{}_{}", t + 1, store.names[i])),
    );
    let mut yu = header;
    yu.push('\n');
    for draw in &store.yu_draws {
        let _ = writeln!(yu, "{}", csv_join(draw.iter().map(|v| format!("{v}"))));
    }
    fs::write(dir.join("yu_draws.csv"), yu)?;

    write_matrix_draws(&store.b_draws, "b", &dir.join("b_draws.csv"))?;
    write_matrix_draws(&store.sigma_draws, "sigma", &dir.join("sigma_draws.csv"))?;

    let m = &store.meta;
    let mut meta = String::new();
    let _ = writeln!(meta, "n={}", m.n);
    let _ = writeln!(meta, "p={}", m.p);
    let _ = writeln!(meta, "t_len={}", m.t_len);
    let _ = writeln!(meta, "n_draws={}", m.n_draws);
    let _ = writeln!(meta, "n_burn={}", m.n_burn);
    let _ = writeln!(meta, "thin={}", m.thin);
    let _ = writeln!(meta, "seed={}", m.seed);
    let _ = writeln!(meta, "method={}", m.method);
    let _ = writeln!(meta, "scheme={}", m.scheme);
    let _ = writeln!(meta, "yu_step_secs={}", m.yu_step_secs);
    let _ = writeln!(meta, "param_step_secs={}", m.param_step_secs);
    let _ = writeln!(meta, "total_secs={}", m.total_secs);
    let _ = writeln!(meta, "names={}", store.names.join(";"));
    fs::write(dir.join("meta.txt"), meta)?;
    Ok(())
}

fn write_matrix_draws(draws: &[DMatrix<f64>], prefix: &str, path: &Path) -> Result<()> {
    let mut out = String::new();
    if let Some(first) = draws.first() {
        let (r, c) = first.shape();
        out = csv_join(
            (0..r).flat_map(|i| (0..c).map(move |j| format!("{prefix}{}_{}", i + 1, j + 1))),
        );
        out.push('\n');
        for d in draws {
            let _ = writeln!(
                out,
                "{}",
                csv_join((0..r).flat_map(|i| (0..c).map(|j| format!("{}", d[(i, j)])).collect::<Vec<_>>()))
            );
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a draw store previously written by [`write_draw_store`].
pub fn read_draw_store(dir: &Path) -> Result<DrawStore> {
    let meta_text = fs::read_to_string(dir.join("meta.txt"))?;
    let mut kv: HashMap<&str, &str> = HashMap::new();
    for line in meta_text.lines() {
        if let Some((k, v)) = line.split_once('=') {
            kv.insert(k.trim(), v.trim());
        }
    }
    fn get<T: std::str::FromStr>(kv: &HashMap<&str, &str>, key: &str) -> Result<T> {
        kv.get(key)
            .ok_or_else(|| MfError::ConfigError(format!("meta.txt missing {key}")))?
            .parse()
            .map_err(|_| MfError::ConfigError(format!("meta.txt has bad {key}")))
    }
    let meta = RunMeta {
        n: get(&kv, "n")?,
        p: get(&kv, "p")?,
        t_len: get(&kv, "t_len")?,
        n_draws: get(&kv, "n_draws")?,
        n_burn: get(&kv, "n_burn")?,
        thin: get(&kv, "thin")?,
        seed: get(&kv, "seed")?,
        method: get(&kv, "method")?,
        scheme: get(&kv, "scheme")?,
        yu_step_secs: get(&kv, "yu_step_secs")?,
        param_step_secs: get(&kv, "param_step_secs")?,
        total_secs: get(&kv, "total_secs")?,
    };
    let names: Vec<String> = kv
        .get("names")
        .ok_or_else(|| MfError::ConfigError("meta.txt missing names".into()))?
        .split(';')
        .map(str::to_string)
        .collect();

    let cells_text = fs::read_to_string(dir.join("u_cells.csv"))?;
    let mut u_cells = Vec::new();
    for (li, line) in cells_text.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 2 {
            return Err(MfError::ParseError {
                row: li + 1,
                col: 1,
                msg: "u_cells.csv row needs period,var".into(),
            });
        }
        let period: usize = fields[0].parse().map_err(|_| MfError::ParseError {
            row: li + 1,
            col: 1,
            msg: "bad period".into(),
        })?;
        let var: usize = fields[1].parse().map_err(|_| MfError::ParseError {
            row: li + 1,
            col: 2,
            msg: "bad var".into(),
        })?;
        u_cells.push((period - 1, var - 1));
    }

    let yu_draws = read_numeric_rows(&dir.join("yu_draws.csv"), u_cells.len())?;
    let k = 1 + meta.n * meta.p;
    let b_draws = read_matrix_draws(&dir.join("b_draws.csv"), k, meta.n)?;
    let sigma_draws = read_matrix_draws(&dir.join("sigma_draws.csv"), meta.n, meta.n)?;

    Ok(DrawStore {
        u_cells,
        names,
        yu_draws,
        b_draws,
        sigma_draws,
        meta,
    })
}

fn read_numeric_rows(path: &Path, width: usize) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (li, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(width);
        for (ci, field) in line.split(',').enumerate() {
            row.push(field.trim().parse().map_err(|_| MfError::ParseError {
                row: li + 1,
                col: ci + 1,
                msg: format!("not a number: {field:?}"),
            })?);
        }
        if row.len() != width {
            return Err(MfError::ParseError {
                row: li + 1,
                col: row.len(),
                msg: format!("expected {width} fields, found {}", row.len()),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

fn read_matrix_draws(path: &Path, r: usize, c: usize) -> Result<Vec<DMatrix<f64>>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path)?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let rows = read_numeric_rows(path, r * c)?;
    Ok(rows
        .into_iter()
        .map(|flat| DMatrix::from_fn(r, c, |i, j| flat[i * c + j]))
        .collect())
}

/// Writes the posterior summary of the missing cells:
/// `period,var,median,lo68,hi68,lo90,hi90`.
pub fn write_summary(summary: &PosteriorSummary, store: &DrawStore, path: &Path) -> Result<()> {
    let mut out = String::from("period,var,median,lo68,hi68,lo90,hi90\n");
    for (k, &(t, i)) in store.u_cells.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            t + 1,
            store.names[i],
            summary.yu_median[k],
            summary.yu_band68[k].0,
            summary.yu_band68[k].1,
            summary.yu_band90[k].0,
            summary.yu_band90[k].1
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes a cycle matrix (`T x n`, NaN rows blank) with one column per
/// variable.
pub fn write_cycle_csv(
    cycle: &DMatrix<f64>,
    names: &[String],
    labels: Option<&[String]>,
    path: &Path,
) -> Result<()> {
    let mut out = String::from("period");
    for name in names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for t in 0..cycle.nrows() {
        match labels {
            Some(l) => out.push_str(&l[t]),
            None => {
                let _ = write!(out, "{}", t + 1);
            }
        }
        for i in 0..cycle.ncols() {
            out.push(',');
            if cycle[(t, i)].is_finite() {
                let _ = write!(out, "{}", cycle[(t, i)]);
            }
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes benchmark rows:
/// `n_o,n_u,t_len,p,method,mse,run_secs,ten_draw_secs,error`.
pub fn write_benchmark_csv(result: &BenchmarkResult, path: &Path) -> Result<()> {
    let mut out = String::from("n_o,n_u,t_len,p,method,mse,run_secs,ten_draw_secs,error\n");
    for row in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            row.cell.n_o,
            row.cell.n_u,
            row.cell.t_len,
            row.cell.p,
            row.method,
            row.mse.map(|v| v.to_string()).unwrap_or_default(),
            row.run_secs,
            row.ten_draw_secs.map(|v| v.to_string()).unwrap_or_default(),
            row.error.as_deref().unwrap_or("").replace(',', ";"),
        );
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::RunMeta;

    #[test]
    fn panel_roundtrip() {
        let text = "period,gdp,rate\n\
                    2000-01,,1.5\n\
                    2000-02,,1.6\n\
                    2000-03,2.1,1.7\n\
                    2000-04,,1.8\n\
                    2000-05,,1.9\n\
                    2000-06,2.4,2.0\n";
        let (panel, labels) = parse_panel_csv(text).unwrap();
        assert_eq!(panel.t_len(), 6);
        assert_eq!(panel.n(), 2);
        assert_eq!(panel.names(), ["gdp", "rate"]);
        assert_eq!(labels[0], "2000-01");
        assert_eq!(panel.missing_cols(), vec![0]);
        assert_eq!(panel.aggregates().len(), 2);
        assert_eq!(panel.aggregates()[0].period, 3);
        assert_eq!(panel.aggregates()[0].value, 2.1);
        assert!(panel.is_observed(0, 1));
        assert!(!panel.is_observed(2, 0));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("panel.csv");
        write_panel_csv(&panel, Some(&labels), &path).unwrap();
        let (back, labels2) = read_panel_csv(&path).unwrap();
        assert_eq!(labels, labels2);
        assert_eq!(back.aggregates().len(), 2);
        for t in 0..6 {
            assert_eq!(back.value(t, 1), panel.value(t, 1));
        }
    }

    #[test]
    fn bad_number_reports_position() {
        let text = "period,a\n1,1.0\n2,oops\n";
        match parse_panel_csv(text) {
            Err(MfError::ParseError { row, col, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(col, 2);
            }
            other => panic!("expected ParseError, got {other:?}"),
        }
    }

    #[test]
    fn ragged_row_rejected() {
        let text = "period,a,b\n1,1.0,2.0\n2,1.0\n";
        assert!(matches!(
            parse_panel_csv(text),
            Err(MfError::ParseError { row: 3, .. })
        ));
    }

    #[test]
    fn config_defaults_and_required_key() {
        let cfg = EstimateConfig::parse("lags=4\n").unwrap();
        assert_eq!(cfg.lags, 4);
        assert_eq!(cfg.n_draws, 2000);
        assert_eq!(cfg.n_burn, 1000);
        assert_eq!(cfg.thin, 1);
        assert!(matches!(cfg.method, YuMethod::PrecisionSoft { .. }));

        match EstimateConfig::parse("n_draws=10\n") {
            Err(MfError::ConfigError(msg)) => assert!(msg.contains("lags"), "{msg}"),
            other => panic!("expected ConfigError, got {other:?}"),
        }
    }

    #[test]
    fn config_full_parse() {
        let text = "# comment\nlags = 2\nscheme = level_average\nconstraint_mode = hard\n\
                    n_draws = 50\nn_burn = 10\nthin = 2\nseed = 9\n";
        let cfg = EstimateConfig::parse(text).unwrap();
        assert_eq!(cfg.lags, 2);
        assert_eq!(cfg.scheme, AggregationScheme::LevelAverage);
        assert_eq!(cfg.method, YuMethod::PrecisionHard);
        assert_eq!(cfg.n_draws, 50);
        assert_eq!(cfg.seed, 9);

        let cfg = EstimateConfig::parse("lags=1\nmethod=kf\n").unwrap();
        assert_eq!(cfg.method, YuMethod::KalmanFilter);
    }

    #[test]
    fn config_rejects_unknown_key() {
        assert!(matches!(
            EstimateConfig::parse("lags=1\nlagz=2\n"),
            Err(MfError::ConfigError(_))
        ));
    }

    #[test]
    fn store_roundtrip() {
        let store = DrawStore {
            u_cells: vec![(0, 1), (3, 1)],
            names: vec!["a".into(), "b".into()],
            yu_draws: vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            b_draws: vec![DMatrix::from_row_slice(3, 2, &[1., 2., 3., 4., 5., 6.])],
            sigma_draws: vec![DMatrix::identity(2, 2)],
            meta: RunMeta {
                n: 2,
                p: 1,
                t_len: 6,
                n_draws: 2,
                n_burn: 0,
                thin: 1,
                seed: 5,
                method: "precision_soft".into(),
                scheme: "level_average".into(),
                yu_step_secs: 0.1,
                param_step_secs: 0.2,
                total_secs: 0.3,
            },
        };
        let dir = tempfile::tempdir().unwrap();
        write_draw_store(&store, dir.path()).unwrap();
        let back = read_draw_store(dir.path()).unwrap();
        assert_eq!(back.u_cells, store.u_cells);
        assert_eq!(back.names, store.names);
        assert_eq!(back.yu_draws, store.yu_draws);
        assert_eq!(back.b_draws, store.b_draws);
        assert_eq!(back.sigma_draws, store.sigma_draws);
        assert_eq!(back.meta.p, 1);
        assert_eq!(back.meta.method, "precision_soft");
    }

    #[test]
    fn empty_matrix_draws_roundtrip() {
        let store = DrawStore {
            u_cells: vec![(0, 0)],
            names: vec!["a".into()],
            yu_draws: vec![vec![1.0]],
            b_draws: vec![],
            sigma_draws: vec![],
            meta: RunMeta {
                n: 1,
                p: 1,
                t_len: 3,
                ..RunMeta::default()
            },
        };
        let dir = tempfile::tempdir().unwrap();
        write_draw_store(&store, dir.path()).unwrap();
        let back = read_draw_store(dir.path()).unwrap();
        assert!(back.b_draws.is_empty());
        assert!(back.sigma_draws.is_empty());
    }
}
