//! Precomputed C/(I+N) tails indexed by `(ε, N′, η)`.
//!
//! Any network reduces to its canonical `(ε, N′)`, so one table per
//! dimension answers every query by interpolation.

use std::io::{Read, Write};

use rayon::prelude::*;

use super::{tail_cin, AnalyticError};
use crate::network::{canonicalize, CanonicalSystem, Dimension, NetworkSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct LookupTable {
    pub l: Dimension,
    pub epsilons: Vec<f64>,
    /// Positive, ascending, interpolated in `ln N′`.
    pub nprimes: Vec<f64>,
    pub etas: Vec<f64>,
    /// Indexed `[ε][N′][η]`, flattened.
    values: Vec<f64>,
}

fn strictly_ascending(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl LookupTable {
    fn index(&self, e: usize, n: usize, h: usize) -> usize {
        (e * self.nprimes.len() + n) * self.etas.len() + h
    }

    pub fn value(&self, e: usize, n: usize, h: usize) -> f64 {
        self.values[self.index(e, n, h)]
    }

    /// Default grids: ε ∈ {2.5, …, 5} (for l = 2), 33 log-spaced N′ in
    /// [1e-6, 1e2], and seven thresholds.
    pub fn default_grids() -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let eps = vec![2.5, 3.0, 3.5, 4.0, 4.5, 5.0];
        let nprimes = (0..33).map(|i| 10f64.powf(-6.0 + 8.0 * f64::from(i) / 32.0)).collect();
        let etas = vec![0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 10.0];
        (eps, nprimes, etas)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), AnalyticError> {
        let mut wr = csv::Writer::from_writer(w);
        let map = |e: csv::Error| AnalyticError::Format(e.to_string());
        wr.write_record(["l", "epsilon", "nprime", "eta", "tail"]).map_err(map)?;
        for (e, eps) in self.epsilons.iter().enumerate() {
            for (n, np) in self.nprimes.iter().enumerate() {
                for (h, eta) in self.etas.iter().enumerate() {
                    wr.write_record([
                        self.l.l().to_string(),
                        eps.to_string(),
                        np.to_string(),
                        eta.to_string(),
                        self.value(e, n, h).to_string(),
                    ])
                    .map_err(map)?;
                }
            }
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, AnalyticError> {
        let mut rd = csv::Reader::from_reader(r);
        let headers = rd.headers().map_err(|e| AnalyticError::Format(e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != ["l", "epsilon", "nprime", "eta", "tail"] {
            return Err(AnalyticError::Format(format!(
                "expected header l,epsilon,nprime,eta,tail, got {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        let mut l = None;
        for (i, rec) in rd.records().enumerate() {
            let rec = rec.map_err(|e| AnalyticError::Format(e.to_string()))?;
            let field = |j: usize| -> Result<f64, AnalyticError> {
                rec.get(j)
                    .ok_or_else(|| AnalyticError::Format(format!("row {}: missing column {j}", i + 1)))?
                    .parse::<f64>()
                    .map_err(|e| AnalyticError::Format(format!("row {}: {e}", i + 1)))
            };
            let row_l = field(0)? as u8;
            if *l.get_or_insert(row_l) != row_l {
                return Err(AnalyticError::Format(format!("row {}: mixed dimensions", i + 1)));
            }
            rows.push([field(1)?, field(2)?, field(3)?, field(4)?]);
        }
        let l = Dimension::new(l.ok_or_else(|| AnalyticError::Format("table has no rows".into()))?)?;
        let grid = |k: usize| {
            let mut v: Vec<f64> = rows.iter().map(|r| r[k]).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let (epsilons, nprimes, etas) = (grid(0), grid(1), grid(2));
        let mut table = LookupTable {
            l,
            values: vec![f64::NAN; epsilons.len() * nprimes.len() * etas.len()],
            epsilons,
            nprimes,
            etas,
        };
        if rows.len() != table.values.len() {
            return Err(AnalyticError::Format(format!(
                "{} rows do not fill a {}x{}x{} grid",
                rows.len(),
                table.epsilons.len(),
                table.nprimes.len(),
                table.etas.len()
            )));
        }
        for r in &rows {
            let pos = |g: &[f64], x: f64| g.iter().position(|&v| v == x).expect("value from grid");
            let idx = table.index(pos(&table.epsilons, r[0]), pos(&table.nprimes, r[1]), pos(&table.etas, r[2]));
            table.values[idx] = r[3];
        }
        if table.values.iter().any(|v| v.is_nan()) {
            return Err(AnalyticError::Format("duplicate or missing grid cells".into()));
        }
        Ok(table)
    }
}

/// Tabulates `tail_cin` over the grid. Cells are computed in parallel; the
/// result does not depend on scheduling.
pub fn build_lookup_table(
    l: Dimension,
    epsilons: &[f64],
    nprimes: &[f64],
    etas: &[f64],
) -> Result<LookupTable, AnalyticError> {
    if epsilons.is_empty() || nprimes.is_empty() || etas.is_empty() {
        return Err(AnalyticError::Domain("lookup grids must be nonempty".into()));
    }
    if !strictly_ascending(epsilons) || !strictly_ascending(nprimes) || !strictly_ascending(etas) {
        return Err(AnalyticError::Domain("lookup grids must be strictly ascending".into()));
    }
    if nprimes[0] <= 0.0 {
        return Err(AnalyticError::Domain("N' grid must be positive".into()));
    }
    let cells: Vec<(f64, f64, f64)> = epsilons
        .iter()
        .flat_map(|&e| nprimes.iter().flat_map(move |&n| etas.iter().map(move |&h| (e, n, h))))
        .collect();
    let values = cells
        .par_iter()
        .map(|&(eps, np, eta)| {
            let canon = CanonicalSystem::new(l, eps, np)?;
            tail_cin(&canon, eta)
        })
        .collect::<Result<Vec<f64>, AnalyticError>>()?;
    Ok(LookupTable {
        l,
        epsilons: epsilons.to_vec(),
        nprimes: nprimes.to_vec(),
        etas: etas.to_vec(),
        values,
    })
}

/// Bracketing segment `(i, t)` with `x = (1−t) g[i] + t g[i+1]`.
fn bracket(grid: &[f64], x: f64, what: &str) -> Result<(usize, f64), AnalyticError> {
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    if x.is_nan() || x < lo || x > hi {
        return Err(AnalyticError::OutOfRange(format!("{what} = {x} outside [{lo}, {hi}]")));
    }
    if grid.len() == 1 {
        return Ok((0, 0.0));
    }
    let i = grid.partition_point(|&g| g <= x).saturating_sub(1).min(grid.len() - 2);
    let t = (x - grid[i]) / (grid[i + 1] - grid[i]);
    Ok((i, t))
}

/// Reads `P(C/(I+N) > η)` for a network from the table. `η` must be a grid
/// value; `(ε, ln N′)` are bilinearly interpolated and never extrapolated.
pub fn lookup(table: &LookupTable, spec: &NetworkSpec, eta: f64) -> Result<f64, AnalyticError> {
    if spec.dim != table.l {
        return Err(AnalyticError::OutOfRange(format!(
            "table is for l = {}, network has l = {}",
            table.l.l(),
            spec.dim.l()
        )));
    }
    let canon = canonicalize(spec)?;
    let h = table
        .etas
        .iter()
        .position(|&g| g == eta)
        .ok_or_else(|| AnalyticError::OutOfRange(format!("eta = {eta} is not a table threshold")))?;
    let (e, te) = bracket(&table.epsilons, canon.epsilon, "epsilon")?;
    if canon.nprime <= 0.0 {
        return Err(AnalyticError::OutOfRange(format!(
            "N' = {} is below the table range",
            canon.nprime
        )));
    }
    let log_grid: Vec<f64> = table.nprimes.iter().map(|n| n.ln()).collect();
    let (n, tn) = bracket(&log_grid, canon.nprime.ln(), "ln N'")?;
    let e1 = (e + 1).min(table.epsilons.len() - 1);
    let n1 = (n + 1).min(table.nprimes.len() - 1);
    let v = (1.0 - te) * (1.0 - tn) * table.value(e, n, h)
        + (1.0 - te) * tn * table.value(e, n1, h)
        + te * (1.0 - tn) * table.value(e1, n, h)
        + te * tn * table.value(e1, n1, h);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Tier;
    use crate::network::FadingSpec;

    fn small_table() -> LookupTable {
        let l = Dimension::new(2).unwrap();
        build_lookup_table(l, &[3.0, 4.0], &[1e-2, 1e-1, 1.0], &[0.5, 1.0]).unwrap()
    }

    fn canonical_spec(eps: f64, noise: f64) -> NetworkSpec {
        NetworkSpec::single_tier(2, eps, 1.0, 1.0, noise).unwrap()
    }

    #[test]
    fn grid_point_is_exact() {
        let t = small_table();
        let v = lookup(&t, &canonical_spec(4.0, 1e-1), 1.0).unwrap();
        assert_eq!(v, t.value(1, 1, 1));
        let v = lookup(&t, &canonical_spec(3.0, 1.0), 0.5).unwrap();
        assert_eq!(v, t.value(0, 2, 0));
    }

    #[test]
    fn rows_are_monotone_in_noise() {
        let t = small_table();
        for e in 0..2 {
            for h in 0..2 {
                for n in 1..3 {
                    assert!(t.value(e, n, h) <= t.value(e, n - 1, h));
                }
            }
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = small_table();
        let text = t.to_csv_string();
        assert!(text.starts_with("l,epsilon,nprime,eta,tail\n"));
        let back = LookupTable::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn equivalent_networks_read_the_same_cell() {
        let t = small_table();
        // Density 4, power 2, noise chosen so N' = 0.05: N = N' · 4² · 2.
        let spec = NetworkSpec {
            dim: Dimension::new(2).unwrap(),
            epsilon: 4.0,
            tiers: vec![Tier::new(4.0, 2.0)],
            fading: FadingSpec::None,
            noise: 0.05 * 32.0,
        };
        let a = lookup(&t, &spec, 1.0).unwrap();
        let b = lookup(&t, &canonical_spec(4.0, 0.05), 1.0).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn out_of_hull_queries_fail() {
        let t = small_table();
        assert!(matches!(lookup(&t, &canonical_spec(4.0, 5.0), 1.0), Err(AnalyticError::OutOfRange(_))));
        assert!(matches!(lookup(&t, &canonical_spec(5.0, 0.1), 1.0), Err(AnalyticError::OutOfRange(_))));
        assert!(matches!(lookup(&t, &canonical_spec(4.0, 0.1), 2.0), Err(AnalyticError::OutOfRange(_))));
        assert!(matches!(lookup(&t, &canonical_spec(4.0, 0.0), 1.0), Err(AnalyticError::OutOfRange(_))));
        let l1 = NetworkSpec::single_tier(1, 4.0, 1.0, 1.0, 0.1).unwrap();
        assert!(lookup(&t, &l1, 1.0).is_err());
    }

    #[test]
    fn malformed_csv_rejected() {
        assert!(LookupTable::read_csv("a,b\n1,2\n".as_bytes()).is_err());
        let t = small_table().to_csv_string();
        let truncated: String = t.lines().take(4).map(|l| format!("{l}\n")).collect();
        assert!(LookupTable::read_csv(truncated.as_bytes()).is_err());
    }
}
