//! Bench grid specifications: `n=2..5;m=1..2;pmax=2,4;rmax=0,4;density=1.0,0.7;seeds=0..9`.

use std::fmt;

use flowsched::instance::GeneratorParams;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridError(pub String);

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for GridError {}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub pmax: Vec<i64>,
    pub rmax: Vec<i64>,
    pub density: Vec<f64>,
    pub seeds: Vec<u64>,
}

fn ints(key: &str, value: &str) -> Result<Vec<i64>, GridError> {
    let bad = || GridError(format!("bad value for {key}: {value:?}"));
    let mut out = Vec::new();
    for part in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

fn non_negative<T: TryFrom<i64>>(key: &str, values: Vec<i64>, min: i64) -> Result<Vec<T>, GridError> {
    values
        .into_iter()
        .map(|v| {
            if v < min {
                return Err(GridError(format!("{key} must be at least {min}, got {v}")));
            }
            T::try_from(v).map_err(|_| GridError(format!("{key} out of range: {v}")))
        })
        .collect()
}

impl Grid {
    pub fn parse(spec: &str) -> Result<Grid, GridError> {
        let mut grid = Grid {
            n: Vec::new(),
            m: Vec::new(),
            pmax: Vec::new(),
            rmax: Vec::new(),
            density: vec![1.0],
            seeds: Vec::new(),
        };
        let mut seen = Vec::new();
        for item in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| GridError(format!("expected key=value, got {item:?}")))?;
            let key = key.trim();
            match key {
                "n" => grid.n = non_negative(key, ints(key, value)?, 1)?,
                "m" => grid.m = non_negative(key, ints(key, value)?, 1)?,
                "pmax" => grid.pmax = non_negative(key, ints(key, value)?, 1)?,
                "rmax" => grid.rmax = non_negative(key, ints(key, value)?, 0)?,
                "seeds" | "seed" => grid.seeds = non_negative(key, ints(key, value)?, 0)?,
                "density" => {
                    grid.density = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| {
                            let d: f64 = s
                                .parse()
                                .map_err(|_| GridError(format!("bad density {s:?}")))?;
                            if d > 0.0 && d <= 1.0 {
                                Ok(d)
                            } else {
                                Err(GridError(format!("density must lie in (0, 1], got {s}")))
                            }
                        })
                        .collect::<Result<_, _>>()?
                }
                other => return Err(GridError(format!("unknown grid key {other:?}"))),
            }
            seen.push(key.to_string());
        }
        for required in ["n", "m", "pmax", "rmax"] {
            if !seen.iter().any(|k| k == required) {
                return Err(GridError(format!("grid is missing {required}")));
            }
        }
        if !seen.iter().any(|k| k == "seeds" || k == "seed") {
            return Err(GridError("grid is missing seeds".into()));
        }
        if grid.cells().is_empty() {
            return Err(GridError("grid is empty".into()));
        }
        Ok(grid)
    }

    /// Cartesian product in a fixed nesting order.
    pub fn cells(&self) -> Vec<GeneratorParams> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &m in &self.m {
                for &p_max in &self.pmax {
                    for &r_max in &self.rmax {
                        for &density in &self.density {
                            for &seed in &self.seeds {
                                out.push(GeneratorParams {
                                    n,
                                    m,
                                    p_max,
                                    r_max,
                                    density,
                                    seed,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}
