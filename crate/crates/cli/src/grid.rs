//! `start:stop:step` grids and comma lists.

use std::str::FromStr;

/// Inclusive grid, or a single value when no colon is present.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| -> Result<f64, String> {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{t}` is not a finite number"))
        };
        match parts.as_slice() {
            [v] => Ok(Grid(vec![num(v)?])),
            [a, b, c] => {
                let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
                if step <= 0.0 {
                    return Err(format!("grid step must be positive, got {step}"));
                }
                if stop < start {
                    return Err(format!("grid stop {stop} is below start {start}"));
                }
                if (stop - start) / step > 1e7 {
                    return Err("grid has more than 10⁷ points".into());
                }
                Ok(Grid(mrfuq::numeric::linspace_step(start, stop, step)))
            }
            _ => Err(format!("expected `value` or `start:stop:step`, got `{s}`")),
        }
    }
}

/// Comma-separated reals.
#[derive(Clone, Debug, PartialEq)]
pub struct List(pub Vec<f64>);

impl FromStr for List {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| format!("`{t}` is not a finite number"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(List)
    }
}
