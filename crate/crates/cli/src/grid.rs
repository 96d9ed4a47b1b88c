use serde::Deserialize;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Settling-time grid `min:max:points[:linear|log]`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err("grid bounds must be finite".into());
        }
        if self.min > self.max {
            return Err(format!("grid min {} exceeds max {}", self.min, self.max));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err("log grids need a positive minimum".into());
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        match n {
            0 => Vec::new(),
            1 => vec![self.min],
            _ => (0..n)
                .map(|i| {
                    if i == n - 1 {
                        return self.max;
                    }
                    let t = i as f64 / (n - 1) as f64;
                    match self.spacing {
                        Spacing::Linear => self.min + t * (self.max - self.min),
                        Spacing::Log => (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp(),
                    }
                })
                .collect(),
        }
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(format!("grid `{s}` must look like min:max:points[:linear|log]"));
        }
        let num = |p: &str| p.parse::<f64>().map_err(|e| format!("bad grid bound `{p}`: {e}"));
        let points = parts[2].parse::<usize>().map_err(|e| format!("bad grid point count `{}`: {e}", parts[2]))?;
        let spacing = match parts.get(3) {
            None | Some(&"linear") => Spacing::Linear,
            Some(&"log") => Spacing::Log,
            Some(other) => return Err(format!("unknown grid spacing `{other}`")),
        };
        let grid = GridSpec { min: num(parts[0])?, max: num(parts[1])?, points, spacing };
        grid.validate()?;
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_expands() {
        let g: GridSpec = "2:8:3".parse().unwrap();
        assert_eq!(g.values(), vec![2.0, 5.0, 8.0]);
        let g: GridSpec = "1:100:3:log".parse().unwrap();
        let v = g.values();
        assert!((v[1] - 10.0).abs() < 1e-12);
        assert_eq!(v[2], 100.0);
    }

    #[test]
    fn empty_and_single() {
        assert!("1:2:0".parse::<GridSpec>().unwrap().values().is_empty());
        assert_eq!("3:4:1".parse::<GridSpec>().unwrap().values(), vec![3.0]);
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["1:2", "a:2:3", "3:2:4", "1:2:3:cubic", "0:2:3:log", "1:2:-1"] {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
    }
}
