//! Turns flags plus config values into a concrete economy.

use std::path::{Path, PathBuf};

use clap::Args;

use mwp_core::leontief::LeontiefEconomy;
use mwp_core::{parse, CobbDouglasParams, PriceSystem, ProductionFunction};

use crate::config::{parse_assignments, ConfigFile};
use crate::error::CliError;

#[derive(Debug, Clone, Default, Args)]
pub struct EconomyArgs {
    /// Cobb-Douglas parameters, e.g. `A=1,a=0.5,b=0.5`.
    #[arg(long)]
    pub cd: Option<String>,
    /// Production function expression in x1..xn.
    #[arg(long = "fn", value_name = "EXPR")]
    pub function: Option<String>,
    /// Number of inputs of `--fn`.
    #[arg(long)]
    pub arity: Option<usize>,
    /// Prices `p=..,r=..,w=..` or `p=..,w1=..,..,wn=..`.
    #[arg(long)]
    pub prices: Option<String>,
    /// Leontief technology matrix (CSV, one row per good).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Leontief labor coefficients (CSV, one row).
    #[arg(long)]
    pub labor: Option<PathBuf>,
    /// Matrix rows followed by the labor row, in one CSV file.
    #[arg(long)]
    pub leontief: Option<PathBuf>,
    /// Interest rate for the Leontief economy (default 0).
    #[arg(long)]
    pub r: Option<f64>,
    /// Wage for the Leontief economy (default 1).
    #[arg(long)]
    pub w: Option<f64>,
    /// Gross outputs `x1,..,xn` (default all ones).
    #[arg(long)]
    pub x: Option<String>,
}

pub struct Smooth {
    pub function: Box<dyn ProductionFunction>,
    pub cd: Option<CobbDouglasParams>,
    pub prices: PriceSystem,
    /// Input labels, `K, L` for Cobb-Douglas and `x1..xn` otherwise.
    pub inputs: Vec<String>,
}

impl Smooth {
    pub fn n(&self) -> usize {
        self.inputs.len()
    }

    pub fn w(&self) -> &[f64] {
        &self.prices.input_prices
    }

    pub fn p(&self) -> f64 {
        self.prices.output_price
    }

    /// `y` followed by the input labels.
    pub fn vector_labels(&self) -> Vec<String> {
        std::iter::once("y".to_string()).chain(self.inputs.iter().cloned()).collect()
    }

    /// Accepts `K`/`L` for two inputs, otherwise a 1-based index; defaults to
    /// the last input.
    pub fn factor(&self, text: Option<&str>) -> Result<usize, CliError> {
        let n = self.n();
        let Some(text) = text else { return Ok(n - 1) };
        if let Some(i) = self.inputs.iter().position(|l| l.eq_ignore_ascii_case(text)) {
            return Ok(i);
        }
        match text.parse::<usize>() {
            Ok(i) if (1..=n).contains(&i) => Ok(i - 1),
            _ => Err(CliError::Config(format!("factor '{text}' is not one of 1..{n} or an input label"))),
        }
    }
}

pub struct LeontiefSetup {
    pub economy: LeontiefEconomy,
    pub x: Vec<f64>,
}

pub enum Economy {
    Smooth(Smooth),
    Leontief(LeontiefSetup),
}

/// Flag/config lookup with file paths resolved against the config's folder.
pub struct Resolver<'a> {
    pub config: &'a ConfigFile,
    pub base: Option<&'a Path>,
}

impl Resolver<'_> {
    pub fn get<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: std::str::FromStr,
        T::Err: std::fmt::Display,
    {
        self.config.pick(flag, key)
    }

    pub fn path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        if flag.is_some() {
            return flag;
        }
        let raw = PathBuf::from(self.config.get(key)?);
        match self.base {
            Some(base) if raw.is_relative() => Some(base.join(raw)),
            _ => Some(raw),
        }
    }
}

pub fn resolve(args: &EconomyArgs, res: &Resolver) -> Result<Option<Economy>, CliError> {
    let cd = res.get(args.cd.clone(), "cd")?;
    let function = res.get(args.function.clone(), "fn")?;
    let matrix = res.path(args.matrix.clone(), "matrix");
    let labor = res.path(args.labor.clone(), "labor");
    let combined = res.path(args.leontief.clone(), "leontief");
    let leontief_given = matrix.is_some() || labor.is_some() || combined.is_some();
    let kinds = [cd.is_some(), function.is_some(), leontief_given].iter().filter(|b| **b).count();
    if kinds > 1 {
        return Err(CliError::Config("give exactly one of --cd, --fn or Leontief files".into()));
    }
    if let Some(text) = cd {
        let params = parse_cd(&text)?;
        let prices = parse_prices(res.get(args.prices.clone(), "prices")?, 2)?;
        return Ok(Some(Economy::Smooth(Smooth {
            function: Box::new(params),
            cd: Some(params),
            prices,
            inputs: vec!["K".into(), "L".into()],
        })));
    }
    if let Some(text) = function {
        let arity = res
            .get(args.arity, "arity")?
            .ok_or_else(|| CliError::Config("--fn needs --arity".into()))?;
        let expr = parse(&text, arity).map_err(|e| CliError::Config(format!("cannot parse --fn: {e}")))?;
        let prices = parse_prices(res.get(args.prices.clone(), "prices")?, arity)?;
        return Ok(Some(Economy::Smooth(Smooth {
            function: Box::new(expr),
            cd: None,
            prices,
            inputs: (1..=arity).map(|i| format!("x{i}")).collect(),
        })));
    }
    if leontief_given {
        let (a, a0) = match (combined, matrix, labor) {
            (Some(path), None, None) => {
                let mut rows = read_rows(&path)?;
                if rows.len() < 2 {
                    return Err(CliError::Config(format!("{}: need matrix rows and a labor row", path.display())));
                }
                let a0 = rows.pop().expect("checked length");
                (rows, a0)
            }
            (None, Some(m), Some(l)) => {
                let a = read_rows(&m)?;
                let mut l_rows = read_rows(&l)?;
                if l_rows.len() != 1 {
                    return Err(CliError::Config(format!("{}: expected a single labor row", l.display())));
                }
                (a, l_rows.remove(0))
            }
            _ => return Err(CliError::Config("give --matrix with --labor, or --leontief alone".into())),
        };
        let r = res.get(args.r, "r")?.unwrap_or(0.0);
        let w = res.get(args.w, "w")?.unwrap_or(1.0);
        let economy = LeontiefEconomy::new(a, a0, r, w).map_err(|e| CliError::Config(e.to_string()))?;
        let x = match res.get(args.x.clone(), "x")? {
            Some(text) => parse_list(&text)?,
            None => vec![1.0; economy.goods()],
        };
        if x.len() != economy.goods() {
            return Err(CliError::Config(format!("--x has {} entries for {} goods", x.len(), economy.goods())));
        }
        return Ok(Some(Economy::Leontief(LeontiefSetup { economy, x })));
    }
    Ok(None)
}

pub fn parse_cd(text: &str) -> Result<CobbDouglasParams, CliError> {
    let (mut scale, mut a, mut b) = (None, None, None);
    for (k, v) in parse_assignments(text)? {
        match k.as_str() {
            "A" => scale = Some(v),
            "a" => a = Some(v),
            "b" => b = Some(v),
            other => return Err(CliError::Config(format!("unknown Cobb-Douglas parameter '{other}'"))),
        }
    }
    let (Some(scale), Some(a), Some(b)) = (scale, a, b) else {
        return Err(CliError::Config("Cobb-Douglas needs A, a and b".into()));
    };
    CobbDouglasParams::new(scale, a, b).map_err(|e| CliError::Config(e.to_string()))
}

pub fn parse_prices(text: Option<String>, n: usize) -> Result<PriceSystem, CliError> {
    let text = text.ok_or_else(|| CliError::Config("missing --prices".into()))?;
    let mut p = None;
    let mut w: Vec<Option<f64>> = vec![None; n];
    for (k, v) in parse_assignments(&text)? {
        let slot = match k.as_str() {
            "p" => {
                p = Some(v);
                continue;
            }
            "r" if n == 2 => 0,
            "w" if n == 2 => 1,
            "w" if n == 1 => 0,
            other => match other.strip_prefix('w').and_then(|i| i.parse::<usize>().ok()) {
                Some(i) if (1..=n).contains(&i) => i - 1,
                _ => return Err(CliError::Config(format!("unknown price '{other}' for {n} inputs"))),
            },
        };
        w[slot] = Some(v);
    }
    let p = p.ok_or_else(|| CliError::Config("prices need an output price p".into()))?;
    let w: Option<Vec<f64>> = w.into_iter().collect();
    let w = w.ok_or_else(|| CliError::Config(format!("prices need all {n} input prices")))?;
    PriceSystem::new(p, w).map_err(|e| CliError::Config(e.to_string()))
}

pub fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Config(format!("'{}' is not a number", s.trim()))))
        .collect()
}

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let row = record
            .iter()
            .map(|cell| {
                cell.parse::<f64>()
                    .map_err(|_| CliError::Config(format!("{}: '{cell}' is not a number", path.display())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if !row.is_empty() {
            rows.push(row);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prices_for_two_inputs() {
        let p = parse_prices(Some("p=2,r=1,w=3".into()), 2).unwrap();
        assert_eq!((p.output_price, p.input_prices.clone()), (2.0, vec![1.0, 3.0]));
        let q = parse_prices(Some("p=2,w1=1,w2=3".into()), 2).unwrap();
        assert_eq!(p, q);
        assert!(parse_prices(Some("p=2,r=1".into()), 2).is_err());
        assert!(parse_prices(Some("r=1,w=1".into()), 2).is_err());
        assert!(parse_prices(Some("p=1,w4=1".into()), 3).is_err());
        assert!(parse_prices(None, 2).is_err());
    }

    #[test]
    fn cd_parameters() {
        let c = parse_cd("A=1.5,a=0.3,b=0.6").unwrap();
        assert_eq!((c.scale, c.a, c.b), (1.5, 0.3, 0.6));
        assert!(parse_cd("A=1,a=0.5").is_err());
        assert!(parse_cd("A=1,a=0.5,b=0.5,c=1").is_err());
    }

    #[test]
    fn factor_names() {
        let s = Smooth {
            function: Box::new(parse_cd("A=1,a=0.5,b=0.5").unwrap()),
            cd: None,
            prices: parse_prices(Some("p=2,r=1,w=1".into()), 2).unwrap(),
            inputs: vec!["K".into(), "L".into()],
        };
        assert_eq!(s.factor(None).unwrap(), 1);
        assert_eq!(s.factor(Some("K")).unwrap(), 0);
        assert_eq!(s.factor(Some("2")).unwrap(), 1);
        assert!(s.factor(Some("3")).is_err());
        assert!(s.factor(Some("Z")).is_err());
    }

    #[test]
    fn one_economy_only() {
        let args = EconomyArgs {
            cd: Some("A=1,a=0.5,b=0.5".into()),
            function: Some("x1".into()),
            ..Default::default()
        };
        let cfg = ConfigFile::default();
        let res = Resolver { config: &cfg, base: None };
        assert!(matches!(resolve(&args, &res), Err(CliError::Config(_))));
    }
}
