use std::fs;

use fullcorr::{BellExpression, CoefficientFunction, Scenario};

use crate::CliError;

/// Named coefficient functions understood by `--f`.
#[derive(Debug, Clone, PartialEq)]
pub enum FSpec {
    FI,
    Mabk,
    Cosine(f64),
    Product(Vec<f64>),
    File(String),
}

impl FSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = |why: &str| CliError::Usage(format!("--f {text}: {why}"));
        match text {
            "fI" => return Ok(FSpec::FI),
            "mabk" => return Ok(FSpec::Mabk),
            _ => {}
        }
        if let Some(d) = text.strip_prefix("cosine:") {
            let delta: f64 = d.parse().map_err(|_| bad("delta is not a number"))?;
            if !delta.is_finite() {
                return Err(bad("delta is not finite"));
            }
            return Ok(FSpec::Cosine(delta));
        }
        if let Some(v) = text.strip_prefix("g:") {
            let g = v
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad("g entries must be numbers"))?;
            return Ok(FSpec::Product(g));
        }
        if let Some(p) = text.strip_prefix("file:") {
            return Ok(FSpec::File(p.to_string()));
        }
        Err(bad("expected fI, mabk, cosine:DELTA, g:v0,v1,... or file:PATH"))
    }

    /// Catalogue name, when the selection has catalogued bounds.
    pub fn catalogue_name(&self) -> Option<&'static str> {
        matches!(self, FSpec::FI).then_some("fI")
    }

    pub fn is_f_i(&self) -> bool {
        matches!(self, FSpec::FI)
    }

    pub fn expression(&self, scenario: Scenario) -> Result<BellExpression, CliError> {
        let (m, k) = (scenario.settings(), scenario.outcomes());
        let f = match self {
            FSpec::FI => CoefficientFunction::f_i(m, k)?,
            FSpec::Mabk => CoefficientFunction::mabk(m, k)?,
            FSpec::Cosine(delta) => CoefficientFunction::cosine(m, k, *delta)?,
            FSpec::Product(g) => {
                if g.len() != m {
                    return Err(CliError::Usage(format!("g has {} entries, m={m}", g.len())));
                }
                CoefficientFunction::product(g, k)?
            }
            FSpec::File(path) => return expression_from_file(path, scenario),
        };
        Ok(BellExpression::general(scenario, f)?)
    }
}

/// A file holds either an expression document or a bare `m x k` coefficient table.
fn expression_from_file(path: &str, scenario: Scenario) -> Result<BellExpression, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
    if let Ok(expr) = BellExpression::from_json(&text) {
        if expr.scenario() != scenario {
            return Err(CliError::Usage(format!(
                "{path} describes {}, arguments ask for {scenario}",
                expr.scenario()
            )));
        }
        return Ok(expr);
    }
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{path}: not an expression or coefficient table: {e}")))?;
    Ok(BellExpression::general(scenario, CoefficientFunction::new(rows)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_selections() {
        assert_eq!(FSpec::parse("fI").unwrap(), FSpec::FI);
        assert_eq!(FSpec::parse("cosine:0.5").unwrap(), FSpec::Cosine(0.5));
        assert_eq!(FSpec::parse("g:1,1,0").unwrap(), FSpec::Product(vec![1.0, 1.0, 0.0]));
        assert!(FSpec::parse("g:1,x").is_err());
        assert!(FSpec::parse("cosine:nan").is_err());
        assert!(FSpec::parse("fII").is_err());
    }

    #[test]
    fn product_length_checked() {
        let sc = Scenario::new(2, 3, 2).unwrap();
        assert!(FSpec::parse("g:1,1").unwrap().expression(sc).is_err());
        assert!(FSpec::parse("g:1,1,0").unwrap().expression(sc).is_ok());
    }
}
