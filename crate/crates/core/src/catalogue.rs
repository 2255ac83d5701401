//! Published bounds for the unified expression, kept as regression fixtures.

use crate::analytic::{diew_bound_f_i, svetlichny_bound_f_i, tsirelson_bound_binary};
use crate::error::{Error, Result};
use crate::report::{BoundKind, BoundReport, BoundValue, Method};
use crate::scenario::Scenario;

/// Closed-form bounds on record for `(scenario, f_name)`. Only `"fI"` is catalogued.
pub fn known_bound_table(scenario: &Scenario, f_name: &str) -> Result<Vec<BoundReport>> {
    if f_name != "fI" {
        return Err(Error::NoCatalogueEntry(format!("f={f_name} at {scenario}")));
    }
    let (n, m, k) = (scenario.parties(), scenario.settings(), scenario.outcomes());
    let closed = |kind, value| BoundReport::new(kind, value, Method::ClosedForm);
    let mut table = Vec::new();
    if n == 2 {
        table.push(closed(BoundKind::Local, BoundValue::Integer(k as i64 - 1)));
    } else {
        let value = svetlichny_bound_f_i(scenario)
            .ok_or_else(|| Error::NoCatalogueEntry(format!("Svetlichny bound overflows at {scenario}")))?;
        table.push(closed(BoundKind::Svetlichny, BoundValue::Integer(value)));
        if k == 2 {
            table.push(closed(BoundKind::Biseparable, BoundValue::Real(diew_bound_f_i(n, m)?)));
        }
    }
    if k == 2 {
        table.push(closed(BoundKind::Tsirelson, BoundValue::Real(tsirelson_bound_binary(n, m)?)));
    }
    Ok(table)
}
