use fullcorr::BoundValue;

/// Six decimals, without a negative zero.
pub fn fixed(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" { "0.000000".into() } else { s }
}

pub fn human_value(v: &BoundValue) -> String {
    match v {
        BoundValue::Integer(i) => i.to_string(),
        BoundValue::Real(x) => fixed(*x),
    }
}

/// Shortest round-trip form for machine output.
pub fn exact_value(v: &BoundValue) -> String {
    match v {
        BoundValue::Integer(i) => i.to_string(),
        BoundValue::Real(x) => format!("{x:?}"),
    }
}

/// Left-aligned columns separated by two spaces.
pub fn columns(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_forms() {
        assert_eq!(fixed(-1e-9), "0.000000");
        assert_eq!(human_value(&BoundValue::Real(2.0 - 2f64.sqrt())), "0.585786");
        assert_eq!(exact_value(&BoundValue::Real(2.0)), "2.0");
        assert_eq!(exact_value(&BoundValue::Integer(8)), "8");
    }

    #[test]
    fn aligned() {
        let t = columns(&["a", "bb"], &[vec!["xyz".into(), "1".into()]]);
        assert_eq!(t, "a    bb\nxyz  1\n");
    }
}
