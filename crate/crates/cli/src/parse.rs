//! Parsers for command-line values that are not plain numbers.

use rosenblatt::fracint::{Atom, SmoothTestFunction};

/// `coef,center,width[,degree]` atoms separated by `;`, or a JSON file holding a test function
/// (or a list of them for panels).
pub fn xi(s: &str) -> Result<SmoothTestFunction, String> {
    if s.ends_with(".json") {
        let text = std::fs::read_to_string(s).map_err(|e| format!("{s}: {e}"))?;
        return serde_json::from_str(&text).map_err(|e| format!("{s}: {e}"));
    }
    let mut terms = Vec::new();
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let v: Vec<&str> = part.split(',').map(str::trim).collect();
        if v.len() != 3 && v.len() != 4 {
            return Err(format!("atom `{part}` needs coef,center,width[,degree]"));
        }
        let num = |x: &str| x.parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
        let degree = if v.len() == 4 { v[3].parse::<u32>().map_err(|e| format!("`{}`: {e}", v[3]))? } else { 0 };
        let width = num(v[2])?;
        if !(width > 0.0) {
            return Err(format!("atom width must be positive, got {width}"));
        }
        terms.push(Atom { coef: num(v[0])?, center: num(v[1])?, width, degree });
    }
    Ok(SmoothTestFunction::from_atoms(terms))
}

/// A panel of test functions: `default`, a JSON file with a list, or atoms with panels split by `|`.
pub fn xi_panel(s: &str) -> Result<Vec<SmoothTestFunction>, String> {
    if s == "default" {
        return Ok(rosenblatt::stransform::default_xi_panel());
    }
    if s.ends_with(".json") {
        let text = std::fs::read_to_string(s).map_err(|e| format!("{s}: {e}"))?;
        return serde_json::from_str(&text).map_err(|e| format!("{s}: {e}"));
    }
    s.split('|').map(xi).collect()
}

/// `lo:hi:n` (n evenly spaced points including both ends) or a comma list.
pub fn grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let lo: f64 = parts[0].parse().map_err(|e| format!("`{}`: {e}", parts[0]))?;
        let hi: f64 = parts[1].parse().map_err(|e| format!("`{}`: {e}", parts[1]))?;
        let n: usize = parts[2].parse().map_err(|e| format!("`{}`: {e}", parts[2]))?;
        if n == 0 {
            return Err("grid needs at least one point".into());
        }
        if n == 1 {
            return Ok(vec![lo]);
        }
        return Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect());
    }
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_and_grids() {
        let f = xi("1,0.5,0.2; -0.3,0.1,0.4,2").unwrap();
        assert_eq!(f.terms.len(), 2);
        assert_eq!(f.terms[1].degree, 2);
        assert!(xi("1,0.5").is_err());
        assert!(xi("1,0.5,-1").is_err());
        assert_eq!(grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(grid("0.2,0.5").unwrap(), vec![0.2, 0.5]);
        assert_eq!(xi_panel("default").unwrap().len(), 3);
        assert_eq!(xi_panel("1,0,1|2,0,1").unwrap().len(), 2);
    }
}
