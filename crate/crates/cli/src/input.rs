use std::path::Path;

use anyhow::{Context, Result};
use dcoset::{ContingencyTable, Partition};

use crate::InvalidConfig;

pub fn parse_partition(field: &'static str, s: &str) -> Result<Partition> {
    let parts =
        s.split(',').map(|p| p.trim().parse::<usize>()).collect::<std::result::Result<Vec<_>, _>>().map_err(|e| {
            InvalidConfig::new(field, format!("expected comma-separated positive integers, got {s:?}: {e}"))
        })?;
    Ok(Partition::new(parts)?)
}

pub fn parse_list<T: std::str::FromStr>(field: &'static str, s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<T>().map_err(|e| InvalidConfig::new(field, format!("{p:?}: {e}")).into()))
        .collect()
}

/// Inline JSON (`[[1,1],[1,0]]`) or the path of a CSV file with one row per line.
pub fn parse_entries(s: &str) -> Result<Vec<Vec<u32>>> {
    let trimmed = s.trim();
    if trimmed.starts_with('[') {
        return serde_json::from_str(trimmed)
            .map_err(|e| InvalidConfig::new("table", format!("invalid inline JSON table: {e}")).into());
    }
    let text = std::fs::read_to_string(Path::new(trimmed)).with_context(|| format!("reading table file {trimmed}"))?;
    text.lines().map(str::trim).filter(|l| !l.is_empty()).map(|l| parse_list::<u32>("table", l)).collect()
}

fn margins(entries: &[Vec<u32>]) -> (Vec<usize>, Vec<usize>) {
    let rows = entries.iter().map(|r| r.iter().map(|&v| v as usize).sum()).collect();
    let cols = (0..entries.first().map_or(0, Vec::len))
        .map(|j| entries.iter().map(|r| r.get(j).copied().unwrap_or(0) as usize).sum())
        .collect();
    (rows, cols)
}

/// The table from `--table`, or the unique table with margins `--lambda`, `--mu`.
pub fn resolve_table(lambda: Option<&str>, mu: Option<&str>, table: Option<&str>) -> Result<ContingencyTable> {
    let lambda = lambda.map(|s| parse_partition("lambda", s)).transpose()?;
    let mu = mu.map(|s| parse_partition("mu", s)).transpose()?;
    if let Some(src) = table {
        let entries = parse_entries(src)?;
        let (rows, cols) = margins(&entries);
        let lambda = match lambda {
            Some(l) => l,
            None => Partition::new(rows)?,
        };
        let mu = match mu {
            Some(m) => m,
            None => Partition::new(cols)?,
        };
        return Ok(ContingencyTable::new(lambda, mu, entries)?);
    }
    let (Some(lambda), Some(mu)) = (lambda, mu) else {
        return Err(InvalidConfig::new("table", "pass --table, or both --lambda and --mu").into());
    };
    let mut tables = ContingencyTable::enumerate(&lambda, &mu)?;
    if tables.len() != 1 {
        return Err(InvalidConfig::new(
            "table",
            format!("{} tables have margins {lambda} x {mu}; pass --table to pick one", tables.len()),
        )
        .into());
    }
    Ok(tables.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_and_derived_margins() {
        let t = resolve_table(None, None, Some("[[1,1],[1,0]]")).unwrap();
        assert_eq!(t.lambda().parts(), &[2, 1]);
        assert_eq!(t.mu().parts(), &[2, 1]);
        let t = resolve_table(Some("5"), Some("5"), None).unwrap();
        assert_eq!(t.rows(), vec![vec![5]]);
        assert!(resolve_table(Some("2,1"), Some("2,1"), None).is_err());
        assert!(resolve_table(Some("2,x"), Some("3"), None).is_err());
    }
}
