//! File formats: CSV for fields, spectra, and dispersion samples, JSON for
//! domains, plus the `a+bi` complex literal used on the command line.
//!
//! Headers are fixed: fields use `m,n,re,im` (`m,n,l,re,im` in three
//! dimensions); spectra use `re(s),im(s)` (`re(s1),im(s1),re(s2),im(s2)` for
//! the quarter-plane) followed by `re(psi_plus),im(psi_plus),re(psi_minus),
//! im(psi_minus),tail_bound`, one row per spectral component; dispersion
//! tables use `re(s),im(s),re(q),im(q),re(upsilon),im(upsilon)`. Domains are
//! JSON objects `{dim, rects}` where each rect is `[m0,m1,n0,n1]` or
//! `[m0,m1,n0,n1,l0,l1]` with inclusive bounds. All output is deterministic.

use std::collections::BTreeSet;

use latwh_core::catalog::SpectralPoint;
use latwh_core::lattice::{Field, LatticeDomain, LatticeError, Node};
use latwh_core::C;
use serde::Deserialize;

use crate::oracle::SpectralSample;

/// Errors from parsing or serializing artifacts.
#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("invalid complex literal {0:?} (expected the form a+bi)")]
    BadComplex(String),
    #[error("line {line}: {message}")]
    BadCsv { line: usize, message: String },
    #[error("{0}")]
    BadJson(#[from] serde_json::Error),
    #[error("domain rect has wrong arity for its dimension")]
    BadRect,
    #[error("spectra samples mix spectral arities")]
    MixedArity,
    #[error("{0}")]
    Lattice(#[from] LatticeError),
}

// ---------------------------------------------------------------------------
// complex literals

/// Parses `a+bi` literals: `1+0.2i`, `-3.5`, `2i`, `i`, `-i`, `1e-3-2e2i`.
pub fn parse_complex(text: &str) -> Result<C, IoError> {
    let t = text.trim();
    let bad = || IoError::BadComplex(text.to_string());
    if t.is_empty() {
        return Err(bad());
    }
    if let Ok(re) = t.parse::<f64>() {
        return Ok(C::new(re, 0.0));
    }
    let Some(body) = t.strip_suffix('i') else {
        return Err(bad());
    };
    let unit_imag = |sign: &str| match sign {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        other => other.parse::<f64>().map_err(|_| bad()),
    };
    // split at the last sign that starts the imaginary part
    for (idx, ch) in body.char_indices().rev() {
        if (ch == '+' || ch == '-') && idx != 0 {
            let prev = body.as_bytes()[idx - 1];
            if prev == b'e' || prev == b'E' {
                continue;
            }
            let re = body[..idx].parse::<f64>().map_err(|_| bad())?;
            return Ok(C::new(re, unit_imag(&body[idx..])?));
        }
    }
    Ok(C::new(0.0, unit_imag(body)?))
}

/// Formats a complex number as an `a+bi` literal.
pub fn format_complex(z: C) -> String {
    if z.im >= 0.0 {
        format!("{}+{}i", z.re, z.im)
    } else {
        format!("{}-{}i", z.re, -z.im)
    }
}

// ---------------------------------------------------------------------------
// field CSV

/// Serializes a field, rows ordered by node.
pub fn field_to_csv(field: &Field) -> String {
    let mut out = String::new();
    if field.dim() == 3 {
        out.push_str("m,n,l,re,im\n");
        for (node, v) in field.iter() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                node.m, node.n, node.l, v.re, v.im
            ));
        }
    } else {
        out.push_str("m,n,re,im\n");
        for (node, v) in field.iter() {
            out.push_str(&format!("{},{},{},{}\n", node.m, node.n, v.re, v.im));
        }
    }
    out
}

/// Reads a field CSV; the header decides the dimension.
pub fn field_from_csv(text: &str) -> Result<Field, IoError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(IoError::BadCsv {
        line: 1,
        message: "missing header".into(),
    })?;
    let three_d = match header.trim() {
        "m,n,re,im" => false,
        "m,n,l,re,im" => true,
        other => {
            return Err(IoError::BadCsv {
                line: 1,
                message: format!("unexpected header {other:?}"),
            })
        }
    };
    let mut field = if three_d {
        Field::new_3d()
    } else {
        Field::new_2d()
    };
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = raw.trim().split(',').collect();
        let expected = if three_d { 5 } else { 4 };
        if cols.len() != expected {
            return Err(IoError::BadCsv {
                line,
                message: format!("expected {expected} columns"),
            });
        }
        let err = |message: String| IoError::BadCsv { line, message };
        let int = |s: &str| {
            s.trim()
                .parse::<i32>()
                .map_err(|e| err(format!("bad integer {s:?}: {e}")))
        };
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| err(format!("bad number {s:?}: {e}")))
        };
        let node = if three_d {
            Node::xyz(int(cols[0])?, int(cols[1])?, int(cols[2])?)
        } else {
            Node::xy(int(cols[0])?, int(cols[1])?)
        };
        let value = C::new(num(cols[expected - 2])?, num(cols[expected - 1])?);
        field.insert(node, value);
    }
    Ok(field)
}

// ---------------------------------------------------------------------------
// spectra and dispersion CSV

/// Serializes spectra samples, one row per spectral component.
pub fn spectra_to_csv(samples: &[SpectralSample]) -> Result<String, IoError> {
    let two = match samples.first().map(|s| s.z) {
        Some(SpectralPoint::Two(..)) => true,
        Some(SpectralPoint::One(..)) => false,
        None => false,
    };
    let mut out = String::new();
    if two {
        out.push_str("re(s1),im(s1),re(s2),im(s2),");
    } else {
        out.push_str("re(s),im(s),");
    }
    out.push_str("re(psi_plus),im(psi_plus),re(psi_minus),im(psi_minus),tail_bound\n");
    for sample in samples {
        let prefix = match (two, sample.z) {
            (false, SpectralPoint::One(s)) => format!("{},{}", s.re, s.im),
            (true, SpectralPoint::Two(s1, s2)) => {
                format!("{},{},{},{}", s1.re, s1.im, s2.re, s2.im)
            }
            _ => return Err(IoError::MixedArity),
        };
        if sample.psi_plus.len() != sample.psi_minus.len() {
            return Err(IoError::MixedArity);
        }
        for (p, m) in sample.psi_plus.iter().zip(&sample.psi_minus) {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                prefix, p.re, p.im, m.re, m.im, sample.tail_bound
            ));
        }
    }
    Ok(out)
}

/// One row of a dispersion table.
#[derive(Clone, Copy, Debug)]
pub struct DispersionSample {
    pub s: C,
    pub q: C,
    pub upsilon: C,
}

/// Serializes dispersion samples.
pub fn dispersion_to_csv(rows: &[DispersionSample]) -> String {
    let mut out = String::from("re(s),im(s),re(q),im(q),re(upsilon),im(upsilon)\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.s.re, r.s.im, r.q.re, r.q.im, r.upsilon.re, r.upsilon.im
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// domain JSON

#[derive(Deserialize)]
struct DomainJson {
    dim: u8,
    rects: Vec<Vec<i32>>,
}

/// Reads a domain from `{dim, rects}` JSON; rect bounds are inclusive.
pub fn domain_from_json(text: &str) -> Result<LatticeDomain, IoError> {
    let parsed: DomainJson = serde_json::from_str(text)?;
    let mut nodes = BTreeSet::new();
    for rect in &parsed.rects {
        match (parsed.dim, rect.as_slice()) {
            (2, &[m0, m1, n0, n1]) => {
                for m in m0..=m1 {
                    for n in n0..=n1 {
                        nodes.insert(Node::xy(m, n));
                    }
                }
            }
            (3, &[m0, m1, n0, n1, l0, l1]) => {
                for m in m0..=m1 {
                    for n in n0..=n1 {
                        for l in l0..=l1 {
                            nodes.insert(Node::xyz(m, n, l));
                        }
                    }
                }
            }
            _ => return Err(IoError::BadRect),
        }
    }
    Ok(LatticeDomain::from_nodes(parsed.dim, nodes)?)
}

/// Writes a domain as `{dim, rects}` JSON, decomposed into maximal runs
/// along the first coordinate.
pub fn domain_to_json(domain: &LatticeDomain) -> String {
    let mut rects: Vec<Vec<i32>> = Vec::new();
    let mut nodes: Vec<Node> = domain.nodes().collect();
    // group runs by (n, l), consecutive in m
    nodes.sort_by_key(|p| (p.n, p.l, p.m));
    let mut run: Option<(Node, Node)> = None;
    let flush = |run: &mut Option<(Node, Node)>, rects: &mut Vec<Vec<i32>>| {
        if let Some((a, b)) = run.take() {
            if domain.dim() == 3 {
                rects.push(vec![a.m, b.m, a.n, b.n, a.l, b.l]);
            } else {
                rects.push(vec![a.m, b.m, a.n, b.n]);
            }
        }
    };
    for node in nodes {
        match &mut run {
            Some((a, b)) if b.n == node.n && b.l == node.l && b.m + 1 == node.m => {
                *b = node;
                let _ = a;
            }
            _ => {
                flush(&mut run, &mut rects);
                run = Some((node, node));
            }
        }
    }
    flush(&mut run, &mut rects);
    serde_json::json!({ "dim": domain.dim(), "rects": rects }).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn complex_literals_parse_and_format() {
        assert_eq!(parse_complex("1+0.2i").unwrap(), c(1.0, 0.2));
        assert_eq!(parse_complex("1-0.2i").unwrap(), c(1.0, -0.2));
        assert_eq!(parse_complex("-3.5").unwrap(), c(-3.5, 0.0));
        assert_eq!(parse_complex("2i").unwrap(), c(0.0, 2.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("1e-3-2e2i").unwrap(), c(1e-3, -2e2));
        assert_eq!(parse_complex(" 1.5 ").unwrap(), c(1.5, 0.0));
        assert!(parse_complex("").is_err());
        assert!(parse_complex("1+2j").is_err());
        assert!(parse_complex("nope").is_err());
        assert_eq!(parse_complex(&format_complex(c(-0.25, 3.5))).unwrap(), c(-0.25, 3.5));
        assert_eq!(parse_complex(&format_complex(c(2.0, -1.0))).unwrap(), c(2.0, -1.0));
    }

    #[test]
    fn field_csv_round_trips() {
        let mut field = Field::new_2d();
        field.insert(Node::xy(-2, 3), c(0.5, -1.25));
        field.insert(Node::xy(4, 0), c(-2.0, 0.0));
        let text = field_to_csv(&field);
        assert!(text.starts_with("m,n,re,im\n"));
        let back = field_from_csv(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.get(Node::xy(-2, 3)).unwrap(), c(0.5, -1.25));
        assert_eq!(back.get(Node::xy(4, 0)).unwrap(), c(-2.0, 0.0));

        let mut field3 = Field::new_3d();
        field3.insert(Node::xyz(1, -1, 2), c(0.0, 7.0));
        let text3 = field_to_csv(&field3);
        assert!(text3.starts_with("m,n,l,re,im\n"));
        let back3 = field_from_csv(&text3).unwrap();
        assert_eq!(back3.get(Node::xyz(1, -1, 2)).unwrap(), c(0.0, 7.0));

        assert!(field_from_csv("x,y\n").is_err());
        assert!(field_from_csv("m,n,re,im\n1,2,3\n").is_err());
    }

    #[test]
    fn spectra_csv_has_fixed_header() {
        let samples = vec![SpectralSample {
            z: SpectralPoint::One(c(0.0, 1.0)),
            psi_plus: vec![c(1.0, 2.0), c(3.0, 4.0)],
            psi_minus: vec![c(5.0, 6.0), c(7.0, 8.0)],
            tail_bound: 1e-9,
        }];
        let text = spectra_to_csv(&samples).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "re(s),im(s),re(psi_plus),im(psi_plus),re(psi_minus),im(psi_minus),tail_bound"
        );
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0,1,1,2,5,6,"));
    }

    #[test]
    fn domain_json_round_trips() {
        let domain = LatticeDomain::build_l_shape((0, 5), (0, 4), (3, 2)).unwrap();
        let text = domain_to_json(&domain);
        let back = domain_from_json(&text).unwrap();
        assert_eq!(back.node_count(), domain.node_count());
        for node in domain.nodes() {
            assert!(back.contains(node));
        }

        let box3 = domain_from_json(r#"{"dim":3,"rects":[[0,2,0,2,0,2]]}"#).unwrap();
        assert_eq!(box3.node_count(), 27);
        assert!(domain_from_json(r#"{"dim":2,"rects":[[0,1,2]]}"#).is_err());
    }
}
