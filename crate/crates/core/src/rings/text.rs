//! Lossless textual serialization of points and matrices.
//!
//! Grammar (one point per line inside matrix files):
//!
//! ```text
//! real        3/8 | -17/32 | 4            (denominator a power of two)
//! p-adic      p5:0,0,3,1                  (digits of X^0, X^1, ...)
//! complex     3/8+1/2i | -1/4-7/8i        (both parts dyadic)
//! quaternion  1/2,1/2,-1/2,1/2            (four dyadic components)
//! laurent     t2:[1,0,1]                  (coefficients of X^-1, X^-2, ...)
//! ```
//!
//! Matrix files start with a header `<ring> <m> <n>` where `<ring>` is one of
//! `real`, `complex`, `quaternion`, `p<prime>`, `t<size>`, followed by `m*n`
//! row-major point lines.

use super::{
    AmbientPoint, IntegerPoint, LaurentSeries, PadicInt, PointMatrix, RingDescriptor, RingError,
    RingKind,
};
use crate::exact::Dyadic;
use std::fmt;
use std::fmt::Write as _;

impl fmt::Display for IntegerPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegerPoint::Real(a) | IntegerPoint::Padic(a) => write!(f, "{a}"),
            IntegerPoint::Gauss { re, im } => {
                if *im >= 0 {
                    write!(f, "{re}+{im}i")
                } else {
                    write!(f, "{re}-{}i", -im)
                }
            }
            IntegerPoint::Hurwitz(h) => {
                let parts: Vec<String> =
                    h.d.iter().map(|c| Dyadic::new(*c as i128, 1).to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
            IntegerPoint::Poly(p) => {
                let cs: Vec<String> = p.coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "[{}]", cs.join(","))
            }
        }
    }
}

pub fn format_point(x: &AmbientPoint) -> String {
    match x {
        AmbientPoint::Real(v) => format!("{v}"),
        AmbientPoint::Padic(v) => {
            let ds: Vec<String> = v.digits().iter().map(|d| d.to_string()).collect();
            format!("p{}:{}", v.p, ds.join(","))
        }
        AmbientPoint::Complex { re, im } => {
            let mut s = format!("{re}");
            if im.num >= 0 {
                let _ = write!(s, "+{im}i");
            } else {
                let _ = write!(s, "-{}i", im.neg());
            }
            s
        }
        AmbientPoint::Quaternion(v) => {
            v.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(",")
        }
        AmbientPoint::Laurent(v) => {
            assert!(v.poly.is_zero(), "matrix entries must lie in the unit ball");
            let cs: Vec<String> = v.tail.iter().map(|c| c.to_string()).collect();
            format!("t{}:[{}]", v.t, cs.join(","))
        }
    }
}

fn parse_dyadic(s: &str) -> Result<Dyadic, RingError> {
    let bad = || RingError::Parse(format!("bad dyadic literal `{s}`"));
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: i128 = num.parse().map_err(|_| bad())?;
        let d: u128 = den.parse().map_err(|_| bad())?;
        if d == 0 || !d.is_power_of_two() {
            return Err(RingError::Parse(format!(
                "bad dyadic literal `{s}`: denominator must be a power of two"
            )));
        }
        Ok(Dyadic::new(n, d.trailing_zeros()))
    } else {
        let n: i128 = s.parse().map_err(|_| bad())?;
        Ok(Dyadic::new(n, 0))
    }
}

pub fn parse_point(ring: &RingDescriptor, s: &str) -> Result<AmbientPoint, RingError> {
    let s = s.trim();
    match ring.kind {
        RingKind::Real => Ok(AmbientPoint::Real(parse_dyadic(s)?)),
        RingKind::Padic => {
            let rest = s
                .strip_prefix(&format!("p{}:", ring.p))
                .ok_or_else(|| RingError::Parse(format!("expected `p{}:` prefix in `{s}`", ring.p)))?;
            let digits = rest
                .split(',')
                .map(|d| d.trim().parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| RingError::Parse(format!("bad digit list in `{s}`")))?;
            for d in &digits {
                if *d as u64 >= ring.p {
                    return Err(RingError::Parse(format!("digit {d} out of range in `{s}`")));
                }
            }
            Ok(AmbientPoint::Padic(PadicInt::from_digits(ring.p, digits)))
        }
        RingKind::Complex => {
            let body = s
                .strip_suffix('i')
                .ok_or_else(|| RingError::Parse(format!("missing trailing `i` in `{s}`")))?;
            // split at the sign of the imaginary part: last '+'/'-' after index 0
            let split = body
                .char_indices()
                .skip(1)
                .filter(|(_, c)| *c == '+' || *c == '-')
                .map(|(i, _)| i)
                .last()
                .ok_or_else(|| RingError::Parse(format!("missing imaginary part in `{s}`")))?;
            let re = parse_dyadic(&body[..split])?;
            let sign = if body.as_bytes()[split] == b'-' { -1 } else { 1 };
            let im = parse_dyadic(&body[split + 1..])?;
            Ok(AmbientPoint::Complex { re, im: im.mul_int(sign) })
        }
        RingKind::Quaternion => {
            let parts: Vec<&str> = s.split(',').collect();
            if parts.len() != 4 {
                return Err(RingError::Parse(format!("expected 4 components in `{s}`")));
            }
            let mut v = [Dyadic::ZERO; 4];
            for (slot, p) in v.iter_mut().zip(parts) {
                *slot = parse_dyadic(p)?;
            }
            Ok(AmbientPoint::Quaternion(v))
        }
        RingKind::Laurent => {
            let rest = s
                .strip_prefix(&format!("t{}:[", ring.t))
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| {
                    RingError::Parse(format!("expected `t{}:[...]` form in `{s}`", ring.t))
                })?;
            let coeffs = if rest.trim().is_empty() {
                Vec::new()
            } else {
                rest.split(',')
                    .map(|c| c.trim().parse::<u64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| RingError::Parse(format!("bad coefficient list in `{s}`")))?
            };
            for c in &coeffs {
                if *c >= ring.t {
                    return Err(RingError::Parse(format!("coefficient {c} out of range in `{s}`")));
                }
            }
            Ok(AmbientPoint::Laurent(LaurentSeries::from_tail(ring.t, coeffs)))
        }
    }
}

pub fn format_ring(ring: &RingDescriptor) -> String {
    match ring.kind {
        RingKind::Real => "real".into(),
        RingKind::Complex => "complex".into(),
        RingKind::Quaternion => "quaternion".into(),
        RingKind::Padic => format!("p{}", ring.p),
        RingKind::Laurent => format!("t{}", ring.t),
    }
}

pub fn parse_ring(token: &str, precision: u32) -> Result<RingDescriptor, RingError> {
    let token = token.trim();
    let ring = match token {
        "real" => RingDescriptor { precision, ..RingDescriptor::real() },
        "complex" => RingDescriptor { precision, ..RingDescriptor::complex() },
        "quaternion" => RingDescriptor { precision, ..RingDescriptor::quaternion() },
        _ if token.starts_with('p') => {
            let p: u64 = token[1..]
                .parse()
                .map_err(|_| RingError::Parse(format!("bad ring token `{token}`")))?;
            RingDescriptor::padic(p, precision)
        }
        _ if token.starts_with('t') => {
            let t: u64 = token[1..]
                .parse()
                .map_err(|_| RingError::Parse(format!("bad ring token `{token}`")))?;
            RingDescriptor::laurent(t, precision)
        }
        _ => return Err(RingError::Parse(format!("unknown ring token `{token}`"))),
    };
    ring.validate()?;
    Ok(ring)
}

/// Serialize a matrix with its `<ring> <m> <n>` header.
pub fn format_matrix(ring: &RingDescriptor, x: &PointMatrix) -> String {
    let mut out = format!("{} {} {}\n", format_ring(ring), x.m, x.n);
    for e in &x.entries {
        out.push_str(&format_point(e));
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str, precision: u32) -> Result<(RingDescriptor, PointMatrix), RingError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| RingError::Parse("empty matrix file".into()))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(RingError::Parse(format!("bad header `{header}`, expected `<ring> <m> <n>`")));
    }
    let ring = parse_ring(toks[0], precision)?;
    let m: usize = toks[1]
        .parse()
        .map_err(|_| RingError::Parse(format!("bad m in `{header}`")))?;
    let n: usize = toks[2]
        .parse()
        .map_err(|_| RingError::Parse(format!("bad n in `{header}`")))?;
    let entries = lines
        .map(|l| parse_point(&ring, l))
        .collect::<Result<Vec<_>, _>>()?;
    if entries.len() != m * n {
        return Err(RingError::Parse(format!(
            "expected {} entries, found {}",
            m * n,
            entries.len()
        )));
    }
    Ok((ring, PointMatrix { m, n, entries }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::sample::sample_uniform;

    #[test]
    fn round_trip_every_ring() {
        for ring in [
            RingDescriptor::real(),
            RingDescriptor::complex(),
            RingDescriptor::quaternion(),
            RingDescriptor::padic(5, 6),
            RingDescriptor::laurent(3, 8),
        ] {
            let m = sample_uniform(&ring, (2, 3), 99);
            let text = format_matrix(&ring, &m);
            let (ring2, m2) = parse_matrix(&text, ring.precision).unwrap();
            assert_eq!(ring, ring2);
            assert_eq!(m, m2);
        }
    }

    #[test]
    fn documented_literals_parse() {
        let ring = RingDescriptor::real();
        assert_eq!(
            parse_point(&ring, "3/8").unwrap(),
            AmbientPoint::Real(Dyadic::new(3, 3))
        );
        let c = RingDescriptor::complex();
        assert_eq!(
            parse_point(&c, "3/8+1/2i").unwrap(),
            AmbientPoint::Complex { re: Dyadic::new(3, 3), im: Dyadic::new(1, 1) }
        );
        assert_eq!(
            parse_point(&c, "-1/4-7/8i").unwrap(),
            AmbientPoint::Complex { re: Dyadic::new(-1, 2), im: Dyadic::new(-7, 3) }
        );
        let q = RingDescriptor::quaternion();
        assert!(parse_point(&q, "1/2,1/2,1/2,1/2").is_ok());
        let p = RingDescriptor::padic(5, 4);
        assert!(parse_point(&p, "p5:0,0,3,1").is_ok());
        assert!(parse_point(&p, "p5:0,0,7,1").is_err());
        let l = RingDescriptor::laurent(2, 3);
        assert!(parse_point(&l, "t2:[1,0,1]").is_ok());
        // non-dyadic denominators are rejected
        assert!(parse_point(&ring, "1/3").is_err());
    }
}
