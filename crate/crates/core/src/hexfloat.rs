//! C99-style hexadecimal float literals (`0x1.8p+1`) for bit-exact baselines.

use serde_json::Value;

use crate::error::{Error, Result};

pub fn to_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 && frac == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let digits = format!("{frac:013x}");
    let digits = digits.trim_end_matches('0');
    let dot = if digits.is_empty() { String::new() } else { format!(".{digits}") };
    format!("{sign}0x{lead}{dot}p{e:+}")
}

pub fn from_hex(s: &str) -> Result<f64> {
    let bad = || Error::Format(format!("not a hex float: {s}"));
    match s {
        "nan" => return Ok(f64::NAN),
        "inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    let (neg, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let rest = rest.strip_prefix("0x").ok_or_else(bad)?;
    let (mant, exp) = rest.split_once('p').ok_or_else(bad)?;
    let exp: i64 = exp.parse().map_err(|_| bad())?;
    let (lead, digits) = mant.split_once('.').unwrap_or((mant, ""));
    if digits.len() > 13 {
        return Err(bad());
    }
    let frac = if digits.is_empty() {
        0
    } else {
        u64::from_str_radix(&format!("{digits:0<13}"), 16).map_err(|_| bad())?
    };
    let bits = match lead {
        "0" if frac == 0 => 0,
        "0" if exp == -1022 => frac,
        "1" if (-1022..=1023).contains(&exp) => (((exp + 1023) as u64) << 52) | frac,
        _ => return Err(bad()),
    };
    Ok(f64::from_bits(bits | if neg { 1u64 << 63 } else { 0 }))
}

/// Copy of a JSON value with every non-integer number replaced by its hex literal.
pub fn hex_mirror(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => Value::String(to_hex(n.as_f64().unwrap())),
        Value::Array(a) => Value::Array(a.iter().map(hex_mirror).collect()),
        Value::Object(o) => Value::Object(o.iter().map(|(k, v)| (k.clone(), hex_mirror(v))).collect()),
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_literals() {
        assert_eq!(to_hex(1.0), "0x1p+0");
        assert_eq!(to_hex(3.0), "0x1.8p+1");
        assert_eq!(to_hex(-0.1), "-0x1.999999999999ap-4");
        assert_eq!(to_hex(0.0), "0x0p+0");
        assert_eq!(to_hex(f64::MIN_POSITIVE / 2.0), "0x0.8p-1022");
    }

    proptest! {
        #[test]
        fn round_trips(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            prop_assert_eq!(from_hex(&to_hex(x)).unwrap().to_bits(), bits);
        }
    }
}
