//! Unit-suffixed quantities such as `"6.4us"`, `"-1.17 MHz"` or
//! `"4.2e5 /Ohm m"`. Values are returned in SI.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dim {
    Time,
    Frequency,
    Capacitance,
    Inductance,
    Length,
    /// Conductance or admittance per unit length, 1/(Ω·m).
    ConductancePerLength,
    /// Decay rate, 1/s.
    Rate,
    Dimensionless,
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dim::Time => "time (s, ms, us, ns)",
            Dim::Frequency => "frequency (Hz, kHz, MHz, GHz)",
            Dim::Capacitance => "capacitance (F, nF, pF, fF)",
            Dim::Inductance => "inductance (H, uH, nH, pH)",
            Dim::Length => "length (m, mm, um)",
            Dim::ConductancePerLength => "conductance per length (/Ohm m)",
            Dim::Rate => "rate (/s, /ms, /us, /ns)",
            Dim::Dimensionless => "a plain number",
        };
        f.write_str(s)
    }
}

const UNITS: &[(&str, Dim, f64)] = &[
    ("s", Dim::Time, 1.0),
    ("ms", Dim::Time, 1e-3),
    ("us", Dim::Time, 1e-6),
    ("µs", Dim::Time, 1e-6),
    ("μs", Dim::Time, 1e-6),
    ("ns", Dim::Time, 1e-9),
    ("Hz", Dim::Frequency, 1.0),
    ("kHz", Dim::Frequency, 1e3),
    ("MHz", Dim::Frequency, 1e6),
    ("GHz", Dim::Frequency, 1e9),
    ("F", Dim::Capacitance, 1.0),
    ("nF", Dim::Capacitance, 1e-9),
    ("pF", Dim::Capacitance, 1e-12),
    ("fF", Dim::Capacitance, 1e-15),
    ("H", Dim::Inductance, 1.0),
    ("uH", Dim::Inductance, 1e-6),
    ("nH", Dim::Inductance, 1e-9),
    ("pH", Dim::Inductance, 1e-12),
    ("m", Dim::Length, 1.0),
    ("mm", Dim::Length, 1e-3),
    ("um", Dim::Length, 1e-6),
    ("µm", Dim::Length, 1e-6),
    ("/Ohmm", Dim::ConductancePerLength, 1.0),
    ("/(Ohmm)", Dim::ConductancePerLength, 1.0),
    ("/Ohm/m", Dim::ConductancePerLength, 1.0),
    ("/Ωm", Dim::ConductancePerLength, 1.0),
    ("S/m", Dim::ConductancePerLength, 1.0),
    ("/s", Dim::Rate, 1.0),
    ("/ms", Dim::Rate, 1e3),
    ("/us", Dim::Rate, 1e6),
    ("/ns", Dim::Rate, 1e9),
];

/// Splits `text` into its leading number and unit and converts to SI.
pub fn parse_quantity(text: &str) -> Result<(f64, Dim), String> {
    let t = text.trim();
    // Longest prefix that parses as a float; the remainder is the unit.
    let split = (1..=t.len())
        .rev()
        .filter(|&i| t.is_char_boundary(i))
        .find(|&i| t[..i].trim_end().parse::<f64>().is_ok())
        .ok_or_else(|| format!("{text:?} does not start with a number"))?;
    let value: f64 = t[..split].trim_end().parse().expect("checked above");
    if !value.is_finite() {
        return Err(format!("{text:?} is not finite"));
    }
    let unit: String = t[split..].chars().filter(|c| !c.is_whitespace()).collect();
    if unit.is_empty() {
        return Ok((value, Dim::Dimensionless));
    }
    UNITS
        .iter()
        .find(|(u, _, _)| *u == unit)
        .map(|&(_, dim, scale)| (value * scale, dim))
        .ok_or_else(|| format!("unknown unit {unit:?} in {text:?}"))
}

/// Parses `text` and checks that it carries the expected dimension.
pub fn parse_as(text: &str, want: Dim) -> Result<f64, String> {
    let (v, dim) = parse_quantity(text)?;
    if dim != want {
        return Err(format!("{text:?} should be a {want}"));
    }
    Ok(v)
}
