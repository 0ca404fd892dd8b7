//! JSON configuration documents.
//!
//! Rates are written as strings with a unit: `"0.346 GHz"`, `"13 MHz"`, or
//! `"1.5 rad/ns"` when no short decimal in Hz reproduces the value exactly.
//! Decimal unit prefixes are applied by shifting the exponent in the text, so
//! `"0.346 GHz"` and `"346 MHz"` parse to the same number.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::SystemState;
use crate::error::{Error, Result};
use crate::integrator::IntegrationPlan;
use crate::model::{angular_to_hz, hz_to_angular, Cavity, ModelParams, Resonator, Setup};
use crate::scalar::Scalar;
use crate::scenarios::{Analysis, ScenarioConfig};

/// On-disk form of a [`ScenarioConfig`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub figure: String,
    pub setup: String,
    pub rates: BTreeMap<String, String>,
    #[serde(default = "one")]
    pub zpf_ratio: f64,
    #[serde(default)]
    pub include_weak_backaction: bool,
    /// Nonzero initial entries by channel name; the rest start at zero.
    #[serde(default)]
    pub initial: BTreeMap<String, f64>,
    pub plan: IntegrationPlan<f64>,
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub output_channels: Option<Vec<String>>,
}

fn one() -> f64 {
    1.0
}

const UNITS: [(&str, i32); 4] = [("GHz", 9), ("MHz", 6), ("kHz", 3), ("Hz", 0)];

/// Moves the decimal exponent of a numeric literal by `shift` without any
/// floating-point arithmetic, then parses it.
fn parse_shifted(number: &str, shift: i32) -> Option<f64> {
    let number = number.trim();
    if number.is_empty() || number.contains(|c: char| c.is_whitespace()) {
        return None;
    }
    let (mantissa, exp) = match number.find(['e', 'E']) {
        Some(i) => (&number[..i], number[i + 1..].parse::<i32>().ok()?),
        None => (number, 0),
    };
    // validate the mantissa on its own so "1e5e3" and similar are rejected
    mantissa.parse::<f64>().ok()?;
    format!("{mantissa}e{}", exp + shift).parse::<f64>().ok()
}

/// Parses `"<number> <unit>"` with a frequency unit into Hz.
pub fn parse_rate_hz(text: &str) -> Result<f64> {
    let t = text.trim();
    for (unit, shift) in UNITS {
        if let Some(num) = t.strip_suffix(unit) {
            return parse_shifted(num, shift)
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::validation("rate", format!("cannot parse `{text}`")));
        }
    }
    Err(Error::validation(
        "rate",
        format!("`{text}` lacks a unit (GHz, MHz, kHz, Hz or rad/ns)"),
    ))
}

/// Parses a rate string into rad/ns.
pub fn parse_rate(text: &str) -> Result<f64> {
    let t = text.trim();
    if let Some(num) = t.strip_suffix("rad/ns") {
        return parse_shifted(num, 0)
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::validation("rate", format!("cannot parse `{text}`")));
    }
    parse_rate_hz(t).map(hz_to_angular)
}

/// Plain decimal text for `digits * 10^(exp10 - digits.len() + 1)`, i.e. a
/// scientific number `d.ddd e exp10`.
fn plain_decimal(negative: bool, digits: &str, exp10: i32) -> String {
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let n = digits.len() as i32;
    let mut s = String::new();
    if negative {
        s.push('-');
    }
    if exp10 >= n - 1 {
        s.push_str(digits);
        s.extend(std::iter::repeat_n('0', (exp10 - (n - 1)) as usize));
    } else if exp10 >= 0 {
        let k = (exp10 + 1) as usize;
        s.push_str(&digits[..k]);
        s.push('.');
        s.push_str(&digits[k..]);
    } else {
        s.push_str("0.");
        s.extend(std::iter::repeat_n('0', (-exp10 - 1) as usize));
        s.push_str(digits);
    }
    s
}

/// Shortest `"<decimal> <unit>"` text that parses back to exactly `rate`.
pub fn format_rate(rate: f64) -> String {
    if rate == 0.0 {
        return "0 Hz".into();
    }
    let hz = angular_to_hz(rate);
    if hz.is_finite() && hz != 0.0 {
        let (unit, shift) = UNITS
            .iter()
            .copied()
            .find(|(_, s)| hz.abs() >= 10f64.powi(*s))
            .unwrap_or(("Hz", 0));
        for p in 1..=17usize {
            let sci = format!("{:.*e}", p - 1, hz.abs());
            let (m, e) = sci.split_once('e').expect("scientific format");
            let exp: i32 = e.parse().expect("integer exponent");
            let digits: String = m.chars().filter(|c| c.is_ascii_digit()).collect();
            let text = format!("{} {unit}", plain_decimal(hz < 0.0, &digits, exp - shift));
            if parse_rate(&text).ok().map(f64::to_bits) == Some(rate.to_bits()) {
                return text;
            }
        }
    }
    format!("{rate:?} rad/ns")
}

fn field_error(field: impl Into<String>, e: Error) -> Error {
    let field = field.into();
    match e {
        Error::Validation { message, .. } => Error::Validation { field, message },
        other => Error::Validation {
            field,
            message: other.to_string(),
        },
    }
}

/// Converts a configuration to its document form.
pub fn to_document<T: Scalar>(config: &ScenarioConfig<T>) -> ConfigDocument {
    let p = &config.params;
    let setup = p.setup();
    let rates = setup
        .rate_labels()
        .into_iter()
        .map(|l| {
            let v = p.get(&l).expect("label belongs to setup").as_f64();
            (l, format_rate(v))
        })
        .collect();
    let initial = setup
        .channel_names()
        .into_iter()
        .zip(config.initial.as_slice())
        .filter(|(_, v)| **v != T::zero())
        .map(|(n, v)| (n, v.as_f64()))
        .collect();
    let plan = &config.plan;
    ConfigDocument {
        name: config.name.clone(),
        description: config.description.clone(),
        figure: config.figure.clone(),
        setup: setup.tag().to_string(),
        rates,
        zpf_ratio: p.zpf_ratio().as_f64(),
        include_weak_backaction: p.include_weak_backaction(),
        initial,
        plan: IntegrationPlan {
            t0: plan.t0.as_f64(),
            t1: plan.t1.as_f64(),
            dt: plan.dt.as_f64(),
            sample_stride: plan.sample_stride,
            discard: plan.discard.as_f64(),
            method: plan.method,
            rkf_tolerances: plan.rkf_tolerances.map(|(a, r)| (a.as_f64(), r.as_f64())),
        },
        analyses: config.analyses.clone(),
        output_channels: (config.output_channels != setup.channel_names())
            .then(|| config.output_channels.clone()),
    }
}

/// Pretty-printed JSON text of a configuration.
pub fn serialize_config<T: Scalar>(config: &ScenarioConfig<T>) -> String {
    let mut s = serde_json::to_string_pretty(&to_document(config)).expect("document serializes");
    s.push('\n');
    s
}

fn missing_field(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let end = start + message[start..].find('`')?;
    Some(message[start..end].to_string())
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig<f64>> {
    let doc: ConfigDocument = serde_json::from_str(text).map_err(|e| {
        use serde_json::error::Category;
        match e.classify() {
            Category::Data => Error::Validation {
                field: missing_field(&e.to_string()).unwrap_or_else(|| "document".into()),
                message: e.to_string(),
            },
            _ => Error::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            },
        }
    })?;
    from_document(&doc)
}

/// Validates a document and builds the configuration it describes.
pub fn from_document(doc: &ConfigDocument) -> Result<ScenarioConfig<f64>> {
    let setup = Setup::from_tag(&doc.setup)
        .ok_or_else(|| Error::validation("setup", format!("unknown setup `{}`", doc.setup)))?;
    let labels = setup.rate_labels();
    if let Some(extra) = doc.rates.keys().find(|k| !labels.contains(k)) {
        return Err(Error::validation(
            format!("rates.{extra}"),
            format!("not a rate of {}", setup.tag()),
        ));
    }
    let rate = |label: &str| -> Result<f64> {
        let field = format!("rates.{label}");
        let text = doc
            .rates
            .get(label)
            .ok_or_else(|| Error::validation(field.clone(), "missing"))?;
        parse_rate(text).map_err(|e| field_error(field, e))
    };
    let cavities = setup
        .cavity_names()
        .iter()
        .map(|c| {
            Ok(Cavity {
                delta: rate(&format!("delta_{c}"))?,
                gamma: rate(&format!("gamma_{c}"))?,
                g: rate(&format!("g_{c}"))?,
                eps: rate(&format!("eps_{c}"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let resonators = setup
        .resonator_names()
        .iter()
        .map(|r| {
            Ok(Resonator {
                omega: rate(&format!("omega_{r}"))?,
                damping: rate(&format!("Gamma_{r}"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let couplings = setup
        .coupling_names()
        .iter()
        .map(|k| rate(k))
        .collect::<Result<Vec<_>>>()?;
    let params = ModelParams::new(setup, cavities, resonators, couplings)
        .and_then(|p| p.with_zpf_ratio(doc.zpf_ratio))
        .map_err(|e| match &e {
            Error::NonPositiveRate { label, .. } | Error::NonFiniteRate { label, .. } => field_error(
                if label == "zpf_ratio" {
                    label.clone()
                } else {
                    format!("rates.{label}")
                },
                e.clone(),
            ),
            _ => field_error("rates", e.clone()),
        })?
        .with_weak_backaction(doc.include_weak_backaction);

    let mut initial = SystemState::zeros(setup);
    for (channel, value) in &doc.initial {
        initial
            .set_channel(channel, *value)
            .map_err(|e| field_error(format!("initial.{channel}"), e))?;
    }
    doc.plan.validate().map_err(|e| field_error("plan", e))?;
    let config = ScenarioConfig {
        name: doc.name.clone(),
        description: doc.description.clone(),
        figure: doc.figure.clone(),
        params,
        initial,
        plan: doc.plan.clone(),
        analyses: doc.analyses.clone(),
        output_channels: doc
            .output_channels
            .clone()
            .unwrap_or_else(|| setup.channel_names()),
    };
    config.validate().map_err(|e| match e {
        Error::UnknownChannel(c) => Error::validation("analyses", format!("unknown channel `{c}`")),
        Error::Validation { .. } => e,
        other => field_error("document", other),
    })?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_prefixes_are_exact() {
        assert_eq!(parse_rate("0.346 GHz").unwrap(), parse_rate("346 MHz").unwrap());
        assert_eq!(parse_rate_hz("0.346 GHz").unwrap(), 346e6);
        assert_eq!(parse_rate_hz("1.29MHz").unwrap(), 1.29e6);
        assert_eq!(parse_rate_hz("2.5e-3 GHz").unwrap(), 2.5e6);
        assert_eq!(parse_rate("1.5 rad/ns").unwrap(), 1.5);
        assert!(parse_rate("12").is_err());
        assert!(parse_rate("x MHz").is_err());
        assert!(parse_rate("1e5e3 MHz").is_err());
    }

    #[test]
    fn format_is_short_and_exact() {
        for text in [
            "346 MHz", "13 MHz", "2.8 MHz", "15.4 GHz", "-26 MHz", "1.26 MHz", "1.5 kHz",
        ] {
            let v = parse_rate(text).unwrap();
            assert_eq!(format_rate(v), text);
        }
        for v in [0.0, 1.0, 1e-300, 3.0f64.sqrt(), 1e10] {
            assert_eq!(parse_rate(&format_rate(v)).unwrap().to_bits(), v.to_bits(), "{v}");
        }
    }

    #[test]
    fn plain_decimal_layout() {
        assert_eq!(plain_decimal(false, "346", -1), "0.346");
        assert_eq!(plain_decimal(false, "154", 1), "15.4");
        assert_eq!(plain_decimal(false, "13", 3), "1300");
        assert_eq!(plain_decimal(true, "5", -3), "-0.005");
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_config("{\n  \"name\": \"x\",\n  oops\n}") {
            Err(Error::Syntax { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column >= 3);
            }
            other => panic!("{other:?}"),
        }
    }
}
