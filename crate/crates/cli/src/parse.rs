//! Parsers for the compact command-line grammars.

use std::f64::consts::PI;
use std::ffi::OsString;

use teleport_core::channels::{BobNoise, ChannelNoise, PerOperation};
use teleport_core::protocol::{AverageMeasure, MeasurementJitter};

/// Radians, either numeric or in multiples of π: `0.3`, `pi/4`, `3pi/8`, `0.5*pi`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let t = text.trim().to_ascii_lowercase();
    let value = if let Some(idx) = t.find("pi") {
        let (head, tail) = (t[..idx].trim_end_matches('*'), &t[idx + 2..]);
        let numer = if head.is_empty() {
            1.0
        } else {
            head.parse::<f64>()
                .map_err(|_| format!("bad angle `{text}`"))?
        };
        let denom = match tail.strip_prefix('/') {
            Some(d) => d
                .parse::<f64>()
                .map_err(|_| format!("bad angle `{text}`"))?,
            None if tail.is_empty() => 1.0,
            None => return Err(format!("bad angle `{text}`")),
        };
        numer * PI / denom
    } else {
        t.parse::<f64>()
            .map_err(|_| format!("bad angle `{text}`"))?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("angle `{text}` is not finite"))
    }
}

fn parse_number(text: &str, what: &str) -> Result<f64, String> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| format!("bad {what} `{text}`"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{what} `{text}` is not finite"))
    }
}

fn split_kind(text: &str) -> (&str, Option<&str>) {
    match text.split_once(':') {
        Some((k, rest)) => (k.trim(), Some(rest)),
        None => (text.trim(), None),
    }
}

/// `pure | werner:p | bitflip:p | signflip:p | depol:p`
pub fn parse_channel(text: &str) -> Result<ChannelNoise, String> {
    let (kind, arg) = split_kind(text);
    let p = || -> Result<f64, String> {
        parse_number(
            arg.ok_or_else(|| format!("channel `{kind}` needs a probability"))?,
            "channel probability",
        )
    };
    let noise = match kind {
        "pure" | "none" => {
            if arg.is_some() {
                return Err("channel `pure` takes no parameter".into());
            }
            ChannelNoise::Pure
        }
        "werner" => ChannelNoise::Werner(p()?),
        "bitflip" => ChannelNoise::BitFlipEach(p()?),
        "signflip" => ChannelNoise::SignFlipEach(p()?),
        "depol" => ChannelNoise::DepolarizeEach(p()?),
        other => return Err(format!("unknown channel kind `{other}`")),
    };
    noise.validate().map_err(|e| e.to_string())?;
    Ok(noise)
}

/// `ideal | depol:pI,pz,px,py | bitflip:… | signflip:…`; one value applies to
/// all four operations.
pub fn parse_bob(text: &str) -> Result<BobNoise, String> {
    let (kind, arg) = split_kind(text);
    let probs = || -> Result<PerOperation, String> {
        let arg = arg.ok_or_else(|| format!("bob noise `{kind}` needs probabilities"))?;
        let values = arg
            .split(',')
            .map(|v| parse_number(v, "probability"))
            .collect::<Result<Vec<_>, _>>()?;
        match values[..] {
            [p] => Ok(PerOperation::uniform(p)),
            [i, z, x, y] => Ok(PerOperation::new(i, z, x, y)),
            _ => Err(format!("bob noise `{kind}` needs 1 or 4 probabilities")),
        }
    };
    let noise = match kind {
        "ideal" | "none" => {
            if arg.is_some() {
                return Err("bob noise `ideal` takes no parameter".into());
            }
            BobNoise::Ideal
        }
        "depol" => BobNoise::DepolarizingPerOp(probs()?),
        "bitflip" => BobNoise::BitFlipPerOp(probs()?),
        "signflip" => BobNoise::SignFlipPerOp(probs()?),
        other => return Err(format!("unknown bob noise kind `{other}`")),
    };
    noise.validate().map_err(|e| e.to_string())?;
    Ok(noise)
}

pub fn parse_measure(text: &str) -> Result<AverageMeasure, String> {
    match text.trim() {
        "uniform-gamma" | "uniform" => Ok(AverageMeasure::UniformGamma),
        "haar" => Ok(AverageMeasure::Haar),
        other => Err(format!("unknown measure `{other}`")),
    }
}

pub fn measure_name(measure: AverageMeasure) -> &'static str {
    match measure {
        AverageMeasure::UniformGamma => "uniform-gamma",
        AverageMeasure::Haar => "haar",
    }
}

/// `s_phi,s_phip,phi0,phip0`
pub fn parse_jitter(text: &str) -> Result<MeasurementJitter, String> {
    let parts: Vec<&str> = text.split(',').collect();
    let [s, sp, phi0, phi0p] = parts[..] else {
        return Err(format!("jitter `{text}` needs four comma-separated values"));
    };
    MeasurementJitter::new(
        parse_number(s, "jitter sigma")?,
        parse_number(sp, "jitter sigma")?,
        parse_angle(phi0)?,
        parse_angle(phi0p)?,
    )
    .map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * k as f64 / last
                }
            })
            .collect()
    }
}

fn parse_range_parts(parts: &[&str], text: &str) -> Result<Range, String> {
    let [start, stop, steps] = parts[..] else {
        return Err(format!("range `{text}` must be start:stop:steps"));
    };
    let steps: usize = steps
        .trim()
        .parse()
        .map_err(|_| format!("bad step count in `{text}`"))?;
    if steps < 2 {
        return Err(format!("range `{text}` needs at least 2 steps"));
    }
    Ok(Range {
        start: parse_angle(start)?,
        stop: parse_angle(stop)?,
        steps,
    })
}

/// `start:stop:steps`
pub fn parse_range(text: &str) -> Result<Range, String> {
    parse_range_parts(&text.split(':').collect::<Vec<_>>(), text)
}

/// Which noise or angle parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    /// Probability of the resource noise.
    Channel,
    /// One of Bob's per-operation probabilities.
    Bob(BobSlot),
    /// `p_x = p_y = p_z` together.
    BobXyz,
    /// The unprimed measurement angle.
    Phi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BobSlot {
    I,
    Z,
    X,
    Y,
}

impl ParamKind {
    pub fn name(&self) -> &'static str {
        match self {
            ParamKind::Channel => "channel",
            ParamKind::Bob(BobSlot::I) => "bob-pI",
            ParamKind::Bob(BobSlot::Z) => "bob-pz",
            ParamKind::Bob(BobSlot::X) => "bob-px",
            ParamKind::Bob(BobSlot::Y) => "bob-py",
            ParamKind::BobXyz => "bob-pxyz",
            ParamKind::Phi => "phi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSweep {
    pub kind: ParamKind,
    pub range: Range,
}

/// `kind:start:stop:steps` with kind one of `channel`, `bob-pI`, `bob-pz`,
/// `bob-px`, `bob-py`, `bob-pxyz`, `phi`.
pub fn parse_param(text: &str) -> Result<ParamSweep, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let Some((kind, rest)) = parts.split_first() else {
        return Err(format!("bad parameter sweep `{text}`"));
    };
    let kind = match kind.trim() {
        "channel" => ParamKind::Channel,
        "bob-pI" | "bob-pi" => ParamKind::Bob(BobSlot::I),
        "bob-pz" => ParamKind::Bob(BobSlot::Z),
        "bob-px" => ParamKind::Bob(BobSlot::X),
        "bob-py" => ParamKind::Bob(BobSlot::Y),
        "bob-pxyz" => ParamKind::BobXyz,
        "phi" => ParamKind::Phi,
        other => return Err(format!("unknown sweep parameter `{other}`")),
    };
    Ok(ParamSweep {
        kind,
        range: parse_range_parts(rest, text)?,
    })
}

/// Turns a flat `key = value` file into flag tokens. Blank lines and lines
/// starting with `#` are skipped; `key = true` becomes a bare switch.
pub fn config_tokens(text: &str, switches: &[&str]) -> Result<Vec<OsString>, String> {
    let mut tokens = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("config line {}: expected `key = value`", n + 1));
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim().trim_matches('"');
        if key.is_empty() {
            return Err(format!("config line {}: empty key", n + 1));
        }
        if key == "config" {
            return Err(format!(
                "config line {}: nested config files are not supported",
                n + 1
            ));
        }
        if switches.contains(&key.as_str()) {
            match value {
                "true" | "yes" | "1" => tokens.push(format!("--{key}").into()),
                "false" | "no" | "0" => {}
                other => {
                    return Err(format!(
                        "config line {}: `{key}` expects true/false, got `{other}`",
                        n + 1
                    ))
                }
            }
        } else {
            tokens.push(format!("--{key}").into());
            tokens.push(value.into());
        }
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0.3").unwrap(), 0.3);
        assert_eq!(parse_angle("pi/4").unwrap(), FRAC_PI_4);
        assert_eq!(parse_angle("PI").unwrap(), PI);
        assert!((parse_angle("3pi/8").unwrap() - 3.0 * PI / 8.0).abs() < 1e-15);
        assert!((parse_angle("0.5*pi").unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(parse_angle("pie").is_err());
        assert!(parse_angle("inf").is_err());
    }

    #[test]
    fn noise_grammar() {
        assert_eq!(parse_channel("pure").unwrap(), ChannelNoise::Pure);
        assert_eq!(
            parse_channel("werner:0.5").unwrap(),
            ChannelNoise::Werner(0.5)
        );
        assert!(parse_channel("werner").is_err());
        assert!(parse_channel("werner:1.5").is_err());
        assert!(parse_channel("foo:0.1").is_err());
        assert_eq!(
            parse_bob("depol:0,0.075,0.1,0.2").unwrap(),
            BobNoise::DepolarizingPerOp(PerOperation::new(0.0, 0.075, 0.1, 0.2))
        );
        assert_eq!(
            parse_bob("signflip:0.1").unwrap(),
            BobNoise::SignFlipPerOp(PerOperation::uniform(0.1))
        );
        assert!(parse_bob("depol:0.8").is_err());
        assert!(parse_bob("depol:0.1,0.2").is_err());
    }

    #[test]
    fn ranges_hit_endpoints() {
        let r = parse_range("0:pi/4:5").unwrap();
        let v = r.values();
        assert_eq!(v.len(), 5);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[4], FRAC_PI_4);
        assert!(parse_range("0:1:1").is_err());
        let p = parse_param("bob-pz:0:0.75:4").unwrap();
        assert_eq!(p.kind, ParamKind::Bob(BobSlot::Z));
        assert!(parse_param("bob-q:0:1:3").is_err());
    }

    #[test]
    fn config_file_tokens() {
        let text = "# comment\ntheta = pi/8\nbob = depol:0,0.1,0,0\noptimal = true\nfixed_angles = false\n";
        let tokens = config_tokens(text, &["optimal", "fixed-angles"]).unwrap();
        let strings: Vec<String> = tokens
            .into_iter()
            .map(|t| t.into_string().unwrap())
            .collect();
        assert_eq!(
            strings,
            ["--theta", "pi/8", "--bob", "depol:0,0.1,0,0", "--optimal"]
        );
        assert!(config_tokens("theta 0.3", &[]).is_err());
    }
}
