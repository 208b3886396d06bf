//! `o2d norms`: norm tables of the records in an `.o2df` file.

use std::str::FromStr;

use clap::ValueEnum;
use oldroyd_core::lp::norms::NORM_CSV_HEADER;
use oldroyd_core::lp::{
    besov_norm, bmo_seminorm, lp_norm, sobolev_norm, BesovSpec, DyadicPartition, NormRow,
};
use oldroyd_core::spectral::ops::{
    curl, curl_div, div, div_tensor, grad, tensor_gradient, vector_gradient,
};
use oldroyd_core::spectral::{AnyField, Components, FieldStack};

use crate::error::{CliError, CliResult};

/// A requested norm, written `L<p>`, `H<s>`, `Hdot<s>`, `B<s>,<p>,<q>`,
/// `Bdot<s>,<p>,<q>` or `BMO`, with `inf` for an infinite exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormSpec {
    Lebesgue(f64),
    Sobolev { s: f64, homogeneous: bool },
    Besov(BesovSpec),
    Bmo,
}

fn number(raw: &str, spec: &str) -> CliResult<f64> {
    match raw.trim() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse().map_err(|_| {
            CliError::invalid(format!("norm `{spec}`: cannot read `{t}` as a number"))
        }),
    }
}

impl FromStr for NormSpec {
    type Err = CliError;

    fn from_str(spec: &str) -> CliResult<Self> {
        let bad = || {
            CliError::invalid(format!(
                "unknown norm `{spec}`; expected L<p>, H<s>, Hdot<s>, B<s>,<p>,<q>, Bdot<s>,<p>,<q> or BMO"
            ))
        };
        if spec.eq_ignore_ascii_case("bmo") {
            return Ok(NormSpec::Bmo);
        }
        if let Some(rest) = spec.strip_prefix("Bdot").or_else(|| spec.strip_prefix('B')) {
            let homogeneous = spec.starts_with("Bdot");
            let parts: Vec<&str> = rest.split(',').collect();
            let [s, p, q] = parts[..] else {
                return Err(bad());
            };
            let besov = BesovSpec::new(
                number(s, spec)?,
                number(p, spec)?,
                number(q, spec)?,
                homogeneous,
            )?;
            return Ok(NormSpec::Besov(besov));
        }
        if let Some(rest) = spec.strip_prefix("Hdot") {
            return Ok(NormSpec::Sobolev {
                s: number(rest, spec)?,
                homogeneous: true,
            });
        }
        if let Some(rest) = spec.strip_prefix('H') {
            return Ok(NormSpec::Sobolev {
                s: number(rest, spec)?,
                homogeneous: false,
            });
        }
        if let Some(rest) = spec.strip_prefix('L') {
            return Ok(NormSpec::Lebesgue(number(rest, spec)?));
        }
        Err(bad())
    }
}

/// Derivative applied to each record before it is normed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Derivative {
    None,
    /// `∇f`, `∇u` (4 entries) or `∇τ` (6 entries).
    Grad,
    Div,
    Curl,
    CurlDiv,
}

fn stack(f: &impl Components) -> FieldStack {
    let (comps, weights) = f.parts().into_iter().map(|(c, w)| (c.clone(), w)).unzip();
    FieldStack { comps, weights }
}

fn prepare(field: &AnyField, d: Derivative) -> CliResult<FieldStack> {
    let rank_error = || {
        CliError::invalid(format!(
            "derivative {d:?} is not defined on a {} field",
            field.kind_name()
        ))
    };
    Ok(match (d, field) {
        (Derivative::None, AnyField::Scalar(s)) => stack(s),
        (Derivative::None, AnyField::Vector(v)) => stack(v),
        (Derivative::None, AnyField::Tensor(t)) => stack(t),
        (Derivative::Grad, AnyField::Scalar(s)) => stack(&grad(s)),
        (Derivative::Grad, AnyField::Vector(v)) => vector_gradient(v),
        (Derivative::Grad, AnyField::Tensor(t)) => tensor_gradient(t),
        (Derivative::Div, AnyField::Vector(v)) => stack(&div(v)),
        (Derivative::Div, AnyField::Tensor(t)) => stack(&div_tensor(t)),
        (Derivative::Curl, AnyField::Vector(v)) => stack(&curl(v)),
        (Derivative::CurlDiv, AnyField::Tensor(t)) => stack(&curl_div(t)),
        _ => return Err(rank_error()),
    })
}

fn row(id: &str, f: &FieldStack, spec: NormSpec, part: &DyadicPartition) -> CliResult<NormRow> {
    let nan = f64::NAN;
    let base = |kind: &str, s, p, q, homogeneous, value| NormRow {
        field_id: id.to_string(),
        norm_kind: kind.to_string(),
        s,
        p,
        q,
        homogeneous,
        value,
        j_min: None,
        j_max: None,
    };
    Ok(match spec {
        NormSpec::Lebesgue(p) => base("lebesgue", nan, p, nan, false, lp_norm(f, p)?),
        NormSpec::Sobolev { s, homogeneous } => base(
            "sobolev",
            s,
            2.0,
            2.0,
            homogeneous,
            sobolev_norm(f, s, homogeneous),
        ),
        NormSpec::Besov(b) => {
            let v = besov_norm(part, f, b)?;
            NormRow {
                j_min: Some(v.j_min),
                j_max: Some(v.j_max),
                ..base("besov", b.s, b.p, b.q, b.homogeneous, v.value)
            }
        }
        NormSpec::Bmo => {
            let [c] = &f.comps[..] else {
                return Err(CliError::invalid(format!(
                    "BMO needs a scalar field, `{id}` has {} components",
                    f.comps.len()
                )));
            };
            base("bmo", nan, nan, nan, false, bmo_seminorm(&c.to_physical()))
        }
    })
}

/// CSV table, one row per record and norm in request order.
pub fn table(
    records: &[AnyField],
    select: Option<usize>,
    derivative: Derivative,
    specs: &[NormSpec],
) -> CliResult<String> {
    let part = DyadicPartition::default();
    let chosen: Vec<(usize, &AnyField)> = match select {
        Some(i) => vec![(
            i,
            records.get(i).ok_or_else(|| {
                CliError::invalid(format!(
                    "record {i} out of range; the file has {}",
                    records.len()
                ))
            })?,
        )],
        None => records.iter().enumerate().collect(),
    };
    let mut out = format!("{NORM_CSV_HEADER}\n");
    for (i, field) in chosen {
        let f = prepare(field, derivative)?;
        let id = match derivative {
            Derivative::None => format!("{i}:{}", field.kind_name()),
            d => format!(
                "{}({i}:{})",
                format!("{d:?}").to_lowercase(),
                field.kind_name()
            ),
        };
        for &spec in specs {
            out.push_str(&row(&id, &f, spec, &part)?.to_csv());
            out.push('\n');
        }
    }
    Ok(out)
}
