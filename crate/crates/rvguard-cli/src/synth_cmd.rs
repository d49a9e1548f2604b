//! Synthetic data generators: counter traces and opcode corpora.

use crate::{input_error, out_writer, require_out, Failure, OrFail};
use anyhow::anyhow;
use rvguard::synth::{
    disjoint_family_specs, gen_opcode_corpus, gen_phase_trace, inject_anomaly, write_corpus_dir,
    AnomalyKind, AnomalySpec, FamilySpec, PhaseSpec,
};
use rvguard::trace::{default_events, EventId};
use std::path::PathBuf;

/// Splits a `key=value,key=value` option string into pairs.
fn key_values(spec: &str, what: &str) -> Result<Vec<(String, String)>, Failure> {
    spec.split(',')
        .map(str::trim)
        .filter(|part| !part.is_empty())
        .map(|part| {
            part.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| {
                    input_error(anyhow!("{what}: expected key=value, got {part:?}"))
                })
        })
        .collect()
}

/// Parses a colon-separated rate list, e.g. `1000:50:20`.
fn parse_rates(s: &str, what: &str) -> Result<Vec<f64>, Failure> {
    s.split(':')
        .map(|r| {
            r.trim().parse::<f64>().map_err(|e| input_error(anyhow!("{what}: rate {r:?}: {e}")))
        })
        .collect()
}

fn parse_num<T: std::str::FromStr>(v: &str, key: &str) -> Result<T, Failure>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e| input_error(anyhow!("{key}={v:?}: {e}")))
}

/// Parses one `--phase rates=R0:R1:..,dur=N[,jitter=J]` flag.
fn parse_phase(spec: &str, n_events: usize) -> Result<PhaseSpec, Failure> {
    let mut rates: Option<Vec<f64>> = None;
    let mut duration: Option<usize> = None;
    let mut jitter = 0.0f64;
    for (key, value) in key_values(spec, "--phase")? {
        match key.as_str() {
            "rates" => rates = Some(parse_rates(&value, "--phase")?),
            "dur" => duration = Some(parse_num(&value, "dur")?),
            "jitter" => jitter = parse_num(&value, "jitter")?,
            other => return Err(input_error(anyhow!("--phase: unknown key {other:?}"))),
        }
    }
    let rates = rates.ok_or_else(|| input_error(anyhow!("--phase: missing rates=")))?;
    let duration = duration.ok_or_else(|| input_error(anyhow!("--phase: missing dur=")))?;
    if rates.len() != n_events {
        return Err(input_error(anyhow!(
            "--phase: {} rates for {} events",
            rates.len(),
            n_events
        )));
    }
    if rates.iter().any(|&r| r.is_nan() || r < 0.0) {
        return Err(input_error(anyhow!("--phase: rates must be non-negative")));
    }
    if jitter.is_nan() || jitter < 0.0 {
        return Err(input_error(anyhow!("--phase: jitter must be non-negative")));
    }
    if duration == 0 {
        return Err(input_error(anyhow!("--phase: dur must be at least 1")));
    }
    Ok(PhaseSpec::new(rates, jitter, duration))
}

/// Parses one `--anomaly kind=K,start=S,len=L[,mag=M][,event=E][,swap-rates=..][,swap-jitter=J]`.
fn parse_anomaly(spec: &str, n_events: usize) -> Result<AnomalySpec, Failure> {
    let mut kind: Option<AnomalyKind> = None;
    let mut start: Option<usize> = None;
    let mut len: Option<usize> = None;
    let mut mag = 1.0f64;
    let mut event: Option<EventId> = None;
    let mut swap_rates: Option<Vec<f64>> = None;
    let mut swap_jitter = 0.0f64;
    for (key, value) in key_values(spec, "--anomaly")? {
        match key.as_str() {
            "kind" => kind = Some(parse_num(&value, "kind")?),
            "start" => start = Some(parse_num(&value, "start")?),
            "len" => len = Some(parse_num(&value, "len")?),
            "mag" => mag = parse_num(&value, "mag")?,
            "event" => {
                event = Some(EventId::new(&value).ok_or_else(|| {
                    input_error(anyhow!("--anomaly: invalid event name {value:?}"))
                })?)
            }
            "swap-rates" => swap_rates = Some(parse_rates(&value, "--anomaly")?),
            "swap-jitter" => swap_jitter = parse_num(&value, "swap-jitter")?,
            other => return Err(input_error(anyhow!("--anomaly: unknown key {other:?}"))),
        }
    }
    let kind = kind.ok_or_else(|| input_error(anyhow!("--anomaly: missing kind=")))?;
    let start = start.ok_or_else(|| input_error(anyhow!("--anomaly: missing start=")))?;
    let len = len.ok_or_else(|| input_error(anyhow!("--anomaly: missing len=")))?;
    if len == 0 {
        return Err(input_error(anyhow!("--anomaly: len must be at least 1")));
    }
    if mag.is_nan() || mag <= 0.0 {
        return Err(input_error(anyhow!("--anomaly: mag must be positive")));
    }
    let mut out = AnomalySpec::new(kind, mag, (start, len));
    if let Some(event) = event {
        out = out.with_event(event);
    }
    if kind == AnomalyKind::PhaseSwap {
        let rates = swap_rates
            .ok_or_else(|| input_error(anyhow!("--anomaly: phase_swap needs swap-rates=")))?;
        if rates.len() != n_events {
            return Err(input_error(anyhow!(
                "--anomaly: {} swap-rates for {} events",
                rates.len(),
                n_events
            )));
        }
        if swap_jitter.is_nan() || swap_jitter < 0.0 {
            return Err(input_error(anyhow!("--anomaly: swap-jitter must be non-negative")));
        }
        out = out.with_swap_phase(PhaseSpec::new(rates, swap_jitter, 1));
    }
    Ok(out)
}

pub fn synth_trace(
    out: &Option<PathBuf>,
    phases: &[String],
    events: Option<&str>,
    period_ns: u64,
    anomalies: &[String],
    seed: u64,
) -> Result<(), Failure> {
    let events: Vec<EventId> = match events {
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|name| {
                EventId::new(name)
                    .ok_or_else(|| input_error(anyhow!("invalid event name {name:?}")))
            })
            .collect::<Result<_, _>>()?,
        None => default_events(),
    };
    if events.is_empty() {
        return Err(input_error(anyhow!("--events must name at least one event")));
    }
    if period_ns == 0 {
        return Err(input_error(anyhow!("--period-ns must be positive")));
    }
    let phases: Vec<PhaseSpec> = phases
        .iter()
        .map(|spec| parse_phase(spec, events.len()))
        .collect::<Result<_, _>>()?;

    let mut trace = gen_phase_trace(&phases, &events, period_ns, seed);
    let mut union: Option<Vec<bool>> = None;
    for (i, spec) in anomalies.iter().enumerate() {
        let spec = parse_anomaly(spec, events.len())?;
        let (next, mask) = inject_anomaly(&trace, &spec, seed.wrapping_add(1 + i as u64))
            .or_input("planting anomaly")?;
        trace = next;
        match &mut union {
            Some(u) => u.iter_mut().zip(&mask).for_each(|(a, &b)| *a |= b),
            None => union = Some(mask),
        }
    }
    if union.is_some() {
        trace.mask = union;
    }
    log::info!(
        "{} rows, {} events, {} anomalous",
        trace.n_rows(),
        trace.events.len(),
        trace.mask.as_ref().map_or(0, |m| m.iter().filter(|&&b| b).count())
    );
    trace.write_csv(out_writer(out)?).or_input("writing trace")
}

#[allow(clippy::too_many_arguments)]
pub fn synth_corpus(
    out: &Option<PathBuf>,
    families: &str,
    tokens_per_family: usize,
    count: usize,
    min_len: usize,
    max_len: usize,
    identical: bool,
    seed: u64,
) -> Result<(), Failure> {
    let names: Vec<&str> =
        families.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if names.len() < 2 {
        return Err(input_error(anyhow!("--families must name at least two families")));
    }
    if tokens_per_family == 0 {
        return Err(input_error(anyhow!("--tokens-per-family must be at least 1")));
    }
    if count == 0 {
        return Err(input_error(anyhow!("--count must be at least 1")));
    }
    if min_len == 0 || min_len > max_len {
        return Err(input_error(anyhow!("need 1 <= --min-len <= --max-len")));
    }

    let mut specs = disjoint_family_specs(&names, tokens_per_family, seed);
    if identical {
        // Same tokens, same transition seed: families are statistically
        // indistinguishable, which pins the chance-level baseline.
        let pool = specs[0].tokens.clone();
        specs = names.iter().map(|name| FamilySpec::seeded(*name, pool.clone(), seed)).collect();
    }
    let corpus = gen_opcode_corpus(&specs, count, (min_len, max_len), seed);

    let dir = require_out(out, "synth-corpus")?;
    let class_names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    write_corpus_dir(dir, &corpus, &class_names).or_input("writing corpus")?;
    log::info!("{} sequences across {} families in {}", corpus.len(), names.len(), dir.display());
    Ok(())
}
