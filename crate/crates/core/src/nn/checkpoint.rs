//! Text checkpoint format shared with the training stack.
//!
//! Header line `TWK1 <role> <layer_sizes joined by dash>`, then one scalar
//! per line in row-major layer order (each layer's weights, then its
//! biases). Scalars print with Rust's shortest round-trip formatting, so
//! save/load reproduces parameters bit for bit.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::mlp::{Activation, Mlp};
use super::NnError;

pub fn write_mlp<W: Write>(mut w: W, role: &str, mlp: &Mlp) -> Result<(), NnError> {
    debug_assert!(!role.contains(char::is_whitespace));
    let sizes: Vec<String> = mlp.layer_sizes().iter().map(|s| s.to_string()).collect();
    writeln!(w, "TWK1 {} {}", role, sizes.join("-"))?;
    let (weights, biases) = mlp.params();
    for l in 0..weights.len() {
        for v in &weights[l] {
            writeln!(w, "{v:?}")?;
        }
        for v in &biases[l] {
            writeln!(w, "{v:?}")?;
        }
    }
    Ok(())
}

pub fn save_mlp<P: AsRef<Path>>(path: P, role: &str, mlp: &Mlp) -> Result<(), NnError> {
    let file = std::fs::File::create(path)?;
    let mut buf = std::io::BufWriter::new(file);
    write_mlp(&mut buf, role, mlp)?;
    buf.flush()?;
    Ok(())
}

/// Read a checkpoint, returning its role tag and the network. The output
/// activation is not stored in the file; the caller supplies it (roles fix
/// it in the training stack: actors are tanh, critics identity).
pub fn read_mlp<R: Read>(r: R, activation: Activation) -> Result<(String, Mlp), NnError> {
    let mut lines = BufReader::new(r).lines();
    let header = lines
        .next()
        .ok_or_else(|| NnError::Format("empty checkpoint".into()))?
        .map_err(NnError::Io)?;
    let mut parts = header.split_whitespace();
    match parts.next() {
        Some("TWK1") => {}
        other => return Err(NnError::Format(format!("bad magic {other:?}, expected TWK1"))),
    }
    let role = parts
        .next()
        .ok_or_else(|| NnError::Format("missing role in header".into()))?
        .to_string();
    let sizes_text =
        parts.next().ok_or_else(|| NnError::Format("missing layer sizes in header".into()))?;
    let layer_sizes: Vec<usize> = sizes_text
        .split('-')
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| NnError::Format(format!("bad layer size {s:?} in header")))
        })
        .collect::<Result<_, _>>()?;
    if layer_sizes.len() < 2 || layer_sizes.iter().any(|&s| s == 0) {
        return Err(NnError::Format(format!("invalid layer sizes {layer_sizes:?}")));
    }

    let mut scalars = lines.enumerate().map(|(i, line)| {
        line.map_err(NnError::Io).and_then(|text| {
            text.trim().parse::<f64>().map_err(|_| {
                NnError::Format(format!("line {}: not a number: {text:?}", i + 2))
            })
        })
    });
    let mut next_scalar = |what: &str| -> Result<f64, NnError> {
        let v = scalars
            .next()
            .ok_or_else(|| NnError::Format(format!("checkpoint truncated at {what}")))??;
        if !v.is_finite() {
            return Err(NnError::Format(format!("non-finite parameter in {what}")));
        }
        Ok(v)
    };

    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for l in 0..layer_sizes.len() - 1 {
        let fan_in = layer_sizes[l];
        let fan_out = layer_sizes[l + 1];
        let mut w = Vec::with_capacity(fan_in * fan_out);
        for _ in 0..fan_in * fan_out {
            w.push(next_scalar(&format!("layer {l} weights"))?);
        }
        let mut b = Vec::with_capacity(fan_out);
        for _ in 0..fan_out {
            b.push(next_scalar(&format!("layer {l} biases"))?);
        }
        weights.push(w);
        biases.push(b);
    }
    if scalars.next().is_some() {
        return Err(NnError::Format("trailing data after parameters".into()));
    }
    Ok((role, Mlp::from_parts(layer_sizes, weights, biases, activation)))
}

pub fn load_mlp<P: AsRef<Path>>(path: P, activation: Activation) -> Result<(String, Mlp), NnError> {
    let file = std::fs::File::open(path)?;
    read_mlp(file, activation)
}
