//! Weight persistence.
//!
//! Versioned plain-text format, one value per token. Floats are written in
//! shortest-roundtrip decimal, so a load reproduces bit-identical parameters
//! and therefore bit-identical forward passes.
//!
//! ```text
//! d2d-dqn v1
//! networks <count>
//! seed <u64>
//! net 0
//! dims <d0> <d1> ... <dL>
//! w0 <out*in floats, row-major>
//! b0 <out floats>
//! ...
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Result, SimError};
use crate::rl::mlp::Mlp;

const MAGIC: &str = "d2d-dqn v1";

/// Renders networks plus the training seed in the documented format.
pub fn render_networks(nets: &[Mlp], seed: u64) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("networks {}\n", nets.len()));
    out.push_str(&format!("seed {seed}\n"));
    for (k, net) in nets.iter().enumerate() {
        out.push_str(&format!("net {k}\n"));
        out.push_str("dims");
        for d in net.layer_dims() {
            out.push_str(&format!(" {d}"));
        }
        out.push('\n');
        for l in 0..net.weights.len() {
            push_row(&mut out, &format!("w{l}"), &net.weights[l]);
            push_row(&mut out, &format!("b{l}"), &net.biases[l]);
        }
    }
    out
}

fn push_row(out: &mut String, label: &str, values: &[f64]) {
    out.push_str(label);
    for v in values {
        // Debug formatting keeps full precision and roundtrips exactly.
        out.push_str(&format!(" {v:?}"));
    }
    out.push('\n');
}

/// Parses the output of [`render_networks`].
pub fn parse_networks(text: &str) -> Result<(Vec<Mlp>, u64)> {
    let mut lines = text.lines().enumerate();
    let mut next_line = |expect: &str| -> Result<(usize, &str)> {
        lines
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| SimError::ModelFormat(format!("unexpected end of file, expected {expect}")))
    };

    let (line_no, magic) = next_line("header")?;
    if magic.trim() != MAGIC {
        return Err(SimError::Parse {
            line: line_no,
            msg: format!("unsupported model header {magic:?}, expected {MAGIC:?}"),
        });
    }
    let count = parse_labeled_u64(next_line("networks count")?, "networks")? as usize;
    let seed = parse_labeled_u64(next_line("seed")?, "seed")?;

    let mut nets = Vec::with_capacity(count);
    for k in 0..count {
        let idx = parse_labeled_u64(next_line("net index")?, "net")? as usize;
        if idx != k {
            return Err(SimError::ModelFormat(format!("expected net {k}, found net {idx}")));
        }
        let (line_no, dims_line) = next_line("dims")?;
        let dims = parse_row(line_no, dims_line, "dims", |tok| {
            tok.parse::<usize>().map_err(|e| e.to_string())
        })?;
        if dims.len() < 2 {
            return Err(SimError::Parse { line: line_no, msg: "dims needs at least two layers".into() });
        }
        let mut weights = Vec::with_capacity(dims.len() - 1);
        let mut biases = Vec::with_capacity(dims.len() - 1);
        for l in 0..dims.len() - 1 {
            let (wl, wline) = next_line("weights")?;
            let w = parse_row(wl, wline, &format!("w{l}"), |tok| {
                tok.parse::<f64>().map_err(|e| e.to_string())
            })?;
            let (bl, bline) = next_line("biases")?;
            let b = parse_row(bl, bline, &format!("b{l}"), |tok| {
                tok.parse::<f64>().map_err(|e| e.to_string())
            })?;
            weights.push(w);
            biases.push(b);
        }
        nets.push(Mlp::from_params(&dims, weights, biases)?);
    }
    if let Some((i, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(SimError::Parse { line: i + 1, msg: format!("trailing content {extra:?}") });
    }
    Ok((nets, seed))
}

fn parse_labeled_u64((line_no, line): (usize, &str), label: &str) -> Result<u64> {
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(l), Some(v), None) if l == label => v.parse().map_err(|e| SimError::Parse {
            line: line_no,
            msg: format!("bad {label} value {v:?}: {e}"),
        }),
        _ => Err(SimError::Parse {
            line: line_no,
            msg: format!("expected `{label} <value>`, got {line:?}"),
        }),
    }
}

fn parse_row<T>(
    line_no: usize,
    line: &str,
    label: &str,
    parse: impl Fn(&str) -> std::result::Result<T, String>,
) -> Result<Vec<T>> {
    let mut parts = line.split_whitespace();
    match parts.next() {
        Some(l) if l == label => {}
        other => {
            return Err(SimError::Parse {
                line: line_no,
                msg: format!("expected row label {label:?}, got {other:?}"),
            })
        }
    }
    parts
        .map(|tok| {
            parse(tok).map_err(|e| SimError::Parse {
                line: line_no,
                msg: format!("bad value {tok:?} in {label}: {e}"),
            })
        })
        .collect()
}

/// Writes networks to `path` in the documented text format.
pub fn save_networks(path: &Path, nets: &[Mlp], seed: u64) -> Result<()> {
    fs::write(path, render_networks(nets, seed)).map_err(|e| SimError::io(path, e))
}

/// Loads networks saved by [`save_networks`].
pub fn load_networks(path: &Path) -> Result<(Vec<Mlp>, u64)> {
    let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse_networks(&text)
}
