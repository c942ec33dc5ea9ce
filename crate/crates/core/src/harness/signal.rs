use std::fs::File;
use std::io::Read;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::SignalSpec;
use crate::error::{Error, Result};

/// Adjustment index sequence `c_0..=c_n` for the given spec. Every step stays
/// within `min(d_max, step bound)` and every index within `[-o, o]`.
pub fn adjustment_signal(spec: &SignalSpec, d_max: i32, o: usize, n: usize) -> Result<Vec<i32>> {
    match spec {
        SignalSpec::Zero => Ok(vec![0; n + 1]),
        SignalSpec::RandomWalk { seed, step_bound } => Ok(random_walk(*seed, d_max.min(*step_bound as i32), o, n)),
        SignalSpec::Scripted { file } => {
            let c = read_scripted(File::open(file)?)?;
            validate_signal(&c, d_max, o, n)?;
            Ok(c)
        }
    }
}

/// Increments uniform on `{-s..=s}`, reflected at `±o`.
pub fn random_walk(seed: u64, s: i32, o: usize, n: usize) -> Vec<i32> {
    let s = s.max(0);
    let o = o as i32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = 0;
    let mut out = Vec::with_capacity(n + 1);
    out.push(0);
    for _ in 0..n {
        let mut next = c + rng.gen_range(-s..=s);
        if next > o {
            next = 2 * o - next;
        } else if next < -o {
            next = -2 * o - next;
        }
        c = next;
        out.push(c);
    }
    out
}

/// Check length, start, range and step size; the error names the first
/// offending index.
pub fn validate_signal(c: &[i32], d_max: i32, o: usize, n: usize) -> Result<()> {
    let violation = |index: usize, reason: String| Err(Error::SignalViolation { index, reason });
    if c.len() != n + 1 {
        return violation(c.len().min(n + 1), format!("expected {} indices, found {}", n + 1, c.len()));
    }
    if c[0] != 0 {
        return violation(0, format!("c_0 must be 0, found {}", c[0]));
    }
    for i in 1..c.len() {
        if c[i].unsigned_abs() as usize > o {
            return violation(i, format!("|c| = {} exceeds o = {o}", c[i].abs()));
        }
        let step = (c[i] - c[i - 1]).abs();
        if step > d_max {
            return violation(i, format!("step {step} exceeds d_max = {d_max}"));
        }
    }
    Ok(())
}

/// One index per row, taken from column `c` if there is a header naming it,
/// otherwise from the last column.
pub fn read_scripted<R: Read>(r: R) -> Result<Vec<i32>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(r);
    let mut rows = rdr.records();
    let mut out = Vec::new();
    let mut col = None;
    if let Some(first) = rows.next() {
        let first = first?;
        match first.iter().position(|h| h == "c") {
            Some(p) => col = Some(p),
            None => out.push(parse_index(&first, None, 1)?),
        }
    }
    for (line, rec) in rows.enumerate() {
        out.push(parse_index(&rec?, col, line + 2)?);
    }
    Ok(out)
}

fn parse_index(rec: &csv::StringRecord, col: Option<usize>, line: usize) -> Result<i32> {
    let field = match col {
        Some(c) => rec.get(c),
        None => rec.iter().last(),
    };
    field
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| Error::Parse(format!("line {line}: expected an integer adjustment index")))
}
