//! Named, seeded test-field generators.

use std::fmt;
use std::str::FromStr;

use crate::covering::random_family;
use crate::error::{Error, Result};
use crate::lattice::{Dim, Rect, ScalarField};
use crate::rng::{FieldRng, GENERATOR};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    /// `count` unit masses at distinct uniform cells.
    Spikes { count: usize },
    /// Indicator of the union of `count` random boxes with sides in `1..=max_len`.
    RectUnion { count: usize, max_len: i64 },
    /// i.i.d. values uniform in `[0, 1)`.
    UniformNoise,
    /// `∏_i (1 − |2(x_i + ½)/size − 1|)`.
    SmoothBump,
}

/// A field family on `[0, size)^{2n+1}` plus the seed that fixes the instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldSpec {
    pub kind: FieldKind,
    pub size: i64,
    pub n: usize,
    pub seed: u64,
}

impl FieldSpec {
    pub fn with_seed(self, seed: u64) -> Self {
        FieldSpec { seed, ..self }
    }

    pub fn window(&self) -> Rect {
        Rect::cube(2 * self.n + 1, 0, self.size).expect("size checked on parse")
    }

    pub fn generator(&self) -> &'static str {
        GENERATOR
    }
}

/// Deterministic field for `spec`; bit-identical across runs and platforms.
pub fn generate_field(spec: &FieldSpec) -> Result<ScalarField> {
    let window = spec.window();
    let mut rng = FieldRng::new(spec.seed);
    match spec.kind {
        FieldKind::Spikes { count } => {
            let cells = window.cell_count()?;
            if count > cells {
                return Err(Error::Parse(format!("{count} spikes do not fit in {cells} cells")));
            }
            let mut values = vec![0.0; cells];
            let mut placed = 0;
            while placed < count {
                let i = rng.below(cells as u64) as usize;
                if values[i] == 0.0 {
                    values[i] = 1.0;
                    placed += 1;
                }
            }
            ScalarField::new(window, values)
        }
        FieldKind::RectUnion { count, max_len } => {
            let rects = random_family(&mut rng, window.dim(), spec.size, count, max_len);
            ScalarField::from_fn(window, |p| {
                if rects.iter().any(|r| r.contains(p)) { 1.0 } else { 0.0 }
            })
        }
        FieldKind::UniformNoise => ScalarField::from_fn(window, |_| rng.unit_f64()),
        FieldKind::SmoothBump => {
            let s = spec.size as f64;
            ScalarField::from_fn(window, |p| {
                p.iter().map(|&x| 1.0 - (2.0 * (x as f64 + 0.5) / s - 1.0).abs()).product()
            })
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FieldKind::Spikes { count } => write!(f, "spikes:size={},count={count}", self.size)?,
            FieldKind::RectUnion { count, max_len } => {
                write!(f, "rect-union-indicator:size={},count={count},max_len={max_len}", self.size)?
            }
            FieldKind::UniformNoise => write!(f, "uniform-noise:size={}", self.size)?,
            FieldKind::SmoothBump => write!(f, "smooth-bump:size={}", self.size)?,
        }
        write!(f, ",n={}", self.n)
    }
}

/// `kind:key=value,...`; the seed is supplied separately and starts at 0.
impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::Parse(format!("field spec `{s}`: {msg}"));
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut size = None;
        let mut n = 1usize;
        let mut count = None;
        let mut max_len = None;
        for item in rest.split(',').filter(|t| !t.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| bad(format!("`{item}` is not key=value")))?;
            let int = |v: &str| v.parse::<i64>().map_err(|_| bad(format!("`{k}` needs an integer")));
            match k {
                "size" => size = Some(int(v)?),
                "n" => n = int(v)? as usize,
                "count" => count = Some(int(v)?),
                "max_len" => max_len = Some(int(v)?),
                _ => return Err(bad(format!("unknown key `{k}`"))),
            }
        }
        let size = size.ok_or_else(|| bad("missing size".into()))?;
        if size < 1 {
            return Err(bad("size must be positive".into()));
        }
        Dim::new(n)?;
        let count = |default: i64| -> Result<usize> {
            let c = count.unwrap_or(default);
            if c < 1 {
                return Err(bad("count must be positive".into()));
            }
            Ok(c as usize)
        };
        let kind = match kind {
            "spikes" => FieldKind::Spikes { count: count(1)? },
            "rect-union-indicator" => FieldKind::RectUnion {
                count: count(4)?,
                max_len: max_len.unwrap_or((size / 2).max(1)).max(1),
            },
            "uniform-noise" => FieldKind::UniformNoise,
            "smooth-bump" => FieldKind::SmoothBump,
            _ => return Err(bad(format!("unknown kind `{kind}`"))),
        };
        Ok(FieldSpec { kind, size, n, seed: 0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::io::write_field;

    #[test]
    fn parse_and_display_round_trip() {
        for s in [
            "spikes:size=8,count=4,n=1",
            "rect-union-indicator:size=6,count=3,max_len=2,n=1",
            "uniform-noise:size=4,n=2",
            "smooth-bump:size=5,n=1",
        ] {
            let spec: FieldSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        for bad in ["spikes", "spikes:size=0", "blob:size=3", "spikes:size=3,count=x", "spikes:size=4,depth=2"] {
            assert!(bad.parse::<FieldSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn single_spike_is_reproducible() {
        let spec = "spikes:size=8,count=1".parse::<FieldSpec>().unwrap().with_seed(42);
        let a = generate_field(&spec).unwrap();
        assert_eq!(a.values().iter().filter(|&&v| v != 0.0).count(), 1);
        assert_eq!(a.sum_abs(), 1.0);
        let mut bytes = [Vec::new(), Vec::new()];
        for b in &mut bytes {
            let f = generate_field(&spec).unwrap();
            write_field(b, Dim::new(1).unwrap(), &f, &[]).unwrap();
        }
        assert_eq!(bytes[0], bytes[1]);
    }

    #[test]
    fn kinds_have_their_ranges() {
        let rects = "rect-union-indicator:size=8,count=5".parse::<FieldSpec>().unwrap().with_seed(3);
        let f = generate_field(&rects).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0 || v == 1.0));
        assert!(!f.is_zero());
        let noise = "uniform-noise:size=4".parse::<FieldSpec>().unwrap();
        assert!(generate_field(&noise).unwrap().values().iter().all(|&v| (0.0..1.0).contains(&v)));
        let bump = generate_field(&"smooth-bump:size=4".parse().unwrap()).unwrap();
        assert_eq!(bump.get(&[0, 0, 0]), 0.25f64.powi(3));
        assert_eq!(bump.get(&[1, 2, 1]), 0.75f64.powi(3));
        let spikes = "spikes:size=2,count=9".parse::<FieldSpec>().unwrap();
        assert!(generate_field(&spikes).is_err());
    }
}
