use acris_core::perfring::{ExpBox, RingDescriptor};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Everything a run depends on. Equal configs give byte-identical reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    pub p: u32,
    pub prec: u32,
    #[serde(default = "one")]
    pub xvars: usize,
    #[serde(default)]
    pub yvars: usize,
    /// (E, D); defaults to the smallest box meeting the threshold
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub bx: Option<(u32, u64)>,
    #[serde(default = "default_suite")]
    pub suite: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn one() -> usize {
    1
}

fn default_suite() -> String {
    "default".into()
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { p: 2, prec: 2, xvars: 1, yvars: 0, bx: None, suite: default_suite(), out: None, seed: None }
    }
}

impl SessionConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("config {}", path.display()))
    }

    pub fn descriptor(&self) -> Result<RingDescriptor> {
        Ok(RingDescriptor::new(self.p, self.xvars, self.yvars, self.prec)?)
    }

    pub fn exp_box(&self) -> Result<ExpBox> {
        let (e, d) = match self.bx {
            Some(b) => b,
            None => {
                let d = (self.p as u64).checked_pow(self.prec + 1).context("box bound overflows")?;
                (self.prec + 1, d)
            }
        };
        Ok(ExpBox::new(e, d)?)
    }

    /// Box with the threshold enforced.
    pub fn checked_box(&self) -> Result<ExpBox> {
        let bx = self.exp_box()?;
        if !bx.meets_threshold(self.p, self.prec) {
            bail!("box (E={}, D={}) is below the threshold E > N, D ≥ p^(N+1) for p={}, N={}", bx.e, bx.d, self.p, self.prec);
        }
        Ok(bx)
    }
}

/// Parse `E,D`.
pub fn parse_box(s: &str) -> std::result::Result<(u32, u64), String> {
    let (e, d) = s.split_once(',').ok_or_else(|| format!("expected E,D, got {s:?}"))?;
    let e = e.trim().parse().map_err(|_| format!("bad E in {s:?}"))?;
    let d = d.trim().parse().map_err(|_| format!("bad D in {s:?}"))?;
    Ok((e, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_parsing() {
        assert_eq!(parse_box("3,8"), Ok((3, 8)));
        assert_eq!(parse_box(" 4 , 81"), Ok((4, 81)));
        assert!(parse_box("3").is_err());
        assert!(parse_box("x,8").is_err());
    }

    #[test]
    fn default_box_meets_threshold() {
        let c = SessionConfig { p: 3, prec: 2, ..Default::default() };
        let b = c.checked_box().unwrap();
        assert_eq!((b.e, b.d), (3, 27));
    }

    #[test]
    fn small_box_rejected() {
        let c = SessionConfig { bx: Some((2, 8)), ..Default::default() };
        assert!(c.checked_box().is_err());
        assert!(c.exp_box().is_ok());
    }

    #[test]
    fn config_json_round_trip() {
        let c = SessionConfig { p: 3, prec: 1, bx: Some((2, 9)), seed: Some(7), ..Default::default() };
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<SessionConfig>(&s).unwrap(), c);
        let min: SessionConfig = serde_json::from_str(r#"{"p": 5, "prec": 1}"#).unwrap();
        assert_eq!((min.xvars, min.yvars, min.suite.as_str()), (1, 0, "default"));
        assert!(serde_json::from_str::<SessionConfig>(r#"{"p": 5, "prec": 1, "bogus": 0}"#).is_err());
    }
}
