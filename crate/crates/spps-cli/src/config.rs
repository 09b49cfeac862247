//! Run configuration: a flat UTF-8 `key = value` file with a single
//! `[section]` naming the command it drives.
//!
//! The format is deliberately strict: one section per file, the section must
//! match the command being run, unknown keys and unknown sections are
//! rejected, duplicate keys are rejected, and every value must parse as its
//! declared type. Command-line flags (`--N`, `--out`, ...) are injected as
//! if they were keys in the file and override file values.
//!
//! Complex values are written `re im`; polynomial coefficients are a
//! comma-separated list of such pairs, constant term first. `serialize`
//! emits a canonical form that re-parses to an identical configuration.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::expr::Expr;

pub const KNOWN_SECTIONS: [&str; 11] = [
    "solve-sl",
    "solve-well",
    "char-map",
    "powers",
    "kernel-constant",
    "kernel-goursat",
    "kernel-reparam",
    "kernel-darboux",
    "kernel-chain",
    "kernel-apply",
    "dirac",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn cerr<T>(message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(message.into()))
}

/// An expression-valued key: the source text is kept verbatim so the file
/// round-trips, the tree is what commands evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprVal {
    pub text: String,
    pub ast: Expr,
}

impl ExprVal {
    pub fn parse(text: &str) -> Result<Self, crate::expr::ExprError> {
        Ok(Self {
            text: text.to_string(),
            ast: Expr::parse(text)?,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.ast.eval(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    #[default]
    Direct,
    Schrodinger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Family {
    #[default]
    Phi,
    Psi,
}

/// Spectral problem shared by `solve-sl` and `char-map`: equation data,
/// boundary coefficients, and the series order.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub a: f64,
    pub b: f64,
    pub m: usize,
    pub potential: ExprVal,
    pub n: usize,
    pub convention: Convention,
    pub alpha: Complex64,
    pub beta1: Complex64,
    pub beta2: Complex64,
    pub beta1p: Complex64,
    pub beta2p: Complex64,
    pub phi: Vec<Complex64>,
    pub lambda0: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveSlConfig {
    pub problem: ProblemConfig,
    pub region: Region,
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveWellConfig {
    pub width: f64,
    pub m: usize,
    pub potential: ExprVal,
    pub alpha1: f64,
    pub alpha2: f64,
    pub n: usize,
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharMapConfig {
    pub problem: ProblemConfig,
    pub region: Region,
    pub nx: usize,
    pub ny: usize,
    pub out: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowersConfig {
    pub a: f64,
    pub b: f64,
    pub m: usize,
    pub potential: ExprVal,
    pub order: usize,
    pub x0: Option<f64>,
    pub family: Family,
    pub out: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelConstantConfig {
    pub c: Complex64,
    pub h: Complex64,
    pub a: f64,
    pub nodes: usize,
    pub out: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelGoursatConfig {
    pub a: f64,
    pub nodes: usize,
    /// Potential sampling intervals; defaults to `nodes - 1`.
    pub m: Option<usize>,
    pub potential: ExprVal,
    pub h: Complex64,
    pub tol: f64,
    pub out: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelReparamConfig {
    pub input: String,
    pub h: Complex64,
    pub out: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelDarbouxConfig {
    pub input: String,
    pub f: ExprVal,
    pub out: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelChainConfig {
    pub steps: usize,
    pub a: f64,
    pub nodes: usize,
    pub out: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelApplyConfig {
    pub input: String,
    pub u: ExprVal,
    pub out: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiracConfig {
    pub a: f64,
    pub b: f64,
    pub m: usize,
    pub mass: f64,
    pub s: ExprVal,
    pub e: Complex64,
    pub c1: Complex64,
    pub c2: Complex64,
    pub n: usize,
    pub out: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommandConfig {
    SolveSl(SolveSlConfig),
    SolveWell(SolveWellConfig),
    CharMap(CharMapConfig),
    Powers(PowersConfig),
    KernelConstant(KernelConstantConfig),
    KernelGoursat(KernelGoursatConfig),
    KernelReparam(KernelReparamConfig),
    KernelDarboux(KernelDarbouxConfig),
    KernelChain(KernelChainConfig),
    KernelApply(KernelApplyConfig),
    Dirac(DiracConfig),
}

/// Command-line flag values that override (or supply) config keys.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<String>,
    pub re_min: Option<f64>,
    pub re_max: Option<f64>,
    pub im_min: Option<f64>,
    pub im_max: Option<f64>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
}

impl Overrides {
    fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if let Some(v) = self.n {
            out.push(("n", v.to_string()));
        }
        if let Some(v) = self.m {
            out.push(("m", v.to_string()));
        }
        if let Some(v) = self.tol {
            out.push(("tol", format!("{v}")));
        }
        if let Some(v) = &self.out {
            out.push(("out", v.clone()));
        }
        if let Some(v) = self.re_min {
            out.push(("re-min", format!("{v}")));
        }
        if let Some(v) = self.re_max {
            out.push(("re-max", format!("{v}")));
        }
        if let Some(v) = self.im_min {
            out.push(("im-min", format!("{v}")));
        }
        if let Some(v) = self.im_max {
            out.push(("im-max", format!("{v}")));
        }
        if let Some(v) = self.nx {
            out.push(("nx", v.to_string()));
        }
        if let Some(v) = self.ny {
            out.push(("ny", v.to_string()));
        }
        out
    }
}

#[derive(Debug, Clone)]
enum Source {
    File(usize),
    Flag,
}

#[derive(Debug, Clone)]
struct RawEntry {
    value: String,
    source: Source,
}

impl RawEntry {
    fn place(&self) -> String {
        match self.source {
            Source::File(line) => format!("line {line}"),
            Source::Flag => "command-line flag".to_string(),
        }
    }
}

/// Parsed lines of the single section, before typing.
struct Fields {
    section: String,
    entries: BTreeMap<String, RawEntry>,
}

impl Fields {
    fn parse(text: &str, section: &str, overrides: &Overrides) -> Result<Self, ConfigError> {
        let mut found: Option<String> = None;
        let mut entries = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return cerr(format!("line {lineno}: section header is missing `]`"));
                };
                let name = name.trim();
                if !KNOWN_SECTIONS.contains(&name) {
                    return cerr(format!("line {lineno}: unknown section [{name}]"));
                }
                if let Some(prev) = &found {
                    return cerr(format!(
                        "line {lineno}: second section [{name}] after [{prev}]; one section per file"
                    ));
                }
                found = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return cerr(format!("line {lineno}: expected `key = value`"));
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return cerr(format!("line {lineno}: malformed key `{key}`"));
            }
            if found.is_none() {
                return cerr(format!(
                    "line {lineno}: key `{key}` appears before any [section]"
                ));
            }
            let entry = RawEntry {
                value: value.to_string(),
                source: Source::File(lineno),
            };
            if entries.insert(key.to_string(), entry).is_some() {
                return cerr(format!("line {lineno}: duplicate key `{key}`"));
            }
        }
        let Some(name) = found else {
            return cerr(format!("config has no [{section}] section"));
        };
        if name != section {
            return cerr(format!(
                "config defines [{name}] but this command reads [{section}]"
            ));
        }
        for (key, value) in overrides.entries() {
            entries.insert(
                key.to_string(),
                RawEntry {
                    value,
                    source: Source::Flag,
                },
            );
        }
        Ok(Self {
            section: name,
            entries,
        })
    }

    fn take(&mut self, key: &str) -> Option<RawEntry> {
        self.entries.remove(key)
    }

    /// Every key must have been consumed by the section's schema.
    fn finish(self) -> Result<(), ConfigError> {
        if let Some((key, entry)) = self.entries.into_iter().next() {
            return match entry.source {
                Source::File(line) => cerr(format!(
                    "line {line}: unknown key `{key}` in [{}]",
                    self.section
                )),
                Source::Flag => cerr(format!("flag `{key}` does not apply to [{}]", self.section)),
            };
        }
        Ok(())
    }

    fn missing<T>(&self, key: &str) -> Result<T, ConfigError> {
        cerr(format!(
            "missing required key `{key}` in [{}]",
            self.section
        ))
    }

    fn f64_opt(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        let Some(e) = self.take(key) else {
            return Ok(None);
        };
        match e.value.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => cerr(format!(
                "key `{key}` ({}): `{}` is not a finite number",
                e.place(),
                e.value
            )),
        }
    }

    fn f64(&mut self, key: &str) -> Result<f64, ConfigError> {
        match self.f64_opt(key)? {
            Some(v) => Ok(v),
            None => self.missing(key),
        }
    }

    fn usize_opt(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        let Some(e) = self.take(key) else {
            return Ok(None);
        };
        e.value.parse::<usize>().map(Some).map_err(|_| {
            ConfigError(format!(
                "key `{key}` ({}): `{}` is not a non-negative integer",
                e.place(),
                e.value
            ))
        })
    }

    fn usize(&mut self, key: &str) -> Result<usize, ConfigError> {
        match self.usize_opt(key)? {
            Some(v) => Ok(v),
            None => self.missing(key),
        }
    }

    fn complex_opt(&mut self, key: &str) -> Result<Option<Complex64>, ConfigError> {
        let Some(e) = self.take(key) else {
            return Ok(None);
        };
        match parse_complex(&e.value) {
            Some(v) => Ok(Some(v)),
            None => cerr(format!(
                "key `{key}` ({}): expected `re im`, got `{}`",
                e.place(),
                e.value
            )),
        }
    }

    fn complex(&mut self, key: &str) -> Result<Complex64, ConfigError> {
        match self.complex_opt(key)? {
            Some(v) => Ok(v),
            None => self.missing(key),
        }
    }

    fn complex_or(&mut self, key: &str, default: Complex64) -> Result<Complex64, ConfigError> {
        Ok(self.complex_opt(key)?.unwrap_or(default))
    }

    fn poly(&mut self, key: &str) -> Result<Vec<Complex64>, ConfigError> {
        let Some(e) = self.take(key) else {
            return Ok(Vec::new());
        };
        let mut coeffs = Vec::new();
        for part in e.value.split(',') {
            let Some(v) = parse_complex(part) else {
                return cerr(format!(
                    "key `{key}` ({}): expected comma-separated `re im` pairs, got `{}`",
                    e.place(),
                    part.trim()
                ));
            };
            coeffs.push(v);
        }
        Ok(coeffs)
    }

    fn expr(&mut self, key: &str) -> Result<ExprVal, ConfigError> {
        let Some(e) = self.take(key) else {
            return self.missing(key);
        };
        ExprVal::parse(&e.value)
            .map_err(|err| ConfigError(format!("key `{key}` ({}): {err}", e.place())))
    }

    fn string(&mut self, key: &str) -> Result<String, ConfigError> {
        let Some(e) = self.take(key) else {
            return self.missing(key);
        };
        if e.value.is_empty() {
            return cerr(format!("key `{key}` ({}): empty value", e.place()));
        }
        Ok(e.value)
    }

    fn string_opt(&mut self, key: &str) -> Result<Option<String>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(e) if e.value.is_empty() => {
                cerr(format!("key `{key}` ({}): empty value", e.place()))
            }
            Some(e) => Ok(Some(e.value)),
        }
    }

    fn convention(&mut self, key: &str) -> Result<Convention, ConfigError> {
        let Some(e) = self.take(key) else {
            return Ok(Convention::default());
        };
        match e.value.as_str() {
            "direct" => Ok(Convention::Direct),
            "schrodinger" => Ok(Convention::Schrodinger),
            other => cerr(format!(
                "key `{key}` ({}): expected `direct` or `schrodinger`, got `{other}`",
                e.place()
            )),
        }
    }

    fn family(&mut self, key: &str) -> Result<Family, ConfigError> {
        let Some(e) = self.take(key) else {
            return Ok(Family::default());
        };
        match e.value.as_str() {
            "phi" => Ok(Family::Phi),
            "psi" => Ok(Family::Psi),
            other => cerr(format!(
                "key `{key}` ({}): expected `phi` or `psi`, got `{other}`",
                e.place()
            )),
        }
    }

    fn problem(&mut self) -> Result<ProblemConfig, ConfigError> {
        Ok(ProblemConfig {
            a: self.f64("a")?,
            b: self.f64("b")?,
            m: self.usize("m")?,
            potential: self.expr("potential")?,
            n: self.usize("n")?,
            convention: self.convention("convention")?,
            alpha: self.complex_or("alpha", Complex64::new(0.0, 0.0))?,
            beta1: self.complex_or("beta1", Complex64::new(1.0, 0.0))?,
            beta2: self.complex_or("beta2", Complex64::new(0.0, 0.0))?,
            beta1p: self.complex_or("beta1p", Complex64::new(0.0, 0.0))?,
            beta2p: self.complex_or("beta2p", Complex64::new(0.0, 0.0))?,
            phi: self.poly("phi")?,
            lambda0: self.complex_or("lambda0", Complex64::new(0.0, 0.0))?,
        })
    }

    fn region(&mut self) -> Result<Region, ConfigError> {
        Ok(Region {
            re_min: self.f64("re-min")?,
            re_max: self.f64("re-max")?,
            im_min: self.f64("im-min")?,
            im_max: self.f64("im-max")?,
        })
    }
}

fn parse_complex(text: &str) -> Option<Complex64> {
    let mut parts = text.split_whitespace();
    let re: f64 = parts.next()?.parse().ok()?;
    let im: f64 = parts.next()?.parse().ok()?;
    if parts.next().is_some() || !re.is_finite() || !im.is_finite() {
        return None;
    }
    Some(Complex64::new(re, im))
}

#[cfg_attr(not(test), allow(dead_code))]
fn fmt_complex(v: Complex64) -> String {
    format!("{} {}", v.re, v.im)
}

#[cfg_attr(not(test), allow(dead_code))]
fn fmt_poly(coeffs: &[Complex64]) -> String {
    coeffs
        .iter()
        .map(|c| fmt_complex(*c))
        .collect::<Vec<_>>()
        .join(", ")
}

// The canonical-form half of the config contract: `serialize` emits text
// that `load` maps back to an identical value. The binary only ever loads,
// so outside tests this surface is intentionally unused.
#[cfg_attr(not(test), allow(dead_code))]
impl CommandConfig {
    pub fn section(&self) -> &'static str {
        match self {
            CommandConfig::SolveSl(_) => "solve-sl",
            CommandConfig::SolveWell(_) => "solve-well",
            CommandConfig::CharMap(_) => "char-map",
            CommandConfig::Powers(_) => "powers",
            CommandConfig::KernelConstant(_) => "kernel-constant",
            CommandConfig::KernelGoursat(_) => "kernel-goursat",
            CommandConfig::KernelReparam(_) => "kernel-reparam",
            CommandConfig::KernelDarboux(_) => "kernel-darboux",
            CommandConfig::KernelChain(_) => "kernel-chain",
            CommandConfig::KernelApply(_) => "kernel-apply",
            CommandConfig::Dirac(_) => "dirac",
        }
    }

    pub fn load(section: &str, text: &str, overrides: &Overrides) -> Result<Self, ConfigError> {
        let mut f = Fields::parse(text, section, overrides)?;
        let cfg = match section {
            "solve-sl" => CommandConfig::SolveSl(SolveSlConfig {
                problem: f.problem()?,
                region: f.region()?,
                out: f.string_opt("out")?,
            }),
            "solve-well" => CommandConfig::SolveWell(SolveWellConfig {
                width: f.f64("width")?,
                m: f.usize("m")?,
                potential: f.expr("potential")?,
                alpha1: f.f64("alpha1")?,
                alpha2: f.f64("alpha2")?,
                n: f.usize("n")?,
                out: f.string_opt("out")?,
            }),
            "char-map" => CommandConfig::CharMap(CharMapConfig {
                problem: f.problem()?,
                region: f.region()?,
                nx: f.usize("nx")?,
                ny: f.usize("ny")?,
                out: f.string("out")?,
            }),
            "powers" => CommandConfig::Powers(PowersConfig {
                a: f.f64("a")?,
                b: f.f64("b")?,
                m: f.usize("m")?,
                potential: f.expr("potential")?,
                order: f.usize("order")?,
                x0: f.f64_opt("x0")?,
                family: f.family("family")?,
                out: f.string("out")?,
            }),
            "kernel-constant" => CommandConfig::KernelConstant(KernelConstantConfig {
                c: f.complex("c")?,
                h: f.complex("h")?,
                a: f.f64("a")?,
                nodes: f.usize("nodes")?,
                out: f.string("out")?,
            }),
            "kernel-goursat" => CommandConfig::KernelGoursat(KernelGoursatConfig {
                a: f.f64("a")?,
                nodes: f.usize("nodes")?,
                m: f.usize_opt("m")?,
                potential: f.expr("potential")?,
                h: f.complex("h")?,
                tol: f.f64_opt("tol")?.unwrap_or(1e-9),
                out: f.string("out")?,
            }),
            "kernel-reparam" => CommandConfig::KernelReparam(KernelReparamConfig {
                input: f.string("input")?,
                h: f.complex("h")?,
                out: f.string("out")?,
            }),
            "kernel-darboux" => CommandConfig::KernelDarboux(KernelDarbouxConfig {
                input: f.string("input")?,
                f: f.expr("f")?,
                out: f.string("out")?,
            }),
            "kernel-chain" => CommandConfig::KernelChain(KernelChainConfig {
                steps: f.usize("steps")?,
                a: f.f64("a")?,
                nodes: f.usize("nodes")?,
                out: f.string("out")?,
            }),
            "kernel-apply" => CommandConfig::KernelApply(KernelApplyConfig {
                input: f.string("input")?,
                u: f.expr("u")?,
                out: f.string("out")?,
            }),
            "dirac" => CommandConfig::Dirac(DiracConfig {
                a: f.f64("a")?,
                b: f.f64("b")?,
                m: f.usize("m")?,
                mass: f.f64("mass")?,
                s: f.expr("s")?,
                e: f.complex("e")?,
                c1: f.complex("c1")?,
                c2: f.complex("c2")?,
                n: f.usize("n")?,
                out: f.string("out")?,
            }),
            other => return cerr(format!("unknown command section `{other}`")),
        };
        f.finish()?;
        Ok(cfg)
    }

    /// Canonical text form; `load(section(), serialize(), &Overrides::default())`
    /// reproduces the configuration exactly.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        let header = format!("[{}]\n", self.section());
        match self {
            CommandConfig::SolveSl(c) => {
                problem_lines(&mut put, &c.problem);
                region_lines(&mut put, &c.region);
                if let Some(out) = &c.out {
                    put("out", out.clone());
                }
            }
            CommandConfig::SolveWell(c) => {
                put("width", format!("{}", c.width));
                put("m", c.m.to_string());
                put("potential", c.potential.text.clone());
                put("alpha1", format!("{}", c.alpha1));
                put("alpha2", format!("{}", c.alpha2));
                put("n", c.n.to_string());
                if let Some(out) = &c.out {
                    put("out", out.clone());
                }
            }
            CommandConfig::CharMap(c) => {
                problem_lines(&mut put, &c.problem);
                region_lines(&mut put, &c.region);
                put("nx", c.nx.to_string());
                put("ny", c.ny.to_string());
                put("out", c.out.clone());
            }
            CommandConfig::Powers(c) => {
                put("a", format!("{}", c.a));
                put("b", format!("{}", c.b));
                put("m", c.m.to_string());
                put("potential", c.potential.text.clone());
                put("order", c.order.to_string());
                if let Some(x0) = c.x0 {
                    put("x0", format!("{x0}"));
                }
                put(
                    "family",
                    match c.family {
                        Family::Phi => "phi".to_string(),
                        Family::Psi => "psi".to_string(),
                    },
                );
                put("out", c.out.clone());
            }
            CommandConfig::KernelConstant(c) => {
                put("c", fmt_complex(c.c));
                put("h", fmt_complex(c.h));
                put("a", format!("{}", c.a));
                put("nodes", c.nodes.to_string());
                put("out", c.out.clone());
            }
            CommandConfig::KernelGoursat(c) => {
                put("a", format!("{}", c.a));
                put("nodes", c.nodes.to_string());
                if let Some(m) = c.m {
                    put("m", m.to_string());
                }
                put("potential", c.potential.text.clone());
                put("h", fmt_complex(c.h));
                put("tol", format!("{}", c.tol));
                put("out", c.out.clone());
            }
            CommandConfig::KernelReparam(c) => {
                put("input", c.input.clone());
                put("h", fmt_complex(c.h));
                put("out", c.out.clone());
            }
            CommandConfig::KernelDarboux(c) => {
                put("input", c.input.clone());
                put("f", c.f.text.clone());
                put("out", c.out.clone());
            }
            CommandConfig::KernelChain(c) => {
                put("steps", c.steps.to_string());
                put("a", format!("{}", c.a));
                put("nodes", c.nodes.to_string());
                put("out", c.out.clone());
            }
            CommandConfig::KernelApply(c) => {
                put("input", c.input.clone());
                put("u", c.u.text.clone());
                put("out", c.out.clone());
            }
            CommandConfig::Dirac(c) => {
                put("a", format!("{}", c.a));
                put("b", format!("{}", c.b));
                put("m", c.m.to_string());
                put("mass", format!("{}", c.mass));
                put("s", c.s.text.clone());
                put("e", fmt_complex(c.e));
                put("c1", fmt_complex(c.c1));
                put("c2", fmt_complex(c.c2));
                put("n", c.n.to_string());
                put("out", c.out.clone());
            }
        }
        format!("{header}{s}")
    }
}

#[cfg_attr(not(test), allow(dead_code))]
fn problem_lines(put: &mut impl FnMut(&str, String), p: &ProblemConfig) {
    put("a", format!("{}", p.a));
    put("b", format!("{}", p.b));
    put("m", p.m.to_string());
    put("potential", p.potential.text.clone());
    put("n", p.n.to_string());
    put(
        "convention",
        match p.convention {
            Convention::Direct => "direct".to_string(),
            Convention::Schrodinger => "schrodinger".to_string(),
        },
    );
    put("alpha", fmt_complex(p.alpha));
    put("beta1", fmt_complex(p.beta1));
    put("beta2", fmt_complex(p.beta2));
    put("beta1p", fmt_complex(p.beta1p));
    put("beta2p", fmt_complex(p.beta2p));
    if !p.phi.is_empty() {
        put("phi", fmt_poly(&p.phi));
    }
    put("lambda0", fmt_complex(p.lambda0));
}

#[cfg_attr(not(test), allow(dead_code))]
fn region_lines(put: &mut impl FnMut(&str, String), r: &Region) {
    put("re-min", format!("{}", r.re_min));
    put("re-max", format!("{}", r.re_max));
    put("im-min", format!("{}", r.im_min));
    put("im-max", format!("{}", r.im_max));
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_problem() -> ProblemConfig {
        ProblemConfig {
            a: 0.0,
            b: std::f64::consts::PI,
            m: 3000,
            potential: ExprVal::parse("0").unwrap(),
            n: 100,
            convention: Convention::Schrodinger,
            alpha: c(0.0, 0.0),
            beta1: c(1.0, 0.0),
            beta2: c(0.0, 0.0),
            beta1p: c(1.0, 0.0),
            beta2p: c(0.0, 0.0),
            phi: vec![c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
            lambda0: c(12.5, 0.0),
        }
    }

    fn sample_region() -> Region {
        Region {
            re_min: -2.0,
            re_max: 110.0,
            im_min: -1.5,
            im_max: 1.5,
        }
    }

    fn all_commands() -> Vec<CommandConfig> {
        vec![
            CommandConfig::SolveSl(SolveSlConfig {
                problem: sample_problem(),
                region: sample_region(),
                out: Some("eigen.csv".into()),
            }),
            CommandConfig::SolveWell(SolveWellConfig {
                width: 14.0,
                m: 3000,
                potential: ExprVal::parse("-12*sech(x-7)^2").unwrap(),
                alpha1: -4e-5,
                alpha2: -4e-5,
                n: 180,
                out: None,
            }),
            CommandConfig::CharMap(CharMapConfig {
                problem: sample_problem(),
                region: sample_region(),
                nx: 101,
                ny: 101,
                out: "map.csv".into(),
            }),
            CommandConfig::Powers(PowersConfig {
                a: 0.0,
                b: 1.0,
                m: 2000,
                potential: ExprVal::parse("2/(x+1)^2").unwrap(),
                order: 8,
                x0: Some(0.25),
                family: Family::Psi,
                out: "powers.csv".into(),
            }),
            CommandConfig::KernelConstant(KernelConstantConfig {
                c: c(1.0, 0.0),
                h: c(-0.5, 0.0),
                a: 2.0,
                nodes: 101,
                out: "k.csv".into(),
            }),
            CommandConfig::KernelGoursat(KernelGoursatConfig {
                a: 1.0,
                nodes: 61,
                m: Some(240),
                potential: ExprVal::parse("2/(x+1)^2").unwrap(),
                h: c(-1.0, 0.0),
                tol: 1e-9,
                out: "k.csv".into(),
            }),
            CommandConfig::KernelReparam(KernelReparamConfig {
                input: "k.csv".into(),
                h: c(0.0, 0.0),
                out: "k0.csv".into(),
            }),
            CommandConfig::KernelDarboux(KernelDarbouxConfig {
                input: "k.csv".into(),
                f: ExprVal::parse("1/(x+1)").unwrap(),
                out: "k2.csv".into(),
            }),
            CommandConfig::KernelChain(KernelChainConfig {
                steps: 3,
                a: 0.9,
                nodes: 81,
                out: "chain".into(),
            }),
            CommandConfig::KernelApply(KernelApplyConfig {
                input: "k.csv".into(),
                u: ExprVal::parse("cos(x/2)").unwrap(),
                out: "tu.csv".into(),
            }),
            CommandConfig::Dirac(DiracConfig {
                a: 0.0,
                b: 1.0,
                m: 1500,
                mass: 1.0,
                s: ExprVal::parse("x^2/10").unwrap(),
                e: c(0.75, 0.0),
                c1: c(1.0, 0.0),
                c2: c(0.0, 1.0),
                n: 40,
                out: "spinor.csv".into(),
            }),
        ]
    }

    #[test]
    fn serialize_then_load_is_identity_for_every_command() {
        for cfg in all_commands() {
            let text = cfg.serialize();
            let back = CommandConfig::load(cfg.section(), &text, &Overrides::default())
                .unwrap_or_else(|e| panic!("[{}] failed to re-load: {e}\n{text}", cfg.section()));
            assert_eq!(back, cfg, "round-trip for [{}]", cfg.section());
        }
    }

    #[test]
    fn defaults_fill_in_for_omitted_problem_keys() {
        let text = "[solve-sl]\na = 0\nb = 1\nm = 100\npotential = x\nn = 10\n\
                    re-min = 0\nre-max = 1\nim-min = 0\nim-max = 1\n";
        let CommandConfig::SolveSl(cfg) =
            CommandConfig::load("solve-sl", text, &Overrides::default()).unwrap()
        else {
            unreachable!()
        };
        assert_eq!(cfg.problem.convention, Convention::Direct);
        assert_eq!(cfg.problem.beta1, c(1.0, 0.0));
        assert_eq!(cfg.problem.beta2, c(0.0, 0.0));
        assert!(cfg.problem.phi.is_empty());
        assert_eq!(cfg.out, None);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# leading comment\n\n[kernel-chain]\n; another\nsteps = 2\n\na = 0.5\nnodes = 61\nout = c\n";
        assert!(CommandConfig::load("kernel-chain", text, &Overrides::default()).is_ok());
    }

    #[test]
    fn unknown_key_is_rejected_with_its_line() {
        let text = "[kernel-chain]\nsteps = 2\na = 0.5\nnodes = 61\nout = c\nwibble = 3\n";
        let e = CommandConfig::load("kernel-chain", text, &Overrides::default()).unwrap_err();
        assert!(e.0.contains("unknown key `wibble`"), "{e}");
        assert!(e.0.contains("line 6"), "{e}");
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let text = "[kernel-chain]\nsteps = 2\nsteps = 3\n";
        let e = CommandConfig::load("kernel-chain", text, &Overrides::default()).unwrap_err();
        assert!(e.0.contains("duplicate key `steps`"), "{e}");
    }

    #[test]
    fn missing_required_key_is_rejected() {
        let text = "[kernel-chain]\nsteps = 2\na = 0.5\nnodes = 61\n";
        let e = CommandConfig::load("kernel-chain", text, &Overrides::default()).unwrap_err();
        assert!(e.0.contains("missing required key `out`"), "{e}");
    }

    #[test]
    fn unknown_section_and_wrong_section_are_rejected() {
        let e = CommandConfig::load("dirac", "[dirc]\n", &Overrides::default()).unwrap_err();
        assert!(e.0.contains("unknown section [dirc]"), "{e}");

        let text = "[kernel-chain]\nsteps = 2\na = 0.5\nnodes = 61\nout = c\n";
        let e = CommandConfig::load("dirac", text, &Overrides::default()).unwrap_err();
        assert!(e.0.contains("this command reads [dirac]"), "{e}");
    }

    #[test]
    fn key_before_section_is_rejected() {
        let e = CommandConfig::load("dirac", "a = 1\n[dirac]\n", &Overrides::default())
            .unwrap_err();
        assert!(e.0.contains("before any [section]"), "{e}");
    }

    #[test]
    fn flags_override_and_supply_keys() {
        let text = "[kernel-chain]\nsteps = 2\na = 0.5\nnodes = 61\n";
        let ov = Overrides {
            out: Some("elsewhere".into()),
            ..Overrides::default()
        };
        let CommandConfig::KernelChain(cfg) =
            CommandConfig::load("kernel-chain", text, &ov).unwrap()
        else {
            unreachable!()
        };
        assert_eq!(cfg.out, "elsewhere");
    }

    #[test]
    fn inapplicable_flag_is_rejected() {
        let text = "[kernel-chain]\nsteps = 2\na = 0.5\nnodes = 61\nout = c\n";
        let ov = Overrides {
            nx: Some(7),
            ..Overrides::default()
        };
        let e = CommandConfig::load("kernel-chain", text, &ov).unwrap_err();
        assert!(e.0.contains("`nx` does not apply"), "{e}");
    }

    #[test]
    fn expression_errors_surface_with_position() {
        let text = "[kernel-apply]\ninput = k.csv\nu = cos(x\nout = t.csv\n";
        let e = CommandConfig::load("kernel-apply", text, &Overrides::default()).unwrap_err();
        assert!(e.0.contains("key `u`"), "{e}");
        assert!(e.0.contains("byte"), "{e}");
    }

    #[test]
    fn complex_values_need_exactly_two_fields() {
        for bad in ["1", "1 2 3", "1 fish"] {
            let text = format!("[kernel-reparam]\ninput = k\nh = {bad}\nout = o\n");
            let e = CommandConfig::load("kernel-reparam", &text, &Overrides::default())
                .unwrap_err();
            assert!(e.0.contains("expected `re im`"), "{bad}: {e}");
        }
    }

    #[test]
    fn second_section_is_rejected() {
        let text = "[dirac]\n[kernel-chain]\n";
        let e = CommandConfig::load("dirac", text, &Overrides::default()).unwrap_err();
        assert!(e.0.contains("one section per file"), "{e}");
    }
}
