//! Flat `key=value` model configs.
//!
//! Several pairs may share a line; `#` starts a comment. Exactly one of
//! `family=<tag>`, `spec=<kind>` or `pmf=<path>` selects the model.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use countcompat::compat::{CarSpec, RandomCoeffSpec};
use countcompat::families::{FamilyDescriptor, MarkovChainParams, ThetaFamilyParams};
use countcompat::linalg::Matrix;
use countcompat::{CountDistribution, Error, LinearCe};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub origin: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {}", self.origin, l, self.message),
            None => write!(f, "{}: {}", self.origin, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
pub enum Model {
    Family(FamilyDescriptor),
    LinearCe(LinearCe),
    LinearPoisson { a: f64, b: f64, c: f64, d: f64 },
    Car(CarSpec),
    RandomCoeff(RandomCoeffSpec),
    Pmf(PathBuf),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Family(_) => "family",
            Model::LinearCe(_) => "linear_ce",
            Model::LinearPoisson { .. } => "linear_poisson",
            Model::Car(_) => "car",
            Model::RandomCoeff(_) => "random_coeff",
            Model::Pmf(_) => "pmf",
        }
    }
}

struct Entry {
    value: String,
    line: usize,
}

struct Pairs {
    origin: String,
    entries: BTreeMap<String, Entry>,
    selector_line: usize,
}

impl Pairs {
    fn err(&self, line: Option<usize>, message: impl Into<String>) -> ConfigError {
        ConfigError {
            origin: self.origin.clone(),
            line,
            message: message.into(),
        }
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(self.selector_line, |e| e.line)
    }

    fn allow(&self, keys: &[&str]) -> Result<(), ConfigError> {
        for (k, e) in &self.entries {
            if !keys.contains(&k.as_str()) {
                return Err(self.err(Some(e.line), format!("unknown key `{k}` (expected one of {})", keys.join(", "))));
            }
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Result<&Entry, ConfigError> {
        self.entries
            .get(key)
            .ok_or_else(|| self.err(Some(self.selector_line), format!("missing required key `{key}`")))
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn num(&self, key: &str) -> Result<f64, ConfigError> {
        let e = self.raw(key)?;
        parse_f64(&e.value).map_err(|m| self.err(Some(e.line), format!("`{key}`: {m}")))
    }

    fn num_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        if self.has(key) {
            self.num(key)
        } else {
            Ok(default)
        }
    }

    fn count(&self, key: &str) -> Result<usize, ConfigError> {
        let e = self.raw(key)?;
        e.value
            .parse::<usize>()
            .map_err(|_| self.err(Some(e.line), format!("`{key}` must be a non-negative integer, got `{}`", e.value)))
    }

    fn list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let e = self.raw(key)?;
        e.value
            .split(',')
            .map(parse_f64)
            .collect::<Result<_, _>>()
            .map_err(|m| self.err(Some(e.line), format!("`{key}`: {m}")))
    }

    fn law(&self, key: &str) -> Result<CountDistribution, ConfigError> {
        let e = self.raw(key)?;
        parse_law(&e.value).map_err(|m| self.err(Some(e.line), format!("`{key}`: {m}")))
    }

    /// Maps a core error to the line of the key it names, if any.
    fn core(&self, e: Error) -> ConfigError {
        let line = match &e {
            Error::ParameterDomain { name, .. } if self.has(name) => self.line_of(name),
            _ => self.selector_line,
        };
        self.err(Some(line), e.to_string())
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a finite number")),
    }
}

/// `poisson:2`, `nb:r,p`, `geometric:p`, `bernoulli:p`, `theta_ratio:num,den`,
/// `beta_nb:r,a1,a2`, `degenerate:k`.
pub fn parse_law(s: &str) -> Result<CountDistribution, String> {
    let (name, args) = s
        .split_once(':')
        .ok_or_else(|| format!("law `{s}` must look like name:params"))?;
    let v: Vec<f64> = args.split(',').map(parse_f64).collect::<Result<_, _>>()?;
    let want = |n: usize| {
        if v.len() == n {
            Ok(())
        } else {
            Err(format!("law `{name}` takes {n} parameter(s), got {}", v.len()))
        }
    };
    let d = match name {
        "poisson" => {
            want(1)?;
            CountDistribution::Poisson { lambda: v[0] }
        }
        "nb" => {
            want(2)?;
            CountDistribution::NegBinomial { r: v[0], p: v[1] }
        }
        "geometric" => {
            want(1)?;
            CountDistribution::Geometric { p: v[0] }
        }
        "bernoulli" => {
            want(1)?;
            CountDistribution::Bernoulli { p: v[0] }
        }
        "theta_ratio" => {
            want(2)?;
            CountDistribution::ThetaRatio {
                theta_num: v[0],
                theta_den: v[1],
            }
        }
        "beta_nb" => {
            want(3)?;
            CountDistribution::BetaNB {
                r: v[0],
                alpha1: v[1],
                alpha2: v[2],
            }
        }
        "degenerate" => {
            want(1)?;
            if v[0] < 0.0 || v[0].fract() != 0.0 {
                return Err(format!("degenerate value must be a count, got {}", v[0]));
            }
            CountDistribution::Degenerate { k: v[0] as u64 }
        }
        other => return Err(format!("unknown law `{other}`")),
    };
    d.validate().map_err(|e| e.to_string())?;
    Ok(d)
}

pub fn parse_model_config(path: &Path) -> Result<Model, ConfigError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        origin: origin.clone(),
        line: None,
        message: format!("cannot read config: {e}"),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_model_str(&text, &origin, base)
}

/// Parses config text; relative `pmf=` paths resolve against `base`.
pub fn parse_model_str(text: &str, origin: &str, base: &Path) -> Result<Model, ConfigError> {
    let mut entries = BTreeMap::new();
    let mut selector: Option<(String, String, usize)> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('#').next().unwrap_or("");
        for token in body.split_whitespace() {
            let err = |message: String| ConfigError {
                origin: origin.to_string(),
                line: Some(line),
                message,
            };
            let (k, v) = token
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got `{token}`")))?;
            if k.is_empty() || v.is_empty() {
                return Err(err(format!("empty key or value in `{token}`")));
            }
            let k = canonical_key(k);
            if matches!(k.as_str(), "family" | "spec" | "pmf") {
                if let Some((sk, _, sl)) = &selector {
                    return Err(err(format!("`{k}` conflicts with `{sk}` declared on line {sl}")));
                }
                selector = Some((k, v.to_string(), line));
                continue;
            }
            if let Some(prev) = entries.insert(k.clone(), Entry { value: v.to_string(), line }) {
                return Err(err(format!("duplicate key `{k}` (first set on line {})", prev.line)));
            }
        }
    }
    let Some((kind, tag, selector_line)) = selector else {
        return Err(ConfigError {
            origin: origin.to_string(),
            line: None,
            message: "config must declare one of family=, spec= or pmf=".into(),
        });
    };
    let p = Pairs {
        origin: origin.to_string(),
        entries,
        selector_line,
    };
    match kind.as_str() {
        "family" => parse_family(&p, &tag).map(Model::Family),
        "pmf" => {
            p.allow(&[])?;
            Ok(Model::Pmf(base.join(tag)))
        }
        _ => parse_spec(&p, &tag),
    }
}

fn canonical_key(k: &str) -> String {
    match k {
        "w_xy" => "w01",
        "w_yx" => "w10",
        "eps" => "eps0",
        "eta" => "eps1",
        "beta_xy" => "beta01",
        "beta_yx" => "beta10",
        other => other,
    }
    .to_string()
}

fn parse_family(p: &Pairs, tag: &str) -> Result<FamilyDescriptor, ConfigError> {
    let d = match tag {
        "independent_poisson" => {
            p.allow(&["lambda_x", "lambda_y"])?;
            FamilyDescriptor::IndependentPoisson {
                lambda_x: p.num("lambda_x")?,
                lambda_y: p.num("lambda_y")?,
            }
        }
        "trivariate_poisson" => {
            p.allow(&["lambda0", "lambda1", "lambda2"])?;
            FamilyDescriptor::TrivariatePoisson {
                lambda0: p.num("lambda0")?,
                lambda1: p.num("lambda1")?,
                lambda2: p.num("lambda2")?,
            }
        }
        "poisson_gamma" => {
            p.allow(&["alpha", "beta", "lambdas"])?;
            FamilyDescriptor::PoissonGamma {
                alpha: p.num("alpha")?,
                beta: p.num("beta")?,
                lambdas: p.list("lambdas")?,
            }
        }
        "theta" => {
            p.allow(&["delta", "theta1", "theta2", "theta3", "theta4"])?;
            for (hi, lo) in [("theta1", "theta2"), ("theta3", "theta4")] {
                if p.has(hi) && p.has(lo) {
                    let (h, l) = (p.num(hi)?, p.num(lo)?);
                    if !(h > l) {
                        return Err(p.err(
                            Some(p.line_of(hi)),
                            format!("invariant {hi} > {lo} violated ({hi} = {h}, {lo} = {l})"),
                        ));
                    }
                }
            }
            let params = ThetaFamilyParams::new(
                p.num_or("delta", 1.0)?,
                p.num("theta1")?,
                p.num_or("theta2", 0.0)?,
                p.num("theta3")?,
                p.num_or("theta4", 0.0)?,
            )
            .map_err(|e| p.core(e))?;
            FamilyDescriptor::Theta(params)
        }
        "trivariate_nb" => {
            p.allow(&["alpha", "beta1", "beta2", "theta"])?;
            FamilyDescriptor::TrivariateNb {
                alpha: p.num("alpha")?,
                beta1: p.num("beta1")?,
                beta2: p.num("beta2")?,
                theta: p.num("theta")?,
            }
        }
        "beta_nb" => {
            p.allow(&["r1", "r2", "alpha1", "alpha2"])?;
            FamilyDescriptor::BetaNb {
                r1: p.num("r1")?,
                r2: p.num("r2")?,
                alpha1: p.num("alpha1")?,
                alpha2: p.num("alpha2")?,
            }
        }
        "multinomial_mix" | "joint_mix" => {
            p.allow(&["size", "p1", "p2", "p3"])?;
            let size = p.count("size")?;
            let probs = [p.num("p1")?, p.num("p2")?, p.num("p3")?];
            if tag == "joint_mix" {
                FamilyDescriptor::JointMix { size, p: probs }
            } else {
                FamilyDescriptor::MultinomialMix { size, p: probs }
            }
        }
        "markov_chain" => {
            p.allow(&["delta", "p0", "p1", "p2"])?;
            let m = MarkovChainParams::new(p.num("delta")?, p.num("p0")?, p.num("p1")?, p.num("p2")?)
                .map_err(|e| p.core(e))?;
            FamilyDescriptor::MarkovChain(m)
        }
        other => return Err(p.err(Some(p.selector_line), format!("unknown family tag `{other}`"))),
    };
    d.validate().map_err(|e| p.core(e))?;
    Ok(d)
}

fn dim(p: &Pairs) -> Result<usize, ConfigError> {
    let n = if p.has("n") { p.count("n")? } else { 2 };
    if n < 2 {
        return Err(p.err(Some(p.line_of("n")), format!("n must be at least 2, got {n}")));
    }
    Ok(n)
}

fn indexed_keys(prefix: &str, n: usize) -> Vec<String> {
    let mut keys = vec!["n".to_string()];
    for i in 0..n {
        keys.push(format!("eps{i}"));
        for j in (0..n).filter(|&j| j != i) {
            keys.push(format!("{prefix}{i}{j}"));
        }
    }
    keys
}

fn parse_spec(p: &Pairs, tag: &str) -> Result<Model, ConfigError> {
    match tag {
        "linear_ce" => {
            let n = dim(p)?;
            if n == 2 && !p.has("slopes") {
                p.allow(&["n", "a", "b", "c", "d"])?;
                let spec = LinearCe::bivariate(p.num("a")?, p.num("b")?, p.num("c")?, p.num("d")?)
                    .map_err(|e| p.core(e))?;
                return Ok(Model::LinearCe(spec));
            }
            p.allow(&["n", "slopes", "intercepts"])?;
            let s = p.list("slopes")?;
            let b = p.list("intercepts")?;
            if s.len() != n * n {
                return Err(p.err(Some(p.line_of("slopes")), format!("slopes needs {} entries, got {}", n * n, s.len())));
            }
            if b.len() != n {
                return Err(p.err(Some(p.line_of("intercepts")), format!("intercepts needs {n} entries, got {}", b.len())));
            }
            let rows: Vec<Vec<f64>> = s.chunks(n).map(<[f64]>::to_vec).collect();
            let spec = LinearCe::new(Matrix::from_rows(&rows), b).map_err(|e| p.core(e))?;
            Ok(Model::LinearCe(spec))
        }
        "linear_poisson" => {
            p.allow(&["a", "b", "c", "d"])?;
            let v = [p.num("a")?, p.num("b")?, p.num("c")?, p.num("d")?];
            for (k, x) in ["a", "b", "c", "d"].iter().zip(v) {
                if x < 0.0 {
                    return Err(p.err(Some(p.line_of(k)), format!("`{k}` must be >= 0, got {x}")));
                }
            }
            Ok(Model::LinearPoisson {
                a: v[0],
                b: v[1],
                c: v[2],
                d: v[3],
            })
        }
        "car" => {
            let n = dim(p)?;
            let keys = indexed_keys("w", n);
            p.allow(&keys.iter().map(String::as_str).collect::<Vec<_>>())?;
            let eps = (0..n).map(|i| p.law(&format!("eps{i}"))).collect::<Result<Vec<_>, _>>()?;
            let mut w = vec![CountDistribution::Degenerate { k: 0 }; n * n];
            for i in 0..n {
                for j in (0..n).filter(|&j| j != i) {
                    w[i * n + j] = p.law(&format!("w{i}{j}"))?;
                }
            }
            let spec = CarSpec::new(eps, |i, j| w[i * n + j]).map_err(|e| p.core(e))?;
            Ok(Model::Car(spec))
        }
        "random_coeff" => {
            let n = dim(p)?;
            let keys = indexed_keys("beta", n);
            p.allow(&keys.iter().map(String::as_str).collect::<Vec<_>>())?;
            let eps = (0..n).map(|i| p.law(&format!("eps{i}"))).collect::<Result<Vec<_>, _>>()?;
            let mut b = vec![(0.0, 0.0); n * n];
            for i in 0..n {
                for j in (0..n).filter(|&j| j != i) {
                    let key = format!("beta{i}{j}");
                    let v = p.list(&key)?;
                    if v.len() != 2 {
                        return Err(p.err(Some(p.line_of(&key)), format!("`{key}` needs two beta parameters a,b")));
                    }
                    b[i * n + j] = (v[0], v[1]);
                }
            }
            let spec = RandomCoeffSpec::new(eps, |i, j| b[i * n + j]).map_err(|e| p.core(e))?;
            Ok(Model::RandomCoeff(spec))
        }
        other => Err(p.err(Some(p.selector_line), format!("unknown spec kind `{other}`"))),
    }
}
