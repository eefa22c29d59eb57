//! Experiment configs and the command runner shared by the CLI and tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::energy::{classify, minimize_energy};
use crate::harness::{graph_radius, growth_report, SizeRow, DEFAULT_BUDGET};
use crate::mode::{length_opt, Mode, Resolved};
use crate::periodicity::{intrinsic_period, is_biperiodic, is_periodic, pingpong_certify};
use crate::reduction::{median_split, reduce_graph, reduce_tree};
use crate::spaces::{ActionSpace, GraphSpec, Length, Point, SpaceError};
use crate::suite;
use crate::treeapprox::approximate_tree;
use crate::words::{ElementSet, GroupElement, Presentation, WordError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    FreeGroupTree {
        rank: usize,
        #[serde(default, with = "length_opt", skip_serializing_if = "Option::is_none")]
        rho0: Option<Length>,
        #[serde(default, with = "length_opt", skip_serializing_if = "Option::is_none")]
        kappa0: Option<Length>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n0: Option<u64>,
    },
    /// Orders of the two factors; `null` for an infinite cyclic factor.
    FreeProductTree {
        orders: [Option<u32>; 2],
        #[serde(default, with = "length_opt", skip_serializing_if = "Option::is_none")]
        rho0: Option<Length>,
        #[serde(default, with = "length_opt", skip_serializing_if = "Option::is_none")]
        kappa0: Option<Length>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n0: Option<u64>,
    },
    Graph {
        graph: GraphSpec,
        #[serde(default, with = "length_opt", skip_serializing_if = "Option::is_none")]
        rho0: Option<Length>,
        #[serde(default, with = "length_opt", skip_serializing_if = "Option::is_none")]
        kappa0: Option<Length>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n0: Option<u64>,
    },
}

impl SpaceSpec {
    pub fn build(&self) -> Result<ActionSpace, SpaceError> {
        let one = Length::from_integer(1);
        let tree = |s: ActionSpace, kappa0: &Option<Length>, n0: &Option<u64>| {
            if kappa0.is_some() || n0.is_some() {
                let k = kappa0.unwrap_or(s.constants().kappa0);
                let n = n0.unwrap_or(s.constants().n0);
                s.with_constants(k, n)
            } else {
                Ok(s)
            }
        };
        match self {
            SpaceSpec::FreeGroupTree { rank, rho0, kappa0, n0 } => {
                tree(ActionSpace::free_group_tree(*rank, rho0.unwrap_or(one))?, kappa0, n0)
            }
            SpaceSpec::FreeProductTree { orders, rho0, kappa0, n0 } => {
                tree(ActionSpace::free_product_tree(*orders, rho0.unwrap_or(one))?, kappa0, n0)
            }
            SpaceSpec::Graph { graph, rho0, kappa0, n0 } => ActionSpace::graph(graph, *rho0, *kappa0, n0.unwrap_or(1)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Explicit { elements: Vec<String> },
    /// `{g^-N, …, g^N, h}`.
    Safin { n: u32 },
    /// `count` distinct normal forms, each uniform among normal forms of
    /// length at most `max_length`, from a ChaCha8 stream seeded by `seed`.
    Random { seed: u64, count: usize, max_length: usize },
}

impl SetSpec {
    pub fn build(&self, pres: &Presentation, seed_override: Option<u64>) -> Result<ElementSet, ConfigError> {
        match self {
            SetSpec::Explicit { elements } => Ok(pres.parse_set(elements)?),
            SetSpec::Safin { n } => Ok(pres.safin_family(*n)?.0),
            SetSpec::Random { seed, count, max_length } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed_override.unwrap_or(*seed));
                random_set(pres, &mut rng, *count, *max_length)
            }
        }
    }
}

/// Distinct uniform samples; fails if the ball is too small for `count`.
pub fn random_set(pres: &Presentation, rng: &mut ChaCha8Rng, count: usize, max_length: usize) -> Result<ElementSet, ConfigError> {
    let mut out = std::collections::BTreeSet::new();
    let mut tries = 0usize;
    while out.len() < count {
        out.insert(pres.random_element(rng, max_length));
        tries += 1;
        if tries > 100 * count + 1000 {
            return Err(ConfigError::Invalid(format!(
                "could not draw {count} distinct elements of length <= {max_length}"
            )));
        }
    }
    Ok(ElementSet::new(out.into_iter().collect()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Growth,
    Energy,
    Reduce,
    Period,
    Pingpong,
    Treeapprox,
    VerifyAll,
}

/// Arguments used by individual commands.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandParams {
    /// Period root (period, pingpong).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
    /// The element t of ping-pong.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<String>,
    /// Base point: a word, `word.A` / `word.B` for free product trees, or `vN`.
    /// Defaults to the energy minimiser (energy, reduce) or the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_point: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// File stem of `<stem>.json` and `<stem>.csv`. Default "report".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

fn default_n_max() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<SetSpec>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: CommandParams,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self, ConfigError> {
        let c: Self = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_max == 0 {
            return Err(ConfigError::Invalid("n_max must be at least 1".into()));
        }
        if self.command != Command::VerifyAll && (self.space.is_none() || self.set.is_none()) {
            return Err(ConfigError::Invalid("space and set are required".into()));
        }
        Ok(())
    }

    pub fn budget(&self) -> usize {
        self.budget.unwrap_or(DEFAULT_BUDGET)
    }
}

/// Outcome classes mapped to process exit codes by the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Violation,
    Budget,
    SuiteFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::SuiteFailure => 1,
            Status::Violation => 2,
            Status::Budget => 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub config_echo: ExperimentConfig,
    pub status: Status,
    pub space: Value,
    pub thresholds: Value,
    pub profile: Value,
    pub case_trace: Vec<String>,
    pub sizes: Vec<SizeRow>,
    pub bounds: Value,
    pub certificates: Vec<Value>,
    pub violations: Vec<String>,
}

pub fn parse_point(space: &ActionSpace, s: &str) -> Result<Point, ConfigError> {
    let pres = space.presentation();
    let p = if let Some(v) = s.strip_prefix('v').and_then(|r| r.parse::<u32>().ok()) {
        Point::Vertex(v)
    } else if let Some((w, t)) = s.rsplit_once('.') {
        let t = match t {
            "A" => 0,
            "B" => 1,
            _ => return Err(ConfigError::Invalid(format!("bad coset tag in {s:?}"))),
        };
        Point::Coset(pres.parse(w)?, t)
    } else {
        Point::Word(pres.parse(s)?)
    };
    space.check_point(&p)?;
    Ok(p)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialise")
}

fn space_summary(space: &ActionSpace) -> Value {
    let c = space.constants();
    json!({
        "backend": space.backend_name(),
        "delta": c.delta.to_string(),
        "rho0": c.rho0.to_string(),
        "kappa0": c.kappa0.to_string(),
        "n0": c.n0,
    })
}

/// Runs one experiment. Errors are config errors (exit 4).
pub fn run(config: &ExperimentConfig) -> Result<Report, ConfigError> {
    config.validate()?;
    let mut report = Report {
        config_echo: config.clone(),
        status: Status::Ok,
        space: Value::Null,
        thresholds: Value::Null,
        profile: Value::Null,
        case_trace: Vec::new(),
        sizes: Vec::new(),
        bounds: Value::Null,
        certificates: Vec::new(),
        violations: Vec::new(),
    };
    if config.command == Command::VerifyAll {
        let s = suite::run_suite(config.seed.unwrap_or(suite::DEFAULT_SEED));
        report.case_trace = s.iter().map(|c| format!("criterion {}: {}", c.id, if c.passed { "pass" } else { "fail" })).collect();
        if s.iter().any(|c| !c.passed) {
            report.status = Status::SuiteFailure;
        }
        report.certificates = s.iter().map(to_value).collect();
        return Ok(report);
    }
    let space = config.space.as_ref().unwrap().build()?;
    let pres = space.presentation();
    let u = config.set.as_ref().unwrap().build(pres, config.seed)?;
    if u.is_empty() {
        return Err(ConfigError::Invalid("empty element set".into()));
    }
    let params = Resolved::new(&space, &config.mode, u.len());
    let budget = config.budget();
    report.space = space_summary(&space);
    report.thresholds = to_value(&params);
    let base = match &config.params.base_point {
        Some(s) => Some(parse_point(&space, s)?),
        None => None,
    };
    let parse = |s: &Option<String>, what: &str| -> Result<GroupElement, ConfigError> {
        match s {
            Some(w) => Ok(pres.parse(w)?),
            None => Err(ConfigError::Invalid(format!("params.{what} is required"))),
        }
    };
    let mut truncated = false;
    match config.command {
        Command::Growth => {
            let g = growth_report(&space, &u, config.n_max, &params, budget)?;
            truncated = g.truncated();
            report.profile = to_value(&g.profile);
            report.case_trace = g.case_trace.clone();
            report.sizes = g.sizes.clone();
            report.bounds = json!({
                "theorem": g.theorem,
                "form": g.bound_form,
                "alpha": g.alpha,
                "entropy_lb": g.entropy_lb,
                "hypotheses": g.hypotheses,
                "hypotheses_certified": g.hypotheses_certified,
                "applicable": g.applicable,
                "not_applicable": g.not_applicable,
            });
            report.violations = g.violations.clone();
            if let Some(c) = &g.concentrated {
                report.certificates.push(json!({"kind": "concentrated", "report": c}));
            }
            if let Some(d) = &g.diffuse {
                report.certificates.push(json!({"kind": "diffuse", "report": d}));
            }
            if let Some(c) = &g.classification {
                report.certificates.push(json!({"kind": "classification", "report": c}));
            }
        }
        Command::Energy => {
            let p = minimize_energy(&space, &u)?;
            let c = classify(&space, &u, &p, &params);
            report.case_trace.push(crate::ser::tag(&c.case));
            report.profile = to_value(&p);
            report.certificates.push(json!({"kind": "classification", "report": c}));
        }
        Command::Reduce => {
            let x0 = match base {
                Some(x) => x,
                None => {
                    let p = minimize_energy(&space, &u)?;
                    report.profile = to_value(&p);
                    p.base_point
                }
            };
            let red = if space.is_tree() {
                reduce_tree(&space, &u, &x0, params.reduction_r)
            } else {
                reduce_graph(&space, &u, &x0, graph_radius(&space, u.len(), &params))
            };
            report.case_trace.push(if red.is_failed() { "reduction_failed" } else { "reduced" }.into());
            if !red.is_failed() {
                let (m1, m2) = median_split(&space, &red.u1, &red.u2, &x0)?;
                report.certificates.push(json!({"kind": "median_split", "u1": m1, "u2": m2}));
            }
            report.certificates.insert(0, json!({"kind": "reduction", "report": red}));
        }
        Command::Period => {
            let x0 = base.unwrap_or_else(|| space.origin());
            for v in &u {
                let r = match &config.params.root {
                    Some(root) => is_periodic(&space, v, &pres.parse(root)?, &x0, &params),
                    None => intrinsic_period(&space, v, &x0, &params),
                };
                report.certificates.push(match r {
                    Ok(c) => json!({"kind": "period", "element": v.to_string(), "certificate": c}),
                    Err(e) => json!({"kind": "period", "element": v.to_string(), "refusal": e}),
                });
            }
            if u.len() >= 2 && config.params.root.is_none() {
                report.certificates.push(match is_biperiodic(&space, &u, &x0, &params) {
                    Ok(w) => json!({"kind": "biperiodic", "witness": w}),
                    Err(e) => json!({"kind": "biperiodic", "refusal": e}),
                });
            }
        }
        Command::Pingpong => {
            let x0 = base.unwrap_or_else(|| space.origin());
            let root = parse(&config.params.root, "root")?;
            let t = parse(&config.params.t, "t")?;
            let n = config.n_max as u32;
            match pingpong_certify(&space, &u, &root, &t, n, &x0, &params, budget) {
                Ok(p) => {
                    truncated = p.truncated;
                    if p.certified && !p.counts_exact {
                        report.violations.push("ping-pong certificate contradicted by enumeration".into());
                    }
                    report.case_trace.push(if p.certified { "certified" } else { "not_certified" }.into());
                    report.certificates.push(json!({"kind": "pingpong", "report": p}));
                }
                Err(e) => {
                    report.case_trace.push("refused".into());
                    report.certificates.push(json!({"kind": "pingpong", "refusal": e}));
                }
            }
        }
        Command::Treeapprox => {
            let x0 = base.unwrap_or_else(|| space.origin());
            let targets: Vec<Point> = u.iter().map(|g| space.act(g, &x0)).collect();
            let t = approximate_tree(&space, &x0, &targets);
            let d = t.distortion_report(&space);
            if !d.ok {
                report.violations.push("approximation tree exceeds its distortion bound".into());
            }
            report.certificates.push(json!({"kind": "treeapprox", "distortion": d, "tree": t.to_json()}));
        }
        Command::VerifyAll => unreachable!(),
    }
    report.status = if !report.violations.is_empty() {
        Status::Violation
    } else if truncated {
        Status::Budget
    } else {
        Status::Ok
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_config_round_trip() {
        let c = ExperimentConfig::from_json(
            r#"{"command":"growth","space":{"backend":"free_group_tree","rank":2},
                "set":{"kind":"safin","n":4},"n_max":3}"#,
        )
        .unwrap();
        let r = run(&c).unwrap();
        assert_eq!(r.status, Status::Ok);
        assert_eq!(r.sizes.len(), 3);
        assert_eq!(r.sizes[0].size, 10);
    }

    #[test]
    fn unknown_keys_and_backends_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"command":"growth","bogus":1}"#).is_err());
        assert!(ExperimentConfig::from_json(
            r#"{"command":"growth","space":{"backend":"lattice"},"set":{"kind":"safin","n":2}}"#
        )
        .is_err());
        assert!(ExperimentConfig::from_json(r#"{"command":"growth"}"#).is_err());
    }

    #[test]
    fn points_parse() {
        let s = ActionSpace::free_product_tree([Some(5), Some(7)], Length::from_integer(1)).unwrap();
        assert_eq!(parse_point(&s, "ba.B").unwrap().to_string(), "ba.B");
        assert!(parse_point(&s, "ab.B").is_err());
        assert!(parse_point(&s, "ab").is_err());
    }

    #[test]
    fn random_sets_are_reproducible() {
        let p = Presentation::free_group(2).unwrap();
        let spec = SetSpec::Random { seed: 5, count: 20, max_length: 6 };
        assert_eq!(spec.build(&p, None).unwrap(), spec.build(&p, None).unwrap());
        assert_ne!(spec.build(&p, None).unwrap(), spec.build(&p, Some(6)).unwrap());
    }
}
