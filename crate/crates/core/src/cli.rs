//! The `shallow-ident` command line.
//!
//! Exit codes: 0 on success, 2 on a domain error, 3 on a parse or usage
//! error. Failures print `{"error":{"kind":…,"message":…}}` on stderr.
//! Output files are written through a temporary file in the target
//! directory and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analytic::{
    build_analytic_plan, canonicalize_analytic, check_admissible_analytic, exp_sum_for_net, test_equivalent_analytic,
    verify_identification, AnalyticSamplePlan, DEFAULT_PLAN_CAP,
};
use crate::error::{Error, Result};
use crate::net::{from_json_str, group, to_json_string, ShallowNet};
use crate::numerics::ToleranceConfig;
use crate::relu_adversary::build_pair;
use crate::relu_sampling::{plan_for, reconstruct, LabeledSamples, SamplePlan};
use crate::relu_structure::{check_admissible, reduce_fully, test_equivalent, test_reducible};

#[derive(Debug, Parser)]
#[command(
    name = "shallow-ident",
    version,
    about = "Identifiability toolkit for two-layer networks"
)]
pub struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub tol_rank: Option<f64>,
    #[arg(long, global = true)]
    pub tol_match: Option<f64>,
    #[arg(long, global = true)]
    pub tol_residual: Option<f64>,
    /// Largest number of points an analytic plan may have.
    #[arg(long, global = true, default_value_t = DEFAULT_PLAN_CAP)]
    pub cap: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide irreducibility (relu) or admissibility (sigmoid/tanh).
    Check {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rewrite a relu network to an irreducible one.
    Reduce {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Test equivalence of two networks.
    Equiv {
        #[arg(long)]
        net1: PathBuf,
        #[arg(long)]
        net2: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a relu sample plan for a network's hyperplanes.
    PlanRelu {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a network on a relu sample plan.
    Sample {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct a relu network from labeled samples.
    Reconstruct {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Network to compare the reconstruction against.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Build two relu networks that agree on the given points.
    Adversary {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the sample plan identifying sigmoid/tanh networks.
    PlanAnalytic {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two sigmoid/tanh networks on an analytic plan.
    VerifyAnalytic {
        #[arg(long)]
        net1: PathBuf,
        #[arg(long)]
        net2: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exponential-sum expansion of a one-dimensional sigmoid/tanh network.
    Expsum {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointsFile {
    Wrapped { points: Vec<Vec<f64>> },
    Bare(Vec<Vec<f64>>),
}

#[derive(Serialize)]
struct CheckReport<T: Serialize> {
    activation: String,
    neurons: usize,
    irreducible: bool,
    detail: T,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))
}

fn read_net(path: &Path) -> Result<ShallowNet> {
    ShallowNet::from_json(&read(path)?)
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| Error::Input(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn tolerances(cli: &Cli) -> Result<ToleranceConfig> {
    let mut tol = ToleranceConfig::default();
    if let Some(v) = cli.tol_rank {
        tol.rank_tol = v;
    }
    if let Some(v) = cli.tol_match {
        tol.match_tol = v;
    }
    if let Some(v) = cli.tol_residual {
        tol.residual_tol = v;
    }
    tol.validate()?;
    Ok(tol)
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let tol = tolerances(cli)?;
    let say = |out: &mut dyn Write, line: String| {
        // A closed stdout must not turn a finished computation into a failure.
        let _ = writeln!(out, "{line}");
    };
    match &cli.command {
        Command::Check { net, out: path } => {
            let net = read_net(net)?;
            let report = if net.activation.is_analytic() {
                let adm = check_admissible_analytic(&net, &tol)?;
                say(
                    out,
                    if adm.admissible {
                        "irreducible".into()
                    } else {
                        format!("reducible ({} violations)", adm.violations.len())
                    },
                );
                to_json_string(&CheckReport {
                    activation: net.activation.to_string(),
                    neurons: net.m(),
                    irreducible: adm.admissible,
                    detail: adm,
                })
            } else {
                let adm = check_admissible(&net, &tol);
                if !adm.admissible {
                    say(out, format!("reducible (inadmissible: {})", adm.violations[0]));
                    to_json_string(&CheckReport {
                        activation: net.activation.to_string(),
                        neurons: net.m(),
                        irreducible: false,
                        detail: adm,
                    })
                } else {
                    let g = group(&net, &tol)?;
                    let witness = test_reducible(&g, &tol);
                    match &witness {
                        None => say(out, "irreducible".into()),
                        Some(w) => say(
                            out,
                            format!("reducible ({:?}, {} -> {} neurons)", w.case, net.m(), w.reduced_count),
                        ),
                    }
                    to_json_string(&CheckReport {
                        activation: net.activation.to_string(),
                        neurons: net.m(),
                        irreducible: witness.is_none(),
                        detail: json!({ "witness": witness }),
                    })
                }
            };
            if let Some(p) = path {
                write_atomic(p, &report)?;
            }
        }
        Command::Reduce { net, out: path } => {
            let net = read_net(net)?;
            let reduced = reduce_fully(&net, &tol)?;
            write_atomic(path, &reduced.to_json())?;
            say(out, format!("neurons: {} -> {}", net.m(), reduced.m()));
        }
        Command::Equiv { net1, net2, out: path } => {
            let (n1, n2) = (read_net(net1)?, read_net(net2)?);
            let body = if n1.activation.is_analytic() || n2.activation.is_analytic() {
                let eq = test_equivalent_analytic(&n1, &n2, &tol)?;
                say(out, format!("equivalent: {eq}"));
                let forms = if eq {
                    Some((canonicalize_analytic(&n1, &tol)?, canonicalize_analytic(&n2, &tol)?))
                } else {
                    None
                };
                to_json_string(&json!({ "equivalent": eq, "canonical_forms": forms }))
            } else {
                let cert = test_equivalent(&n1, &n2, &tol)?;
                if let Some(c) = &cert {
                    c.verify(&n1, &n2, &tol)?;
                }
                say(out, format!("neurons: {} and {}", n1.m(), n2.m()));
                say(
                    out,
                    format!(
                        "equivalence certificate: {}",
                        if cert.is_some() { "found" } else { "none" }
                    ),
                );
                to_json_string(&json!({ "equivalent": cert.is_some(), "certificate": cert }))
            };
            if let Some(p) = path {
                write_atomic(p, &body)?;
            }
        }
        Command::PlanRelu { net, out: path } => {
            let net = read_net(net)?;
            let plan = plan_for(&net, cli.seed, &tol)?;
            write_atomic(path, &plan.to_json())?;
            say(
                out,
                format!("lines: {}, points: {}", plan.lines.len(), plan.point_count()),
            );
        }
        Command::Sample { net, plan, out: path } => {
            let net = read_net(net)?;
            let plan = SamplePlan::from_json(&read(plan)?)?;
            let data = LabeledSamples::from_net(&net, &plan)?;
            write_atomic(path, &data.to_json())?;
            say(out, format!("samples: {}", data.values.len()));
        }
        Command::Reconstruct {
            data,
            out: path,
            reference,
        } => {
            let data = LabeledSamples::from_json(&read(data)?)?;
            let reference = reference.as_deref().map(read_net).transpose()?;
            data.validate(&tol)?;
            let net = reconstruct(&data, &tol)?;
            write_atomic(path, &net.to_json())?;
            say(out, format!("neurons: {}", net.m()));
            let max_gap = data
                .points
                .iter()
                .zip(&data.values)
                .map(|(x, y)| (net.eval(x) - y).abs())
                .fold(0.0, f64::max);
            say(out, format!("max sample gap: {max_gap:e}"));
            if let Some(r) = reference {
                let cert = test_equivalent(&r, &net, &tol)?;
                say(
                    out,
                    format!(
                        "equivalence certificate: {}",
                        if cert.is_some() { "found" } else { "none" }
                    ),
                );
            }
        }
        Command::Adversary { points, m, out: path } => {
            let pts = match from_json_str::<PointsFile>(&read(points)?, "points")? {
                PointsFile::Wrapped { points } | PointsFile::Bare(points) => points,
            };
            let pair = build_pair(&pts, *m, cli.seed, &tol)?;
            write_atomic(path, &pair.to_json())?;
            say(out, format!("neurons: {} each", pair.net1.m()));
            say(out, format!("agreement gap: {:e}", pair.agreement_gap(&pts)));
            say(out, format!("witness gap: {:e}", pair.witness_gap()));
        }
        Command::PlanAnalytic { m, d, out: path } => {
            let plan = build_analytic_plan(*m, *d, cli.cap)?;
            write_atomic(path, &plan.to_json())?;
            say(
                out,
                format!(
                    "frame: {}, scalars: {}, points: {}",
                    plan.frame_size(),
                    plan.scalars.len(),
                    plan.point_count()
                ),
            );
        }
        Command::VerifyAnalytic {
            net1,
            net2,
            plan,
            out: path,
        } => {
            let (n1, n2) = (read_net(net1)?, read_net(net2)?);
            let plan = AnalyticSamplePlan::from_json(&read(plan)?)?;
            let report = verify_identification(&n1, &n2, &plan, &tol)?;
            write_atomic(path, &to_json_string(&report))?;
            say(out, format!("max gap: {:e}", report.max_gap));
            say(
                out,
                format!(
                    "equal on plan: {}, equivalent: {}",
                    report.equal_on_plan, report.equivalent
                ),
            );
            if let Some(w) = &report.warning {
                say(out, format!("warning: {w}"));
            }
        }
        Command::Expsum { net, out: path } => {
            let net = read_net(net)?;
            let e = exp_sum_for_net(&net, &tol)?;
            write_atomic(path, &e.to_json())?;
            say(out, format!("terms: {}", e.terms.len()));
        }
    }
    Ok(())
}

fn report_error(err: &mut dyn Write, kind: &str, message: &str) {
    let _ = writeln!(err, "{}", json!({ "error": { "kind": kind, "message": message } }));
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            report_error(err, "usage", &e.to_string());
            return 3;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            report_error(err, e.kind(), &e.to_string());
            if e.is_parse() {
                3
            } else {
                2
            }
        }
    }
}
