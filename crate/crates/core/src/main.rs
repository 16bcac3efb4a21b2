use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_traits::Signed;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use toric_complexity::complexity::{
    complexity, search_min_complexity, Decomposition, SearchBounds,
};
use toric_complexity::divisor::ToricDivisor;
use toric_complexity::fan::Fan;
use toric_complexity::genpair::{GeneralizedPair, OrbifoldStructure};
use toric_complexity::lattice::LatticeVector;
use toric_complexity::mmp::{is_canonical, k_negative_rays, run_k_mmp};
use toric_complexity::verify::{
    self, fn_example_pair, not_descend_pair, Status, VerificationResult, SWEEP_DEFAULTS,
};

/// Exact toolkit for generalized pairs on toric surfaces.
///
/// JSON arguments are given inline, as `@path` to read a file, or as `-`
/// for standard input.
#[derive(Parser)]
#[command(name = "toric-complexity", version)]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Include wall-clock time in verification output.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    #[command(subcommand)]
    Fan(FanCmd),
    #[command(subcommand)]
    Divisor(DivisorCmd),
    #[command(subcommand)]
    Pair(PairCmd),
    #[command(subcommand)]
    Complexity(ComplexityCmd),
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Args)]
struct RaysArg {
    /// Rays as `[[x,y],...]` or a fan object `{"rays": ...}`.
    #[arg(long)]
    rays: String,
}

#[derive(Subcommand)]
enum FanCmd {
    /// Smoothness, Picard rank, singularities, MMP data.
    Info(RaysArg),
    /// Minimal resolution.
    Resolve(RaysArg),
    /// GL(2,Z) equivalence of two fans.
    Equiv {
        #[arg(long)]
        rays: String,
        #[arg(long)]
        other: String,
    },
}

#[derive(Args)]
struct DivisorArg {
    /// `{"fan": {"rays": ...}, "coeffs": [["x,y", "p/q"], ...]}`
    #[arg(long)]
    divisor: String,
}

#[derive(Subcommand)]
enum DivisorCmd {
    Intersect {
        #[arg(long)]
        divisor: String,
        #[arg(long)]
        other: String,
    },
    Nef(DivisorArg),
    Cartier(DivisorArg),
    Class(DivisorArg),
}

#[derive(Args)]
struct PairArg {
    /// `{"fan": ..., "boundary": [...], "moduli": {"model": ..., "coeffs": [...]}}`,
    /// or a built-in example: `fn-<n>`, `not-descend`.
    #[arg(long)]
    pair: String,
}

#[derive(Subcommand)]
enum PairCmd {
    /// Singularity and Calabi-Yau status.
    Check(PairArg),
    /// Log discrepancy of a primitive vector.
    Discrepancy {
        #[command(flatten)]
        pair: PairArg,
        /// `x,y`
        #[arg(long)]
        ray: String,
    },
    /// Adjunction to the invariant curve of a coefficient-one ray.
    Adjoin {
        #[command(flatten)]
        pair: PairArg,
        #[arg(long)]
        ray: String,
        /// `[["x,y", n], ...]`
        #[arg(long)]
        orbifold: Option<String>,
    },
}

#[derive(Args)]
struct BoundsArg {
    #[arg(long, default_value_t = 2)]
    max_orbifold_index: u32,
    #[arg(long, default_value_t = 1)]
    max_multiple: i64,
}

#[derive(Subcommand)]
enum ComplexityCmd {
    /// Complexities of an explicit decomposition (default: every boundary
    /// prime and every prime moduli component).
    Compute {
        #[command(flatten)]
        pair: PairArg,
        #[arg(long)]
        decomposition: Option<String>,
    },
    /// Minimum complexity over the bounded decomposition family.
    Search {
        #[command(flatten)]
        pair: PairArg,
        #[command(flatten)]
        bounds: BoundsArg,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// `3.2-<n>` (n in 1..=10), `4.1`, `4.2`, `4.3`.
    Case { id: String },
    Theorem31 {
        #[arg(long, default_value_t = SWEEP_DEFAULTS.0)]
        coord_bound: i64,
        #[arg(long, default_value_t = SWEEP_DEFAULTS.1)]
        ray_bound: usize,
        #[arg(long, default_value_t = SWEEP_DEFAULTS.2)]
        denom_bound: i64,
        /// Perturb a boundary coefficient above one; the run must fail.
        #[arg(long)]
        inject_fault: bool,
    },
    Canonical {
        #[arg(long, default_value_t = 5)]
        coord_bound: i64,
    },
    Ko,
    Examples,
    All,
}

/// Input or domain error: exit code 2.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, UsageError>;

fn read_arg(s: &str) -> CliResult<String> {
    if s == "-" {
        let mut buf = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut buf)?;
        Ok(buf)
    } else if let Some(path) = s.strip_prefix('@') {
        std::fs::read_to_string(path).map_err(|e| UsageError(format!("{path}: {e}")))
    } else {
        Ok(s.to_string())
    }
}

fn parse_json<T: DeserializeOwned>(what: &str, s: &str) -> CliResult<T> {
    let text = read_arg(s)?;
    serde_json::from_str(&text).map_err(|e| {
        UsageError(format!(
            "malformed {what} JSON at line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

fn parse_fan(s: &str) -> CliResult<Fan> {
    let text = read_arg(s)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| {
        UsageError(format!(
            "malformed fan JSON at line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })?;
    let v = if v.is_array() { json!({ "rays": v }) } else { v };
    Ok(serde_json::from_value(v)?)
}

fn parse_pair(s: &str) -> CliResult<GeneralizedPair> {
    if s == "not-descend" {
        return Ok(not_descend_pair());
    }
    if let Some(n) = s.strip_prefix("fn-") {
        let n: i64 = n.parse().map_err(|_| UsageError(format!("bad example {s}")))?;
        if !(1..=50).contains(&n) {
            return Err(UsageError(format!("n = {n} out of range 1..=50")));
        }
        return Ok(fn_example_pair(n));
    }
    parse_json("pair", s)
}

fn parse_ray(s: &str) -> CliResult<LatticeVector> {
    Ok(LatticeVector::parse_key(s)?)
}

fn emit(json_out: bool, v: &impl Serialize, text: impl FnOnce() -> String) {
    if json_out {
        println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
    } else {
        println!("{}", text());
    }
}

fn fan_cmd(c: FanCmd, j: bool) -> CliResult<()> {
    match c {
        FanCmd::Info(a) => {
            let f = parse_fan(&a.rays)?;
            let dets: Vec<i64> = (0..f.len()).map(|i| f.cone_det(i)).collect();
            let kneg: Vec<Value> = k_negative_rays(&f)
                .into_iter()
                .map(|(r, v)| json!([r, v.to_string()]))
                .collect();
            let v = json!({
                "rays": f,
                "smooth": f.is_smooth(),
                "picard_rank": f.picard_rank(),
                "cone_determinants": dets,
                "canonical": is_canonical(&f),
                "f_n": f.is_fn(),
                "hirzebruch": f.hirzebruch_index(),
                "mfs": f.mfs_structures(),
                "k_negative_rays": kneg,
                "mmp": run_k_mmp(&f),
            });
            emit(j, &v, || {
                format!(
                    "fan {f}\nsmooth: {}\npicard rank: {}\ncone determinants: {dets:?}\ncanonical: {}",
                    f.is_smooth(),
                    f.picard_rank(),
                    is_canonical(&f)
                )
            });
        }
        FanCmd::Resolve(a) => {
            let f = parse_fan(&a.rays)?;
            let (y, m) = f.minimal_resolution();
            let v = json!({ "resolution": y, "exceptional_rays": m.exceptional_rays });
            emit(j, &v, || y.to_string());
        }
        FanCmd::Equiv { rays, other } => {
            let (a, b) = (parse_fan(&rays)?, parse_fan(&other)?);
            let m = a.lattice_equivalent(&b);
            let v = json!({
                "equivalent": m.is_some(),
                "matrix": m.map(|m| [[m.a, m.b], [m.c, m.d]]),
            });
            emit(j, &v, || match m {
                Some(m) => format!("equivalent via [[{}, {}], [{}, {}]]", m.a, m.b, m.c, m.d),
                None => "not equivalent".into(),
            });
        }
    }
    Ok(())
}

fn divisor_cmd(c: DivisorCmd, j: bool) -> CliResult<()> {
    match c {
        DivisorCmd::Intersect { divisor, other } => {
            let d: ToricDivisor = parse_json("divisor", &divisor)?;
            let e: ToricDivisor = parse_json("divisor", &other)?;
            let v = d.intersect(&e)?;
            emit(j, &json!({ "intersection": v.to_string() }), || v.to_string());
        }
        DivisorCmd::Nef(a) => {
            let d: ToricDivisor = parse_json("divisor", &a.divisor)?;
            let v = json!({ "nef": d.is_nef(), "ample": d.is_ample() });
            emit(j, &v, || format!("nef: {}, ample: {}", d.is_nef(), d.is_ample()));
        }
        DivisorCmd::Cartier(a) => {
            let d: ToricDivisor = parse_json("divisor", &a.divisor)?;
            emit(j, &json!({ "cartier": d.is_cartier() }), || d.is_cartier().to_string());
        }
        DivisorCmd::Class(a) => {
            let d: ToricDivisor = parse_json("divisor", &a.divisor)?;
            let c: Vec<String> = d.class_of().0.iter().map(ToString::to_string).collect();
            let v = json!({ "class": c, "torsion": d.is_torsion() });
            emit(j, &v, || format!("[{}]", c.join(", ")));
        }
    }
    Ok(())
}

fn pair_cmd(c: PairCmd, j: bool) -> CliResult<()> {
    match c {
        PairCmd::Check(a) => {
            let p = parse_pair(&a.pair)?;
            let disc: Vec<Value> = p
                .discrepancies()
                .into_iter()
                .map(|(r, v)| json!([r, v.to_string()]))
                .collect();
            let v = json!({
                "glc": p.is_glc(),
                "gklt": p.is_gklt(),
                "glcy": p.is_glcy(),
                "moduli_descends": p.moduli().descends_to_base()?,
                "log_discrepancies": disc,
            });
            emit(j, &v, || {
                format!("glc: {}\ngklt: {}\nglcy: {}", p.is_glc(), p.is_gklt(), p.is_glcy())
            });
        }
        PairCmd::Discrepancy { pair, ray } => {
            let p = parse_pair(&pair.pair)?;
            let e = parse_ray(&ray)?;
            if !e.is_primitive() {
                return Err(UsageError(format!("{e} is not primitive")));
            }
            let a = p.log_discrepancy(e);
            emit(j, &json!({ "ray": e, "log_discrepancy": a.to_string() }), || a.to_string());
        }
        PairCmd::Adjoin { pair, ray, orbifold } => {
            let p = parse_pair(&pair.pair)?;
            let r = parse_ray(&ray)?;
            let orb = match orbifold {
                Some(s) => {
                    let entries: Vec<(String, u32)> = parse_json("orbifold", &s)?;
                    let parsed = entries
                        .into_iter()
                        .map(|(k, n)| Ok((LatticeVector::parse_key(&k)?, n)))
                        .collect::<toric_complexity::Result<Vec<_>>>()?;
                    OrbifoldStructure::new(parsed)?
                }
                None => OrbifoldStructure::trivial(),
            };
            let a = p.adjunction_to_invariant_curve(r, &orb)?;
            let v = json!({ "adjunction": a, "degree_identity": a.degree_identity_holds() });
            emit(j, &v, || {
                format!(
                    "deg(K_S + B_S + M_S) = {}, (K + B + M)·D = {}",
                    a.adjoint_degree(),
                    a.log_canonical_degree
                )
            });
        }
    }
    Ok(())
}

fn complexity_cmd(c: ComplexityCmd, j: bool) -> CliResult<()> {
    match c {
        ComplexityCmd::Compute { pair, decomposition } => {
            let p = parse_pair(&pair.pair)?;
            let d: Decomposition = match decomposition {
                Some(s) => parse_json("decomposition", &s)?,
                None => {
                    let y = p.moduli().model();
                    let moduli = p
                        .moduli()
                        .divisor
                        .terms()
                        .filter(|(_, c)| c.is_positive())
                        .map(|(r, c)| {
                            Ok(toric_complexity::complexity::Component::new(
                                ToricDivisor::prime(y, r)?,
                                c.clone(),
                            ))
                        })
                        .filter(|c: &toric_complexity::Result<_>| {
                            c.as_ref().map_or(true, |c| c.divisor.is_nef())
                        })
                        .collect::<toric_complexity::Result<Vec<_>>>()?;
                    Decomposition::tautological(&p, moduli)?
                }
            };
            let r = complexity(&p, &d)?;
            emit(j, &r, || {
                format!(
                    "norm {}\nrank {}\norbifold complexity {}\nclassic complexity {}",
                    r.norm, r.span_rank, r.orbifold_value, r.classic_value
                )
            });
        }
        ComplexityCmd::Search { pair, bounds } => {
            let p = parse_pair(&pair.pair)?;
            let b = SearchBounds {
                max_orbifold_index: bounds.max_orbifold_index,
                max_multiple: bounds.max_multiple,
            };
            let r = search_min_complexity(&p, b)?;
            emit(j, &r, || r.best.orbifold_value.to_string());
        }
    }
    Ok(())
}

fn print_results(j: bool, status: Status, results: &[VerificationResult]) {
    if j {
        let v = if results.len() == 1 {
            serde_json::to_value(&results[0])
        } else {
            serde_json::to_value(json!({ "status": status, "results": results }))
        };
        println!("{}", serde_json::to_string_pretty(&v.expect("serializable")).expect("value"));
        return;
    }
    for r in results {
        let s = if r.passed() { "PASS" } else { "FAIL" };
        println!("{s} {}", r.case);
        for c in &r.checks {
            let mark = if c.pass { "ok " } else { "BAD" };
            println!("  {mark} {}: expected {}, computed {}", c.name, c.expected, c.computed);
        }
        for n in &r.notes {
            println!("  note: {n}");
        }
        if let Some(ms) = r.runtime_ms {
            println!("  time: {ms} ms");
        }
    }
    if results.len() > 1 {
        println!("{}", if status == Status::Pass { "PASS" } else { "FAIL" });
    }
}

fn verify_cmd(c: VerifyCmd, j: bool, timing: bool) -> CliResult<Status> {
    let start = Instant::now();
    let (status, mut results) = match c {
        VerifyCmd::Case { id } => {
            let r = verify::verify_case(&id)?;
            (r.status, vec![r])
        }
        VerifyCmd::Theorem31 {
            coord_bound,
            ray_bound,
            denom_bound,
            inject_fault,
        } => {
            if !(1..=3).contains(&coord_bound) || !(3..=8).contains(&ray_bound) || !(1..=6).contains(&denom_bound) {
                return Err(UsageError(
                    "bounds outside desk scale (coord 1..=3, rays 3..=8, denominator 1..=6)".into(),
                ));
            }
            let r = verify::verify_theorem31(coord_bound, ray_bound, denom_bound, inject_fault);
            (r.status, vec![r])
        }
        VerifyCmd::Canonical { coord_bound } => {
            if !(1..=8).contains(&coord_bound) {
                return Err(UsageError("coordinate bound outside 1..=8".into()));
            }
            let r = verify::verify_canonical_rho1(coord_bound);
            (r.status, vec![r])
        }
        VerifyCmd::Ko => {
            let r = verify::verify_kobayashi_ochiai();
            (r.status, vec![r])
        }
        VerifyCmd::Examples => {
            let r = verify::verify_examples();
            (r.status, vec![r])
        }
        VerifyCmd::All => verify::verify_all(),
    };
    if timing {
        let ms = start.elapsed().as_millis() as u64;
        if results.len() == 1 {
            results[0].runtime_ms = Some(ms);
        } else if !j {
            println!("total time: {ms} ms");
        }
    }
    print_results(j, status, &results);
    Ok(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let j = cli.json;
    let out = match cli.cmd {
        Cmd::Fan(c) => fan_cmd(c, j).map(|_| Status::Pass),
        Cmd::Divisor(c) => divisor_cmd(c, j).map(|_| Status::Pass),
        Cmd::Pair(c) => pair_cmd(c, j).map(|_| Status::Pass),
        Cmd::Complexity(c) => complexity_cmd(c, j).map(|_| Status::Pass),
        Cmd::Verify(c) => verify_cmd(c, j, cli.timing),
    };
    match out {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            if j {
                eprintln!("{}", json!({ "error": msg }));
            } else {
                eprintln!("error: {msg}");
            }
            ExitCode::from(2)
        }
    }
}
