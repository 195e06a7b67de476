//! Command-line front end: fixture shorthands, exact rational parameters,
//! machine-readable JSON reports, reproducible seeds. Exit code 0 means
//! every certificate the invocation ran has passed.

use std::collections::BTreeMap;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use quivalg::groups::{parse_group_spec, FiniteSubgroupSL2, GammaNAlgebra};
use quivalg::morita::{verify_morita, CornerSetup};
use quivalg::pbw::{beta_from_params, overlap_space, pbw_residual, solve_deformations};
use quivalg::quiver::{affine_quiver, AffineFamily, Quiver};
use quivalg::scalar::{parse_rational, Scalar};
use quivalg::sra::{
    enumerate_reflections, letter, reflection_classes, ReflKind, SraAlgebra, SraElement,
    SraMonomial, SraParams,
};
use quivalg::wreathalg::{all_relation_gens, graded_dimension, WreathAlgebra};

#[derive(Parser)]
#[command(name = "quivalg", version, about = "Exact computer algebra for quiver path algebras, wreath-product deformations, and symplectic reflection algebras", long_about = None)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Inspect quivers.
    Quiver {
        #[command(subcommand)]
        cmd: QuiverCmd,
    },
    /// Graded dimensions of homogeneous quotients of the smash product.
    Dims(DimsArgs),
    /// Deformation classification.
    Pbw {
        #[command(subcommand)]
        cmd: PbwCmd,
    },
    /// McKay quiver of a finite subgroup of SL2.
    Mckay(MckayArgs),
    /// Symplectic reflection algebra tools.
    Sra {
        #[command(subcommand)]
        cmd: SraCmd,
    },
    /// Corner isomorphism certificates.
    Morita {
        #[command(subcommand)]
        cmd: MoritaCmd,
    },
}

#[derive(Subcommand)]
enum QuiverCmd {
    /// Print the vertex and edge tables of a quiver.
    Show {
        /// Inline shorthand (affineA:<k>, affineD:<k>, affineE:<k>, jordan)
        /// or a path to a JSON file { "vertices": k, "edges": [[t,h],…] }.
        #[arg(long)]
        quiver: String,
        /// Output format: table or json.
        #[arg(long, default_value = "table")]
        format: String,
    },
}

#[derive(Args)]
struct DimsArgs {
    #[arg(long)]
    quiver: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    degree: usize,
    /// Relation set: pi0 (moment and bracket relations) or free (none).
    #[arg(long, default_value = "pi0")]
    relations: String,
}

#[derive(Subcommand)]
enum PbwCmd {
    /// Solve for all admissible deformation parameters and certify the
    /// solution space against the standard family.
    Solve {
        #[arg(long)]
        quiver: String,
        #[arg(long)]
        n: usize,
    },
    /// Evaluate the overlap residual of the standard parameter family at
    /// given values.
    Check {
        #[arg(long)]
        quiver: String,
        #[arg(long)]
        n: usize,
        /// Comma-separated rationals, one per vertex.
        #[arg(long)]
        lambda: String,
        /// Rational value of the wreath parameter.
        #[arg(long)]
        nu: String,
    },
}

#[derive(Args)]
struct MckayArgs {
    /// Group spec: cyclic:<l> or bindihedral:<l>.
    #[arg(long)]
    group: String,
}

#[derive(Subcommand)]
enum SraCmd {
    /// Normal form of a word in the letters x<i>, y<i> (1-based sites).
    Nf {
        #[arg(long)]
        group: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "0")]
        t: String,
        #[arg(long, default_value = "0")]
        k: String,
        /// Comma-separated rationals, one per nontrivial conjugacy class
        /// (classes ordered by smallest element index). Empty means zero.
        #[arg(long, default_value = "")]
        cprime: String,
        /// Word such as "y1*x1" or "x1 y2 x1" (separators: space, * or .).
        #[arg(long)]
        expr: String,
    },
    /// Enumerate and classify the symplectic reflections of the wreath group.
    Reflections {
        #[arg(long)]
        group: String,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum MoritaCmd {
    /// Run the three-part corner isomorphism certificate.
    Verify {
        #[arg(long)]
        group: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "0")]
        t: String,
        #[arg(long, default_value = "0")]
        k: String,
        #[arg(long, default_value = "")]
        cprime: String,
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value = "42")]
        seed: u64,
    },
}

fn parse_quiver(spec: &str) -> Result<Quiver> {
    if let Some(rest) = spec.strip_prefix("affineA:") {
        return Ok(affine_quiver(AffineFamily::A, rest.parse()?)?);
    }
    if let Some(rest) = spec.strip_prefix("affineD:") {
        return Ok(affine_quiver(AffineFamily::D, rest.parse()?)?);
    }
    if let Some(rest) = spec.strip_prefix("affineE:") {
        return Ok(affine_quiver(AffineFamily::E, rest.parse()?)?);
    }
    if spec == "jordan" {
        return Ok(affine_quiver(AffineFamily::A, 0)?);
    }
    let text = std::fs::read_to_string(spec)
        .with_context(|| format!("reading quiver spec file {spec:?}"))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let vertices = value
        .get("vertices")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| anyhow!("quiver spec needs a \"vertices\" count"))?;
    let edges_val = value
        .get("edges")
        .and_then(|v| v.as_array())
        .ok_or_else(|| anyhow!("quiver spec needs an \"edges\" array"))?;
    let mut edges = Vec::new();
    for e in edges_val {
        let pair = e.as_array().filter(|a| a.len() == 2).ok_or_else(|| anyhow!("edge must be [tail, head]"))?;
        let t = pair[0].as_u64().ok_or_else(|| anyhow!("edge tail must be an integer"))?;
        let h = pair[1].as_u64().ok_or_else(|| anyhow!("edge head must be an integer"))?;
        edges.push((t as u8, h as u8));
    }
    Ok(Quiver::new(vertices as usize, edges)?)
}

fn parse_scalar(s: &str) -> Result<Scalar> {
    Ok(Scalar::from_rational(parse_rational(s)?))
}

fn parse_csv_scalars(s: &str) -> Result<Vec<Scalar>> {
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    s.split(',').map(parse_scalar).collect()
}

fn parse_params(
    group: &FiniteSubgroupSL2,
    t: &str,
    k: &str,
    cprime: &str,
) -> Result<SraParams> {
    let class_count = group.conjugacy_classes().iter().filter(|c| c[0] != 0).count();
    let mut cs = parse_csv_scalars(cprime)?;
    if cs.is_empty() {
        cs = vec![Scalar::zero(); class_count];
    }
    Ok(SraParams::new(group, parse_scalar(t)?, parse_scalar(k)?, &cs)?)
}

fn parse_word(expr: &str, group: &GammaNAlgebra) -> Result<Vec<u8>> {
    let mut word = Vec::new();
    for token in expr.split(|c: char| c.is_whitespace() || c == '*' || c == '.') {
        if token.is_empty() {
            continue;
        }
        let (kind, site_str) = match token.split_at(1) {
            ("x", rest) => (0usize, rest),
            ("y", rest) => (1usize, rest),
            _ => bail!("letter {token:?} must be x<i> or y<i>"),
        };
        let site: usize = site_str.parse().with_context(|| format!("bad site in {token:?}"))?;
        if site == 0 || site > group.n {
            bail!("site {site} out of range 1..={}", group.n);
        }
        word.push(letter(site - 1, kind));
    }
    Ok(word)
}

fn quiver_json(q: &Quiver) -> serde_json::Value {
    json!({
        "vertices": q.vertex_count(),
        "edges": q.edges().iter().map(|&(t, h)| json!([t, h])).collect::<Vec<_>>(),
    })
}

fn scalar_strings(v: &[Scalar]) -> Vec<String> {
    v.iter().map(|c| c.to_string()).collect()
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Quiver { cmd: QuiverCmd::Show { quiver, format } } => {
            let q = parse_quiver(&quiver)?;
            match format.as_str() {
                "json" => println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "schema": "quivalg.quiver/1",
                        "quiver": quiver_json(&q),
                    }))?
                ),
                "table" => {
                    println!("vertices: {}", q.vertex_count());
                    println!("edges ({}):", q.edge_count());
                    for (i, &(t, h)) in q.edges().iter().enumerate() {
                        println!("  {i:3}: {t} -> {h}");
                    }
                }
                other => bail!("unknown format {other:?} (expected table or json)"),
            }
            Ok(true)
        }
        Cmd::Dims(args) => {
            let q = parse_quiver(&args.quiver)?;
            let alg = WreathAlgebra::new(q.double(), args.n)?;
            let gens = match args.relations.as_str() {
                "pi0" => all_relation_gens(&alg),
                "free" => vec![],
                other => bail!("unknown relation set {other:?} (expected pi0 or free)"),
            };
            let dims = graded_dimension(&alg, &gens, args.degree);
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "schema": "quivalg.dims/1",
                    "quiver": quiver_json(&q),
                    "n": args.n,
                    "relations": args.relations,
                    "dimensions": dims,
                }))?
            );
            Ok(true)
        }
        Cmd::Pbw { cmd } => match cmd {
            PbwCmd::Solve { quiver, n } => {
                let q = parse_quiver(&quiver)?;
                let alg = WreathAlgebra::new(q.double(), n)?;
                let sol = solve_deformations(&alg)?;
                let coords: Vec<serde_json::Value> = sol
                    .support
                    .reps()
                    .iter()
                    .map(|(g, sigma)| json!({ "generator": format!("{g:?}"), "perm": format!("{sigma:?}") }))
                    .collect();
                let basis: Vec<Vec<String>> =
                    sol.basis.iter().map(|v| scalar_strings(v)).collect();
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "schema": "quivalg.pbw-solve/1",
                        "quiver": quiver_json(&q),
                        "n": n,
                        "ambient_dim": sol.ambient_dim,
                        "solution_dim": sol.solution_dim,
                        "expected_dim": sol.expected_dim,
                        "overlap_dim": sol.overlap_dim,
                        "coordinates": coords,
                        "basis": basis,
                        "certified": sol.certified,
                        "theorem_scope": if sol.outside_theorem_hypotheses {
                            "outside (edge-loop quiver)"
                        } else {
                            "inside"
                        },
                    }))?
                );
                Ok(sol.certified)
            }
            PbwCmd::Check { quiver, n, lambda, nu } => {
                let q = parse_quiver(&quiver)?;
                let alg = WreathAlgebra::new(q.double(), n)?;
                let lambda = parse_csv_scalars(&lambda)?;
                let nu = parse_scalar(&nu)?;
                let beta = beta_from_params(&alg, &lambda, &nu)?;
                let overlap = overlap_space(&alg)?;
                let residuals = pbw_residual(&alg, &beta, &overlap);
                let nonzero = residuals.iter().filter(|r| !r.is_zero()).count();
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "schema": "quivalg.pbw-check/1",
                        "quiver": quiver_json(&q),
                        "n": n,
                        "lambda": scalar_strings(&lambda),
                        "nu": nu.to_string(),
                        "overlap_elements": residuals.len(),
                        "nonzero_residuals": nonzero,
                        "flat": nonzero == 0,
                    }))?
                );
                Ok(nonzero == 0)
            }
        },
        Cmd::Mckay(args) => {
            let (group, irreps) = parse_group_spec(&args.group)?;
            let mckay = quivalg::groups::mckay_quiver(&group, &irreps)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "schema": "quivalg.mckay/1",
                    "group": args.group,
                    "order": group.order(),
                    "quiver": quiver_json(&mckay.quiver),
                    "delta": mckay.delta,
                    "multiplicity_matrix": mckay.multiplicity,
                }))?
            );
            Ok(true)
        }
        Cmd::Sra { cmd } => match cmd {
            SraCmd::Nf { group, n, t, k, cprime, expr } => {
                let (g, _) = parse_group_spec(&group)?;
                let params = parse_params(&g, &t, &k, &cprime)?;
                let gamma_n = GammaNAlgebra::new(g, n);
                let word = parse_word(&expr, &gamma_n)?;
                let sra = SraAlgebra::new(gamma_n, params)?;
                let x = SraElement::from_term(
                    SraMonomial {
                        word,
                        grp: (quivalg::perm::Perm::identity(n), vec![0; n]),
                    },
                    Scalar::one(),
                );
                let nf = sra.normal_form(&x);
                let terms: Vec<serde_json::Value> = nf
                    .terms
                    .iter()
                    .map(|(m, c)| {
                        let word: Vec<String> = m
                            .word
                            .iter()
                            .map(|&l| {
                                format!(
                                    "{}{}",
                                    if l % 2 == 0 { "x" } else { "y" },
                                    l / 2 + 1
                                )
                            })
                            .collect();
                        json!({
                            "word": word,
                            "perm": format!("{:?}", m.grp.0),
                            "gammas": m.grp.1,
                            "coeff": c.to_string(),
                        })
                    })
                    .collect();
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "schema": "quivalg.sra-nf/1",
                        "group": group,
                        "n": n,
                        "expr": expr,
                        "terms": terms,
                    }))?
                );
                Ok(true)
            }
            SraCmd::Reflections { group, n } => {
                let (g, _) = parse_group_spec(&group)?;
                let gamma_n = GammaNAlgebra::new(g, n);
                let refl = enumerate_reflections(&gamma_n)?;
                let classes = reflection_classes(&gamma_n, &refl);
                let class_of: BTreeMap<usize, usize> = classes
                    .iter()
                    .enumerate()
                    .flat_map(|(c, members)| members.iter().map(move |&m| (m, c)))
                    .collect();
                let list: Vec<serde_json::Value> = refl
                    .iter()
                    .enumerate()
                    .map(|(idx, r)| match r.kind {
                        ReflKind::SType { i, j, gamma } => json!({
                            "kind": "transposition",
                            "sites": [i, j],
                            "gamma": gamma,
                            "class": class_of[&idx],
                        }),
                        ReflKind::GammaType { site, gamma } => json!({
                            "kind": "group",
                            "sites": [site],
                            "gamma": gamma,
                            "class": class_of[&idx],
                        }),
                    })
                    .collect();
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "schema": "quivalg.sra-reflections/1",
                        "group": group,
                        "n": n,
                        "count": refl.len(),
                        "class_count": classes.len(),
                        "reflections": list,
                    }))?
                );
                Ok(true)
            }
        },
        Cmd::Morita { cmd } => match cmd {
            MoritaCmd::Verify { group, n, t, k, cprime, degree, seed } => {
                let (g, irreps) = parse_group_spec(&group)?;
                let params = parse_params(&g, &t, &k, &cprime)?;
                let setup = CornerSetup::new(g, irreps)?;
                let report = verify_morita(&setup, n, &params, degree, seed)?;
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "schema": "quivalg.morita-verify/1",
                        "group": group,
                        "n": n,
                        "degree": degree,
                        "seed": seed,
                        "lambda": scalar_strings(&report.lambda),
                        "nu": report.nu.to_string(),
                        "relations_checked": report.relations_checked,
                        "residual_zero": report.relations_failed == 0,
                        "corner_dims": report.corner_dims,
                        "expected_dims": report.expected_dims,
                        "spot_checks": report.spot_checks,
                        "spot_failures": report.spot_failures,
                        "pass": report.pass,
                    }))?
                );
                Ok(report.pass)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
