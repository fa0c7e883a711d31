//! `sdex`: build and subdivide finite simplicial sets and run the horn,
//! distance and category checks from the command line.
//!
//! Exit status: 0 when the answer is yes, 1 when it is no (a certificate is
//! printed), 2 on usage or input errors, 3 when a size budget is exceeded.

use std::fs;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sdex::category::{
    cat_sd_horn, curated_family, is_groupoid, left_fractions_check, nerve, poset_injectivity_check, FiniteCategory,
};
use sdex::ex::ExTruncation;
use sdex::fibrancy::{is_fib_n_object, is_kan_up_to};
use sdex::hom::count_maps;
use sdex::metric::{attach_stage, certify_counterexample, edge_distance, TowerStage};
use sdex::rays::{build_rays, render_svg, verify_rays};
use sdex::sset::{boundary, horn, standard_simplex};
use sdex::subdivision::{sd, sd_iter, sd_iter_map};
use sdex::{Error, SimplicialSet};

const NERVE_BOUND: usize = 3;

#[derive(Parser)]
#[command(name = "sdex", version, about = "Subdivision, extension and fibrancy checks on finite simplicial sets")]
#[command(after_help = "Simplicial set specs: simplex:K, boundary:K, horn:K:I, nerve:NAME (a built-in category), \
file:PATH (JSON).\nCategory specs: NAME of a built-in category, or file:PATH (JSON).\n\
Exit status: 0 yes, 1 no (with a certificate), 2 usage or input error, 3 budget exceeded.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Simplex,
    Horn,
    Boundary,
    Sd,
    Nerve,
}

#[derive(Clone, Copy, ValueEnum)]
enum CatCheck {
    Groupoid,
    Fractions,
    Injectivity,
}

#[derive(Subcommand)]
enum Command {
    /// Build a simplicial set and print its simplex counts
    Make {
        shape: Shape,
        /// dimension of a simplex, horn or boundary
        #[arg(short = 'k', default_value_t = 2)]
        k: usize,
        /// missing face of a horn
        #[arg(short = 'i', default_value_t = 0)]
        i: usize,
        /// subdivision depth for `sd`
        #[arg(short = 'n', default_value_t = 1)]
        n: usize,
        /// what to subdivide (sd) or which category (nerve)
        #[arg(long = "of", value_name = "SPEC")]
        of: Option<String>,
        /// truncation bound for nerves
        #[arg(short = 'K', default_value_t = NERVE_BOUND)]
        bound: usize,
        /// write the simplicial set as JSON ("-" for standard output)
        #[arg(long, value_name = "PATH")]
        json: Option<String>,
        /// write the 1-skeleton in DOT form ("-" for standard output)
        #[arg(long, value_name = "PATH")]
        dot: Option<String>,
    },
    /// Count maps between simplicial sets
    Maps {
        #[arg(long, value_name = "SPEC")]
        from: String,
        #[arg(long, value_name = "SPEC")]
        to: String,
        /// also count maps out of the subdivided source and into `Ex` of the target
        #[arg(long)]
        adjunction: bool,
        #[arg(long, value_name = "PATH")]
        json: Option<String>,
    },
    /// Decide whether every horn of dimension at most K fills
    Kan {
        #[arg(long = "of", value_name = "SPEC")]
        of: String,
        #[arg(short = 'K', default_value_t = 2)]
        bound: usize,
        #[arg(long, value_name = "PATH")]
        json: Option<String>,
    },
    /// Decide fib_n for the map to the point through horn dimension K
    Fib {
        #[arg(long = "of", value_name = "SPEC")]
        of: String,
        #[arg(short = 'n', default_value_t = 1)]
        n: usize,
        #[arg(short = 'K', default_value_t = 2)]
        bound: usize,
        #[arg(long, value_name = "PATH")]
        json: Option<String>,
    },
    /// Edge distance between two vertices, following edges in either direction
    Dist {
        #[arg(long = "of", value_name = "SPEC")]
        of: String,
        /// subdivide the set this many times first
        #[arg(short = 'n', default_value_t = 0)]
        n: usize,
        #[arg(short = 'a')]
        a: usize,
        #[arg(short = 'b')]
        b: usize,
    },
    /// Ray partition of the n-th subdivided triangle
    Rays {
        #[arg(short = 'n', default_value_t = 2)]
        n: usize,
        #[arg(long, value_name = "PATH")]
        svg: Option<String>,
        #[arg(long, value_name = "PATH")]
        json: Option<String>,
    },
    /// Fibrant-replacement tower over the subdivided horn Λ⁰₂
    Tower {
        #[arg(short = 'n', default_value_t = 0)]
        n: usize,
        #[arg(short = 'j', default_value_t = 1)]
        j: usize,
        #[arg(short = 'k', default_value_t = 2)]
        k: usize,
        /// certify the endpoint distance and the absence of a lift at every stage
        #[arg(long)]
        certify: bool,
        #[arg(long, value_name = "PATH")]
        json: Option<String>,
    },
    /// Fibrancy criteria for the nerve of a finite category
    CatCheck {
        check: CatCheck,
        #[arg(long = "of", value_name = "SPEC", required_unless_present = "input")]
        of: Option<String>,
        /// category JSON file
        #[arg(long = "in", value_name = "PATH")]
        input: Option<String>,
        #[arg(short = 'n', default_value_t = 1)]
        n: usize,
        #[arg(short = 'K', default_value_t = 3)]
        bound: usize,
        #[arg(long, value_name = "PATH")]
        json: Option<String>,
    },
    /// Check the simplicial identities
    Validate {
        #[arg(long = "of", value_name = "SPEC", required_unless_present = "input")]
        of: Option<String>,
        /// simplicial set JSON file
        #[arg(long = "in", value_name = "PATH")]
        input: Option<String>,
    },
}

enum Failure {
    Usage(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Budget(_) => Failure::Budget(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn emit(path: &Option<String>, text: &str) -> Result<(), Failure> {
    match path.as_deref() {
        None => Ok(()),
        Some("-") => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {p}: {e}"))),
    }
}

fn read(path: &str) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {path}: {e}")))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn numbers(spec: &str, parts: &[&str]) -> Result<Vec<usize>, Failure> {
    parts
        .iter()
        .map(|p| p.parse().map_err(|_| Failure::Usage(format!("bad number in spec {spec:?}"))))
        .collect()
}

fn category(spec: &str) -> Result<FiniteCategory, Failure> {
    if let Some(path) = spec.strip_prefix("file:") {
        return Ok(FiniteCategory::from_json(&read(path)?)?);
    }
    curated_family().into_iter().find(|(n, _)| *n == spec).map(|(_, c)| c).ok_or_else(|| {
        let names: Vec<&str> = curated_family().iter().map(|(n, _)| *n).collect();
        Failure::Usage(format!("unknown category {spec:?}; built-in: {}", names.join(", ")))
    })
}

fn simplicial_set(spec: &str, bound: usize) -> Result<SimplicialSet, Failure> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let args: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split(':').collect() };
    match (kind, args.as_slice()) {
        ("simplex", [k]) => Ok(standard_simplex(numbers(spec, &[k])?[0])),
        ("boundary", [k]) => Ok(boundary(numbers(spec, &[k])?[0])?),
        ("horn", [k, i]) => {
            let v = numbers(spec, &[k, i])?;
            Ok(horn(v[0], v[1])?.0)
        }
        ("nerve", [name]) => Ok(nerve(&category(name)?, bound)),
        ("file", _) => Ok(SimplicialSet::from_json(&read(rest)?)?),
        _ => Err(Failure::Usage(format!("unrecognized simplicial set spec {spec:?}"))),
    }
}

fn counts_line(x: &SimplicialSet) -> String {
    let counts: Vec<String> = x.counts().iter().map(usize::to_string).collect();
    let tail = if x.is_truncated() { format!(" (through dimension {})", x.dim_bound()) } else { String::new() };
    format!("simplices by dimension: {}{tail}", counts.join(" "))
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Make { shape, k, i, n, of, bound, json, dot } => {
            let x = match shape {
                Shape::Simplex => standard_simplex(k),
                Shape::Horn => horn(k, i)?.0,
                Shape::Boundary => boundary(k)?,
                Shape::Sd => {
                    let spec = of.ok_or_else(|| Failure::Usage("make sd needs --of".into()))?;
                    sd_iter(&simplicial_set(&spec, bound)?, n)?
                }
                Shape::Nerve => {
                    let spec = of.ok_or_else(|| Failure::Usage("make nerve needs --of".into()))?;
                    nerve(&category(&spec)?, bound)
                }
            };
            println!("{}", counts_line(&x));
            emit(&json, &x.to_json())?;
            emit(&dot, &x.to_dot())?;
            Ok(true)
        }
        Command::Maps { from, to, adjunction, json } => {
            let a = Arc::new(simplicial_set(&from, NERVE_BOUND)?);
            let x = Arc::new(simplicial_set(&to, NERVE_BOUND)?);
            let count = count_maps(&a, &x)?;
            println!("maps: {count}");
            let mut out = json!({ "from": from, "to": to, "maps": count });
            if adjunction {
                let sd_a = Arc::new(sd(&a)?);
                let ex = ExTruncation::new(&x, a.dim_bound())?;
                let left = count_maps(&sd_a, &x)?;
                let right = count_maps(&a, ex.space())?;
                println!("maps out of the subdivision: {left}");
                println!("maps into Ex: {right}");
                out["subdivided_source"] = json!(left);
                out["into_ex"] = json!(right);
                emit(&json, &pretty(&out))?;
                return Ok(left == right);
            }
            emit(&json, &pretty(&out))?;
            Ok(true)
        }
        Command::Kan { of, bound, json } => {
            let x = Arc::new(simplicial_set(&of, bound)?);
            let v = is_kan_up_to(&x, bound)?;
            report_horns(&of, "every horn fills", v.failure.map(|f| f.to_json_value()), bound, &json)
        }
        Command::Fib { of, n, bound, json } => {
            let x = Arc::new(simplicial_set(&of, bound)?);
            let v = is_fib_n_object(&x, n, bound)?;
            report_horns(&of, &format!("fib_{n} holds"), v.failure.map(|f| f.to_json_value()), bound, &json)
        }
        Command::Dist { of, n, a, b } => {
            let x = sd_iter(&simplicial_set(&of, NERVE_BOUND)?, n)?;
            match edge_distance(&x, a, b)? {
                Some(d) => {
                    println!("{d}");
                    Ok(true)
                }
                None => {
                    println!("disconnected");
                    Ok(false)
                }
            }
        }
        Command::Rays { n, svg, json } => {
            let l = build_rays(n)?;
            let report = verify_rays(&l);
            println!("triangles: {}, rays: {}", l.triangles.len(), l.ray_count());
            emit(&svg, &render_svg(&l))?;
            emit(&json, &pretty(&l.to_json()))?;
            for v in &report {
                println!("violation ({:?}): {}", v.clause, v.detail);
            }
            Ok(report.is_empty())
        }
        Command::Tower { n, j, k, certify, json } => {
            if certify {
                let c = certify_counterexample(n, j, k)?;
                for s in &c.stages {
                    println!(
                        "stage {}: {} vertices, {} edges, {} cells glued, endpoint distance {}, lift {}",
                        s.j,
                        s.vertex_count,
                        s.edge_count,
                        s.attachments.iter().map(|a| a.2).sum::<usize>(),
                        s.distance.map_or("none".into(), |d| d.to_string()),
                        if s.lift_exists { "exists" } else { "none" }
                    );
                }
                emit(&json, &c.to_json())?;
                // the question answered is whether a lift exists
                return Ok(!c.holds());
            }
            let u = horn(2, 0)?.1;
            let u = sd_iter_map(&u, n)?.source().clone();
            let mut stage = TowerStage::initial(u);
            let mut rows = Vec::new();
            println!("stage 0: {}", counts_line(&stage.space));
            for _ in 0..j {
                stage = attach_stage(&stage, n, k)?;
                println!("stage {}: {}, {} cells glued", stage.j, counts_line(&stage.space), stage.attachments.len());
                rows.push(json!({ "j": stage.j, "counts": stage.space.counts(), "glued": stage.attachments.len() }));
            }
            emit(&json, &pretty(&json!({ "n": n, "k": k, "stages": rows })))?;
            Ok(true)
        }
        Command::CatCheck { check, of, input, n, bound, json } => {
            let c = match (of, input) {
                (_, Some(path)) => FiniteCategory::from_json(&read(&path)?)?,
                (Some(spec), None) => category(&spec)?,
                (None, None) => unreachable!("clap requires one of --of and --in"),
            };
            match check {
                CatCheck::Groupoid => {
                    let yes = is_groupoid(&c);
                    println!("{}", if yes { "groupoid" } else { "not a groupoid" });
                    emit(&json, &pretty(&json!({ "groupoid": yes })))?;
                    Ok(yes)
                }
                CatCheck::Fractions => {
                    let failure = left_fractions_check(&c);
                    match &failure {
                        None => println!("left calculus of fractions"),
                        Some(f) => println!("no left calculus of fractions: {}", serde_json::to_string(f).unwrap()),
                    }
                    emit(&json, &pretty(&json!({ "holds": failure.is_none(), "failure": failure })))?;
                    Ok(failure.is_none())
                }
                CatCheck::Injectivity => {
                    let v = poset_injectivity_check(&c, n, bound)?;
                    let failure = match &v.failure {
                        None => Value::Null,
                        Some(f) => {
                            let (p, _) = cat_sd_horn(n, f.k, f.i)?;
                            json!({ "k": f.k, "i": f.i, "functor": f.functor.to_json_value(&p, &c) })
                        }
                    };
                    if v.holds() {
                        println!("every functor from a subdivided horn extends through dimension {bound}");
                    } else {
                        println!("a functor from the subdivided horn Λ^{}_{} does not extend", failure["i"], failure["k"]);
                    }
                    emit(&json, &pretty(&json!({ "holds": v.holds(), "bound": bound, "failure": failure })))?;
                    Ok(v.holds())
                }
            }
        }
        Command::Validate { of, input } => {
            let x = match (of, input) {
                (_, Some(path)) => SimplicialSet::from_json(&read(&path)?)?,
                (Some(spec), None) => simplicial_set(&spec, NERVE_BOUND)?,
                (None, None) => unreachable!("clap requires one of --of and --in"),
            };
            let violations = x.validate();
            for v in &violations {
                println!("{v}");
            }
            if violations.is_empty() {
                println!("valid: {}", counts_line(&x));
            }
            Ok(violations.is_empty())
        }
    }
}

fn report_horns(spec: &str, yes: &str, failure: Option<Value>, bound: usize, json: &Option<String>) -> Outcome {
    match failure {
        None => {
            println!("{spec}: {yes} through dimension {bound}");
            emit(json, &pretty(&json!({ "holds": true, "bound": bound })))?;
            Ok(true)
        }
        Some(f) => {
            println!("{spec}: the horn Λ^{}_{} has no filler; square:", f["i"], f["k"]);
            println!("{}", pretty(&f["square"]));
            emit(json, &pretty(&json!({ "holds": false, "bound": bound, "failure": f })))?;
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
