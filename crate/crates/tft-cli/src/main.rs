//! `tft`: command-line frontend with JSON output.

mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use tft_core::correlators::{
    self, lattice_one_point, lattice_two_point, minimal_supporting_partition, ope_from_fusion, ope_table,
    xor_and_tree_metric, DyadicPoint, Model, OpeTable, RationalPoint, Vacuum,
};
use tft_core::diffapprox::{self, Diffeo, Mode};
use tft_core::forest::{self, DyadicPartition, Forest};
use tft_core::semicont::{self, LimitState};
use tft_core::tensorlab::{self, AscendingSystem, Isometry3, C64};
use tft_core::thompson::{self, GroupElement, PLMap};
use tft_core::trivalent::{self, Diagram, DiagramSum, TrivalentParams};
use tft_core::{Dyadic, Error, Result};

#[derive(Parser)]
#[command(name = "tft", version, about = "Thompson groups, tree tensor networks and trivalent diagrams")]
struct Cli {
    /// Numerical tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Model preset.
    #[arg(long, global = true, default_value = "qutrit", value_parser = ["qutrit", "fibonacci"])]
    preset: String,
    /// Write the JSON result to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forest composition, tensor product and join.
    #[command(subcommand)]
    Forest(ForestCmd),
    /// Group elements of F and T.
    #[command(subcommand)]
    Thompson(ThompsonCmd),
    /// Approximation of diffeomorphisms by group elements.
    #[command(subcommand)]
    Approx(ApproxCmd),
    /// Analysis of the three-leg tensor.
    #[command(subcommand)]
    Tensor(TensorCmd),
    /// States of the semicontinuous limit.
    #[command(subcommand)]
    State(StateCmd),
    /// Correlation functions.
    #[command(subcommand)]
    Corr(CorrCmd),
    /// Trivalent diagram reduction.
    #[command(subcommand)]
    Trivalent(TrivalentCmd),
}

#[derive(Subcommand)]
enum ForestCmd {
    /// Graft tree i of w2 onto leaf i of w1.
    Compose {
        #[arg(long)]
        w1: String,
        #[arg(long)]
        w2: String,
    },
    /// Juxtapose two forests.
    Tensor {
        #[arg(long)]
        w1: String,
        #[arg(long)]
        w2: String,
    },
    /// Smallest common refinement of two forests, with both complements.
    Join {
        #[arg(long)]
        s: String,
        #[arg(long)]
        t: String,
    },
}

#[derive(Subcommand)]
enum ThompsonCmd {
    /// Product applying a, then b, then c.
    Mul {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        c: Option<String>,
    },
    /// Inverse element.
    Inv {
        #[arg(long)]
        a: String,
    },
    /// Reduce a tree pair.
    Reduce {
        #[arg(long)]
        num: String,
        #[arg(long)]
        den: String,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        rot: i64,
    },
    /// Piecewise-linear map of an element.
    Topl {
        #[arg(long)]
        a: String,
    },
    /// Element of a piecewise-linear map given as `x:y` breakpoints.
    Frompl {
        #[arg(long)]
        points: String,
        /// Treat the map as a circle map.
        #[arg(long)]
        circle: bool,
    },
    /// A named generator A, B or C.
    Gen {
        #[arg(long)]
        name: String,
    },
}

#[derive(Args)]
struct FunctionArgs {
    /// Builtin function: identity, quadratic, rotation:<p>.
    #[arg(long, conflicts_with = "csv")]
    f: Option<String>,
    /// CSV table of x,f(x) samples.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Interval or circle mode for tables.
    #[arg(long, default_value = "interval", value_parser = ["interval", "circle"])]
    mode: String,
    /// Explicit bound on f'.
    #[arg(long)]
    slope_bound: Option<f64>,
}

#[derive(Subcommand)]
enum ApproxCmd {
    /// Approximate f to within eps in sup norm.
    Run {
        #[command(flatten)]
        func: FunctionArgs,
        #[arg(long)]
        eps: f64,
        /// Number of grid intervals for the measured error.
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
    },
    /// Sup distance between f' and the slopes of an element.
    Dist {
        #[arg(long)]
        f: String,
        /// Element to compare with; defaults to the approximant at eps.
        #[arg(long)]
        a: Option<String>,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
    },
}

#[derive(Subcommand)]
enum TensorCmd {
    /// Isometry, swap, planar-perfect and rotation checks.
    Verify {
        /// Tensor JSON file; defaults to the preset.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Eigensystem of the ascending operator.
    Eigen {
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Fusion coefficients and fusion matrices.
    Fusion {
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Blob check for a vector, or for the preset blobs.
    Blob {
        /// JSON array of numbers or [re, im] pairs.
        #[arg(long)]
        vector: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum StateCmd {
    /// The vacuum vector.
    Vacuum,
    /// Apply an element to a state.
    Act {
        #[arg(long)]
        element: String,
        /// State JSON file; defaults to the vacuum.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Inner product of two states.
    Inner {
        /// State file or `vacuum`.
        #[arg(long, default_value = "vacuum")]
        a: String,
        #[arg(long, default_value = "vacuum")]
        b: String,
        /// Element applied to a first.
        #[arg(long)]
        ga: Option<String>,
        /// Element applied to b first.
        #[arg(long)]
        gb: Option<String>,
    },
}

#[derive(Subcommand)]
enum CorrCmd {
    /// XOR difference and tree metric.
    Metric {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Tree level; defaults to the finer of the two points.
        #[arg(long)]
        l: Option<u32>,
    },
    /// Minimal supporting partition of increasing points.
    Support {
        #[arg(long)]
        points: String,
    },
    /// n-point function in the vacuum or in a transformed state.
    Npoint {
        #[arg(long)]
        points: String,
        #[arg(long)]
        alphas: String,
        #[arg(long)]
        element: Option<String>,
        #[arg(long, default_value = "density", value_parser = ["density", "circle"])]
        vacuum: String,
    },
    /// Two-point function: closed form, or the level-m lattice value with --m.
    Twopoint {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        #[arg(long)]
        m: Option<u32>,
    },
    /// Operator product expansion and fusion matrices.
    Ope {
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        beta: Option<String>,
    },
    /// Brute-force contraction of the level-m network against the closed forms.
    Oracle {
        #[arg(long)]
        m: u32,
        /// Insertions `site:field`, comma separated.
        #[arg(long, default_value = "")]
        ops: String,
    },
    /// Residual of the covariance identity.
    Covariance {
        #[arg(long)]
        element: String,
        #[arg(long)]
        points: String,
        #[arg(long)]
        alphas: String,
    },
}

#[derive(Args)]
struct ParamArgs {
    /// Loop value; omitted means the Fibonacci parameters.
    #[arg(long, allow_hyphen_values = true)]
    d: Option<String>,
    /// Bigon value.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    b: String,
    /// Triangle value; omitted means the SO(3) value for the given d and b.
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    /// Dimension of the four-point space; defaults to 4 when t is given.
    #[arg(long)]
    dim: Option<u8>,
}

#[derive(Subcommand)]
enum TrivalentCmd {
    /// Reduce a diagram from a file or by name.
    Reduce {
        #[arg(long, conflicts_with = "name")]
        file: Option<PathBuf>,
        #[arg(long)]
        name: Option<String>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Gram matrix of named diagrams and its orthonormalization.
    Gram {
        #[arg(long, default_value = "beta1,beta2,beta3,beta4,f4")]
        names: String,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Square coefficients, window value and det M(4,0).
    Square {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Ascending operator of the Fibonacci doubled-line tensor.
    Fib,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (value, code) = match dispatch(&cli) {
        Ok(v) => (v, ExitCode::SUCCESS),
        Err(e) => (json!({"error": e.kind(), "message": e.to_string()}), ExitCode::from(1)),
    };
    let text = render::to_string(&value) + "\n";
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    code
}

fn dispatch(cli: &Cli) -> Result<Value> {
    match &cli.command {
        Command::Forest(c) => forest_cmd(c),
        Command::Thompson(c) => thompson_cmd(c),
        Command::Approx(c) => approx_cmd(c),
        Command::Tensor(c) => tensor_cmd(c, cli),
        Command::State(c) => state_cmd(c, cli),
        Command::Corr(c) => corr_cmd(c, cli),
        Command::Trivalent(c) => trivalent_cmd(c, cli),
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn cjson(z: C64) -> Value {
    json!([z.re, z.im])
}

fn cvec(zs: &[C64]) -> Value {
    Value::Array(zs.iter().map(|z| cjson(*z)).collect())
}

fn split_list(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect()
}

fn forest_cmd(c: &ForestCmd) -> Result<Value> {
    match c {
        ForestCmd::Compose { w1, w2 } => {
            let w = forest::compose(&Forest::parse(w1)?, &Forest::parse(w2)?)?;
            Ok(json!({"forest": w.to_string()}))
        }
        ForestCmd::Tensor { w1, w2 } => {
            let w = forest::tensor(&Forest::parse(w1)?, &Forest::parse(w2)?);
            Ok(json!({"forest": w.to_string()}))
        }
        ForestCmd::Join { s, t } => {
            let (j, a, b) = forest::join_forests(&Forest::parse(s)?, &Forest::parse(t)?)?;
            Ok(json!({"join": j.to_string(), "complement_s": a.to_string(), "complement_t": b.to_string()}))
        }
    }
}

/// `gen:X`, `word:LETTERS`, `NUM/DEN[@ROT]`, inline JSON, or a JSON file.
fn parse_element(s: &str) -> Result<GroupElement> {
    let s = s.trim();
    if let Some(name) = s.strip_prefix("gen:") {
        return thompson::generator(name);
    }
    if let Some(w) = s.strip_prefix("word:") {
        return thompson::parse_word(w);
    }
    let text = if s.starts_with('{') || s.contains('(') || s == "*/*" || s.starts_with("*/") {
        s.to_string()
    } else {
        read_file(Path::new(s))?
    };
    let text = text.trim();
    if text.starts_with('{') {
        let raw: GroupElement = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        return thompson::reduce(&raw.num, &raw.den, raw.rot as i64);
    }
    let (pair, rot) = match text.split_once('@') {
        Some((p, r)) => (p, r.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad rotation {r:?}")))?),
        None => (text, 0),
    };
    let (num, den) = pair.split_once('/').ok_or_else(|| Error::Parse(format!("cannot read element {s:?}")))?;
    thompson::reduce(&num.parse()?, &den.parse()?, rot)
}

fn element_json(g: &GroupElement) -> Value {
    json!({
        "num": g.num.to_string(),
        "den": g.den.to_string(),
        "rot": g.rot,
        "identity": g.is_identity(),
        "in_f": g.in_f(),
    })
}

fn thompson_cmd(c: &ThompsonCmd) -> Result<Value> {
    match c {
        ThompsonCmd::Mul { a, b, c } => {
            let mut g = thompson::multiply(&parse_element(a)?, &parse_element(b)?);
            if let Some(c) = c {
                g = thompson::multiply(&g, &parse_element(c)?);
            }
            Ok(element_json(&g))
        }
        ThompsonCmd::Inv { a } => Ok(element_json(&thompson::inverse(&parse_element(a)?))),
        ThompsonCmd::Reduce { num, den, rot } => Ok(element_json(&thompson::reduce(&num.parse()?, &den.parse()?, *rot)?)),
        ThompsonCmd::Topl { a } => Ok(to_value(&parse_element(a)?.to_pl())),
        ThompsonCmd::Frompl { points, circle } => {
            let mut pts = Vec::new();
            for p in split_list(points) {
                let (x, y) = p.split_once(':').ok_or_else(|| Error::Parse(format!("expected x:y, got {p:?}")))?;
                pts.push((x.parse::<Dyadic>()?, y.parse::<Dyadic>()?));
            }
            let map = PLMap { circle: *circle, points: pts };
            Ok(element_json(&thompson::pl_to_element(&map)?))
        }
        ThompsonCmd::Gen { name } => Ok(element_json(&thompson::generator(name)?)),
    }
}

fn load_function(a: &FunctionArgs) -> Result<Diffeo> {
    let mut f = match (&a.f, &a.csv) {
        (Some(name), _) => Diffeo::builtin(name)?,
        (None, Some(path)) => {
            let mode = if a.mode == "circle" { Mode::Circle } else { Mode::Interval };
            Diffeo::from_csv(&read_file(path)?, mode)?
        }
        (None, None) => return Err(Error::Parse("give --f or --csv".into())),
    };
    if a.slope_bound.is_some() {
        f.bound = a.slope_bound;
    }
    Ok(f)
}

fn approx_cmd(c: &ApproxCmd) -> Result<Value> {
    match c {
        ApproxCmd::Run { func, eps, grid } => {
            let f = load_function(func)?;
            let pl = diffapprox::approximate_pl(&f, *eps)?;
            let g = thompson::pl_to_element(&pl)?;
            let err = diffapprox::sup_error(&f, &pl, (*grid).max(1));
            Ok(json!({
                "element": element_json(&g),
                "pl": to_value(&pl),
                "sup_error": err,
                "within_eps": err < *eps,
            }))
        }
        ApproxCmd::Dist { f, a, eps } => {
            let d = Diffeo::builtin(f)?;
            let fprime = d.fprime.clone().ok_or_else(|| Error::Parse(format!("{f} has no derivative")))?;
            let g = match a {
                Some(a) => parse_element(a)?,
                None => diffapprox::approximate(&d, *eps)?,
            };
            Ok(json!({"element": element_json(&g), "distance": diffapprox::derivative_distance(&*fprime, &g)}))
        }
    }
}

fn load_tensor(cli: &Cli, file: &Option<PathBuf>) -> Result<Isometry3> {
    match file {
        Some(path) => Isometry3::from_json(&read_file(path)?),
        None if cli.preset == "fibonacci" => {
            Err(Error::Parameter("the fibonacci preset has no three-leg tensor; use `trivalent fib`".into()))
        }
        None => Isometry3::preset(&cli.preset),
    }
}

fn load_system(v: &Isometry3, file: &Option<PathBuf>, tol: f64) -> Result<AscendingSystem> {
    match file {
        None => Ok(tensorlab::qutrit_system()),
        Some(_) => tensorlab::ascending_eigensystem(v, None, tol),
    }
}

fn parse_complex_list(s: &str) -> Result<Vec<C64>> {
    let raw: Value = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    let items = raw.as_array().ok_or_else(|| Error::Parse("expected a JSON array".into()))?;
    items
        .iter()
        .map(|x| match x {
            Value::Number(n) => Ok(C64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
            Value::Array(p) if p.len() == 2 => match (p[0].as_f64(), p[1].as_f64()) {
                (Some(re), Some(im)) => Ok(C64::new(re, im)),
                _ => Err(Error::Parse(format!("bad complex entry {x}"))),
            },
            _ => Err(Error::Parse(format!("bad complex entry {x}"))),
        })
        .collect()
}

fn ope_json(table: &OpeTable, labels: &[String], filter: Option<(usize, usize)>) -> Value {
    let entries: Vec<Value> = table
        .entries
        .iter()
        .filter(|e| filter.is_none_or(|(a, b)| e.alpha == a && e.beta == b))
        .map(|e| {
            json!({
                "alpha": labels[e.alpha],
                "beta": labels[e.beta],
                "gamma": labels[e.gamma],
                "coefficient": cjson(e.coefficient),
                "exponent": e.exponent,
            })
        })
        .collect();
    let n: Vec<Value> = (0..table.n.len()).map(|a| json!({"alpha": labels[a], "matrix": table.fusion_matrix(a)})).collect();
    json!({"entries": entries, "fusion_matrices": n})
}

fn fib_json(p: &TrivalentParams, tol: f64) -> Result<Value> {
    let fib = trivalent::fib_ascending(p)?;
    let e = &fib.e_matrix;
    let e_rows: Vec<Value> = (0..2).map(|i| cvec(&[e[(i, 0)], e[(i, 1)]])).collect();
    let mu: Vec<Value> = fib.mu.iter().map(|v| cvec(&[v[0], v[1]])).collect();
    let fusion: Vec<Value> = (0..2)
        .map(|a| Value::Array((0..2).map(|b| cvec(&fib.fusion[a][b])).collect()))
        .collect();
    let table = ope_from_fusion(&fib.eigenvalues, &fib.fusion, tol);
    Ok(json!({
        "labels": fib.labels,
        "e_matrix": e_rows,
        "eigenvalues": cvec(&fib.eigenvalues),
        "scaling_dimensions": fib.scaling_dimensions(),
        "mu": mu,
        "fusion": fusion,
        "normalization": cjson(fib.normalization),
        "ope": ope_json(&table, &fib.labels, None),
    }))
}

fn tensor_cmd(c: &TensorCmd, cli: &Cli) -> Result<Value> {
    match c {
        TensorCmd::Verify { file } => {
            let v = load_tensor(cli, file)?;
            Ok(to_value(&tensorlab::verify_tensor(&v, cli.tol)))
        }
        TensorCmd::Eigen { file } if file.is_none() && cli.preset == "fibonacci" => {
            fib_json(&TrivalentParams::fibonacci(), cli.tol)
        }
        TensorCmd::Eigen { file } => {
            let v = load_tensor(cli, file)?;
            let sys = load_system(&v, file, cli.tol)?;
            let mu: Vec<Value> = sys.mu.iter().map(trivalent::matrix_to_json).collect();
            Ok(json!({
                "labels": sys.labels,
                "eigenvalues": cvec(&sys.eigenvalues),
                "scaling_dimensions": sys.scaling_dimensions(),
                "mu": mu,
                "eigen_residual": sys.eigen_residual(&v),
                "biorthogonality_residual": sys.biorthogonality_residual(),
            }))
        }
        TensorCmd::Fusion { file } if file.is_none() && cli.preset == "fibonacci" => {
            fib_json(&TrivalentParams::fibonacci(), cli.tol)
        }
        TensorCmd::Fusion { file } => {
            let v = load_tensor(cli, file)?;
            let sys = load_system(&v, file, cli.tol)?;
            let table = ope_table(&sys, cli.tol);
            let mut out = ope_json(&table, &sys.labels, None);
            out["fusion_residual"] = json!(tensorlab::fusion_residual(&sys, &v));
            Ok(out)
        }
        TensorCmd::Blob { vector, file } => {
            let v = load_tensor(cli, file)?;
            let blobs = match vector {
                Some(s) => vec![parse_complex_list(s)?],
                None => tensorlab::qutrit_blobs(),
            };
            let mut results = Vec::new();
            for b in &blobs {
                results.push(json!({"vector": cvec(b), "blob": tensorlab::verify_blob(&v, b, cli.tol)?}));
            }
            Ok(json!({"results": results}))
        }
    }
}

fn load_state(source: &str, v: &Isometry3) -> Result<LimitState> {
    if source == "vacuum" {
        semicont::vacuum(v)
    } else {
        LimitState::from_json(&read_file(Path::new(source))?)
    }
}

fn state_cmd(c: &StateCmd, cli: &Cli) -> Result<Value> {
    let v = load_tensor(cli, &None)?;
    match c {
        StateCmd::Vacuum => Ok(semicont::vacuum(&v)?.to_json_value()),
        StateCmd::Act { element, state } => {
            let s = match state {
                Some(path) => LimitState::from_json(&read_file(path)?)?,
                None => semicont::vacuum(&v)?,
            };
            let out = semicont::act(&parse_element(element)?, &s, &v)?;
            Ok(json!({"state": out.to_json_value(), "norm": out.norm()}))
        }
        StateCmd::Inner { a, b, ga, gb } => {
            let mut sa = load_state(a, &v)?;
            let mut sb = load_state(b, &v)?;
            if let Some(g) = ga {
                sa = semicont::act(&parse_element(g)?, &sa, &v)?;
            }
            if let Some(g) = gb {
                sb = semicont::act(&parse_element(g)?, &sb, &v)?;
            }
            Ok(json!({"value": cjson(semicont::inner(&sa, &sb, &v)?)}))
        }
    }
}

fn parse_points(s: &str) -> Result<Vec<Dyadic>> {
    split_list(s).into_iter().map(correlators::parse_point).collect()
}

fn field_index(sys: &AscendingSystem, s: &str) -> Result<usize> {
    match s.parse::<usize>() {
        Ok(i) if i < sys.len() => Ok(i),
        Ok(i) => Err(Error::Shape(format!("field index {i} out of range"))),
        Err(_) => sys.index_of(s),
    }
}

fn field_indices(sys: &AscendingSystem, s: &str) -> Result<Vec<usize>> {
    split_list(s).into_iter().map(|a| field_index(sys, a)).collect()
}

fn partition_json(p: &DyadicPartition) -> Value {
    to_value(&p.breakpoints)
}

fn qutrit_model(cli: &Cli) -> Result<Model> {
    if cli.preset == "fibonacci" {
        return Err(Error::Parameter("field correlators need the qutrit preset".into()));
    }
    Ok(Model::qutrit())
}

/// Leaf index `x · 2^m` of a point representable at level `m`.
fn site(x: Dyadic, m: u32) -> Result<usize> {
    Ok(DyadicPoint::new(x)?.leaf_index(m)? as usize)
}

fn corr_cmd(c: &CorrCmd, cli: &Cli) -> Result<Value> {
    match c {
        CorrCmd::Metric { x, y, l } => {
            let (x, y) = (x.parse::<DyadicPoint>()?, y.parse::<DyadicPoint>()?);
            let l = l.unwrap_or(x.level().max(y.level()));
            Ok(to_value(&xor_and_tree_metric(&x, &y, l)?))
        }
        CorrCmd::Support { points } => {
            let pts: Vec<RationalPoint> = split_list(points).into_iter().map(RationalPoint::from_str).collect::<Result<_>>()?;
            let p = minimal_supporting_partition(&pts)?;
            Ok(json!({"partition": partition_json(&p), "intervals": p.len()}))
        }
        CorrCmd::Npoint { points, alphas, element, vacuum } => {
            let model = qutrit_model(cli)?.with_vacuum(vacuum.parse::<Vacuum>()?);
            let pts = parse_points(points)?;
            let al = field_indices(&model.sys, alphas)?;
            let g = element.as_deref().map(parse_element).transpose()?;
            let r = model.npoint(&pts, &al, g.as_ref())?;
            Ok(json!({
                "value": cjson(r.value),
                "partition": partition_json(&r.partition),
                "evaluated_on": partition_json(&r.evaluated_on),
                "formula_path": "minimal supporting partition",
            }))
        }
        CorrCmd::Twopoint { x, y, alpha, beta, m } => {
            let model = qutrit_model(cli)?;
            let (x, y) = (correlators::parse_point(x)?, correlators::parse_point(y)?);
            let (a, b) = (field_index(&model.sys, alpha)?, field_index(&model.sys, beta)?);
            match m {
                Some(m) => {
                    let (j, k) = (site(x, *m)?, site(y, *m)?);
                    let value = lattice_two_point(&model.sys, *m, j, k, a, b)?;
                    Ok(json!({"value": cjson(value), "sites": [j, k], "m": m, "formula_path": "lattice"}))
                }
                None => {
                    let value = model.two_point_closed_form(x, y, a, b)?;
                    Ok(json!({"value": cjson(value), "formula_path": "closed form"}))
                }
            }
        }
        CorrCmd::Ope { alpha, beta } if cli.preset == "fibonacci" => {
            let fib = trivalent::fib_ascending(&TrivalentParams::fibonacci())?;
            let table = ope_from_fusion(&fib.eigenvalues, &fib.fusion, cli.tol);
            let find = |s: &str| {
                fib.labels.iter().position(|l| l == s).ok_or_else(|| Error::Parse(format!("unknown field {s:?}")))
            };
            let filter = match (alpha, beta) {
                (Some(a), Some(b)) => Some((find(a)?, find(b)?)),
                _ => None,
            };
            Ok(ope_json(&table, &fib.labels, filter))
        }
        CorrCmd::Ope { alpha, beta } => {
            let sys = tensorlab::qutrit_system();
            let table = ope_table(&sys, cli.tol);
            let filter = match (alpha, beta) {
                (Some(a), Some(b)) => Some((field_index(&sys, a)?, field_index(&sys, b)?)),
                _ => None,
            };
            let mut out = ope_json(&table, &sys.labels, filter);
            out["scaling_dimensions"] = json!(sys.scaling_dimensions());
            Ok(out)
        }
        CorrCmd::Oracle { m, ops } => {
            let model = qutrit_model(cli)?;
            let mut leaf_ops = Vec::new();
            let mut parsed = Vec::new();
            for item in split_list(ops) {
                let (j, a) = item.split_once(':').ok_or_else(|| Error::Parse(format!("expected site:field, got {item:?}")))?;
                let j: usize = j.trim().parse().map_err(|_| Error::Parse(format!("bad site {j:?}")))?;
                let a = field_index(&model.sys, a.trim())?;
                leaf_ops.push((j, model.sys.mu[a].clone()));
                parsed.push((j, a));
            }
            let oracle = correlators::brute_force_npoint(&model.v, *m, &leaf_ops)?;
            let formula = match parsed.as_slice() {
                [] => Some(C64::new(1.0, 0.0)),
                [(_, a)] => Some(lattice_one_point(&model.sys, *m, *a)?),
                [(j, a), (k, b)] => Some(lattice_two_point(&model.sys, *m, *j, *k, *a, *b)?),
                _ => None,
            };
            let mut out = json!({"oracle": cjson(oracle)});
            if let Some(f) = formula {
                out["formula"] = cjson(f);
                out["difference"] = json!((f - oracle).norm());
            }
            Ok(out)
        }
        CorrCmd::Covariance { element, points, alphas } => {
            let model = qutrit_model(cli)?;
            let g = parse_element(element)?;
            let pts = parse_points(points)?;
            let al = field_indices(&model.sys, alphas)?;
            Ok(json!({"residual": model.covariance_residual(&g, &pts, &al)?}))
        }
    }
}

fn parse_complex(s: &str) -> Result<C64> {
    Complex64::from_str(s.trim()).map_err(|_| Error::Parse(format!("bad complex number {s:?}")))
}

fn load_params(a: &ParamArgs) -> Result<TrivalentParams> {
    let Some(d) = &a.d else {
        return Ok(TrivalentParams::fibonacci());
    };
    let (d, b) = (parse_complex(d)?, parse_complex(&a.b)?);
    match (&a.t, a.dim) {
        (None, None | Some(3)) => TrivalentParams::so3(d, b),
        (None, Some(k)) => Err(Error::Parameter(format!("give --t for dim C4 = {k}"))),
        (Some(t), dim) => TrivalentParams::new(d, b, parse_complex(t)?, dim.unwrap_or(4)),
    }
}

fn sum_json(s: &DiagramSum) -> Value {
    if let Some(z) = s.as_scalar() {
        return json!({"value": cjson(z)});
    }
    let terms: Vec<Value> =
        s.terms.iter().map(|(c, d)| json!({"coefficient": cjson(*c), "diagram": to_value(&d.to_json_value())})).collect();
    json!({"terms": terms})
}

fn trivalent_cmd(c: &TrivalentCmd, cli: &Cli) -> Result<Value> {
    match c {
        TrivalentCmd::Reduce { file, name, params } => {
            let p = load_params(params)?;
            let d = match (file, name) {
                (Some(path), _) => Diagram::from_json(&read_file(path)?)?,
                (None, Some(n)) => trivalent::named_diagram(n)?,
                (None, None) => return Err(Error::Parse("give --file or --name".into())),
            };
            let mut s = DiagramSum::single(d);
            if s.terms.iter().any(|(_, d)| d.has_crossings()) {
                s = trivalent::resolve_crossings(&s, trivalent::braid_phase());
            }
            let mut out = sum_json(&trivalent::reduce(&s, &p)?);
            out["params"] = params_json(&p);
            Ok(out)
        }
        TrivalentCmd::Gram { names, params } => {
            let p = load_params(params)?;
            let sums: Vec<DiagramSum> =
                split_list(names).into_iter().map(|n| trivalent::named_diagram(n).map(DiagramSum::single)).collect::<Result<_>>()?;
            let g = trivalent::gram_matrix(&sums, &p)?;
            let mut out = json!({"names": split_list(names), "gram": trivalent::matrix_to_json(&g), "params": params_json(&p)});
            match trivalent::gram_orthonormalize(&g, cli.tol) {
                Ok(o) => {
                    out["theta"] = trivalent::matrix_to_json(&o.theta);
                    out["rank"] = json!(o.rank);
                }
                Err(e) => out["orthonormalization_error"] = json!({"error": e.kind(), "message": e.to_string()}),
            }
            Ok(out)
        }
        TrivalentCmd::Square { params } => {
            let p = load_params(params)?;
            let sw = trivalent::square_window(&p)?;
            Ok(json!({
                "coefficients": cvec(&sw.coefficients),
                "w4": cjson(sw.w4),
                "det_m40": cjson(trivalent::det_m40(&p)),
                "params": params_json(&p),
            }))
        }
        TrivalentCmd::Fib => fib_json(&TrivalentParams::fibonacci(), cli.tol),
    }
}

fn params_json(p: &TrivalentParams) -> Value {
    json!({"d": cjson(p.d), "b": cjson(p.b), "t": cjson(p.t), "dim_c4": p.dim_c4})
}
