//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cle_core::cle::{cle_loop_arcs, conformal_radius_sample, ThetaParams};
use cle_core::hexgrid::HexPatch;
use cle_core::loewner::{chordal_trace, radial_trace, sle_driver, sle_kr_driver, KrConfig, KrVariant, LoewnerMode};
use cle_core::loops::{boundary_path_from_loops, exploration_path, exploration_tree, height_function, loops_from_coloring, BoundaryCondition, Coloring};
use cle_core::onmodel::{on_exact_distribution, on_mcmc_sample, LoopCounter, OnParams};
use cle_core::rng::{rng_from_seed, uniform};
use cle_core::stats::{histogram, ks_two_sample, ks_two_sample_p_value, mean, std_error, variance};
use cle_core::stochastic::{bessel_path, empirical_char_fn, eps_bessel_path, skew_bessel_path, stable_char_fn, stable_sample, BesselParams, StableParams};
use serde_json::json;

use crate::batch::run_batch;
use crate::output::{csv_string, header_line, json_string, num, traces_svg, tree_svg};
use crate::patches::{load_patch, patch_to_text};
use crate::verify::{mean_closure_time, reflected_first_passage, run_criterion, Suite, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "cle", version, about = "Exploration trees, loop models, Bessel/stable processes and CLE simulation")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Master seed; falls back to CLE_SEED, then 0.
    #[arg(long, global = true, env = "CLE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Write the artifact here instead of stdout.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    /// Monte Carlo worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PatchArgs {
    /// Built-in patch (hex1, pair2, flower7, "rhombus N") or a patch file.
    #[arg(long, default_value = "flower7")]
    pub faces: String,
    /// Boundary position of the root vertex.
    #[arg(long, default_value_t = 0)]
    pub root: usize,
    /// Comma-separated black face indices; overrides a `black` line in the file.
    #[arg(long, value_delimiter = ',')]
    pub black: Option<Vec<usize>>,
    /// Chordal boundary condition: outside faces along the clockwise arc from the root to this
    /// boundary vertex are black.
    #[arg(long)]
    pub arc_to: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Chordal,
    Radial,
}

impl From<Mode> for LoewnerMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Chordal => LoewnerMode::Chordal,
            Mode::Radial => LoewnerMode::Radial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Exact,
    Eps,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sizes, boundary and root of a patch.
    PatchInfo(PatchArgs),
    /// A sample of the O(n) loop model as a coloring file.
    OnSample {
        #[command(flatten)]
        patch: PatchArgs,
        #[arg(long, default_value_t = 1.0)]
        n: f64,
        #[arg(long, default_value_t = 1.0)]
        x: f64,
        #[arg(long, default_value_t = 1000)]
        sweeps: usize,
    },
    /// Exact O(n) probabilities of every coloring (CSV).
    OnExact {
        #[command(flatten)]
        patch: PatchArgs,
        #[arg(long, default_value_t = 1.0)]
        n: f64,
        #[arg(long, default_value_t = 1.0)]
        x: f64,
    },
    /// Coloring and exploration tree as SVG; without --black the coloring is uniform random.
    TreeSvg {
        #[command(flatten)]
        patch: PatchArgs,
        /// Overlay the loop ensemble.
        #[arg(long)]
        loops: bool,
    },
    /// Height function per face (CSV).
    HeightsCsv(PatchArgs),
    /// Boundary path to a boundary vertex built from the loops, next to the exploration path (CSV).
    BoundaryPath {
        #[command(flatten)]
        patch: PatchArgs,
        #[arg(long)]
        target: usize,
    },
    /// One Bessel path with its driving noise and companion process (CSV).
    BesselCsv {
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        /// Restart at this level after each zero hit.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Signed excursions with this skew (needs --epsilon or uses sqrt(dt)).
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
    },
    /// Mean jump totals of epsilon-jumping Bessel paths over a sweep of epsilon (JSON).
    EpsBesselReport {
        #[arg(long)]
        delta: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025")]
        epsilons: Vec<f64>,
        #[arg(long, default_value_t = 1e-5)]
        dt: f64,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 500)]
        paths: usize,
    },
    /// Empirical against exact characteristic function of a stable law (JSON).
    StableCheck {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
    },
    /// Trace of SLE_kappa as SVG.
    SleTraceSvg {
        #[arg(long)]
        kappa: f64,
        #[arg(long, value_enum, default_value_t = Mode::Chordal)]
        mode: Mode,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
    },
    /// SLE_kappa(rho) driving pair and trace (CSV: t, Re gamma, Im gamma, W, O).
    SlekrDriverCsv {
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long, value_enum, default_value_t = Mode::Chordal)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Variant::Exact)]
        variant: Variant,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
    },
    /// Law of -log conformal radius of the first loop around 0 (JSON, optional histogram CSV).
    CleRadiusHist {
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 1e-2)]
        epsilon: f64,
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 40)]
        bins: usize,
        /// Also write the histogram (bin, count) here.
        #[arg(long)]
        hist_csv: Option<PathBuf>,
    },
    /// Arcs of the first nested loops around 0 in the unit disk (SVG).
    CleLoopsSvg {
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 1e-2)]
        epsilon: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 2)]
        loops: usize,
    },
    /// Runs acceptance criteria; exits 1 if a gating criterion fails.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Run a single criterion instead of a suite.
        #[arg(long)]
        criterion: Option<u8>,
        /// Emit JSON instead of one line per criterion.
        #[arg(long)]
        json: bool,
    },
}

/// Failure of a subcommand after parsing.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("verification failed")]
    Verification,
}

fn usage<E: std::fmt::Display>(e: E) -> RunError {
    RunError::Usage(e.to_string())
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(RunError::Verification) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn emit(common: &Common, text: &str) -> Result<(), RunError> {
    match &common.out {
        Some(p) => std::fs::write(p, text).map_err(|source| RunError::Io { path: p.display().to_string(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|source| RunError::Io { path: "stdout".into(), source })
        }
    }
}

/// Command line without the global flags, recorded in artifact headers.
fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::PatchInfo(_) => "patch-info",
        Command::OnSample { .. } => "on-sample",
        Command::OnExact { .. } => "on-exact",
        Command::TreeSvg { .. } => "tree-svg",
        Command::HeightsCsv(_) => "heights-csv",
        Command::BoundaryPath { .. } => "boundary-path",
        Command::BesselCsv { .. } => "bessel-csv",
        Command::EpsBesselReport { .. } => "eps-bessel-report",
        Command::StableCheck { .. } => "stable-check",
        Command::SleTraceSvg { .. } => "sle-trace-svg",
        Command::SlekrDriverCsv { .. } => "slekr-driver-csv",
        Command::CleRadiusHist { .. } => "cle-radius-hist",
        Command::CleLoopsSvg { .. } => "cle-loops-svg",
        Command::Verify { .. } => "verify",
    }
}

fn boundary_of(p: &HexPatch, a: &PatchArgs) -> BoundaryCondition {
    match a.arc_to {
        Some(b) => BoundaryCondition::ChordalArc { a: p.root(), b },
        None => BoundaryCondition::AllWhiteOutside,
    }
}

/// The coloring from --black, the patch file, or a uniform random draw.
fn coloring<'p>(p: &'p HexPatch, a: &PatchArgs, file_black: Option<Vec<usize>>, seed: u64) -> Result<Coloring<'p>, RunError> {
    let boundary = boundary_of(p, a);
    match a.black.clone().or(file_black) {
        Some(faces) => Coloring::from_faces(p, &faces, boundary).map_err(usage),
        None => {
            let mut rng = rng_from_seed(seed);
            let black = (0..p.num_faces()).map(|_| uniform(&mut rng) < 0.5).collect();
            Coloring::new(p, black, boundary).map_err(usage)
        }
    }
}

fn open_patch(a: &PatchArgs) -> Result<(HexPatch, Option<Vec<usize>>), RunError> {
    load_patch(&a.faces, a.root).map_err(usage)
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    let c = &cli.common;
    let seed = c.seed;
    let name = command_name(&cli.command);
    let text = match &cli.command {
        Command::PatchInfo(a) => {
            let (p, _) = open_patch(a)?;
            let deg2 = p.boundary_cycle().iter().filter(|&&v| p.degree(v) == 2).count();
            json_string(
                name,
                seed,
                json!({
                    "faces": p.num_faces(),
                    "vertices": p.num_vertices(),
                    "edges": p.num_edges(),
                    "boundary_length": p.boundary_cycle().len(),
                    "degree_two_boundary_vertices": deg2,
                    "root": p.root(),
                    "root_position": p.root_position(),
                    "root_position_xy": p.position(p.root()),
                    "boundary_cycle": p.boundary_cycle(),
                }),
            )
        }
        Command::OnSample { patch, n, x, sweeps } => {
            let (p, _) = open_patch(patch)?;
            let params = OnParams::new(*n, *x, boundary_of(&p, patch)).map_err(usage)?;
            let s = on_mcmc_sample(&p, &params, *sweeps, seed).map_err(usage)?;
            format!("# {}\n{}", header_line(name, seed), patch_to_text(&p, Some(&s.black_faces())))
        }
        Command::OnExact { patch, n, x } => {
            let (p, _) = open_patch(patch)?;
            let params = OnParams::new(*n, *x, boundary_of(&p, patch)).map_err(usage)?;
            let exact = on_exact_distribution(&p, &params).map_err(usage)?;
            let mut counter = LoopCounter::new(&p, params.boundary).map_err(usage)?;
            let rows: Vec<Vec<String>> = exact
                .probs
                .iter()
                .enumerate()
                .map(|(m, pr)| {
                    let (loops, len) = counter.count(|f| m >> f & 1 == 1);
                    vec![m.to_string(), loops.to_string(), len.to_string(), num(*pr)]
                })
                .collect();
            csv_string(name, seed, &["mask", "loops", "length", "probability"], rows).map_err(usage)?
        }
        Command::TreeSvg { patch, loops } => {
            let (p, fb) = open_patch(patch)?;
            let col = coloring(&p, patch, fb, seed)?;
            let tree = exploration_tree(&col);
            let ens = loops.then(|| loops_from_coloring(&col));
            tree_svg(&col, &tree, ens.as_ref(), &header_line(name, seed))
        }
        Command::HeightsCsv(a) => {
            let (p, fb) = open_patch(a)?;
            let col = coloring(&p, a, fb, seed)?;
            let h = height_function(&col, p.root_position()).map_err(usage)?;
            let rows: Vec<Vec<String>> = (0..p.num_faces())
                .map(|f| {
                    let fc = p.face(f);
                    vec![f.to_string(), fc.q.to_string(), fc.r.to_string(), u8::from(col.black()[f]).to_string(), h.values[f].to_string()]
                })
                .collect();
            csv_string(name, seed, &["face", "q", "r", "black", "height"], rows).map_err(usage)?
        }
        Command::BoundaryPath { patch, target } => {
            let (p, fb) = open_patch(patch)?;
            let col = coloring(&p, patch, fb, seed)?;
            if *target >= p.num_vertices() {
                return Err(RunError::Usage(format!("target {target} is not a vertex")));
            }
            let e = loops_from_coloring(&col);
            let q = boundary_path_from_loops(&col, &e, *target).map_err(usage)?;
            let expl = exploration_path(&col, *target).vertices;
            let n = q.len().max(expl.len());
            let cell = |v: Option<&usize>| v.map_or_else(String::new, usize::to_string);
            let rows: Vec<Vec<String>> = (0..n).map(|k| vec![k.to_string(), cell(q.get(k)), cell(expl.get(k))]).collect();
            csv_string(name, seed, &["step", "boundary_path", "exploration_path"], rows).map_err(usage)?
        }
        Command::BesselCsv { delta, x0, dt, t_end, epsilon, beta, mu } => {
            let mut bp = BesselParams::new(*delta, *x0).map_err(usage)?;
            if let Some(e) = epsilon {
                bp = bp.with_epsilon(*e).map_err(usage)?;
            }
            let fmt_rows = |cols: Vec<&[f64]>| -> Vec<Vec<String>> {
                (0..cols[0].len()).map(|k| std::iter::once(num(k as f64 * dt)).chain(cols.iter().map(|c| num(c[k]))).collect()).collect()
            };
            let (header, rows): (Vec<&str>, _) = match (beta, epsilon) {
                (Some(b), _) => {
                    let path = skew_bessel_path(&bp.with_skew(*b, *mu).map_err(usage)?, *dt, *t_end, seed).map_err(usage)?;
                    (vec!["t", "B", "X", "Y", "J"], fmt_rows(vec![&path.b, &path.x.values, &path.y, &path.j]))
                }
                (None, Some(_)) => {
                    let path = eps_bessel_path(&bp, *dt, *t_end, seed).map_err(usage)?;
                    (vec!["t", "B", "X", "J"], fmt_rows(vec![&path.b, &path.x.values, &path.j]))
                }
                (None, None) => {
                    let path = bessel_path(&bp, *dt, *t_end, seed).map_err(usage)?;
                    (vec!["t", "B", "X", "Y"], fmt_rows(vec![&path.b, &path.x.values, &path.y]))
                }
            };
            csv_string(name, seed, &header, rows).map_err(usage)?
        }
        Command::EpsBesselReport { delta, epsilons, dt, t_end, paths } => {
            let mut rows = Vec::new();
            for &e in epsilons {
                let bp = BesselParams::new(*delta, 0.0).and_then(|b| b.with_epsilon(e)).map_err(usage)?;
                eps_bessel_path(&bp, *dt, *t_end, seed).map_err(usage)?;
                let r = run_batch(*paths, seed, c.jobs, |_, s| {
                    let path = eps_bessel_path(&bp, *dt, *t_end, s).expect("validated");
                    (*path.j.last().expect("non-empty"), path.sum_sq_jumps)
                });
                let j: Vec<f64> = r.iter().map(|v| v.0).collect();
                let sq: Vec<f64> = r.iter().map(|v| v.1).collect();
                rows.push(json!({
                    "epsilon": e,
                    "mean_j": mean(&j),
                    "se_j": std_error(&j),
                    "mean_sum_sq_jumps": mean(&sq),
                    "se_sum_sq_jumps": std_error(&sq),
                }));
            }
            json_string(name, seed, json!({ "delta": delta, "dt": dt, "t_end": t_end, "paths": paths, "sweep": rows }))
        }
        Command::StableCheck { alpha, beta, mu, b, n } => {
            let s = StableParams::new(*alpha, *beta, *mu, *b).map_err(usage)?;
            let xs = stable_sample(&s, *n, seed);
            let grid: Vec<f64> = (0..=40).map(|i| -5.0 + 0.25 * f64::from(i)).collect();
            let sup = grid.iter().map(|&l| (empirical_char_fn(&xs, l) - stable_char_fn(&s, l)).norm()).fold(0.0, f64::max);
            json_string(
                name,
                seed,
                json!({
                    "alpha": alpha, "beta": beta, "mu": mu, "b": b, "n": n,
                    "sup_cf_error": sup,
                    "all_positive": xs.iter().all(|&x| x > 0.0),
                    "positive_support": s.is_positive(),
                }),
            )
        }
        Command::SleTraceSvg { kappa, mode, dt, t_end } => {
            let d = sle_driver(*kappa, (*mode).into(), *dt, *t_end, seed).map_err(usage)?;
            let tr = match mode {
                Mode::Chordal => chordal_trace(&d),
                Mode::Radial => radial_trace(&d),
            };
            traces_svg(&[tr.points], *mode == Mode::Radial, &header_line(name, seed))
        }
        Command::SlekrDriverCsv { kappa, rho, mode, variant, epsilon, beta, mu, x0, dt, t_end } => {
            let v = match variant {
                Variant::Exact => KrVariant::Exact,
                Variant::Eps => KrVariant::Eps { epsilon: *epsilon, beta: *beta, mu: *mu },
            };
            let cfg = KrConfig { kappa: *kappa, rho: *rho, mode: (*mode).into(), variant: v, x0: *x0, dt: *dt, t_end: *t_end, seed };
            let d = sle_kr_driver(&cfg).map_err(usage)?;
            let tr = match mode {
                Mode::Chordal => chordal_trace(&d),
                Mode::Radial => radial_trace(&d),
            };
            let o = d.o.clone().unwrap_or_default();
            let rows: Vec<Vec<String>> = (0..=d.num_steps())
                .map(|k| vec![num(d.time(k)), num(tr.points[k].re), num(tr.points[k].im), num(d.w[k]), o.get(k).map_or_else(String::new, |v| num(*v))])
                .collect();
            csv_string(name, seed, &["t", "re_gamma", "im_gamma", "W", "O"], rows).map_err(usage)?
        }
        Command::CleRadiusHist { kappa, beta, epsilon, dt, n, bins, hist_csv } => {
            let p = ThetaParams::new(*kappa, *beta, *epsilon, *dt).map_err(usage)?;
            let t = run_batch(*n, seed, c.jobs, |_, s| conformal_radius_sample(p, 1, s)[0]);
            let hi = t.iter().cloned().fold(0.0, f64::max);
            let counts = histogram(&t, 0.0, hi, *bins);
            let mut body = json!({
                "kappa": kappa, "beta": beta, "epsilon": epsilon, "dt": dt, "n": n,
                "mean": mean(&t),
                "variance": variance(&t),
                "std_error": std_error(&t),
                "closed_form_mean": mean_closure_time(*kappa),
                "histogram": { "lo": 0.0, "hi": hi, "counts": counts },
            });
            if *kappa == 4.0 {
                // Reference law: first time |B| reaches pi.
                let oracle = run_batch(*n, seed ^ 0x5eed, c.jobs, |_, s| reflected_first_passage(std::f64::consts::PI, 1e-4, s));
                let d = ks_two_sample(&t, &oracle);
                body["ks_vs_reflected_bm"] = json!({ "statistic": d, "p_value": ks_two_sample_p_value(d, t.len(), oracle.len()) });
            }
            if let Some(path) = hist_csv {
                let w = hi / *bins as f64;
                let rows: Vec<Vec<String>> = counts.iter().enumerate().map(|(i, k)| vec![num((i as f64 + 0.5) * w), k.to_string()]).collect();
                let csv = csv_string(name, seed, &["bin", "count"], rows).map_err(usage)?;
                std::fs::write(path, csv).map_err(|source| RunError::Io { path: path.display().to_string(), source })?;
            }
            json_string(name, seed, body)
        }
        Command::CleLoopsSvg { kappa, beta, epsilon, dt, loops } => {
            let p = ThetaParams::new(*kappa, *beta, *epsilon, *dt).map_err(usage)?;
            if *loops == 0 {
                return Err(RunError::Usage("--loops must be at least 1".into()));
            }
            let arcs = cle_loop_arcs(p, *loops, seed);
            let traces: Vec<_> = arcs.into_iter().map(|a| std::iter::once(a.start).chain(a.arc.points).collect()).collect();
            traces_svg(&traces, true, &header_line(name, seed))
        }
        Command::Verify { suite, criterion, json } => {
            let ids = match criterion {
                Some(id) if (1..=14).contains(id) => vec![*id],
                Some(id) => return Err(RunError::Usage(format!("no criterion {id}"))),
                None => suite.criteria(),
            };
            let opt = VerifyOptions { seed, jobs: c.jobs };
            let results: Vec<_> = ids
                .into_iter()
                .map(|id| {
                    let r = run_criterion(id, &opt);
                    eprintln!("criterion {id} took {:.1} s", r.seconds);
                    r
                })
                .collect();
            let text = if *json {
                json_string(name, seed, serde_json::to_value(&results).expect("results serialize"))
            } else {
                let mut s = format!("# {}\n", header_line(name, seed));
                for r in &results {
                    s.push_str(&r.line());
                    s.push('\n');
                }
                s
            };
            emit(c, &text)?;
            return if results.iter().all(|r| r.passed || !r.gating) { Ok(()) } else { Err(RunError::Verification) };
        }
    };
    emit(c, &text)
}
