//! `fraclab`: eigenvalues, steady states, marches and parameter sweeps for
//! the fractional Fisher-KPP equation on unions of intervals.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fraclab::bounds::{decay_fit, envelope_check, EnvelopeReport};
use fraclab::discretization::{assemble, Grid};
use fraclab::eigensolver::{principal_eigen, DEFAULT_MAX_ITER, DEFAULT_TOL};
use fraclab::experiments::output::{self, LinePlot};
use fraclab::experiments::{self, SweepConfig};
use fraclab::kernel::{Alpha, EnvelopeParams};
use fraclab::steady::{default_initial, march_trajectory, monotone_solve, Outcome, Start};
use fraclab::{Domain1D, Error};
use serde_json::json;

#[derive(Parser)]
#[command(version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Principal eigenpair of every (alpha, first mu)
    Eig {
        #[command(flatten)]
        common: Common,
        /// Also write the assembled matrix (JSON header + row-major f64)
        #[arg(long)]
        dump_matrix: bool,
    },
    /// Steady state by monotone iteration
    Steady(Common),
    /// Time march from the default initial datum
    March(Common),
    /// Eigenvalue and outcome over the mu list
    SweepMu(Common),
    /// Eigenvalue over the alpha list at the first mu
    SweepAlpha(Common),
    /// Bisection staircase toward a target eigenvalue
    SweepJoint(Common),
    /// Far-field gap between coupled and single-patch eigenvalues
    GapExponent(Common),
    /// The three reference simulations
    Figures(Common),
    /// Envelope ratios and far-field decay on a tagged domain
    Envelope(Common),
}

#[derive(Args)]
struct Common {
    /// JSON scenario file
    #[arg(long)]
    config: PathBuf,
    /// Replace the alpha list by this single value
    #[arg(long)]
    alpha: Option<f64>,
    /// Replace the mu list by this single value
    #[arg(long)]
    mu: Option<f64>,
    /// Mesh width
    #[arg(long)]
    h: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> fraclab::Result<SweepConfig> {
        let mut cfg = SweepConfig::load(&self.config)?;
        if let Some(a) = self.alpha {
            cfg.alpha = vec![a];
        }
        if let Some(m) = self.mu {
            cfg.mu = vec![m];
        }
        if let Some(h) = self.h {
            cfg.h = h;
        }
        if let Some(o) = &self.out {
            cfg.output = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Exit codes: 0 ok, 1 numerical failure, 2 failed assertion or outcome,
/// 3 configuration error.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Io(_)
        | Error::InvalidParameter(_)
        | Error::InvalidInterval { .. }
        | Error::OverlappingIntervals(..)
        | Error::MissingClassification
        | Error::ClassificationLength { .. }
        | Error::EmptyMinus
        | Error::MeshTooCoarse { .. }
        | Error::Precondition(_)
        | Error::TargetOutOfRange { .. } => 3,
        Error::OutcomeMismatch { .. }
        | Error::MonotonicityViolation { .. }
        | Error::OrderViolation { .. }
        | Error::NonMonotoneStep(_)
        | Error::NotSettled => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cmd: Command) -> fraclab::Result<()> {
    match cmd {
        Command::Eig { common, dump_matrix } => eig(&common.load()?, dump_matrix),
        Command::Steady(c) => steady(&c.load()?),
        Command::March(c) => march(&c.load()?),
        Command::SweepMu(c) => sweep_mu(&c.load()?),
        Command::SweepAlpha(c) => sweep_alpha(&c.load()?),
        Command::SweepJoint(c) => sweep_joint(&c.load()?),
        Command::GapExponent(c) => gap(&c.load()?),
        Command::Figures(c) => figures(&c.load()?),
        Command::Envelope(c) => envelope(&c.load()?),
    }
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> fraclab::Result<PathBuf> {
    output::write_file(dir, name, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        Ok(())
    })
}

fn write_svg(dir: &Path, name: &str, plot: &LinePlot) -> fraclab::Result<PathBuf> {
    output::write_file(dir, name, |w| {
        use std::io::Write;
        w.write_all(plot.to_svg().as_bytes())?;
        Ok(())
    })
}

fn tag(alpha: f64) -> String {
    format!("a{alpha}")
}

/// Minus and plus sets of a tagged domain; untagged domains are all minus.
fn minus_plus(d: &Domain1D) -> fraclab::Result<(Domain1D, Option<Domain1D>)> {
    match d.tags() {
        Some(_) => d.split(),
        None => Ok((d.clone(), None)),
    }
}

fn eig(cfg: &SweepConfig, dump: bool) -> fraclab::Result<()> {
    let d = cfg.domain.at(cfg.mu[0])?;
    let grid = Grid::new(&d, cfg.h)?;
    let mut summary = Vec::new();
    for al in cfg.alphas()? {
        let m = assemble(&grid, al);
        let r = principal_eigen(&m, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
        println!("alpha={} xi={:.12} lambda={:.12} iterations={}", al.get(), r.xi, r.lambda, r.iterations);
        let name = tag(al.get());
        output::write_file(&cfg.output, &format!("phi_{name}.csv"), |w| {
            use std::io::Write;
            writeln!(w, "x,phi")?;
            for (x, p) in grid.nodes().iter().zip(&r.phi) {
                writeln!(w, "{},{}", output::num(*x), output::num(*p))?;
            }
            Ok(())
        })?;
        if dump {
            output::write_file(&cfg.output, &format!("matrix_{name}.bin"), |w| m.write_dump(w))?;
        }
        summary.push(json!({
            "alpha": al.get(), "mu": cfg.mu[0], "h": cfg.h, "xi": r.xi, "lambda": r.lambda,
            "iterations": r.iterations, "residual": r.residual, "asymmetry": m.asymmetry(),
        }));
    }
    write_json(&cfg.output, "eig.json", &json!(summary))?;
    Ok(())
}

fn steady(cfg: &SweepConfig) -> fraclab::Result<()> {
    let d = cfg.domain.at(cfg.mu[0])?;
    let (minus, plus) = minus_plus(&d)?;
    let grid = Grid::new(&d, cfg.h)?;
    let params = EnvelopeParams::new(1.0, cfg.eps.unwrap_or(0.5 * d.shortest()))?;
    let mut summary = Vec::new();
    for al in cfg.alphas()? {
        let m = assemble(&grid, al);
        let hi = monotone_solve(&m, Start::Super, cfg.steady_tol)?;
        let gap = match monotone_solve(&m, Start::Sub, cfg.steady_tol) {
            Ok(lo) => Some(fraclab::steady::sup_dist(&lo.n, &hi.n)),
            Err(Error::Precondition(_)) => None,
            Err(e) => return Err(e),
        };
        println!(
            "alpha={} outcome={} sup={:.6e} residual={:.3e} iterations={}",
            al.get(),
            hi.outcome,
            hi.sup(),
            hi.residual,
            hi.iterations
        );
        let name = tag(al.get());
        output::write_file(&cfg.output, &format!("steady_{name}.csv"), |w| {
            output::write_final_state_csv(w, &grid, &hi.n, &minus, plus.as_ref(), al, params)
        })?;
        summary.push(json!({
            "alpha": al.get(), "outcome": hi.outcome.to_string(), "sup_n": hi.sup(),
            "residual": hi.residual, "iterations": hi.iterations, "sub_super_distance": gap,
        }));
    }
    write_json(&cfg.output, "steady.json", &json!(summary))?;
    Ok(())
}

fn march(cfg: &SweepConfig) -> fraclab::Result<()> {
    let d = cfg.domain.at(cfg.mu[0])?;
    let (minus, plus) = minus_plus(&d)?;
    let grid = Grid::new(&d, cfg.h)?;
    let params = EnvelopeParams::new(1.0, cfg.eps.unwrap_or(0.5 * d.shortest()))?;
    let mut unsettled = Vec::new();
    for al in cfg.alphas()? {
        let m = assemble(&grid, al);
        let r = march_trajectory(&m, &default_initial(&m), &cfg.march)?;
        let name = tag(al.get());
        println!(
            "alpha={} outcome={} settled={} sup={:.6e} dt={}",
            al.get(),
            r.final_state.outcome,
            r.settled,
            r.final_state.sup(),
            r.dt
        );
        output::write_file(&cfg.output, &format!("trajectory_{name}.csv"), |w| {
            output::write_trajectory_csv(w, grid.nodes(), &r.trajectory)
        })?;
        output::write_file(&cfg.output, &format!("final_{name}.csv"), |w| {
            output::write_final_state_csv(w, &grid, &r.final_state.n, &minus, plus.as_ref(), al, params)
        })?;
        let mut plot = LinePlot::new(&format!("alpha = {}", al.get()), "x", "n");
        for (t, n) in &r.trajectory {
            plot = plot.with_series(&format!("t = {t}"), grid.nodes().iter().cloned().zip(n.iter().cloned()).collect());
        }
        write_svg(&cfg.output, &format!("march_{name}.svg"), &plot)?;
        if !r.settled {
            unsettled.push(al.get());
        }
    }
    if unsettled.is_empty() {
        Ok(())
    } else {
        Err(Error::NotSettled)
    }
}

fn sweep_mu(cfg: &SweepConfig) -> fraclab::Result<()> {
    let rows = experiments::sweep_mu(cfg)?;
    output::write_file(&cfg.output, "sweep_mu.csv", |w| output::write_sweep_csv(w, &rows))?;
    let mut plot = LinePlot::new("principal eigenvalue against half-distance", "mu", "xi");
    for a in &cfg.alpha {
        let pts = rows.iter().filter(|r| r.alpha == *a).map(|r| (r.mu, r.xi)).collect();
        plot = plot.with_series(&format!("alpha = {a}"), pts);
    }
    write_svg(&cfg.output, "sweep_mu.svg", &plot)?;
    for r in &rows {
        println!("mu={} alpha={} xi={:.12} outcome={}", r.mu, r.alpha, r.xi, r.outcome);
    }
    Ok(())
}

fn sweep_alpha(cfg: &SweepConfig) -> fraclab::Result<()> {
    let s = experiments::sweep_alpha(cfg)?;
    output::write_file(&cfg.output, "sweep_alpha.csv", |w| output::write_sweep_csv(w, &s.records))?;
    let plot = LinePlot::new("scaled principal eigenvalue", "alpha", "diam^(2 alpha) xi")
        .with_series("scaled", s.records.iter().zip(&s.scaled).map(|(r, v)| (r.alpha, *v)).collect());
    write_svg(&cfg.output, "sweep_alpha.svg", &plot)?;
    write_json(&cfg.output, "sweep_alpha.json", &serde_json::to_value(&s)?)?;
    println!(
        "top alpha={} extrapolated={:.8} classical={:.8} relative error={:.3e} scaled increasing={}",
        s.top_alpha, s.extrapolated, s.classical, s.relative_error, s.scaled_increasing
    );
    if s.scaled_increasing {
        Ok(())
    } else {
        Err(Error::OutcomeMismatch { figure: "sweep-alpha".into(), detail: "scaled eigenvalue not increasing".into() })
    }
}

fn sweep_joint(cfg: &SweepConfig) -> fraclab::Result<()> {
    let j = experiments::sweep_joint(cfg, cfg.xi_star)?;
    output::write_file(&cfg.output, "sweep_joint.csv", |w| output::write_joint_csv(w, &j))?;
    write_json(&cfg.output, "sweep_joint.json", &serde_json::to_value(&j)?)?;
    println!("target={:.8} admissible=[{:.8}, {:.8}]", j.xi_star, j.range.0, j.range.1);
    for s in &j.steps {
        println!("alpha={} mu={:.6e} xi={:.8} error={:.3e} hit={}", s.alpha, s.mu, s.xi, s.error, s.hit);
    }
    if j.steps.iter().any(|s| s.hit) {
        Ok(())
    } else {
        Err(Error::OutcomeMismatch {
            figure: "sweep-joint".into(),
            detail: format!("closest approach {:.3e}", j.best_error()),
        })
    }
}

fn gap(cfg: &SweepConfig) -> fraclab::Result<()> {
    let g = experiments::gap_exponent(cfg)?;
    output::write_file(&cfg.output, "gap.csv", |w| output::write_gap_csv(w, &g))?;
    write_json(&cfg.output, "gap.json", &serde_json::to_value(&g)?)?;
    let plot = LinePlot::new("log gap against log mu", "ln mu", "ln gap").with_series(
        "gap",
        g.mus.iter().zip(&g.gaps).map(|(m, v)| (m.ln(), v.ln())).collect(),
    );
    write_svg(&cfg.output, "gap.svg", &plot)?;
    println!(
        "slope={:.6} C={:.6e} r2={:.6} mu0={:?}",
        g.slope, g.fit.prefactor, g.fit.r2, g.mu0
    );
    if g.gaps_positive && g.gaps_decreasing {
        Ok(())
    } else {
        Err(Error::OutcomeMismatch { figure: "gap-exponent".into(), detail: "gap not positive and decreasing".into() })
    }
}

fn figures(cfg: &SweepConfig) -> fraclab::Result<()> {
    let rep = experiments::reproduce_figures(cfg)?;
    for f in &rep.figures {
        let name = f.spec.name;
        let alpha = Alpha::new(f.spec.alpha)?;
        let d = f.grid.domain();
        let params = EnvelopeParams::new(1.0, 0.5 * d.shortest())?;
        output::write_file(&cfg.output, &format!("trajectory_{name}.csv"), |w| {
            output::write_trajectory_csv(w, f.grid.nodes(), &f.march.trajectory)
        })?;
        output::write_file(&cfg.output, &format!("final_{name}.csv"), |w| {
            output::write_final_state_csv(w, &f.grid, &f.march.final_state.n, d, None, alpha, params)
        })?;
        let nodes = f.grid.nodes();
        let mut plot = LinePlot::new(&format!("alpha = {}, mu = {}", f.spec.alpha, f.spec.mu), "x", "n");
        for (t, n) in f.march.trajectory.iter().skip(1) {
            plot = plot.with_series(&format!("t = {t}"), nodes.iter().cloned().zip(n.iter().cloned()).collect());
        }
        if let Some(r) = &f.reference {
            plot = plot.with_series("merged", nodes.iter().cloned().zip(r.iter().cloned()).collect());
        }
        write_svg(&cfg.output, &format!("{name}.svg"), &plot)?;
        println!("{} {name}: {}", if f.passed { "PASS" } else { "FAIL" }, f.detail());
    }
    rep.check()
}

fn envelope(cfg: &SweepConfig) -> fraclab::Result<()> {
    let d = cfg.domain.at(cfg.mu[0])?;
    let (minus, plus) = d.split()?;
    let grid = Grid::new(&d, cfg.h)?;
    let mut rows: Vec<(String, EnvelopeReport)> = Vec::new();
    for al in cfg.alphas()? {
        let m = assemble(&grid, al);
        let s = monotone_solve(&m, Start::Super, cfg.steady_tol)?;
        if s.outcome != Outcome::Persistence {
            return Err(Error::OutcomeMismatch {
                figure: "envelope".into(),
                detail: format!("alpha = {} is not persistent", al.get()),
            });
        }
        let mut rep = envelope_check(&s, &grid, &minus, plus.as_ref(), al, cfg.eps)?;
        if cfg.plus_centers.len() >= 3 {
            rep = rep.with_decay(decay_fit(&s, &grid, &minus, &cfg.plus_centers)?);
        }
        println!(
            "alpha={} ratio=[{:.6}, {:.6}] decay exponent={:?} r2={:?}",
            al.get(),
            rep.ratio_min,
            rep.ratio_max,
            rep.decay_exponent,
            rep.decay_r2
        );
        rows.push((format!("{}-{}", cfg.scenario, tag(al.get())), rep));
    }
    output::write_file(&cfg.output, "envelope.csv", |w| output::write_envelope_csv(w, &rows))?;
    let reports: Vec<_> = rows.iter().map(|(n, r)| json!({ "scenario": n, "report": r })).collect();
    write_json(&cfg.output, "envelope.json", &json!(reports))?;
    Ok(())
}
