//! `crossforge` command-line driver.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use crossforge::config::{Mode, RunConfig, SeedRule, Tolerances};
use crossforge::mesh::generate;
use crossforge::mesh::io::save_obj;
use crossforge::pipeline::{run_pipeline, ExitStatus, PipelineOutcome};

#[derive(Parser)]
#[command(name = "crossforge", version, about = "Integrable cross-fields from imposed singularity configurations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the index sum against the Euler characteristic.
    Check(Common),
    /// Solve for the cross-field and run the alignment and holonomy checks.
    Solve {
        #[arg(long, value_enum, default_value_t = SolveMode::Isotropic)]
        mode: SolveMode,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Solve, then trace separatrices and list each one.
    Trace {
        #[arg(long, value_enum, default_value_t = SolveMode::Isotropic)]
        mode: SolveMode,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Write a generated mesh as OBJ.
    Genmesh {
        #[arg(value_enum)]
        kind: MeshKind,
        /// Resolution parameter; its meaning depends on the mesh kind.
        #[arg(long, default_value_t = 8)]
        resolution: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve and write the VTK files into `--out`.
    Export {
        #[arg(long, value_enum, default_value_t = SolveMode::Isotropic)]
        mode: SolveMode,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solve: SolveArgs,
    },
}

#[derive(Args)]
struct Common {
    /// Triangle mesh (.obj or .msh).
    #[arg(long)]
    mesh: PathBuf,
    /// Singularity configuration (JSON); omit for none.
    #[arg(long)]
    sing: Option<PathBuf>,
    /// Output directory for reports and exports.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the report as JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SolveArgs {
    /// Boundary alignment threshold (radians).
    #[arg(long, default_value_t = Tolerances::default().alignment)]
    align_tol: f64,
    /// Cut holonomy threshold (radians from a multiple of pi/2).
    #[arg(long, default_value_t = Tolerances::default().holonomy)]
    holonomy_tol: f64,
    #[arg(long)]
    pin_vertex: Option<usize>,
    /// Edge-length ratio near singularities; 1 disables refinement.
    #[arg(long, default_value_t = 1.0)]
    refine_ratio: f64,
    /// Outer iteration cap for the anisotropic solver.
    #[arg(long, default_value_t = 100)]
    max_outer: usize,
    /// Streamline seeds.
    #[arg(long, value_enum)]
    seed_rule: Option<Seeds>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMode {
    Isotropic,
    Anisotropic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Seeds {
    Singularities,
    Corners,
    All,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeshKind {
    Square,
    Disk,
    Annulus,
    Torus,
    HoledTorus,
    Icosphere,
    Octasphere,
}

impl From<SolveMode> for Mode {
    fn from(m: SolveMode) -> Self {
        match m {
            SolveMode::Isotropic => Mode::Isotropic,
            SolveMode::Anisotropic => Mode::Anisotropic,
        }
    }
}

impl From<Seeds> for SeedRule {
    fn from(s: Seeds) -> Self {
        match s {
            Seeds::Singularities => SeedRule::Singularities,
            Seeds::Corners => SeedRule::Corners,
            Seeds::All => SeedRule::All,
            Seeds::None => SeedRule::None,
        }
    }
}

fn run_config(mode: Mode, common: &Common, solve: Option<&SolveArgs>, default_seeds: SeedRule) -> RunConfig {
    let mut c = RunConfig::new(&common.mesh, mode);
    c.singularities = common.sing.clone();
    c.out = common.out.clone();
    c.seed_rule = default_seeds;
    if let Some(s) = solve {
        c.tolerances.alignment = s.align_tol;
        c.tolerances.holonomy = s.holonomy_tol;
        c.pin_vertex = s.pin_vertex;
        c.refine_ratio = s.refine_ratio;
        c.max_outer = s.max_outer;
        if let Some(r) = s.seed_rule {
            c.seed_rule = r.into();
        }
    }
    c
}

fn print_report(outcome: &PipelineOutcome, json: bool) {
    if json {
        print!("{}", outcome.report.to_json());
    } else {
        print!("{}", outcome.report.to_text());
    }
    for line in &outcome.log {
        log::debug!("{line}");
    }
}

fn exit(status: ExitStatus) -> ExitCode {
    ExitCode::from(status.code() as u8)
}

fn genmesh(kind: MeshKind, n: usize, out: &PathBuf) -> ExitCode {
    let n = n.max(1);
    let mesh = match kind {
        MeshKind::Square => generate::square(n, 1.0),
        MeshKind::Disk => generate::disk(n),
        MeshKind::Annulus => generate::annulus(6 * n, n, 0.4, 1.0),
        MeshKind::Torus => generate::torus(3 * n.max(2), n.max(3), 1.0, 0.35),
        MeshKind::HoledTorus => generate::holed_torus(6 * n.max(2), 2 * n.max(2), 1.0, 0.35),
        MeshKind::Icosphere => generate::icosphere(n.min(7)),
        MeshKind::Octasphere => generate::octasphere(n),
    };
    match save_obj(&mesh, out) {
        Ok(()) => {
            println!(
                "wrote {} ({} vertices, {} triangles, chi = {})",
                out.display(),
                mesh.num_vertices(),
                mesh.num_triangles(),
                mesh.euler_characteristic()
            );
            exit(ExitStatus::Pass)
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit(ExitStatus::Io)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CROSSFORGE_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Clap's own usage errors would collide with exit code 2.
            return if e.use_stderr() { exit(ExitStatus::Io) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Check(common) => {
            let o = run_pipeline(&run_config(Mode::Check, &common, None, SeedRule::None));
            print_report(&o, common.json);
            exit(o.status)
        }
        Command::Solve { mode, common, solve } => {
            let o = run_pipeline(&run_config(mode.into(), &common, Some(&solve), SeedRule::Singularities));
            print_report(&o, common.json);
            exit(o.status)
        }
        Command::Trace { mode, common, solve } => {
            let mut c = run_config(mode.into(), &common, Some(&solve), SeedRule::All);
            if c.seed_rule == SeedRule::None {
                c.seed_rule = SeedRule::All;
            }
            let o = run_pipeline(&c);
            print_report(&o, common.json);
            if !common.json {
                if let Some(counts) = &o.report.streamlines {
                    println!(
                        "total separatrices: {}",
                        counts.boundary + counts.singularity + counts.length_cap + counts.cycle
                    );
                }
            }
            exit(o.status)
        }
        Command::Export { mode, common, solve } => {
            if common.out.is_none() {
                eprintln!("error: export needs --out");
                return exit(ExitStatus::Io);
            }
            let mut c = run_config(mode.into(), &common, Some(&solve), SeedRule::All);
            c.export_vtk = true;
            let o = run_pipeline(&c);
            if common.json {
                print!("{}", o.report.to_json());
            } else {
                for a in &o.artifacts {
                    println!("{}", a.display());
                }
            }
            exit(o.status)
        }
        Command::Genmesh { kind, resolution, out } => genmesh(kind, resolution, &out),
    }
}
