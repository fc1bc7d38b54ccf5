use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vemlab::harness::{emit_report, run_experiment, ExperimentConfig};
use vemlab::mesh::{load_mesh, regularity_report, save_mesh};
use vemlab::meshgen::{generate, Family, GeneratorSpec};
use vemlab::post::GradientRepresentative;
use vemlab::vem::Mode;

#[derive(Parser)]
#[command(name = "vemlab", version, about = "Virtual element convergence studies on polygonal meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence sweep of the built-in problem; writes a CSV report and gnuplot data files.
    Run(RunArgs),
    /// Mesh generation and inspection.
    #[command(subcommand)]
    Mesh(MeshCommand),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, value_delimiter = ',', default_value = "square,concave,lloyd0,lloyd100")]
    family: Vec<Family>,
    #[arg(long, value_delimiter = ',', default_value = "25,100,400,1600")]
    sizes: Vec<usize>,
    #[arg(long, default_value = "standard")]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra quadrature exactness for variable coefficients, on top of 2k.
    #[arg(long, default_value_t = 2)]
    quad_boost: usize,
    /// Gradient used in the H1 error: pi0_grad or grad_pinabla.
    #[arg(long, default_value = "pi0_grad")]
    h1_gradient: GradientRepresentative,
    #[arg(long, default_value = "report.csv")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum MeshCommand {
    /// Generate a mesh and save it as JSON.
    Gen {
        #[arg(long)]
        family: Family,
        /// Cells for Voronoi families, squares for square/concave.
        #[arg(long)]
        cells: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Lloyd iterations (defaults to the family's own count).
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print shape-regularity diagnostics of a saved mesh.
    Check {
        #[arg(long)]
        mesh: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> vemlab::Result<()> {
    match cli.command {
        Command::Run(a) => {
            let config = ExperimentConfig {
                k: a.k,
                families: a.family,
                sizes: a.sizes,
                mode: a.mode,
                seed: a.seed,
                quad_boost: a.quad_boost,
                gradient: a.h1_gradient,
                ..ExperimentConfig::default()
            };
            let reports = run_experiment(&config)?;
            let dat = emit_report(&reports, &a.out)?;
            for fr in &reports {
                let s = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.3}"));
                println!(
                    "{:<9} k={} {:<12} slopes: L2 {}  H1 {}  point {}",
                    fr.family.name(),
                    fr.k,
                    fr.mode.name(),
                    s(fr.report.fit_l2),
                    s(fr.report.fit_h1),
                    s(fr.report.fit_point)
                );
                for w in &fr.report.warnings {
                    eprintln!("warning: {} {w}", fr.family.name());
                }
            }
            println!("wrote {} and {} data files", a.out.display(), dat.len());
        }
        Command::Mesh(MeshCommand::Gen {
            family,
            cells,
            seed,
            iters,
            out,
        }) => {
            let mut spec = GeneratorSpec::new(family, cells, seed);
            if let Some(i) = iters {
                spec.lloyd_iterations = i;
            }
            let mesh = generate(&spec)?;
            save_mesh(&mesh, &out)?;
            println!(
                "{} cells, {} vertices, h_max {:.4e} -> {}",
                mesh.num_cells(),
                mesh.num_vertices(),
                mesh.h_max(),
                out.display()
            );
        }
        Command::Mesh(MeshCommand::Check { mesh }) => {
            let m = load_mesh(&mesh)?;
            let r = regularity_report(&m);
            println!("cells            {}", m.num_cells());
            println!("vertices         {}", m.num_vertices());
            println!("h_max            {:.6e}", m.h_max());
            println!("min rho          {:.6e}", r.min_rho);
            println!("min edge ratio   {:.6e}", r.min_edge_ratio);
            println!("not star-shaped  {}", r.not_star_shaped.len());
        }
    }
    Ok(())
}
