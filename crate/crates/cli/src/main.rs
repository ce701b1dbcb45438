use clap::{Parser, Subcommand, ValueEnum};
use composite_bem::geometry::{make_sphere, make_split_sphere, make_tetrahedron, make_two_cubes, write_mesh, SplitKind};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "composite-bem", version, about = "Scattering by composite dielectrics: experiment driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory, overriding `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Write a generated mesh.
    Mesh {
        generator: Generator,
        h: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    TwoCubes,
    Sphere,
    SplitSphere,
    QuadrantSphere,
    Tetrahedron,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run { config, out, threads } => {
            if let Some(n) = threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            match composite_bem_cli::run(&config, out.as_deref()) {
                Ok(paths) => {
                    for p in paths {
                        println!("{}", p.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Command::Mesh { generator, h, out } => {
            let mesh = match generator {
                Generator::TwoCubes => make_two_cubes(h),
                Generator::Sphere => make_sphere(h),
                Generator::SplitSphere => make_split_sphere(h, SplitKind::Half),
                Generator::QuadrantSphere => make_split_sphere(h, SplitKind::Quadrant),
                Generator::Tetrahedron => Ok(make_tetrahedron()),
            };
            match mesh.map(|m| write_mesh(&m, &out)) {
                Ok(Ok(())) => ExitCode::SUCCESS,
                Ok(Err(e)) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
                Err(e) => {
                    // bad h and similar
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}

