use bousvem::experiment::{run, ExperimentConfig, FamilyKind, RunOutput};
use bousvem::solver::SolverMode;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

/// Mixed virtual element solver for stationary Boussinesq flow with temperature-dependent
/// viscosity and conductivity.
#[derive(Parser)]
#[command(name = "bousvem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML configuration file.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run one of the benchmark problems over a list of mesh resolutions.
    Sweep {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        example: u8,
        #[arg(long, value_enum, default_value_t = Family::UniformQuad)]
        family: Family,
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
        degree: u8,
        /// Comma-separated, strictly increasing resolutions.
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        tolerance: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the default configuration of a benchmark problem as TOML.
    Config {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        example: u8,
        #[arg(long, value_enum, default_value_t = Family::UniformQuad)]
        family: Family,
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
        degree: u8,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
        levels: Vec<usize>,
    },
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory (overrides the configuration).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    export_vtk: bool,
    /// Write the final flow and heat systems in Matrix Market format.
    #[arg(long)]
    export_systems: bool,
    /// Write per-level iteration traces as JSON.
    #[arg(long)]
    trace: bool,
}

impl OutputArgs {
    fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(dir) = &self.output {
            config.output.dir = dir.clone();
        }
        config.output.export_vtk |= self.export_vtk;
        config.output.export_systems |= self.export_systems;
        config.output.trace |= self.trace;
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    UniformQuad,
    DistortedQuad,
    Hexagonal,
    NonConvex,
}

impl From<Family> for FamilyKind {
    fn from(f: Family) -> Self {
        match f {
            Family::UniformQuad => FamilyKind::UniformQuad,
            Family::DistortedQuad => FamilyKind::DistortedQuad,
            Family::Hexagonal => FamilyKind::Hexagonal,
            Family::NonConvex => FamilyKind::NonConvex,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Picard,
    Newton,
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> bousvem::Result<()> {
    let config = match cli.command {
        Command::Solve { config, output } => {
            let mut c = ExperimentConfig::load(&config)?;
            output.apply(&mut c);
            c
        }
        Command::Sweep {
            example,
            family,
            degree,
            levels,
            mode,
            tolerance,
            output,
        } => {
            let mut c =
                ExperimentConfig::for_example(example, family.into(), degree.into(), levels)?;
            match mode {
                Some(Mode::Picard) => c.solver.mode = SolverMode::Picard,
                Some(Mode::Newton) => c.solver.mode = SolverMode::Newton,
                None => {}
            }
            if let Some(t) = tolerance {
                c.solver.tolerance = t;
            }
            output.apply(&mut c);
            c
        }
        Command::Config {
            example,
            family,
            degree,
            levels,
        } => {
            let c = ExperimentConfig::for_example(example, family.into(), degree.into(), levels)?;
            print!("{}", c.to_toml_string()?);
            return Ok(());
        }
    };
    let out = run(&config)?;
    report(&out)?;
    for path in out.write(&config)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn report(out: &RunOutput) -> bousvem::Result<()> {
    println!(
        "{:>6} {:>12} {:>8} {:>9} {:>5} {:>12} {:>12}",
        "n", "h", "cells", "dofs", "iter", "max|u|", "residual"
    );
    for l in &out.levels {
        let s = &l.summary;
        println!(
            "{:>6} {:>12.4e} {:>8} {:>9} {:>5} {:>12.4e} {:>12.3e}",
            s.n,
            s.h,
            s.n_cells,
            s.flow_dofs + s.heat_dofs,
            s.iterations,
            s.max_velocity,
            s.residual
        );
    }
    if let Some(t) = &out.table {
        print!("{}", t.to_csv_string()?);
    }
    Ok(())
}
