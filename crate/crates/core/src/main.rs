//! Command-line front end: dictionary -> constraints -> solve -> report.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use willmore_ilp::constraints::{build_oriented_system, build_pair_system, ConstraintSystem, TripletMatrix};
use willmore_ilp::experiment::{ladder_table, run_ladder, square_instance, LadderConfig};
use willmore_ilp::geometry::{mesh_energy, Area, Integrand, Willmore};
use willmore_ilp::io::{export_lp_file, InstanceFile, IntegrandKind, MeshFile};
use willmore_ilp::lattice::{generate_dictionary, LatticeSpec, TriangleDictionary};
use willmore_ilp::qp::build_q;
use willmore_ilp::solver::{ilp_solve_with, lp_solve_with, round_check, LinearProgram, SolverOptions};
use willmore_ilp::tu::{
    embed_table1, search_eulerian_violation_with, table1, table_text, verify_certificate,
    EulerianCertificate, IntMatrix, SearchOptions,
};
use willmore_ilp::{Error, Result};

#[derive(Parser)]
#[command(name = "willmore-ilp", version, about = "Discrete Willmore boundary problems as integer programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the triangle dictionary and dump it.
    GenDict {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Build the constraint system of an instance and write it as triplets.
    Build {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, value_enum, default_value_t = Form::Pair)]
        form: Form,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Solve the LP relaxation.
    SolveLp(SolveArgs),
    /// Solve the integer program by branch-and-bound.
    SolveIlp(SolveArgs),
    /// Search the pair-form matrix (or a triplet file) for a Camion violation.
    CheckTu {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Check this triplet matrix instead of an instance.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Verify this certificate instead of searching.
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        max_size: usize,
        /// Row sets examined per seed row.
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        /// Shuffle the seed row order.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        cert_out: Option<PathBuf>,
    },
    /// Evaluate the energy of a mesh file.
    Energy {
        mesh: PathBuf,
        #[arg(long, value_enum, default_value_t = Phi::Willmore)]
        phi: Phi,
    },
    /// Write the LP (or, with --binary, the ILP) in LP file format.
    ExportLp {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        binary: bool,
    },
    /// Build the counterexample matrix and verify its certificate.
    ReproTable1 {
        /// Also locate the matrix inside a generated pair system.
        #[arg(long)]
        embed: bool,
    },
    /// Solve the square problem at several resolutions.
    Ladder {
        #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2])]
        resolutions: Vec<u32>,
        /// Box height in lattice units.
        #[arg(long, default_value_t = 1)]
        height: u32,
        #[arg(long, default_value_t = 1.5)]
        max_edge: f64,
        #[arg(long, default_value_t = 1e-7)]
        tol_int: f64,
        #[arg(long, default_value_t = 10_000)]
        node_limit: usize,
        #[arg(long)]
        no_ilp: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Pair,
    Oriented,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Phi {
    Willmore,
    Area,
    Custom,
}

#[derive(Args)]
struct LatticeArgs {
    #[arg(long)]
    resolution: Option<u32>,
    /// Lattice extents `X,Y,Z`.
    #[arg(long = "box", value_parser = parse_box)]
    extents: Option<[u32; 3]>,
    #[arg(long)]
    max_edge: Option<f64>,
}

fn parse_box(s: &str) -> std::result::Result<[u32; 3], String> {
    let v: Vec<u32> = s
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("`{t}` is not a lattice extent")))
        .collect::<std::result::Result<_, _>>()?;
    v.try_into().map_err(|_| "expected three extents `X,Y,Z`".to_string())
}

impl LatticeArgs {
    fn spec(&self) -> Result<LatticeSpec> {
        LatticeSpec::new(
            self.resolution.unwrap_or(1),
            self.extents.unwrap_or([1, 1, 1]),
            self.max_edge.unwrap_or(2f64.sqrt()),
        )
    }
}

/// An instance file, or the built-in square problem when no file is given.
#[derive(Args)]
struct InstanceArgs {
    instance: Option<PathBuf>,
    #[command(flatten)]
    lattice: LatticeArgs,
    #[arg(long, value_enum)]
    phi: Option<Phi>,
}

impl InstanceArgs {
    fn load(&self) -> Result<InstanceFile> {
        let mut inst = match &self.instance {
            Some(path) => {
                let mut inst = InstanceFile::load(path)?;
                let l = &self.lattice;
                if let Some(r) = l.resolution {
                    inst.lattice.resolution = r;
                }
                if let Some(e) = l.extents {
                    inst.lattice.extents = e;
                }
                if let Some(m) = l.max_edge {
                    inst.lattice.max_edge_len = m;
                }
                inst.lattice.validate()?;
                inst
            }
            None => {
                let spec = self.lattice.spec()?;
                let [x, y, z] = spec.extents;
                if x != y {
                    return Err(Error::InvalidSpec(format!(
                        "the built-in square needs a square box, got {x} x {y}"
                    )));
                }
                square_instance(spec.resolution, x, z.max(1), spec.max_edge_len)?
            }
        };
        if let Some(phi) = self.phi {
            inst.integrand.kind = match phi {
                Phi::Willmore => IntegrandKind::Willmore,
                Phi::Area => IntegrandKind::Area,
                Phi::Custom => IntegrandKind::Custom,
            };
        }
        Ok(inst)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long)]
    tol_int: Option<f64>,
    #[arg(long)]
    node_limit: Option<usize>,
    #[arg(long)]
    export_lp: Option<PathBuf>,
    /// Support of the solution, values carried per face. `.ply`/`.obj` pick a viewer format.
    #[arg(long)]
    mesh_out: Option<PathBuf>,
    /// Full report including the solution vector.
    #[arg(long)]
    report: Option<PathBuf>,
}

struct Built {
    inst: InstanceFile,
    dict: TriangleDictionary,
    system: ConstraintSystem,
    lp: LinearProgram,
}

fn build_lp(args: &InstanceArgs) -> Result<Built> {
    let inst = args.load()?;
    let dict = generate_dictionary(&inst.lattice)?;
    let problem = inst.boundary_problem(&dict)?;
    let system = build_pair_system(&dict, &problem)?;
    let integrand = inst.integrand.build(&dict)?;
    let q = build_q(&dict, integrand.as_ref())?;
    let lp = LinearProgram::from_system(&system, &q.augmented_weights(&system))?;
    Ok(Built { inst, dict, system, lp })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solve(args: &SolveArgs, integer: bool) -> Result<()> {
    let b = build_lp(&args.inst)?;
    let opts = SolverOptions {
        tol_int: args.tol_int.unwrap_or(b.inst.solver.tol_int),
        node_limit: args.node_limit.unwrap_or(b.inst.solver.node_limit),
        ..Default::default()
    };
    if let Some(p) = &args.export_lp {
        export_lp_file(&b.lp, p, integer)?;
    }
    let report = if integer {
        ilp_solve_with(&b.lp, &opts)
    } else {
        lp_solve_with(&b.lp, &opts)
    };
    let text = report.to_text();
    println!("instance: {}", b.inst.label);
    println!("triangles: {}", b.dict.triangle_count());
    println!("rows: {}", b.lp.rows());
    println!("free_columns: {}", b.lp.cols());
    for line in text.lines().filter(|l| !l.starts_with("x ")) {
        println!("{line}");
    }
    let rc = round_check(&report, opts.tol_int);
    println!("zeros: {}", rc.zeros);
    println!("ones: {}", rc.ones);
    if let Some(p) = &args.report {
        std::fs::write(p, &text)?;
    }
    if let Some(p) = &args.mesh_out {
        let n = b.system.triangle_count();
        MeshFile::from_values(&b.dict, &report.x[..n], opts.tol_int).save(p)?;
    }
    Ok(())
}

fn check_tu(
    inst: &InstanceArgs,
    matrix: Option<&Path>,
    certificate: Option<&Path>,
    opts: SearchOptions,
    cert_out: Option<&Path>,
) -> Result<()> {
    let m = match matrix {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            let t = TripletMatrix::parse(&text, &p.display().to_string())?;
            let trip: Vec<_> = t.entries.iter().map(|&(i, j, v)| (i, j, v as i64)).collect();
            IntMatrix::from_triplets(t.rows, t.cols, &trip)
        }
        None => IntMatrix::from_system(&build_lp(inst)?.system),
    };
    println!("matrix: {} x {}", m.rows, m.cols);
    let cert = match certificate {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            Some(EulerianCertificate::parse(&text, &p.display().to_string())?)
        }
        None => {
            let out = search_eulerian_violation_with(&m, &opts);
            println!("row_sets: {}", out.row_sets);
            println!("kernel_vectors: {}", out.kernel_vectors);
            println!("exhaustive: {}", out.exhaustive);
            out.certificate
        }
    };
    match cert {
        Some(c) => {
            let check = verify_certificate(&m, &c)?;
            println!("certificate: {} x {}", c.row_ids.len(), c.col_ids.len());
            print_check(check.is_eulerian, check.sum, check.divisible_by_four);
            if let Some(p) = cert_out {
                std::fs::write(p, c.to_text())?;
            }
        }
        None => println!("verdict: no violation found up to size {}", opts.max_size),
    }
    Ok(())
}

fn print_check(eulerian: bool, sum: i64, div4: bool) {
    println!("Eulerian = {eulerian}");
    println!("sum = {sum}");
    println!("divisible_by_four = {div4}");
    if eulerian && !div4 {
        println!("verdict: NOT totally unimodular");
    } else {
        println!("verdict: certificate does not prove a violation");
    }
}

fn repro_table1(embed: bool) -> Result<()> {
    let t = table1();
    print!("{}", table_text(&t));
    let check = verify_certificate(&t.matrix, &t.certificate)?;
    println!("size = {} x {}", t.matrix.rows, t.matrix.cols);
    print_check(check.is_eulerian, check.sum, check.divisible_by_four);
    if embed {
        let spec = LatticeSpec::new(1, [2, 2, 2], 2f64.sqrt())?;
        let dict = generate_dictionary(&spec)?;
        let sys = build_pair_system(&dict, &willmore_ilp::constraints::BoundaryProblem::empty("none"))?;
        match embed_table1(&dict, &sys) {
            Some(e) => {
                let m = IntMatrix::from_system(&sys);
                let same = m.submatrix(&e.rows, &e.cols) == t.matrix.dense();
                println!("embedded in 2x2x2 lattice pair system: {same}");
                for (k, tri) in e.triangles.iter().enumerate() {
                    println!("T{} = {:?}", k + 1, dict.triangle_coords(*tri));
                }
            }
            None => println!("embedded in 2x2x2 lattice pair system: false"),
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenDict { lattice, out } => {
            let dict = generate_dictionary(&lattice.spec()?)?;
            emit(out.as_deref(), &dict.dump())
        }
        Command::Build { inst, form, out } => {
            let i = inst.load()?;
            let dict = generate_dictionary(&i.lattice)?;
            let problem = i.boundary_problem(&dict)?;
            let sys = match form {
                Form::Pair => build_pair_system(&dict, &problem)?,
                Form::Oriented => build_oriented_system(&dict, &problem)?,
            };
            eprintln!(
                "{} rows, {} columns, {} nonzeros, {} rows dropped",
                sys.rows,
                sys.cols(),
                sys.nnz(),
                sys.dropped_rows
            );
            emit(out.as_deref(), &sys.to_triplet_text())
        }
        Command::SolveLp(a) => solve(&a, false),
        Command::SolveIlp(a) => solve(&a, true),
        Command::CheckTu {
            inst,
            matrix,
            certificate,
            max_size,
            budget,
            seed,
            cert_out,
        } => {
            let opts = SearchOptions {
                max_size,
                budget,
                seed,
                ..Default::default()
            };
            check_tu(&inst, matrix.as_deref(), certificate.as_deref(), opts, cert_out.as_deref())
        }
        Command::Energy { mesh, phi } => {
            let m = MeshFile::load(&mesh)?;
            let integrand: Box<dyn Integrand> = match phi {
                Phi::Willmore => Box::new(Willmore),
                Phi::Area => Box::new(Area),
                Phi::Custom => {
                    return Err(Error::InvalidSpec(
                        "custom integrands need an instance dictionary".into(),
                    ))
                }
            };
            println!("energy: {}", mesh_energy(&m.to_trimesh(), integrand.as_ref())?);
            Ok(())
        }
        Command::ExportLp { inst, out, binary } => {
            let b = build_lp(&inst)?;
            export_lp_file(&b.lp, &out, binary)
        }
        Command::ReproTable1 { embed } => repro_table1(embed),
        Command::Ladder {
            resolutions,
            height,
            max_edge,
            tol_int,
            node_limit,
            no_ilp,
        } => {
            let cfg = LadderConfig {
                resolutions,
                height,
                max_edge,
                tol_int,
                node_limit,
                solve_ilp: !no_ilp,
                ..Default::default()
            };
            print!("{}", ladder_table(&run_ladder(&cfg)?));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
