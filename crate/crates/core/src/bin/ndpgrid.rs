//! Command-line front end: instance I/O, the routing pipeline, verification,
//! oracles, generators, benchmarks, and SVG rendering.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 usage error, 3 internal error.

use clap::{Parser, Subcommand, ValueEnum};
use ndpgrid::farroute::FarConfig;
use ndpgrid::grid::{verify_routing, GridInstance, ParamOverrides, PolylogOverrides, Verdict};
use ndpgrid::hsc::{HscInstance, HscModel};
use ndpgrid::instances::{gen_hard, gen_random, gen_spaced};
use ndpgrid::io::{emit_instance, emit_routing, parse_instance, parse_routing, GraphKind};
use ndpgrid::oracle::{exact_ndp, max_distance_property_subset, DistanceAnswer, NdpBudget};
use ndpgrid::reduction::{solve_restricted, solve_restricted_with_stats, SolveConfig};
use ndpgrid::svg::render_svg;
use ndpgrid::wall::{solve_wall, verify_wall_paths, WallGraph, WallMode};
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ndpgrid",
    version,
    about = "Node-disjoint path routing in grid graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Route a grid instance and print the routing plus a summary.
    Solve {
        /// Instance file; `-` reads stdin.
        input: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pin the optimum guess instead of sweeping powers of two.
        #[arg(long)]
        opt_guess: Option<u64>,
        #[arg(long)]
        eta: Option<u64>,
        #[arg(long)]
        rho: Option<u32>,
        /// Replacement value for log2(n) in the polylog thresholds;
        /// 0 neutralizes them for desk-scale runs.
        #[arg(long, default_value_t = 0.0)]
        polylog_scale: f64,
        /// Rounding trials per branch of the far router.
        #[arg(long, default_value_t = 12)]
        trials: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Write an SVG rendering of the result here.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Dump the HSC LP of the instance-wide relaxation here.
        #[arg(long)]
        lp_dump: Option<PathBuf>,
    },
    /// Route a wall instance (NDP or EDP).
    SolveWall {
        input: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = false)]
        edp: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Verify a routing against an instance.
    Verify { instance: String, routing: String },
    /// Run the exact brute-force oracle on a small instance.
    Oracle {
        input: String,
        /// Distance-property threshold query instead of exact NDP.
        #[arg(long)]
        threshold: Option<usize>,
    },
    /// Generate an instance.
    Gen {
        #[command(subcommand)]
        what: GenCmd,
    },
    /// Solve a batch of generated instances and print a table.
    Bench {
        #[arg(long, default_value = "24,48,96")]
        sides: String,
        #[arg(long, default_value_t = 5)]
        count: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Render an instance (and optional routing) to SVG.
    Render {
        instance: String,
        #[arg(long)]
        routing: Option<String>,
        #[arg(long)]
        svg: PathBuf,
    },
}

#[derive(Subcommand)]
enum GenCmd {
    Random {
        #[arg(long)]
        side: u32,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        far_margin: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Spaced {
        #[arg(long)]
        side: u32,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Hard {
        #[arg(long, default_value_t = 1)]
        level: u32,
        /// Also print the witness routing after the instance.
        #[arg(long, default_value_t = false)]
        witness: bool,
    },
}

fn read_input(path: &str) -> Result<String, String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| e.to_string())?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))
    }
}

fn overrides_from(eta: Option<u64>, rho: Option<u32>, scale: f64) -> ParamOverrides {
    let polylog = if scale == 0.0 {
        PolylogOverrides {
            stage2_cap_factor: Some(u64::MAX / 4),
            stage3_modulus: Some(1),
            trial_factor: None,
            subsample_modulus: Some(1),
        }
    } else {
        let l = scale.max(1.0);
        PolylogOverrides {
            stage2_cap_factor: Some((64.0 * l * l * l) as u64),
            stage3_modulus: Some(((128.0 * l * l * l * l) as u64).max(1)),
            trial_factor: Some(((l * l * l * l * l) as u64).max(1)),
            subsample_modulus: None,
        }
    };
    ParamOverrides { eta, rho, polylog }
}

fn solve_summary_json(
    inst: &GridInstance,
    routing: &ndpgrid::Routing,
    seed: u64,
    verified: bool,
) -> String {
    serde_json::json!({
        "pairs": inst.pairs.len(),
        "routed": routing.routed_count(),
        "seed": seed,
        "verified": verified,
        "routing": routing.entries.iter().map(|(i, p)| {
            serde_json::json!({
                "pair": i,
                "path": p.vertices.iter().map(|v| [v.row, v.col]).collect::<Vec<_>>(),
            })
        }).collect::<Vec<_>>(),
    })
    .to_string()
}

fn run() -> Result<ExitCode, (u8, String)> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve {
            input,
            seed,
            opt_guess,
            eta,
            rho,
            polylog_scale,
            trials,
            format,
            svg,
            lp_dump,
        } => {
            let text = read_input(&input).map_err(|e| (2, e))?;
            let parsed = parse_instance(&text).map_err(|e| (2, e.to_string()))?;
            if parsed.kind == GraphKind::Wall {
                return Err((2, "wall instance given to `solve`; use `solve-wall`".into()));
            }
            let mut inst = parsed.instance;
            inst.seed = seed;
            let overrides = overrides_from(eta, rho, polylog_scale);
            let config = SolveConfig {
                overrides,
                far: FarConfig {
                    trials: Some(trials),
                    max_branches: Some(24),
                    wall_mode: false,
                },
                opt_guesses: opt_guess.map(|g| vec![g.max(1)]),
                ..SolveConfig::default()
            };
            let (routing, stats) = solve_restricted_with_stats(&inst, seed, &config)
                .map_err(|e| (2, e.to_string()))?;
            let verified = verify_routing(&inst, &routing).is_valid();
            if let Some(path) = lp_dump {
                if let Some(dump) = hsc_dump(&inst, opt_guess.unwrap_or(1).max(1), overrides) {
                    std::fs::write(&path, dump).map_err(|e| (2, e.to_string()))?;
                }
            }
            if let Some(path) = svg {
                std::fs::write(&path, render_svg(&inst, Some(&routing), None))
                    .map_err(|e| (2, e.to_string()))?;
            }
            match format {
                Format::Text => {
                    print!("{}", emit_routing(&routing));
                    println!("routed {}", routing.routed_count());
                    println!("pairs {}", inst.pairs.len());
                    println!("seed {seed}");
                    println!("trials {trials}");
                    println!("winner {}", stats.winner);
                    match stats.opt_guess {
                        Some(g) => println!("opt_guess {g}"),
                        None => println!("opt_guess none"),
                    }
                    println!("verified {verified}");
                }
                Format::Json => println!("{}", solve_summary_json(&inst, &routing, seed, verified)),
            }
            Ok(if verified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::SolveWall {
            input,
            seed,
            edp,
            format,
        } => {
            let text = read_input(&input).map_err(|e| (2, e))?;
            let parsed = parse_instance(&text).map_err(|e| (2, e.to_string()))?;
            if parsed.kind != GraphKind::Wall {
                return Err((2, "grid instance given to `solve-wall`".into()));
            }
            let inst = parsed.instance;
            let wall = WallGraph::build(inst.side, inst.side).map_err(|e| (2, e.to_string()))?;
            let mode = if edp { WallMode::Edp } else { WallMode::Ndp };
            let routing = solve_wall(&wall, &inst, mode, seed, overrides_from(None, None, 0.0))
                .map_err(|e| (2, e.to_string()))?;
            let verified = verify_wall_paths(&wall, &inst, &routing, edp).is_ok();
            match format {
                Format::Text => {
                    print!("{}", emit_routing(&routing));
                    println!("routed {}", routing.routed_count());
                    println!("pairs {}", inst.pairs.len());
                    println!("seed {seed}");
                    println!("verified {verified}");
                }
                Format::Json => println!("{}", solve_summary_json(&inst, &routing, seed, verified)),
            }
            Ok(if verified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Verify { instance, routing } => {
            let itext = read_input(&instance).map_err(|e| (2, e))?;
            let rtext = read_input(&routing).map_err(|e| (2, e))?;
            let parsed = parse_instance(&itext).map_err(|e| (2, e.to_string()))?;
            let routing = parse_routing(&rtext).map_err(|e| (2, e.to_string()))?;
            match parsed.kind {
                GraphKind::Grid => match verify_routing(&parsed.instance, &routing) {
                    Verdict::Valid => {
                        println!("valid");
                        Ok(ExitCode::SUCCESS)
                    }
                    Verdict::Violation(v) => {
                        println!("violation: {v}");
                        Ok(ExitCode::from(1))
                    }
                },
                GraphKind::Wall => {
                    let wall = WallGraph::build(parsed.instance.side, parsed.instance.side)
                        .map_err(|e| (2, e.to_string()))?;
                    match verify_wall_paths(&wall, &parsed.instance, &routing, false) {
                        Ok(()) => {
                            println!("valid");
                            Ok(ExitCode::SUCCESS)
                        }
                        Err(v) => {
                            println!("violation: {v}");
                            Ok(ExitCode::from(1))
                        }
                    }
                }
            }
        }
        Command::Oracle { input, threshold } => {
            let text = read_input(&input).map_err(|e| (2, e))?;
            let parsed = parse_instance(&text).map_err(|e| (2, e.to_string()))?;
            match threshold {
                Some(t) => {
                    let ans = max_distance_property_subset(&parsed.instance, Some(t))
                        .map_err(|e| (2, e.to_string()))?;
                    match ans {
                        DistanceAnswer::ThresholdMet(s) => println!("threshold met {s}"),
                        DistanceAnswer::ThresholdUnmet => println!("threshold unmet"),
                        DistanceAnswer::Maximum(_) => unreachable!(),
                    }
                }
                None => {
                    let (count, wit) = exact_ndp(&parsed.instance, &NdpBudget::default())
                        .map_err(|e| (2, e.to_string()))?;
                    println!("optimum {count}");
                    print!("{}", emit_routing(&wit));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen { what } => {
            match what {
                GenCmd::Random {
                    side,
                    k,
                    far_margin,
                    seed,
                } => {
                    let inst =
                        gen_random(side, k, far_margin, seed).map_err(|e| (2, e.to_string()))?;
                    print!("{}", emit_instance(GraphKind::Grid, &inst));
                }
                GenCmd::Spaced { side, k, seed } => {
                    let inst = gen_spaced(side, k, seed).map_err(|e| (2, e.to_string()))?;
                    print!("{}", emit_instance(GraphKind::Grid, &inst));
                }
                GenCmd::Hard { level, witness } => {
                    let (inst, wit) = gen_hard(level).map_err(|e| (2, e.to_string()))?;
                    print!("{}", emit_instance(GraphKind::Grid, &inst));
                    if witness {
                        print!("{}", emit_routing(&wit));
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { sides, count, seed } => {
            let sides: Vec<u32> = sides
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| (2u8, format!("bad side `{s}`")))
                })
                .collect::<Result<_, _>>()?;
            println!("instance k routed oracle");
            for side in sides {
                for i in 0..count {
                    let s = seed ^ ((side as u64) << 20) ^ i as u64;
                    let k = 2 + (i as usize % 4);
                    let inst = gen_random(side, k, (side / 4) as u64, s)
                        .map_err(|e| (2, e.to_string()))?;
                    let started = std::time::Instant::now();
                    let routing = solve_restricted(&inst, s, &SolveConfig::default())
                        .map_err(|e| (3, e.to_string()))?;
                    let elapsed = started.elapsed();
                    if !verify_routing(&inst, &routing).is_valid() {
                        return Err((3, "bench produced an invalid routing".into()));
                    }
                    let oracle = if inst.side <= 6 && inst.k() <= 4 {
                        exact_ndp(&inst, &NdpBudget::default())
                            .map(|(c, _)| c.to_string())
                            .unwrap_or_else(|_| "-".into())
                    } else {
                        "-".into()
                    };
                    println!(
                        "random-{side}-{i} {} {} {}",
                        inst.k(),
                        routing.routed_count(),
                        oracle
                    );
                    eprintln!("# random-{side}-{i} took {} ms", elapsed.as_millis());
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Render {
            instance,
            routing,
            svg,
        } => {
            let text = read_input(&instance).map_err(|e| (2, e))?;
            let parsed = parse_instance(&text).map_err(|e| (2, e.to_string()))?;
            let routing = match routing {
                Some(r) => Some(
                    parse_routing(&read_input(&r).map_err(|e| (2, e))?)
                        .map_err(|e| (2, e.to_string()))?,
                ),
                None => None,
            };
            if let Some(r) = &routing {
                for (pair, path) in &r.entries {
                    if *pair >= parsed.instance.pairs.len() {
                        return Err((
                            2,
                            format!(
                                "routing references pair {pair} of {}",
                                parsed.instance.pairs.len()
                            ),
                        ));
                    }
                    if path
                        .vertices
                        .iter()
                        .any(|v| !v.in_side(parsed.instance.side))
                    {
                        return Err((2, format!("routing for pair {pair} leaves the grid")));
                    }
                }
            }
            std::fs::write(&svg, render_svg(&parsed.instance, routing.as_ref(), None))
                .map_err(|e| (2, e.to_string()))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Build and dump the HSC LP for the widest window/system of the instance.
fn hsc_dump(inst: &GridInstance, opt_guess: u64, overrides: ParamOverrides) -> Option<String> {
    use ndpgrid::hierarchy::{build_l_decomposition, build_square_systems, ColorSystem};
    use ndpgrid::hsc::HscVertex;
    let mut params = ndpgrid::derive_params(inst.n().max(4), opt_guess, overrides).ok()?;
    if params.ell_prime == 0 {
        // the derived scale collapses on small grids; dump at desk parameters
        let desk = ParamOverrides {
            eta: Some(2),
            rho: Some(1),
            polylog: overrides.polylog,
        };
        params = ndpgrid::derive_params(inst.n().max(4), opt_guess, desk).ok()?;
    }
    if params.ell_prime == 0 {
        return None;
    }
    let systems = build_square_systems(params.ell_prime, &params).ok()?;
    let lengths = vec![params.d1()];
    let decomp = build_l_decomposition(&lengths, params.ell_prime, params.eta).ok()?;
    let colors = ColorSystem::new(decomp);
    let rho = params.rho;
    let row_off = inst.side as u64 - params.ell_prime;
    let mut u = Vec::new();
    for (pair_id, &(s, t)) in inst.pairs.iter().enumerate() {
        if t.row as u64 <= row_off
            || t.col as u64 > params.ell_prime
            || s.col as u64 > params.ell_prime
        {
            continue;
        }
        let loc = ndpgrid::Coord::new(t.row - row_off as u32, t.col);
        if systems[0].member(loc) {
            u.push(HscVertex {
                coord: loc,
                color: colors.color_of_column(rho, s.col),
                pair_id,
            });
        }
    }
    let hsc = HscInstance::new(systems[0].clone(), colors, u, params.d.clone()).ok()?;
    let model = HscModel::build(&hsc);
    let x_names: std::collections::BTreeMap<usize, String> = model
        .x_vars
        .iter()
        .map(|(&(h, sq, c), &v)| (v, format!("x_{h}_{sq}_{c}")))
        .chain(
            model
                .big_y_vars
                .iter()
                .map(|(&(h, c), &v)| (v, format!("Y_{h}_{c}"))),
        )
        .chain(
            model
                .y_vars
                .iter()
                .map(|(&(sq, c), &v)| (v, format!("y_{sq}_{c}"))),
        )
        .collect();
    Some(ndpgrid::lp::dump_lp(&model.lp, &move |i| {
        x_names.get(&i).cloned().unwrap_or_else(|| format!("v{i}"))
    }))
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
