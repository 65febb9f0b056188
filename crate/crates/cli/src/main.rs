mod args;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::Parser;
use orbit_core::analysis::{
    area_series, bound_joint, bound_within_k, mc_boundary_experiment, McConfig,
};
use orbit_core::io::{
    area_table, levels_table, mc_table, read_elevation, read_ordering, read_stack, report_table,
    sweep_table, write_elevation, write_ordering, write_stack, CsvTable,
};
use orbit_core::orbcor::stack_profiles;
use orbit_core::synth::{
    aggregate_to_lsr, gen_bathymetry, inject_noise, render_stack, simulate_level_series,
    Bathymetry, LevelPattern, NoiseParams,
};
use orbit_core::{
    accuracy_report, alpha_sweep, correct_stack, fuse, learn_ordering, ordering_from_elevation,
    smooth_stack, suggest_alpha, BoundQuery, FineOrdering, FusionConfig, MappingGrid,
    UnknownPolicy,
};

use args::{BasinShape, Cli, Command, Dynamics, Policy};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn emit(table: &CsvTable, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => table
            .write(p)
            .with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(&table.to_bytes()?)?;
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::LearnOrder(a) => {
            let stack =
                read_stack(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
            write_ordering(&a.output, &learn_ordering(&stack, a.max_iters)?)?;
        }
        Command::ImportDem(a) => {
            let elev = read_elevation(&a.input)
                .with_context(|| format!("reading {}", a.input.display()))?;
            write_ordering(&a.output, &ordering_from_elevation(&elev)?)?;
        }
        Command::Correct(a) => {
            let stack =
                read_stack(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
            let ordering = read_ordering(&a.ordering)
                .with_context(|| format!("reading {}", a.ordering.display()))?;
            let (levels, corrected) = match a.alpha {
                Some(alpha) => {
                    let (levels, corrected, _) = smooth_stack(&stack, &ordering, alpha)?;
                    (levels, corrected)
                }
                None => correct_stack(&stack, &ordering)?,
            };
            if let Some(p) = &a.levels {
                levels_table(&levels).write(p)?;
            }
            write_stack(&a.output, &corrected)?;
        }
        Command::Fuse(a) => {
            let coarse =
                read_stack(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
            let config = FusionConfig {
                wth: if a.auto_wth { None } else { a.wth },
                alpha: a.alpha,
                unknown_policy: match a.unknown_policy {
                    Policy::Keep => UnknownPolicy::Keep,
                    Policy::FillLand => UnknownPolicy::FillLand,
                    Policy::FillMid => UnknownPolicy::FillMid,
                },
                wth_stride: a.wth_stride,
            };
            let out = match (&a.ordering, &a.training) {
                (Some(p), _) => {
                    let ordering =
                        read_ordering(p).with_context(|| format!("reading {}", p.display()))?;
                    fuse(
                        &coarse,
                        FineOrdering::Known(&ordering),
                        a.factor,
                        a.offset,
                        &config,
                    )?
                }
                (None, Some(p)) => {
                    let training =
                        read_stack(p).with_context(|| format!("reading {}", p.display()))?;
                    let source = FineOrdering::Learn {
                        training: &training,
                        max_refine_iters: a.max_iters,
                    };
                    fuse(&coarse, source, a.factor, a.offset, &config)?
                }
                (None, None) => bail!("one of --ordering or --training is required"),
            };
            eprintln!("wth={}", out.wth);
            write_stack(&a.output, &out.fine)?;
        }
        Command::Simulate(a) => {
            let kind = match a.bathymetry {
                BasinShape::Bowl => Bathymetry::bowl(),
                BasinShape::Gaussian => Bathymetry::gaussian_mix(a.components),
            };
            let elev = gen_bathymetry(&kind, a.rows, a.cols, a.seed)?;
            let ordering = ordering_from_elevation(&elev)?;
            let n = ordering.len() as f64;
            let pattern = match a.pattern {
                Dynamics::Reservoir => LevelPattern::Reservoir {
                    low: a.low,
                    high: a.high,
                    peaks: a.peaks,
                },
                Dynamics::Sinusoid => LevelPattern::Sinusoid {
                    base: n * (a.low + a.high) / 2.0,
                    amplitude: n * (a.high - a.low) / 2.0,
                    period: a.period,
                    phase: 0.0,
                },
                Dynamics::RandomWalk => LevelPattern::RandomWalk {
                    start: (n * (a.low + a.high) / 2.0).round() as usize,
                    step_scale: n * (a.high - a.low) / 20.0,
                },
            };
            let levels =
                simulate_level_series(a.steps, ordering.len(), &pattern, a.seed.wrapping_add(1))?;
            let truth = render_stack(&ordering, &levels)?;
            if let Some(p) = &a.elevation_out {
                write_elevation(p, &elev)?;
            }
            if let Some(p) = &a.ordering_out {
                write_ordering(p, &ordering)?;
            }
            if let Some(p) = &a.levels_out {
                levels_table(&levels).write(p)?;
            }
            write_stack(&a.output, &truth)?;
        }
        Command::Perturb(a) => {
            let stack =
                read_stack(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
            let params = NoiseParams {
                target_fraction: a.noise,
                blob_mean_size: a.blob_size,
                run_mean_length: a.run_length,
                missing_share: a.missing_share,
            };
            write_stack(&a.output, &inject_noise(&stack, &params, a.seed)?)?;
        }
        Command::Aggregate(a) => {
            let fine =
                read_stack(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
            let grid = MappingGrid::new(fine.rows(), fine.cols(), a.factor, a.offset)?;
            let wth = match (a.wth, a.wth_fraction) {
                (Some(w), _) => w,
                (None, Some(f)) => ((f * grid.gr() as f64).round() as usize).clamp(1, grid.gr()),
                (None, None) => bail!("one of --wth or --wth-fraction is required"),
            };
            write_stack(&a.output, &aggregate_to_lsr(&fine, &grid, wth)?)?;
        }
        Command::Eval(a) => {
            let est = read_stack(&a.estimate)
                .with_context(|| format!("reading {}", a.estimate.display()))?;
            let truth =
                read_stack(&a.truth).with_context(|| format!("reading {}", a.truth.display()))?;
            let report = accuracy_report(&est, &truth)?;
            if let Some(p) = &a.area {
                area_table(&area_series(&est)).write(p)?;
            }
            emit(&report_table(&report), a.output.as_deref())?;
        }
        Command::AlphaSweep(a) => {
            let stack =
                read_stack(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
            let ordering = read_ordering(&a.ordering)
                .with_context(|| format!("reading {}", a.ordering.display()))?;
            let sweep = alpha_sweep(&stack_profiles(&stack, &ordering)?, &a.alphas.0)?;
            if sweep.len() >= 3 {
                eprintln!("suggested_alpha={}", suggest_alpha(&sweep)?);
            }
            emit(&sweep_table(&sweep), a.output.as_deref())?;
        }
        Command::Bound(a) => {
            let q = BoundQuery {
                gr: a.gr,
                c: a.c,
                k: a.k,
            };
            println!("within_k={}", bound_within_k(&q)?);
            println!("joint={}", bound_joint(&q)?);
        }
        Command::McBound(a) => {
            let config = McConfig {
                lattice_side: a.side,
                lakes: a.lakes,
                extents: a.extents,
                factors: a.factors,
                wth_fractions: a.wth_fractions,
                seed: a.seed,
            };
            let rows = mc_boundary_experiment(&config)?;
            println!("gr,wth,k,trials,empirical,mean_bound");
            for &s in &config.factors {
                let gr = s * s;
                for &wf in &config.wth_fractions {
                    let sel: Vec<_> = rows
                        .iter()
                        .filter(|r| {
                            r.gr == gr && r.wth == ((wf * gr as f64).round() as usize).clamp(1, gr)
                        })
                        .collect();
                    let n = sel.len() as f64;
                    for k in 0..=a.max_k.min(gr) {
                        let hits = sel.iter().filter(|r| r.contained_within(k)).count() as f64 / n;
                        let bound = sel
                            .iter()
                            .map(|r| {
                                bound_joint(&BoundQuery {
                                    gr,
                                    c: r.coarse_perimeter.max(1),
                                    k,
                                })
                            })
                            .sum::<orbit_core::Result<f64>>()?
                            / n;
                        println!(
                            "{gr},{},{k},{},{hits},{bound}",
                            sel.first().map_or(0, |r| r.wth),
                            sel.len()
                        );
                    }
                }
            }
            if let Some(p) = &a.output {
                mc_table(&rows).write(p)?;
            }
        }
    }
    Ok(())
}
