use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use indentfit::calibration::{fit_metrics, CalibrationProblem, Condition as Target, GaConfig};
use indentfit::constitutive::MaterialParams;
use indentfit::contact::{forward_indentation, oliver_pharr, AreaFunction, ForwardConfig, LdCurve, LoadSchedule};
use indentfit::doe::{
    anova, error_mse, error_rms_relative, extreme_sensitivity, full_factorial, orthogonal_array, paired_depths,
    ArrayKind, CurveFeatures, FactorialSpace,
};
use indentfit::surrogate::{add_noise, build_snapshots, shape_sweep, SurrogateModel};
use nalgebra::DMatrix;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::{Condition, ErrorMeasure, StudyConfig};
use crate::failure::Failure;
use crate::output::Output;

pub fn surrogate_file(condition: &str) -> String {
    format!("surrogate_{condition}.txt")
}

fn read_curve(path: &Path) -> Result<LdCurve, Failure> {
    let file = fs::File::open(path).map_err(|e| Failure::io(path, e))?;
    LdCurve::read_csv(file).map_err(|e| match e {
        indentfit::Error::Format(m) => Failure::Config(format!("{}: {m}", path.display())),
        other => Failure::Config(format!("{}: {other}", path.display())),
    })
}

fn curve_csv(curve: &LdCurve) -> Result<String, Failure> {
    let mut buf = Vec::new();
    curve.write_csv(&mut buf, &[])?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// The schedule's sample grid with zero depths, used to pair measured curves
/// with model output.
fn schedule_grid(schedule: &LoadSchedule) -> Result<LdCurve, Failure> {
    let t = schedule.sample_times();
    let p = t.iter().map(|&ti| schedule.load_at(ti)).collect();
    let h = vec![0.0; t.len()];
    Ok(LdCurve::new(t, p, h)?)
}

pub fn simulate(cfg: &StudyConfig, out: &Output, only: &[String]) -> Result<(), Failure> {
    let params = cfg.material.params()?;
    let fwd = cfg.forward.config()?;
    let selected: Vec<&Condition> = if only.is_empty() {
        cfg.conditions.iter().collect()
    } else {
        only.iter().map(|n| cfg.condition(n)).collect::<Result<_, _>>()?
    };
    for c in selected {
        let curve = forward_indentation(&params, &c.schedule()?, &fwd)?;
        let path = out.write(&format!("curve_{}.csv", c.name), &curve_csv(&curve)?)?;
        println!(
            "{}: h_max {:.3} nm, h_residual {:.3} nm -> {}",
            c.name,
            curve.max_depth(),
            curve.residual_depth(),
            path.display()
        );
    }
    Ok(())
}

pub fn sensitivity(cfg: &StudyConfig, out: &Output) -> Result<(), Failure> {
    let s = &cfg.sensitivity;
    let kind: ArrayKind = s.array.parse()?;
    let design = orthogonal_array(kind);
    let levels = s.levels.factor_levels()?;
    let runs = design.substitute(&levels)?;
    let schedule = cfg.condition(&s.condition)?.schedule()?;
    let fwd = cfg.forward.config()?;
    let nu = cfg.material.nu;
    let reference = match &s.reference {
        Some(path) => read_curve(path)?,
        None => forward_indentation(&cfg.material.params()?, &schedule, &fwd)?,
    };
    let simulate = |design_values: &[f64]| -> indentfit::Result<LdCurve> {
        forward_indentation(&MaterialParams::from_design(design_values, nu)?, &schedule, &fwd)
    };
    let evaluated: Vec<(CurveFeatures, f64)> = runs
        .par_iter()
        .map(|run| {
            let curve = simulate(run)?;
            let (sim, exp) = paired_depths(&curve, &reference)?;
            // Every curve starts at the origin; that sample carries nothing.
            let err = match s.error {
                ErrorMeasure::RmsRelative => error_rms_relative(&sim[1..], &exp[1..])?,
                ErrorMeasure::Mse => error_mse(&sim[1..], &exp[1..])?,
            };
            Ok((CurveFeatures::of(&curve), err))
        })
        .collect::<indentfit::Result<_>>()?;
    let responses: Vec<f64> = evaluated.iter().map(|(_, e)| *e).collect();
    let table = anova(&design, &levels, &responses)?;

    let names = levels.names();
    let mut runs_csv = format!("run,{},max_depth_nm,residual_depth_nm,error\n", names.join(","));
    for (i, (run, (features, err))) in runs.iter().zip(&evaluated).enumerate() {
        let _ = writeln!(
            runs_csv,
            "{},{},{},{},{err}",
            i + 1,
            join(run),
            features.max_depth,
            features.residual_depth
        );
    }
    out.write("sensitivity_runs.csv", &runs_csv)?;
    out.write("anova.csv", &table.to_csv())?;
    out.write("anova.txt", &format!("{table}\n"))?;

    let extremes = extreme_sensitivity(&levels.bounds(), &cfg.material.design(), simulate)?;
    let mut ext_csv = String::from("factor,lo,hi,delta_max_depth_nm,delta_residual_depth_nm\n");
    for d in &extremes {
        let (lo, hi) = levels.bounds()[d.index];
        let _ = writeln!(ext_csv, "{},{lo},{hi},{},{}", names[d.index], d.max_depth(), d.residual_depth());
    }
    out.write("extremes.csv", &ext_csv)?;
    println!("{table}");
    println!("{} runs on condition '{}' -> {}", runs.len(), s.condition, out.path("anova.csv").display());
    Ok(())
}

/// Centres of the grid cells spanned by the free factors; fixed factors keep
/// their single level.
fn cell_centres(space: &FactorialSpace) -> Vec<Vec<f64>> {
    let mids: Vec<Vec<f64>> = space
        .levels
        .iter()
        .map(|l| if l.len() == 1 { l.clone() } else { l.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect() })
        .collect();
    full_factorial(&mids).iter().map(|p| space.restrict(p)).collect()
}

fn forward_depths(space: &FactorialSpace, nu: f64, schedule: &LoadSchedule, fwd: &ForwardConfig, free: &[f64]) -> indentfit::Result<Vec<f64>> {
    let p = MaterialParams::from_design(&space.expand(free)?, nu)?;
    Ok(forward_indentation(&p, schedule, fwd)?.depths().to_vec())
}

pub fn train(cfg: &StudyConfig, out: &Output) -> Result<(), Failure> {
    let sc = &cfg.surrogate;
    let kernel = sc.kernel()?;
    let seed = if sc.noise > 0.0 { Some(cfg.require_seed("noisy training")?) } else { None };
    let space = sc.levels.space()?;
    let points = space.points();
    let bounds = space.bounds();
    let fwd = cfg.forward.config()?;
    let nu = cfg.material.nu;
    let mut summary = String::from(
        "condition,outputs,snapshots,rank,energy_retained,condition_estimate,training_hash,model_sha256\n",
    );
    for (k, c) in cfg.conditions.iter().enumerate() {
        let schedule = c.schedule()?;
        let forward = |free: &[f64]| forward_depths(&space, nu, &schedule, &fwd, free);
        let mut snapshots = build_snapshots(&points, &bounds, forward)?;
        if let Some(seed) = seed {
            snapshots = add_noise(&snapshots, sc.noise, seed.wrapping_add(k as u64))?;
        }
        let model = SurrogateModel::train(&snapshots, kernel, sc.shape, sc.energy_threshold)?;
        let text = model.to_text();
        let digest = sha256_hex(&text);
        let path = out.write(&surrogate_file(&c.name), &text)?;
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{},{},{digest}",
            c.name,
            model.n_outputs(),
            model.n_train(),
            model.basis.rank(),
            model.basis.energy_retained,
            model.condition,
            model.training_hash
        );
        println!(
            "{}: {}x{} snapshots, rank {} -> {} (sha256 {digest})",
            c.name,
            model.n_outputs(),
            model.n_train(),
            model.basis.rank(),
            path.display()
        );
        if !sc.shape_sweep.is_empty() {
            let centres = cell_centres(&space);
            let outputs: Vec<Vec<f64>> = centres.par_iter().map(|p| forward(p)).collect::<indentfit::Result<_>>()?;
            let inputs = DMatrix::from_fn(bounds.len(), centres.len(), |i, j| centres[j][i]);
            let targets = DMatrix::from_fn(outputs[0].len(), outputs.len(), |i, j| outputs[j][i]);
            let sweep = shape_sweep(&snapshots, kernel, sc.energy_threshold, &sc.shape_sweep, &inputs, &targets)?;
            let mut csv = String::from("kernel,c,mean_relative_error\n");
            for (shape, err) in sweep {
                let _ = writeln!(csv, "{kernel},{shape},{}", err.map(|e| e.to_string()).unwrap_or_default());
            }
            out.write(&format!("shape_sweep_{}.csv", c.name), &csv)?;
        }
    }
    out.write("training.csv", &summary)?;
    Ok(())
}

pub fn calibrate(cfg: &StudyConfig, out: &Output, out_dir: &Path) -> Result<(), Failure> {
    let seed = cfg.require_seed("calibration")?;
    let space = cfg.surrogate.levels.space()?;
    let dir: PathBuf = cfg.calibration.surrogate_dir.clone().unwrap_or_else(|| out_dir.to_path_buf());
    let mut experiments = Vec::new();
    for c in &cfg.conditions {
        let path = c.experiment.as_ref().ok_or_else(|| {
            Failure::Config(format!("condition '{}' has no `experiment` curve to calibrate against", c.name))
        })?;
        if !path.is_file() {
            return Err(Failure::io(path, "experiment file not found"));
        }
        experiments.push(path.clone());
    }
    let mut targets = Vec::new();
    for (c, exp_path) in cfg.conditions.iter().zip(&experiments) {
        let path = dir.join(surrogate_file(&c.name));
        if !path.is_file() {
            return Err(Failure::MissingArtifact { path, hint: "run `indentfit train` first".into() });
        }
        let text = fs::read_to_string(&path).map_err(|e| Failure::io(&path, e))?;
        let surrogate =
            SurrogateModel::from_text(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        let grid = schedule_grid(&c.schedule()?)?;
        let (_, target) = paired_depths(&grid, &read_curve(exp_path)?)?;
        targets.push(Target { label: c.name.clone(), target, surrogate });
    }
    let problem = CalibrationProblem::new(space.bounds(), targets)?;
    let ga = GaConfig { rng_seed: seed, ..cfg.calibration.ga.clone() };
    let outcome = problem.solve(&ga)?;
    let best = MaterialParams::from_design(&space.expand(&outcome.best)?, cfg.material.nu)?;

    let mut params_csv = String::from("parameter,value\n");
    for (name, v) in MaterialParams::NAMES.iter().zip(best.to_array()) {
        let _ = writeln!(params_csv, "{name},{v}");
    }
    out.write("calibration.csv", &params_csv)?;

    let fwd = cfg.forward.config()?;
    let predictions = problem.predictions(&outcome.best)?;
    let mut metrics_csv = String::from("condition,source,rmse_nm,r2,avg_err_nm,pct_err\n");
    let mut report = format!(
        "objective {} nm^2 after {} generations (seed {seed})\nextrapolated queries {}\n\n",
        outcome.objective,
        outcome.history.len() - 1,
        problem.extrapolation_count()
    );
    for (name, v) in MaterialParams::NAMES.iter().zip(best.to_array()) {
        let _ = writeln!(report, "{name:>6} = {v}");
    }
    let _ = writeln!(report, "\n{:<10} {:<10} {:>12} {:>10} {:>12} {:>8}", "condition", "source", "RMSE nm", "R2", "avg err nm", "err %");
    for ((c, target), pred) in cfg.conditions.iter().zip(&problem.conditions).zip(&predictions) {
        let curve = forward_indentation(&best, &c.schedule()?, &fwd)?;
        out.write(&format!("fit_{}.csv", c.name), &curve_csv(&curve)?)?;
        for (source, fitted) in [("forward", curve.depths()), ("surrogate", pred.as_slice())] {
            let m = fit_metrics(&target.target, fitted)?;
            let _ = writeln!(metrics_csv, "{},{source},{},{},{},{}", c.name, m.rmse, m.r2, m.avg_err, m.pct_err);
            let _ = writeln!(
                report,
                "{:<10} {:<10} {:>12.4} {:>10.6} {:>12.4} {:>8.3}",
                c.name, source, m.rmse, m.r2, m.avg_err, m.pct_err
            );
        }
    }
    out.write("fit_metrics.csv", &metrics_csv)?;
    out.write("calibration.txt", &report)?;

    let mut history = format!("generation,best,mean,{}\n", space.free_names().join(","));
    for g in &outcome.history {
        let _ = writeln!(history, "{},{},{},{}", g.generation, g.best, g.mean, join(&g.best_params));
    }
    out.write("history.csv", &history)?;
    print!("{report}");
    Ok(())
}

pub fn analyze(cfg: &StudyConfig, out: &Output, curve_path: &Path, area_path: Option<&Path>, ngan: bool) -> Result<(), Failure> {
    let curve = read_curve(curve_path)?;
    let area = match area_path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::io(p, e))?;
            toml::from_str::<AreaFunction>(&text).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?
        }
        None => AreaFunction::default(),
    };
    let op = indentfit::contact::OliverPharrConfig { ngan: cfg.analysis.ngan || ngan, ..cfg.analysis };
    let r = oliver_pharr(&curve, &area, &op)?;
    let mut report = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(report, "{k:<20} {v}");
    };
    line("curve", curve_path.display().to_string());
    line("P_max_mN", r.p_max.to_string());
    line("h_max_nm", r.h_max.to_string());
    line("fit_m", r.fit.m.to_string());
    line("fit_h_f_nm", r.fit.h_f.to_string());
    line("S_mN_per_nm", r.s.to_string());
    if let (Some(s_e), Some(rate)) = (r.s_e, r.hold_rate) {
        line("hold_rate_nm_per_s", rate.to_string());
        line("S_e_mN_per_nm", s_e.to_string());
    }
    line("h_c_nm", r.h_c.to_string());
    line("area_nm2", r.area.to_string());
    line("H_GPa", r.hardness.to_string());
    line("E_r_GPa", r.e_r.to_string());
    line("E_s_GPa", r.e_s.to_string());
    let stem = curve_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "curve".into());
    out.write(&format!("analysis_{stem}.txt"), &report)?;
    print!("{report}");
    Ok(())
}
