//! Data behind the seven figures: CSV (and SVG for zonoids) per panel.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use maxstab::coeffs::associated_choquet;
use maxstab::grid::simplex_grid;
use maxstab::projections::{projection_curve, return_level_curve, ProjectionKind, Scale};
use maxstab::zonoid::{polylines_to_svg, zonoid_polyline, ZonoidPolyline};
use maxstab::{Direction, EvalOptions, ModelSpec};

pub const DIRICHLET_SETS: [(&str, [f64; 3]); 6] = [
    ("sym_black", [1.5, 1.5, 1.5]),
    ("sym_blue", [3.0, 3.0, 3.0]),
    ("sym_red", [12.0, 12.0, 12.0]),
    ("asym_black", [1.5, 1.5, 1.5]),
    ("asym_blue", [1.5, 3.0, 12.0]),
    ("asym_red", [1.5, 12.0, 96.0]),
];

const ANGLES: usize = 720;
const PICKANDS_POINTS: usize = 201;

pub fn write_figure(id: u32, dir: &Path, opts: &EvalOptions) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    match id {
        1 => angular_densities(dir),
        2 => {
            let dir30 = ModelSpec::dirichlet(vec![30.0, 0.2])?;
            let assoc = associated_choquet(&dir30, opts)?;
            zonoid_panel(
                dir,
                "fig2",
                &[
                    ("dependent", ModelSpec::fully_dependent(2)?),
                    ("dirichlet_30_0.2", dir30),
                    ("associated_choquet", assoc),
                    ("independent", ModelSpec::independent(2)?),
                ],
                opts,
            )
        }
        3 => {
            let mut models = vec![("dependent".to_string(), ModelSpec::fully_dependent(2)?)];
            for a in [4.0, 1.0, 0.25, 0.0625] {
                models.push((format!("dirichlet_{a}_{a}"), ModelSpec::dirichlet(vec![a, a])?));
            }
            let named: Vec<(&str, ModelSpec)> = models.iter().map(|(n, m)| (n.as_str(), m.clone())).collect();
            let mut files = zonoid_panel(dir, "fig3_top", &named, opts)?;
            files.extend(zonoid_panel(
                dir,
                "fig3_bottom",
                &[
                    ("dirichlet_0.15_12", ModelSpec::dirichlet(vec![0.15, 12.0])?),
                    ("dirichlet_4_0.2", ModelSpec::dirichlet(vec![4.0, 0.2])?),
                ],
                opts,
            )?);
            Ok(files)
        }
        4 => {
            let mut models = Vec::new();
            for (a, b) in [(4.0, 4.0), (1.0, 4.0), (1.0, 1.0), (1.0, 0.25), (0.25, 0.25)] {
                models.push((format!("dirichlet_{a}_{b}"), ModelSpec::dirichlet(vec![a, b])?));
            }
            let named: Vec<(&str, ModelSpec)> = models.iter().map(|(n, m)| (n.as_str(), m.clone())).collect();
            zonoid_panel(dir, "fig4", &named, opts)
        }
        5 => projection_panel(dir, "fig5", ProjectionKind::Min, opts),
        6 => projection_panel(dir, "fig6", ProjectionKind::Max, opts),
        7 => {
            let mut models = Vec::new();
            for r in [0.5f64, 1.0, 2.0, 4.0] {
                let g = r * r;
                models.push((
                    format!("hr_sqrtgamma_{r}"),
                    ModelSpec::husler_reiss(vec![vec![0.0, g], vec![g, 0.0]])?,
                ));
            }
            let named: Vec<(&str, ModelSpec)> = models.iter().map(|(n, m)| (n.as_str(), m.clone())).collect();
            zonoid_panel(dir, "fig7", &named, opts)
        }
        other => bail!("unknown figure id {other} (expected 1 to 7)"),
    }
}

fn write(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    let p = dir.join(name);
    fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
    Ok(p)
}

fn angular_densities(dir: &Path) -> Result<Vec<PathBuf>> {
    let grid = simplex_grid(3, 60)?;
    let mut files = Vec::new();
    for (name, alpha) in DIRICHLET_SETS {
        let ModelSpec::Dirichlet(p) = ModelSpec::dirichlet(alpha.to_vec())? else {
            unreachable!()
        };
        let mut csv = String::from("w1,w2,w3,density\n");
        for w in &grid.points {
            if w.iter().any(|&v| v == 0.0) {
                continue;
            }
            let dens = p.angular_density(w)?;
            writeln!(csv, "{},{},{},{}", w[0], w[1], w[2], dens)?;
        }
        files.push(write(dir, &format!("fig1_{name}.csv"), &csv)?);
    }
    Ok(files)
}

fn zonoid_panel(dir: &Path, stem: &str, models: &[(&str, ModelSpec)], opts: &EvalOptions) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let mut polys: Vec<(String, ZonoidPolyline)> = Vec::new();
    let mut pickands = String::from("model,w,A\n");
    for (name, m) in models {
        let poly = zonoid_polyline(m, ANGLES, opts)?;
        files.push(write(dir, &format!("{stem}_{name}_zonoid.csv"), &polyline_csv(&poly))?);
        for k in 0..PICKANDS_POINTS {
            let w = k as f64 / (PICKANDS_POINTS - 1) as f64;
            let a = m.pickands(&[1.0 - w, w], opts)?.value;
            writeln!(pickands, "{name},{w},{a}")?;
        }
        polys.push((name.to_string(), poly));
    }
    files.push(write(dir, &format!("{stem}_pickands.csv"), &pickands)?);
    let refs: Vec<(&str, &ZonoidPolyline)> = polys.iter().map(|(n, p)| (n.as_str(), p)).collect();
    files.push(write(dir, &format!("{stem}_zonoids.svg"), &polylines_to_svg(&refs, 400))?);
    Ok(files)
}

/// `alpha,x1,x2` rows; polygon vertices carry an empty angle.
pub fn polyline_csv(poly: &ZonoidPolyline) -> String {
    let mut csv = String::from("alpha,x1,x2\n");
    if poly.angles.is_empty() {
        for v in poly.vertices() {
            let _ = writeln!(csv, ",{},{}", v[0], v[1]);
        }
    } else {
        let _ = writeln!(csv, "0,1,0");
        for (a, v) in poly.angles.iter().zip(&poly.arc) {
            let _ = writeln!(csv, "{a},{},{}", v[0], v[1]);
        }
        let _ = writeln!(csv, "{},0,1", std::f64::consts::FRAC_PI_2);
    }
    csv
}

fn projection_panel(dir: &Path, stem: &str, kind: ProjectionKind, opts: &EvalOptions) -> Result<Vec<PathBuf>> {
    let a = Direction::ones(3);
    let mut models: Vec<(String, ModelSpec)> = DIRICHLET_SETS
        .iter()
        .map(|(n, al)| Ok((n.to_string(), ModelSpec::dirichlet(al.to_vec())?)))
        .collect::<Result<_>>()?;
    models.push(("dependent".into(), ModelSpec::fully_dependent(3)?));
    models.push(("independent".into(), ModelSpec::independent(3)?));
    let mut cdf = String::from("model,gumbel_t,F\n");
    let mut rl = String::from("model,return_period,level,lower,upper\n");
    for (name, m) in &models {
        let c = projection_curve(m, &a, kind, Scale::Gumbel, ((-3.0f64).exp(), 8.0f64.exp()), opts)?;
        for (t, f) in &c.samples {
            writeln!(cdf, "{name},{t},{f}")?;
        }
        let r = return_level_curve(m, &a, kind, Scale::Gumbel, 50, opts)?;
        for i in 0..r.periods.len() {
            writeln!(
                rl,
                "{name},{},{},{},{}",
                r.periods[i], r.levels[i], r.lower[i], r.upper[i]
            )?;
        }
    }
    Ok(vec![
        write(dir, &format!("{stem}_cdf.csv"), &cdf)?,
        write(dir, &format!("{stem}_return_levels.csv"), &rl)?,
    ])
}
