use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};

use serde_json::json;

use super::config::{check_frequency, reduce_angle, ExperimentConfig, ExperimentKind};
use super::report::{Relation, Report};
use super::Harness;
use crate::error::{Error, Result};
use crate::fourier::{dft_at, ComplexValue};
use crate::rng::{derive_seed, SplitMix64};
use crate::simulate::{ProcessSpec, Sampler};
use crate::spectral::SpectralModel;
use crate::stats::{
    chi2_2_cdf, compensated_sum, ks_statistic, sample_mean_var, sample_moments_2d, AnnealedMixture,
    MIXTURE_POINTS,
};

/// `g(theta)` at or below this makes the normalised statistics meaningless.
pub const DEGENERATE_G: f64 = 1e-8;

/// Random frequencies closer than this to 0, pi or 2 pi are redrawn.
pub const THETA_REJECT_RADIUS: f64 = 1e-6;

fn replicate_seed(cfg: &ExperimentConfig, r: usize) -> u64 {
    derive_seed(cfg.master_seed, r as u64)
}

fn new_report(cfg: &ExperimentConfig, kind: ExperimentKind, spec: &ProcessSpec) -> Report {
    let mut params = cfg.to_json();
    params["kind"] = json!(kind);
    let mut report = Report::new(kind, params);
    if let ProcessSpec::Linear(l) = spec {
        if l.tail_energy() > 0.0 {
            report.stat("process.truncation", l.truncation() as f64);
            report.stat("process.tail_energy", l.tail_energy());
            report.note(format!(
                "filter truncated at J={}; omitted coefficient energy {:.6e}",
                l.truncation(),
                l.tail_energy()
            ));
        }
    }
    report
}

/// `S_n(theta) / sqrt(n)` for every replicate (outer) and frequency (inner).
fn normalised_transforms(
    h: &Harness,
    cfg: &ExperimentConfig,
    sampler: &Sampler,
    thetas: &[f64],
    replicates: std::ops::Range<usize>,
) -> Result<Vec<Vec<ComplexValue>>> {
    let scale = (sampler.len() as f64).sqrt().recip();
    let start = replicates.start;
    h.try_map(replicates.len(), |i| {
        let values = sampler.values(replicate_seed(cfg, start + i));
        thetas
            .iter()
            .map(|&t| Ok(dft_at(&values, t)? * scale))
            .collect()
    })
}

/// `g` at each frequency: closed form when available, otherwise the mean of
/// `|S_n|^2 / n` over `pilot_factor * R` replicates disjoint from the main run.
fn density_oracle(
    h: &Harness,
    cfg: &ExperimentConfig,
    spec: &ProcessSpec,
    sampler: &Sampler,
    thetas: &[f64],
    report: &mut Report,
) -> Result<Vec<f64>> {
    match SpectralModel::new(spec, 0) {
        Ok(model) => thetas.iter().map(|&t| model.g(t)).collect(),
        Err(Error::Unsupported(_)) => {
            let count = cfg.pilot_factor * cfg.replicates;
            let start = cfg.replicates;
            let rows = normalised_transforms(h, cfg, sampler, thetas, start..start + count)?;
            report.note(format!(
                "g estimated by pilot simulation: {count} replicates with ids {start}..{}",
                start + count
            ));
            (0..thetas.len())
                .map(|i| {
                    let sq: Vec<f64> = rows.iter().map(|row| row[i].norm_sqr()).collect();
                    let (mean, var) = sample_mean_var(&sq)?;
                    report.stat(
                        format!("theta[{i}].g_pilot_se"),
                        (var / count as f64).sqrt(),
                    );
                    Ok(mean)
                })
                .collect()
        }
        Err(e) => Err(e),
    }
}

fn check_density(theta: f64, g: f64) -> Result<()> {
    if !(g > DEGENERATE_G) {
        return Err(Error::DegenerateFrequency { theta, g });
    }
    Ok(())
}

/// Writes `replicate,theta,re,im,periodogram` rows, where `re + i im` is
/// `S_n(theta) / sqrt(n)` and the last column is `|S_n|^2 / (2 pi n)`.
fn write_samples(
    cfg: &ExperimentConfig,
    report: &mut Report,
    rows: impl Iterator<Item = (usize, f64, ComplexValue)>,
) -> Result<()> {
    let Some(path) = &cfg.output.samples else {
        return Ok(());
    };
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "replicate,theta,re,im,periodogram")?;
    for (r, theta, z) in rows {
        writeln!(
            w,
            "{r},{theta},{},{},{}",
            z.re,
            z.im,
            z.norm_sqr() / (2.0 * PI)
        )?;
    }
    w.flush()?;
    report.samples_written = Some(path.clone());
    Ok(())
}

fn write_grid_samples(
    cfg: &ExperimentConfig,
    report: &mut Report,
    thetas: &[f64],
    rows: &[Vec<ComplexValue>],
) -> Result<()> {
    write_samples(
        cfg,
        report,
        rows.iter()
            .enumerate()
            .flat_map(|(r, row)| thetas.iter().zip(row).map(move |(&t, &z)| (r, t, z))),
    )
}

fn closed_form_model(spec: &ProcessSpec, max_lag: usize, what: &str) -> Result<SpectralModel> {
    SpectralModel::new(spec, max_lag).map_err(|e| match e {
        Error::Unsupported(m) => Error::Unsupported(format!("{what}: {m}")),
        other => other,
    })
}

impl Harness {
    pub fn run(&self, cfg: &ExperimentConfig) -> Result<Report> {
        let kind = cfg
            .kind
            .ok_or_else(|| Error::config("configuration has no experiment kind"))?;
        match kind {
            ExperimentKind::FixedFreqClt => self.fixed_freq_clt(cfg),
            ExperimentKind::CrossFreq => match cfg.thetas[..] {
                [t1, t2, ..] => self.cross_frequency(cfg, t1, t2),
                _ => Err(Error::config("cross_freq needs two theta values")),
            },
            ExperimentKind::Annealed => self.annealed(cfg),
            ExperimentKind::PeriodogramChi2 => self.periodogram_chi2(cfg),
            ExperimentKind::InvarianceIdentity => self.invariance_identity(cfg),
            ExperimentKind::VarianceConvergence => self.variance_convergence(cfg),
            ExperimentKind::RegularityDiag => self.regularity_diag(cfg),
        }
    }

    /// Empirical law of `S_n(theta)/sqrt(n)` against `N(0, g/2 I_2)` at each
    /// configured frequency.
    pub fn fixed_freq_clt(&self, cfg: &ExperimentConfig) -> Result<Report> {
        let spec = cfg.validate()?;
        let sampler = spec.sampler(cfg.n)?;
        let mut report = new_report(cfg, ExperimentKind::FixedFreqClt, &spec);
        let gs = density_oracle(self, cfg, &spec, &sampler, &cfg.thetas, &mut report)?;
        for (&t, &g) in cfg.thetas.iter().zip(&gs) {
            check_density(t, g)?;
        }
        let rows = normalised_transforms(self, cfg, &sampler, &cfg.thetas, 0..cfg.replicates)?;
        let r = cfg.replicates as f64;
        let tol = &cfg.tolerances;
        let corr_bound = tol.get("corr_sigmas") / r.sqrt();
        for (i, (&theta, &g)) in cfg.thetas.iter().zip(&gs).enumerate() {
            let pairs: Vec<[f64; 2]> = rows.iter().map(|row| [row[i].re, row[i].im]).collect();
            let m = sample_moments_2d(&pairs)?;
            let var = 0.5 * g;
            let sd = var.sqrt();
            let p = |s: &str| format!("theta[{i}].{s}");
            report.stat(p("theta"), theta);
            report.stat(p("g"), g);
            report.stat(p("target_var"), var);
            report.stat(p("mean_re"), m.mean[0]);
            report.stat(p("mean_im"), m.mean[1]);
            report.stat(p("var_re"), m.cov[0][0]);
            report.stat(p("var_im"), m.cov[1][1]);
            report.stat(p("cov_re_im"), m.cov[0][1]);
            report.stat(p("corr"), m.correlation());
            let mean_bound = (p("mean_bound"), tol.get("mean_sigmas") * sd / r.sqrt());
            let var_rel = ("var_rel", tol.get("var_rel"));
            let ks_crit = ("ks_crit", tol.get("ks_crit"));
            for (c, part) in [(0, "re"), (1, "im")] {
                report.check(
                    p(&format!("mean_{part}")),
                    (p(&format!("abs_mean_{part}")), m.mean[c].abs()),
                    Relation::AtMost,
                    mean_bound.clone(),
                );
                report.check(
                    p(&format!("var_{part}")),
                    (
                        p(&format!("var_{part}_rel_err")),
                        (m.cov[c][c] / var - 1.0).abs(),
                    ),
                    Relation::AtMost,
                    var_rel,
                );
                let column: Vec<f64> = pairs.iter().map(|s| s[c] / sd).collect();
                let d = ks_statistic(&column, crate::stats::normal_cdf)?;
                report.stat(p(&format!("ks_{part}")), d);
                report.check(
                    p(&format!("ks_{part}")),
                    (p(&format!("ks_{part}_scaled")), d * r.sqrt()),
                    Relation::AtMost,
                    ks_crit,
                );
            }
            report.check(
                p("corr"),
                (p("abs_corr"), m.correlation().abs()),
                Relation::AtMost,
                ("corr_bound", corr_bound),
            );
        }
        write_grid_samples(cfg, &mut report, &cfg.thetas, &rows)?;
        Ok(report)
    }

    /// Pairwise correlations of `(Re, Im)` at two distinct frequencies.
    pub fn cross_frequency(
        &self,
        cfg: &ExperimentConfig,
        theta1: f64,
        theta2: f64,
    ) -> Result<Report> {
        check_frequency(theta1)?;
        check_frequency(theta2)?;
        let (a, b) = (reduce_angle(theta1), reduce_angle(theta2));
        if (a - b).abs() < 1e-9 || (a + b - 2.0 * PI).abs() < 1e-9 {
            return Err(Error::config(format!(
                "cross_freq needs theta1 != +-theta2 (mod 2 pi), got {theta1} and {theta2}"
            )));
        }
        let thetas = [theta1, theta2];
        let cfg = &ExperimentConfig {
            thetas: thetas.to_vec(),
            ..cfg.clone()
        };
        let spec = cfg.validate()?;
        let sampler = spec.sampler(cfg.n)?;
        let mut report = new_report(cfg, ExperimentKind::CrossFreq, &spec);
        let rows = normalised_transforms(self, cfg, &sampler, &thetas, 0..cfg.replicates)?;
        let r = cfg.replicates as f64;
        let bound = cfg.tolerances.get("corr_sigmas") / r.sqrt();
        type Coord = fn(&[ComplexValue]) -> f64;
        let coords: [(&str, Coord); 4] = [
            ("re1", |z| z[0].re),
            ("im1", |z| z[0].im),
            ("re2", |z| z[1].re),
            ("im2", |z| z[1].im),
        ];
        for i in 0..4 {
            for j in i + 1..4 {
                let pairs: Vec<[f64; 2]> = rows
                    .iter()
                    .map(|row| [coords[i].1(row), coords[j].1(row)])
                    .collect();
                let rho = sample_moments_2d(&pairs)?.correlation();
                let name = format!("{}_{}", coords[i].0, coords[j].0);
                report.stat(format!("corr.{name}"), rho);
                let cross = (i < 2) != (j < 2);
                if cross {
                    report.check(
                        format!("cross.{name}"),
                        (format!("abs_corr.{name}"), rho.abs()),
                        Relation::AtMost,
                        ("corr_bound", bound),
                    );
                }
            }
        }
        write_grid_samples(cfg, &mut report, &thetas, &rows)?;
        Ok(report)
    }

    /// `Re S_n(theta_r)/sqrt(n)` at a fresh uniform frequency per replicate,
    /// against the scale mixture of centred normals.
    pub fn annealed(&self, cfg: &ExperimentConfig) -> Result<Report> {
        let spec = cfg.validate()?;
        let model = closed_form_model(&spec, 0, "annealed experiment")?;
        let sampler = spec.sampler(cfg.n)?;
        let mut report = new_report(cfg, ExperimentKind::Annealed, &spec);
        let h = 2.0 * PI / MIXTURE_POINTS as f64;
        let grid: Vec<f64> = (0..MIXTURE_POINTS)
            .map(|k| model.g(k as f64 * h))
            .collect::<Result<_>>()?;
        let mixture = AnnealedMixture::new(
            |t| grid[(t / h).round() as usize % MIXTURE_POINTS],
            MIXTURE_POINTS,
        );
        let scale = (cfg.n as f64).sqrt().recip();
        let draws: Vec<(f64, ComplexValue)> = self.try_map(cfg.replicates, |r| {
            let seed = replicate_seed(cfg, r);
            let theta = random_frequency(seed);
            Ok((theta, dft_at(&sampler.values(seed), theta)? * scale))
        })?;
        let re: Vec<f64> = draws.iter().map(|(_, z)| z.re).collect();
        let r = cfg.replicates as f64;
        let (mean, var) = sample_mean_var(&re)?;
        report.stat("mean_re", mean);
        report.stat("var_re", var);
        report.stat("target_var", 0.5 * model.c0());
        let d = ks_statistic(&re, |x| mixture.cdf(x))?;
        report.stat("ks_re", d);
        let bound = cfg.tolerances.get("ks_crit")
            + cfg.tolerances.get("ks_quadrature_allowance") * r.sqrt();
        report.threshold("ks_crit", cfg.tolerances.get("ks_crit"));
        report.check(
            "ks_re",
            ("ks_re_scaled", d * r.sqrt()),
            Relation::AtMost,
            ("ks_bound", bound),
        );
        write_samples(
            cfg,
            &mut report,
            draws.iter().enumerate().map(|(r, &(t, z))| (r, t, z)),
        )?;
        Ok(report)
    }

    /// `|S_n|^2 / (n g / 2)` against chi-square with two degrees of freedom.
    pub fn periodogram_chi2(&self, cfg: &ExperimentConfig) -> Result<Report> {
        let spec = cfg.validate()?;
        let sampler = spec.sampler(cfg.n)?;
        let mut report = new_report(cfg, ExperimentKind::PeriodogramChi2, &spec);
        let gs = density_oracle(self, cfg, &spec, &sampler, &cfg.thetas, &mut report)?;
        for (&t, &g) in cfg.thetas.iter().zip(&gs) {
            check_density(t, g)?;
        }
        let rows = normalised_transforms(self, cfg, &sampler, &cfg.thetas, 0..cfg.replicates)?;
        let r = cfg.replicates as f64;
        let mean_bound = cfg.tolerances.get("periodogram_mean_sigmas") / r.sqrt();
        let ks_crit = cfg.tolerances.get("ks_crit");
        for (i, (&theta, &g)) in cfg.thetas.iter().zip(&gs).enumerate() {
            let p = |s: &str| format!("theta[{i}].{s}");
            let u: Vec<f64> = rows
                .iter()
                .map(|row| row[i].norm_sqr() / (0.5 * g))
                .collect();
            let (mean, var) = sample_mean_var(&u)?;
            report.stat(p("theta"), theta);
            report.stat(p("g"), g);
            report.stat(p("mean"), mean);
            report.stat(p("var"), var);
            let d = ks_statistic(&u, |x| chi2_2_cdf(x).unwrap_or(0.0))?;
            report.stat(p("ks"), d);
            report.check(
                p("ks"),
                (p("ks_scaled"), d * r.sqrt()),
                Relation::AtMost,
                ("ks_crit", ks_crit),
            );
            report.check(
                p("mean"),
                (p("abs_mean_err"), (mean - 2.0).abs()),
                Relation::AtMost,
                ("mean_bound", mean_bound),
            );
        }
        write_grid_samples(cfg, &mut report, &cfg.thetas, &rows)?;
        Ok(report)
    }

    /// `(1 / (c_0 n pi)) int E[max_m sum_{k<=m} X_k cos k theta]^2 d theta`,
    /// which tends to 1.
    pub fn invariance_identity(&self, cfg: &ExperimentConfig) -> Result<Report> {
        let spec = cfg.validate()?;
        if !cfg.n.is_power_of_two() {
            return Err(Error::config(format!(
                "invariance_identity needs n a power of two, got {}",
                cfg.n
            )));
        }
        let model = closed_form_model(&spec, 0, "invariance identity")?;
        let sampler = spec.sampler(cfg.n)?;
        let mut report = new_report(cfg, ExperimentKind::InvarianceIdentity, &spec);
        let rows = self.map(cfg.replicates, |r| {
            max_functional_row(&sampler.values(replicate_seed(cfg, r)), cfg.n_grid)
        });
        let (ratio, se) = invariance_ratio(&rows, model.c0(), cfg.n)?;
        report.stat("c0", model.c0());
        report.stat("grid_points", grid_frequencies(cfg.n_grid).len() as f64);
        report.stat("ratio", ratio);
        report.stat("ratio_se", se);
        report.note("frequency grid excludes theta=0 and theta=pi");
        report.check(
            "ratio",
            ("abs_ratio_err", (ratio - 1.0).abs()),
            Relation::AtMost,
            ("invariance_tol", cfg.tolerances.get("invariance_tol")),
        );
        Ok(report)
    }

    /// Monte Carlo `E|S_n|^2 / n` along one path per replicate, against the
    /// exact Cesaro variance and its limit `g`.
    pub fn variance_convergence(&self, cfg: &ExperimentConfig) -> Result<Report> {
        let spec = cfg.validate()?;
        let ladder = &cfg.n_ladder;
        let (n_min, n_max) = (ladder[0], *ladder.last().expect("validated nonempty"));
        let model = closed_form_model(&spec, n_max - 1, "variance convergence")?;
        let sampler = spec.sampler(n_max)?;
        let mut report = new_report(cfg, ExperimentKind::VarianceConvergence, &spec);
        report.note(format!(
            "one path of length {n_max} per replicate, read at every ladder length"
        ));
        let phases: Vec<Vec<ComplexValue>> = cfg
            .thetas
            .iter()
            .map(|&t| {
                (1..=n_max)
                    .map(|k| ComplexValue::from_polar(1.0, k as f64 * t))
                    .collect()
            })
            .collect();
        // rows[r][i][l] = |S_{ladder[l]}(theta_i)|^2 / ladder[l]
        let rows: Vec<Vec<Vec<f64>>> = self.map(cfg.replicates, |r| {
            let values = sampler.values(replicate_seed(cfg, r));
            phases
                .iter()
                .map(|ph| {
                    let mut out = Vec::with_capacity(ladder.len());
                    let mut s = ComplexValue::new(0.0, 0.0);
                    let mut next = 0;
                    for (k, (&x, &e)) in values.iter().zip(ph).enumerate() {
                        s += e * x;
                        if k + 1 == ladder[next] {
                            out.push(s.norm_sqr() / ladder[next] as f64);
                            next += 1;
                        }
                    }
                    out
                })
                .collect()
        });
        let tol = &cfg.tolerances;
        let sigmas = tol.get("variance_se_sigmas");
        let r = cfg.replicates as f64;
        let short_memory = model.memory().is_none_or(|j| 8 * j < n_max);
        if !short_memory {
            report.note(format!(
                "limit checks skipped: memory {} is not below n_max/8",
                model.memory().unwrap_or(0)
            ));
        }
        for (i, &theta) in cfg.thetas.iter().enumerate() {
            let g = model.g(theta)?;
            let p = |s: &str| format!("theta[{i}].{s}");
            report.stat(p("theta"), theta);
            report.stat(p("g"), g);
            let mut gaps = Vec::with_capacity(ladder.len());
            let mut last = (0.0, 0.0);
            for (l, &n) in ladder.iter().enumerate() {
                let column: Vec<f64> = rows.iter().map(|row| row[i][l]).collect();
                let (mc, var) = sample_mean_var(&column)?;
                let se = (var / r).sqrt();
                let ces = model.cesaro_variance(n, theta)?.value;
                let q = |s: &str| p(&format!("n{n}.{s}"));
                report.stat(q("mc"), mc);
                report.stat(q("se"), se);
                report.stat(q("cesaro"), ces);
                report.stat(q("cesaro_gap"), (ces - g).abs());
                report.check(
                    q("mc_vs_cesaro"),
                    (q("abs_mc_err"), (mc - ces).abs()),
                    Relation::AtMost,
                    (q("mc_bound"), sigmas * se),
                );
                gaps.push((ces - g).abs());
                last = (mc, se);
            }
            report.check(
                p("gap_shrinks"),
                (p(&format!("n{n_max}.cesaro_gap")), gaps[gaps.len() - 1]),
                Relation::AtMost,
                (p(&format!("n{n_min}.gap_bound")), gaps[0]),
            );
            if short_memory {
                report.check(
                    p("cesaro_limit"),
                    (p(&format!("n{n_max}.cesaro_gap")), gaps[gaps.len() - 1]),
                    Relation::AtMost,
                    ("cesaro_gap", tol.get("cesaro_gap")),
                );
                report.check(
                    p("mc_limit"),
                    (p(&format!("n{n_max}.abs_mc_minus_g")), (last.0 - g).abs()),
                    Relation::AtMost,
                    (
                        p("mc_limit_bound"),
                        tol.get("variance_gap_abs") + sigmas * last.1,
                    ),
                );
            }
        }
        Ok(report)
    }

    /// `||E(S_n(theta) | F_0)||^2 / n` along the ladder. For Markov
    /// observables also the uniform bound `4 c_0 / (1 - cos^2 theta)`.
    pub fn regularity_diag(&self, cfg: &ExperimentConfig) -> Result<Report> {
        let spec = cfg.validate()?;
        let model = closed_form_model(&spec, 0, "regularity diagnostic")?;
        let mut report = new_report(cfg, ExperimentKind::RegularityDiag, &spec);
        let ladder = &cfg.n_ladder;
        let n_max = *ladder.last().expect("validated nonempty");
        let c0 = model.c0();
        let is_markov = matches!(spec.as_ref(), ProcessSpec::Markov(_));
        for (i, &theta) in cfg.thetas.iter().enumerate() {
            let p = |s: &str| format!("theta[{i}].{s}");
            report.stat(p("theta"), theta);
            let values: Vec<f64> = ladder
                .iter()
                .map(|&n| Ok(model.condfn_norm(theta, n)? / n as f64))
                .collect::<Result<_>>()?;
            for (&n, &v) in ladder.iter().zip(&values) {
                report.stat(p(&format!("n{n}.condfn_over_n")), v);
            }
            report.check(
                p("decay"),
                (
                    p(&format!("n{n_max}.condfn_over_n")),
                    values[values.len() - 1],
                ),
                Relation::AtMost,
                (
                    p("decay_bound"),
                    cfg.tolerances.get("decay_ratio") * values[0],
                ),
            );
            if is_markov {
                let s2 = theta.sin().powi(2);
                let worst = (1..=n_max)
                    .map(|n| Ok(model.condfn_norm(theta, n)? * s2 / (4.0 * c0)))
                    .collect::<Result<Vec<f64>>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                report.check(
                    p("markov_bound"),
                    (p("max_bound_ratio"), worst),
                    Relation::AtMost,
                    ("unit", 1.0),
                );
            }
        }
        Ok(report)
    }
}

/// Frequency indices `j` of the grid `2 pi j / size` used by the
/// max-functional identity: every node except 0 and pi.
pub fn grid_frequencies(size: usize) -> Vec<usize> {
    (1..size).filter(|&j| 2 * j != size).collect()
}

/// `[max_{1<=m<=n} sum_{k<=m} x_k cos(k theta_j)]^2` at each grid frequency.
pub fn max_functional_row(values: &[f64], grid: usize) -> Vec<f64> {
    let table: Vec<f64> = (0..grid)
        .map(|m| (2.0 * PI * m as f64 / grid as f64).cos())
        .collect();
    grid_frequencies(grid)
        .into_iter()
        .map(|j| {
            let (mut s, mut best, mut idx) = (0.0, f64::NEG_INFINITY, 0);
            for &x in values {
                idx = (idx + j) % grid;
                s += x * table[idx];
                best = f64::max(best, s);
            }
            best * best
        })
        .collect()
}

/// Normalised integral `2 mean_j M(theta_j) / (c_0 n)` averaged over
/// replicates, with its standard error.
pub fn invariance_ratio(rows: &[Vec<f64>], c0: f64, n: usize) -> Result<(f64, f64)> {
    let per_replicate: Vec<f64> = rows
        .iter()
        .map(|row| 2.0 * compensated_sum(row.iter().copied()) / (row.len() as f64 * c0 * n as f64))
        .collect();
    let (mean, var) = sample_mean_var(&per_replicate)?;
    Ok((mean, (var / rows.len() as f64).sqrt()))
}

/// Uniform frequency on `[0, 2 pi)` from a stream derived from the
/// replicate seed, redrawn near 0, pi and 2 pi.
fn random_frequency(replicate_seed: u64) -> f64 {
    let mut rng = SplitMix64::new(derive_seed(replicate_seed, 1));
    loop {
        let t = 2.0 * PI * rng.next_f64();
        if t.min((t - PI).abs()).min(2.0 * PI - t) >= THETA_REJECT_RADIUS {
            return t;
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    Harness::global().run(cfg)
}

pub fn run_fixed_freq_clt(cfg: &ExperimentConfig) -> Result<Report> {
    Harness::global().fixed_freq_clt(cfg)
}

pub fn run_cross_frequency(cfg: &ExperimentConfig, theta1: f64, theta2: f64) -> Result<Report> {
    Harness::global().cross_frequency(cfg, theta1, theta2)
}

pub fn run_annealed(cfg: &ExperimentConfig) -> Result<Report> {
    Harness::global().annealed(cfg)
}

pub fn run_periodogram_chi2(cfg: &ExperimentConfig) -> Result<Report> {
    Harness::global().periodogram_chi2(cfg)
}

pub fn run_invariance_identity(cfg: &ExperimentConfig) -> Result<Report> {
    Harness::global().invariance_identity(cfg)
}

pub fn run_variance_convergence(cfg: &ExperimentConfig) -> Result<Report> {
    Harness::global().variance_convergence(cfg)
}

pub fn run_regularity_diag(cfg: &ExperimentConfig) -> Result<Report> {
    Harness::global().regularity_diag(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ProcessConfig;

    fn cfg(kind: ExperimentKind, process: &str) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(kind, ProcessConfig::Preset(process.into()));
        c.n = 256;
        c.replicates = 200;
        c.thetas = vec![2.0];
        c
    }

    #[test]
    fn all_zero_path_gives_zero_ratio() {
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|_| max_functional_row(&[0.0; 64], 16))
            .collect();
        assert_eq!(rows[0].len(), 14);
        assert_eq!(invariance_ratio(&rows, 1.0, 64).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn max_functional_row_matches_direct_sum() {
        let x = crate::rng::sample_standard_normals(3, 50);
        let grid = 12;
        let row = max_functional_row(&x, grid);
        for (pos, j) in grid_frequencies(grid).into_iter().enumerate() {
            let theta = 2.0 * PI * j as f64 / grid as f64;
            let mut s = 0.0;
            let mut best = f64::NEG_INFINITY;
            for (k, &v) in x.iter().enumerate() {
                s += v * ((k + 1) as f64 * theta).cos();
                best = best.max(s);
            }
            assert!((row[pos] - best * best).abs() < 1e-9 * (1.0 + best * best));
        }
    }

    #[test]
    fn random_frequencies_avoid_excluded_points() {
        for r in 0..10_000u64 {
            let t = random_frequency(derive_seed(9, r));
            assert!((0.0..2.0 * PI).contains(&t));
            assert!(t.min((t - PI).abs()).min(2.0 * PI - t) >= THETA_REJECT_RADIUS);
        }
    }

    #[test]
    fn degenerate_frequency_is_rejected() {
        let mut c = ExperimentConfig::new(
            ExperimentKind::PeriodogramChi2,
            ProcessConfig::Linear {
                coeffs: vec![1.0, 1.0],
                innovation: Default::default(),
            },
        );
        c.replicates = 100;
        c.n = 64;
        c.thetas = vec![PI - 1e-5];
        assert!(matches!(
            run_periodogram_chi2(&c),
            Err(Error::DegenerateFrequency { .. })
        ));
        c.kind = Some(ExperimentKind::FixedFreqClt);
        assert!(matches!(
            run_fixed_freq_clt(&c),
            Err(Error::DegenerateFrequency { .. })
        ));
    }

    #[test]
    fn closed_form_only_experiments_reject_gaussian_functional() {
        let gf = ProcessConfig::GaussianFunctional {
            phi: 0.5,
            h: crate::simulate::Nonlinearity::Sign,
        };
        for kind in [
            ExperimentKind::Annealed,
            ExperimentKind::InvarianceIdentity,
            ExperimentKind::VarianceConvergence,
            ExperimentKind::RegularityDiag,
        ] {
            let mut c = ExperimentConfig::new(kind, gf.clone());
            c.n = 64;
            c.replicates = 100;
            c.thetas = vec![1.0];
            assert!(
                matches!(run_experiment(&c), Err(Error::Unsupported(_))),
                "{kind}"
            );
        }
    }

    #[test]
    fn gaussian_functional_uses_pilot_oracle() {
        let mut c = ExperimentConfig::new(
            ExperimentKind::FixedFreqClt,
            ProcessConfig::GaussianFunctional {
                phi: 0.5,
                h: crate::simulate::Nonlinearity::Sign,
            },
        );
        c.n = 256;
        c.replicates = 200;
        c.pilot_factor = 5;
        c.thetas = vec![1.0];
        let rep = run_fixed_freq_clt(&c).unwrap();
        assert!(rep.notes.iter().any(|n| n.contains("pilot")));
        assert!(rep.statistics.contains_key("theta[0].g_pilot_se"));
        assert!(rep.is_consistent());
    }

    #[test]
    fn cross_frequency_rejects_equal_or_mirrored() {
        let c = cfg(ExperimentKind::CrossFreq, "ma1");
        assert!(run_cross_frequency(&c, 1.0, 1.0).is_err());
        assert!(run_cross_frequency(&c, 1.0, 2.0 * PI - 1.0).is_err());
        assert!(run_cross_frequency(&c, 1.0, 0.0).is_err());
        let rep = run_cross_frequency(&c, 1.0, 2.0).unwrap();
        assert_eq!(rep.verdicts.len(), 4);
        assert_eq!(
            rep.statistics
                .keys()
                .filter(|k| k.starts_with("corr."))
                .count(),
            6
        );
    }

    #[test]
    fn reports_are_consistent_and_worker_independent() {
        for kind in ExperimentKind::ALL {
            let mut c = cfg(kind, "two_state(0.25)");
            c.thetas = vec![1.0, 2.0];
            c.n_ladder = vec![16, 64, 256];
            let a = Harness::new(1).unwrap().run(&c).unwrap();
            let b = Harness::new(3).unwrap().run(&c).unwrap();
            assert!(a.is_consistent(), "{kind}");
            assert_eq!(a.to_json_string(), b.to_json_string(), "{kind}");
        }
    }

    #[test]
    fn samples_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let mut c = cfg(ExperimentKind::FixedFreqClt, "ma1");
        c.thetas = vec![1.0, 2.0];
        c.output.samples = Some(path.to_string_lossy().into_owned());
        let rep = run_fixed_freq_clt(&c).unwrap();
        assert_eq!(rep.samples_written.as_deref(), c.output.samples.as_deref());
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("replicate,theta,re,im,periodogram"));
        let rows: Vec<Vec<f64>> = lines
            .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 400);
        for row in &rows {
            assert!((row[4] - (row[2] * row[2] + row[3] * row[3]) / (2.0 * PI)).abs() < 1e-12);
        }
        assert_eq!(rows[1][0], 0.0);
        assert_eq!(rows[1][1], 2.0);
    }

    #[test]
    fn slow_decay_metadata_is_reported() {
        let mut c = ExperimentConfig::new(
            ExperimentKind::RegularityDiag,
            ProcessConfig::NamedLinear {
                named: "slow_decay".into(),
                truncation: Some(1000),
                innovation: Default::default(),
            },
        );
        c.thetas = vec![1.0];
        let rep = run_regularity_diag(&c).unwrap();
        assert_eq!(rep.statistics["process.truncation"], 1000.0);
        assert!(rep.statistics["process.tail_energy"] > 0.0);
    }
}
