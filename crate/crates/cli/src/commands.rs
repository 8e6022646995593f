//! One function per subcommand, each returning its CSV table and summary.

use clap::Args;
use num_complex::Complex64;
use oscillax::cutoffs::CutoffFamily;
use oscillax::maximal::{run_sweep, sweep_exponents, FieldPolicy, Family, Range, SweepSpec};
use oscillax::propagator::{evaluate_sa, evaluate_sa_oracle};
use oscillax::special::{certify_asymptotic, scaled_remainder, BesselOrder, DyadicRange};
use oscillax::split::{
    apply_rt_radial, apply_rt_split, half_line_norm, kernel_k, profile_half_line_norm, recompose_check,
    remainder_constant, split_grid, RadialPiece, TimeSelector,
};
use oscillax::transform::{hankel_fourier, nd_oracle};
use oscillax::{EvalPoint, RadialProfile, SymbolParams, TimeGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{CliError, Common};

/// Table and summary produced by one run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub csv: String,
    pub results: Value,
    pub converged: bool,
}

fn e(x: f64) -> String {
    format!("{x:.15e}")
}

fn table(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Args, Serialize, Clone)]
#[serde(rename_all = "kebab-case")]
pub struct ProfileArgs {
    /// gaussian, annular, packet or bump.
    #[arg(long, default_value = "gaussian")]
    pub family: String,
    /// σ for gaussian, the dyadic scale N for annular and packet, the centre for bump.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Packet width at N = 1; the width at scale N is width0·N^(1−a/2).
    #[arg(long, default_value_t = 0.24)]
    pub width0: f64,
    /// Half-width of the bump.
    #[arg(long, default_value_t = 0.5)]
    pub width: f64,
}

impl ProfileArgs {
    fn profile(&self, a: f64) -> Result<RadialProfile, CliError> {
        let p = match self.family.as_str() {
            "bump" => RadialProfile::smooth_bump(self.scale, self.width)?,
            "packet" => Family::Packet { width0: self.width0 }.profile(self.scale, a)?,
            other => other.parse::<Family>()?.profile(self.scale, a)?,
        };
        Ok(p)
    }
}

fn params(a: f64, n: usize, s: f64) -> Result<SymbolParams, CliError> {
    Ok(SymbolParams::new(a, n, s)?)
}

#[derive(Debug, Args, Serialize, Clone)]
#[serde(rename_all = "kebab-case")]
pub struct EvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long)]
    pub r: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

fn value_row(r: f64, t: f64, v: Complex64) -> Vec<String> {
    vec![e(r), e(t), e(v.re), e(v.im), e(v.norm())]
}

pub fn eval(args: &EvalArgs) -> Result<Outcome, CliError> {
    let g = args.profile.profile(args.a)?;
    let p = params(args.a, args.n, 0.0)?;
    let v = evaluate_sa(&g, &p, EvalPoint::new(args.r, args.t)?)?;
    Ok(Outcome {
        csv: table("r,t,re,im,abs", [value_row(args.r, args.t, v)]),
        results: json!({ "re": v.re, "im": v.im, "abs": v.norm() }),
        converged: true,
    })
}

#[derive(Debug, Args, Serialize, Clone)]
#[serde(rename_all = "kebab-case")]
pub struct EvalGridArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Largest radius; radii are equally spaced from 0.
    #[arg(long, default_value_t = 4.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 33)]
    pub r_count: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
    pub t_list: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn eval_grid(args: &EvalGridArgs) -> Result<Outcome, CliError> {
    if args.r_count < 2 {
        return Err(CliError::Usage("--r-count must be at least 2".into()));
    }
    let g = args.profile.profile(args.a)?;
    let p = params(args.a, args.n, 0.0)?;
    let radii: Vec<f64> = (0..args.r_count).map(|i| args.r_max * i as f64 / (args.r_count - 1) as f64).collect();
    let rows: Result<Vec<Vec<Vec<String>>>, CliError> = radii
        .par_iter()
        .map(|&r| {
            args.t_list
                .iter()
                .map(|&t| Ok(value_row(r, t, evaluate_sa(&g, &p, EvalPoint::new(r, t)?)?)))
                .collect()
        })
        .collect();
    let rows = rows?;
    Ok(Outcome {
        csv: table("r,t,re,im,abs", rows.into_iter().flatten()),
        results: json!({ "points": radii.len() * args.t_list.len() }),
        converged: true,
    })
}

#[derive(Debug, Args, Serialize, Clone)]
#[serde(rename_all = "kebab-case")]
pub struct TransformArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
    /// Only shapes the packet width.
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2,4")]
    pub rho_list: Vec<f64>,
    /// Also evaluate the Cartesian oracle (n = 2 or 3).
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn transform(args: &TransformArgs) -> Result<Outcome, CliError> {
    let g = args.profile.profile(args.a)?;
    let rows: Result<Vec<(f64, f64, Option<f64>)>, CliError> = args
        .rho_list
        .par_iter()
        .map(|&rho| {
            let h = hankel_fourier(&g, args.n, rho)?;
            let o = if args.oracle { Some(nd_oracle(&g, args.n, rho)?) } else { None };
            Ok((rho, h, o))
        })
        .collect();
    let rows = rows?;
    let mut worst = 0.0f64;
    let header = if args.oracle { "rho,hankel,oracle,rel_err" } else { "rho,hankel" };
    let csv = table(
        header,
        rows.iter().map(|&(rho, h, o)| {
            let mut row = vec![e(rho), e(h)];
            if let Some(o) = o {
                let rel = (h - o).abs() / o.abs().max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
                row.extend([e(o), e(rel)]);
            }
            row
        }),
    );
    let results = if args.oracle { json!({ "max_rel_err": worst }) } else { json!({}) };
    Ok(Outcome { csv, results, converged: true })
}

#[derive(Debug, Args, Serialize, Clone)]
#[serde(rename_all = "kebab-case")]
pub struct OracleCompareArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
    #[arg(long)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,1,2")]
    pub r_list: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn oracle_compare(args: &OracleCompareArgs) -> Result<Outcome, CliError> {
    let g = args.profile.profile(args.a)?;
    let p = params(args.a, 2, 0.0)?;
    let rows: Result<Vec<(f64, Complex64, Complex64)>, CliError> = args
        .r_list
        .par_iter()
        .map(|&r| Ok((r, evaluate_sa(&g, &p, EvalPoint::new(r, args.t)?)?, evaluate_sa_oracle(&g, &p, [r, 0.0], args.t)?)))
        .collect();
    let rows = rows?;
    let worst = rows.iter().map(|(_, v, o)| (v - o).norm()).fold(0.0, f64::max);
    let csv = table(
        "r,t,radial_re,radial_im,oracle_re,oracle_im,abs_err",
        rows.iter().map(|&(r, v, o)| vec![e(r), e(args.t), e(v.re), e(v.im), e(o.re), e(o.im), e((v - o).norm())]),
    );
    Ok(Outcome { csv, results: json!({ "max_abs_err": worst }), converged: true })
}

#[derive(Debug, Args, Serialize, Clone)]
#[serde(rename_all = "kebab-case")]
pub struct SweepArgs {
    /// packet, annular or gaussian.
    #[arg(long, default_value = "packet")]
    pub family: String,
    /// Packet width at N = 1.
    #[arg(long, default_value_t = 0.24)]
    pub width0: f64,
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub s_list: Vec<f64>,
    #[arg(long = "N-list", value_name = "N", value_delimiter = ',', required = true)]
    #[serde(rename = "N-list")]
    pub scales: Vec<f64>,
    /// local or global.
    #[arg(long, default_value = "global")]
    pub range: String,
    /// Average local norms over 2m+1 modulations e^{iyρ}, |y| < 1, and fit that average.
    #[arg(long)]
    pub modulation: Option<usize>,
    /// Relative change accepted by time and radial refinement.
    #[arg(long, default_value_t = 5e-3)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1 << 14)]
    pub max_time_points: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

impl SweepArgs {
    pub fn spec(&self) -> Result<SweepSpec, CliError> {
        let family = match self.family.as_str() {
            "packet" => Family::Packet { width0: self.width0 },
            other => other.parse()?,
        };
        Ok(SweepSpec {
            family,
            a: self.a,
            n: self.n,
            s_list: self.s_list.clone(),
            scales: self.scales.clone(),
            range: self.range.parse::<Range>()?,
            modulation: self.modulation.map(oscillax::maximal::modulation_grid),
            policy: FieldPolicy {
                tolerance: self.tolerance,
                max_time_points: self.max_time_points,
                ..FieldPolicy::default()
            },
        })
    }
}

pub fn sweep(args: &SweepArgs) -> Result<Outcome, CliError> {
    let spec = args.spec()?;
    let rows = run_sweep(&spec)?;
    let quantity = if spec.modulation.is_some() { "A" } else { "Q" };
    let exponents: Vec<Value> = sweep_exponents(&spec, &rows)
        .into_iter()
        .map(|(s, slope)| json!({ "s": s, "quantity": quantity, "slope": slope }))
        .collect();
    let converged = rows.iter().all(|r| r.converged);
    let csv = table(
        "family,N,s,range,range_norm,sobolev_norm,Q,A,converged",
        rows.iter().map(|r| {
            vec![
                r.family.clone(),
                e(r.scale),
                e(r.params.s),
                r.range.as_str().to_string(),
                e(r.range_norm),
                e(r.sobolev_norm),
                e(r.q),
                r.a_avg.map(e).unwrap_or_default(),
                r.converged.to_string(),
            ]
        }),
    );
    Ok(Outcome { csv, results: json!({ "rows": rows.len(), "exponents": exponents }), converged })
}

#[derive(Debug, Args, Serialize, Clone)]
#[serde(rename_all = "kebab-case")]
pub struct KernelArgs {
    #[arg(long)]
    pub m: f64,
    #[arg(long)]
    pub mu: f64,
    #[arg(long)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub s: f64,
    #[arg(long, default_value_t = 5e-3)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1 << 12)]
    pub max_time_points: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn kernel(args: &KernelArgs) -> Result<Outcome, CliError> {
    let p = params(args.a, 1, args.s)?;
    let policy = FieldPolicy { tolerance: args.tolerance, max_time_points: args.max_time_points, ..FieldPolicy::default() };
    let ks = kernel_k(args.m, args.mu, &p, &CutoffFamily, &policy)?;
    let csv = table("x,K", ks.x.iter().zip(&ks.k).map(|(&x, &k)| vec![e(x), e(k)]));
    Ok(Outcome {
        csv,
        results: json!({ "l1_estimate": ks.l1_estimate, "time_points": ks.time_points, "samples": ks.x.len() }),
        converged: ks.converged,
    })
}

#[derive(Debug, Args, Serialize, Clone)]
#[serde(rename_all = "kebab-case")]
pub struct SplitCheckArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub s: f64,
    /// Number of random (f, t(·)) pairs.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pieces of each random selector.
    #[arg(long, default_value_t = 6)]
    pub pieces: usize,
    /// Upper end of the support of the random profiles.
    #[arg(long, default_value_t = 4.0)]
    pub rho_max: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

/// Sum of three random smooth bumps inside `[1, rho_max]`.
pub fn random_profile(rng: &mut ChaCha8Rng, rho_max: f64) -> Result<RadialProfile, CliError> {
    let terms = (0..3)
        .map(|_| {
            let w = rng.gen_range(0.4..0.8);
            let c = rng.gen_range(1.0 + w..(rho_max - w).max(1.0 + w + 1e-9));
            Ok((rng.gen_range(-1.0..1.0), RadialProfile::smooth_bump(c, w)?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(RadialProfile::combination(terms)?)
}

struct SplitSample {
    recompose: f64,
    split: f64,
    ratio: f64,
}

pub fn split_check(args: &SplitCheckArgs) -> Result<Outcome, CliError> {
    if args.rho_max < 2.0 {
        return Err(CliError::Usage("--rho-max must be at least 2".into()));
    }
    let p = params(args.a, args.n, args.s)?;
    let order = BesselOrder::for_dimension(args.n)?;
    let cert = certify_asymptotic(order, DyadicRange::new(2.0, 4096.0)?)?;
    let bound = remainder_constant(&p, &CutoffFamily, &cert)?;
    let choices = TimeGrid::uniform(6, 1.0).points().to_vec();
    let recompose_radii = oscillax::maximal::RadialGrid::new(3.0, 0.5)?;
    let recompose_times = TimeGrid::uniform(3, 1.0);

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut samples = Vec::with_capacity(args.samples);
    for _ in 0..args.samples {
        let f = random_profile(&mut rng, args.rho_max)?;
        let grid = split_grid(&f, &p)?;
        let sel = TimeSelector::piecewise_random(grid.clone(), args.pieces, &choices, &mut rng)?;
        let full = apply_rt_radial(&f, &sel, &p, RadialPiece::Full)?;
        let one = apply_rt_split(&f, &sel, &p, 1)?;
        let two = apply_rt_split(&f, &sel, &p, 2)?;
        let split = full.iter().zip(&one).zip(&two).map(|((a, b), c)| (a - b - c).norm()).fold(0.0, f64::max);
        samples.push(SplitSample {
            recompose: recompose_check(&f, &p, &recompose_radii, &recompose_times)?,
            split,
            ratio: half_line_norm(&two, &grid) / profile_half_line_norm(&f),
        });
    }
    let max = |f: fn(&SplitSample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    let max_ratio = max(|s| s.ratio);
    let csv = table(
        "sample,recompose_residual,split_residual,remainder_ratio,bound",
        samples.iter().enumerate().map(|(i, s)| vec![i.to_string(), e(s.recompose), e(s.split), e(s.ratio), e(bound)]),
    );
    Ok(Outcome {
        csv,
        results: json!({
            "remainder_constant": bound,
            "c_lambda_empirical": cert.c_lambda_empirical,
            "max_recompose_residual": max(|s| s.recompose),
            "max_split_residual": max(|s| s.split),
            "max_remainder_ratio": max_ratio,
            "bound_holds": max_ratio <= bound,
        }),
        converged: true,
    })
}

#[derive(Debug, Args, Serialize, Clone)]
#[serde(rename_all = "kebab-case")]
pub struct BesselCheckArgs {
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 2.0)]
    pub rho_min: f64,
    #[arg(long, default_value_t = 4096.0)]
    pub rho_max: f64,
    /// Log-spaced table rows per octave.
    #[arg(long, default_value_t = 16)]
    pub per_octave: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn bessel_check(args: &BesselCheckArgs) -> Result<Outcome, CliError> {
    let order = BesselOrder::new(args.lambda)?;
    let range = DyadicRange::new(args.rho_min, args.rho_max)?;
    let cert = certify_asymptotic(order, range)?;
    let octaves = (args.rho_max / args.rho_min).log2();
    let count = (octaves * args.per_octave.max(1) as f64).ceil() as usize;
    let csv = table(
        "rho,j,main_term,scaled_remainder",
        (0..=count).map(|i| {
            let rho = args.rho_min * (args.rho_max / args.rho_min).powf(i as f64 / count as f64);
            vec![e(rho), e(order.j(rho)), e(order.main_term(rho)), e(scaled_remainder(&order, rho))]
        }),
    );
    Ok(Outcome {
        csv,
        results: json!({
            "c_lambda_empirical": cert.c_lambda_empirical,
            "octave_sups": cert.octave_sups,
            "octaves_non_increasing": cert.octaves_non_increasing(0.0),
            "max_relative_increase": cert.max_relative_increase(),
        }),
        converged: true,
    })
}
