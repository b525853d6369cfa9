use bevbox::bnn::TinyRegressor;

use super::{fmt, parse_xy_csv, read_text, write_file};
use crate::config::ConfigMap;
use crate::errors::{CliError, CliResult};
use crate::CalibrateArgs;

/// Forward-pass convergence study: for each probe input, run `t_max`
/// dropout-active passes and track the running epistemic std-dev and the
/// running predictive variance after every pass. The emitted curve is the
/// mean over probes; it flattens once enough passes are aggregated.
pub fn run(args: &CalibrateArgs) -> CliResult<()> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let t_max = cfg.resolve(args.t_max, "t-max", 50usize)?;
    let t_default = cfg.resolve(args.t, "t", bevbox::DEFAULT_FORWARD_PASSES)?;
    let seed = cfg.resolve(args.seed, "seed", 0u64)?;
    if t_max == 0 {
        return Err(CliError::Usage("t-max must be at least 1".into()));
    }

    let model = TinyRegressor::from_text(&read_text(&args.model)?)?;
    let data = parse_xy_csv(&read_text(&args.data)?, &args.data)?;
    if data.is_empty() {
        return Err(CliError::Input(format!(
            "{} holds no probe rows",
            args.data.display()
        )));
    }
    let probes: Vec<f64> = data.iter().map(|&(x, _)| x).take(100).collect();

    // running sums per probe; curves averaged over probes per pass count
    let mut epistemic_curve = vec![0.0f64; t_max];
    let mut predictive_curve = vec![0.0f64; t_max];
    let mut aleatoric_curve = vec![0.0f64; t_max];
    for (pi, &x) in probes.iter().enumerate() {
        let probe_seed = seed.wrapping_add((pi as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut sum_y = 0.0;
        let mut sum_y_sq = 0.0;
        let mut sum_var = 0.0;
        for pass in 0..t_max {
            let (mean, log_var) = model.forward(x, Some((probe_seed, pass as u64)));
            let aleatoric = if model.heteroscedastic {
                log_var.exp()
            } else {
                0.0
            };
            sum_y += mean;
            sum_y_sq += mean * mean;
            sum_var += aleatoric;
            let t = (pass + 1) as f64;
            let e = sum_y / t;
            let epistemic = (sum_y_sq / t - e * e).max(0.0);
            let mean_aleatoric = sum_var / t;
            epistemic_curve[pass] += epistemic.sqrt() / probes.len() as f64;
            predictive_curve[pass] += (epistemic + mean_aleatoric) / probes.len() as f64;
            aleatoric_curve[pass] += mean_aleatoric / probes.len() as f64;
        }
    }

    let mut csv = String::from("t,mean_epistemic_std,mean_predictive_variance,mean_aleatoric_variance\n");
    for pass in 0..t_max {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            pass + 1,
            fmt(epistemic_curve[pass]),
            fmt(predictive_curve[pass]),
            fmt(aleatoric_curve[pass]),
        ));
    }
    write_file(&args.out, csv.as_bytes())?;

    let report_at = t_default.min(t_max);
    eprintln!(
        "swept T=1..{t_max} over {} probes; at the default T={report_at}: epistemic std {:.6}, predictive variance {:.6}",
        probes.len(),
        epistemic_curve[report_at - 1],
        predictive_curve[report_at - 1],
    );
    Ok(())
}
