use bevbox::bnn::{train_tiny_regressor, DropoutPlacement, DropoutSpec, RegressorSpec};

use super::{fmt, parse_xy_csv, read_text, write_file};
use crate::config::ConfigMap;
use crate::errors::{CliError, CliResult};
use crate::TrainArgs;

pub fn run(args: &TrainArgs) -> CliResult<()> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let epochs = cfg.resolve(args.epochs, "epochs", 1500usize)?;
    let lr = cfg.resolve(args.lr, "lr", 0.01f64)?;
    let hidden_text = cfg.resolve(args.hidden.clone(), "hidden", "32,32".to_string())?;
    let hidden: Vec<usize> = hidden_text
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad hidden width '{t}'")))
        })
        .collect::<CliResult<_>>()?;
    let p_drop = cfg.resolve(args.p_drop, "p-drop", 0.2f64)?;
    let placement_text =
        cfg.resolve(args.placement.clone(), "placement", "head-only".to_string())?;
    let placement = DropoutPlacement::parse(&placement_text)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let seed = cfg.resolve(args.seed, "seed", 0u64)?;

    let data = parse_xy_csv(&read_text(&args.data)?, &args.data)?;
    if data.is_empty() {
        return Err(CliError::Input(format!(
            "{} holds no training rows",
            args.data.display()
        )));
    }

    let spec = RegressorSpec {
        hidden,
        dropout: DropoutSpec { p_drop, placement },
        heteroscedastic: true,
        init_seed: seed,
    };
    let result = train_tiny_regressor(&data, &spec, epochs, lr, seed)?;

    write_file(&args.out, result.model.to_text().as_bytes())?;
    if let Some(log_path) = &args.log {
        let mut csv = String::from("epoch,loss,data_term,decay_term\n");
        for row in &result.log {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                row.epoch,
                fmt(row.loss),
                fmt(row.data_term),
                fmt(row.decay_term)
            ));
        }
        write_file(log_path, csv.as_bytes())?;
    }
    let final_loss = result.log.last().map_or(f64::NAN, |r| r.loss);
    eprintln!(
        "trained {} epochs on {} samples, final loss {final_loss:.6}",
        result.log.len(),
        data.len()
    );
    Ok(())
}
