//! Dephasing spin-boson model: exact, second-order and coarse-grained
//! 2×2 dynamics for each Ohmicity, with Bloch components and trace-norm
//! errors per trajectory point.

use rayon::prelude::*;

use tred_core::linalg::CMatrix;
use tred_core::models::{pauli, SpinBosonModel, SpinBosonParams, SpinBosonRhs};
use tred_core::propagation::integrate_time_dependent;
use tred_core::superop::{bloch_coordinates, trace_norm_hermitian, unvec, vec_mat};

use super::RunOutputs;
use crate::config::ExperimentConfig;
use crate::output::{fmt_f64, write_csv};
use crate::RunError;

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutputs, RunError> {
    let section = cfg.params.spin_boson.clone().unwrap_or_default();
    if section.ohmicities.is_empty() {
        return Err(RunError::Config(
            "spin-boson: ohmicities must not be empty".into(),
        ));
    }
    let files: Vec<String> = section
        .ohmicities
        .par_iter()
        .map(|&s| -> Result<String, RunError> {
            let params = SpinBosonParams {
                qubit_splitting: section.qubit_splitting,
                cutoff_frequency: section.cutoff_frequency,
                spectral_amplitude: section.spectral_amplitude,
                ohmicity: s,
                inverse_temperature: section.inverse_temperature,
                n_modes: section.n_modes,
                coarse_grain_time: section.coarse_grain_time,
            };
            let rhs = SpinBosonRhs::new(&params)?;
            let rho0 = vec_mat(&pauli::plus_projector());
            let trajectories: Vec<Vec<CMatrix>> = [
                SpinBosonModel::Exact,
                SpinBosonModel::SecondOrder,
                SpinBosonModel::CoarseGrained,
            ]
            .iter()
            .map(|&model| {
                integrate_time_dependent(&|t| rhs.superop_at(model, t), &rho0, cfg.t_max, cfg.steps)
                    .map(|traj| traj.states().to_vec())
            })
            .collect::<tred_core::Result<_>>()?;

            let header: Vec<String> = [
                "t",
                "sx_exact",
                "sy_exact",
                "sz_exact",
                "sx_second",
                "sy_second",
                "sz_second",
                "sx_cg",
                "sy_cg",
                "sz_cg",
                "err_second",
                "err_cg",
            ]
            .iter()
            .map(|h| h.to_string())
            .collect();
            let dt = cfg.t_max / cfg.steps as f64;
            let mut rows = Vec::with_capacity(cfg.steps + 1);
            for i in 0..=cfg.steps {
                let states: Vec<CMatrix> = trajectories
                    .iter()
                    .map(|traj| unvec(&traj[i].column(0).into_owned(), 2))
                    .collect::<tred_core::Result<_>>()?;
                let mut row = vec![fmt_f64(i as f64 * dt)];
                for rho in &states {
                    let (sx, sy, sz) = bloch_coordinates(rho);
                    row.push(fmt_f64(sx));
                    row.push(fmt_f64(sy));
                    row.push(fmt_f64(sz));
                }
                for approx in &states[1..] {
                    let err = trace_norm_hermitian(&(&states[0] - approx))?;
                    row.push(fmt_f64(err));
                }
                rows.push(row);
            }
            let name = format!("spin_boson_s{}.csv", fmt_f64(s));
            write_csv(&cfg.output_dir.join(&name), &header, &rows)?;
            Ok(name)
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(RunOutputs {
        files,
        breakdowns: Vec::new(),
        warnings: Vec::new(),
    })
}
