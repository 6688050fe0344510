//! Generic reduction of a user-supplied model: reads `(L, R, J)` from a
//! JSON file, emits the generator and propagator coefficients, and samples
//! the exact time-local generator where feasible.

use serde::Deserialize;

use tred_core::linalg::{c, CMatrix};
use tred_core::propagation::build_e_terms;
use tred_core::reduction::{build_f_terms, exact_tcl_oracle, ProjectorFactorization};
use tred_core::Error as CoreError;

use super::RunOutputs;
use crate::config::ExperimentConfig;
use crate::output::{fmt_f64, write_csv};
use crate::RunError;

/// Largest full dimension for which the exact time-local generator is
/// sampled (each sample costs two dense exponentials per quadrature node).
const ORACLE_DIM_LIMIT: usize = 32;
const ORACLE_SAMPLES: usize = 32;

/// Model-interchange format: row-major matrices of `[re, im]` pairs.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    n: usize,
    m: usize,
    #[serde(rename = "L")]
    l: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "R")]
    r: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "J")]
    j: Vec<Vec<[f64; 2]>>,
}

fn parse_matrix(
    rows: &[Vec<[f64; 2]>],
    nrows: usize,
    ncols: usize,
    name: &str,
) -> Result<CMatrix, RunError> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(RunError::Config(format!(
            "model field {name}: expected {nrows}x{ncols} entries"
        )));
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| {
        c(rows[i][j][0], rows[i][j][1])
    }))
}

/// CSV with one row per coefficient index and flattened row-major
/// real/imaginary columns.
fn coefficient_rows(terms: &[(usize, &CMatrix)], m: usize) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec!["k".to_string()];
    for i in 0..m {
        for j in 0..m {
            header.push(format!("re_{i}_{j}"));
            header.push(format!("im_{i}_{j}"));
        }
    }
    let rows = terms
        .iter()
        .map(|(k, mat)| {
            let mut row = vec![k.to_string()];
            for i in 0..m {
                for j in 0..m {
                    row.push(fmt_f64(mat[(i, j)].re));
                    row.push(fmt_f64(mat[(i, j)].im));
                }
            }
            row
        })
        .collect();
    (header, rows)
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutputs, RunError> {
    let section = cfg.params.reduce.clone().unwrap_or_default();
    let model_path = section
        .model
        .ok_or_else(|| RunError::Config("reduce: a model file is required (--model)".into()))?;
    let text = std::fs::read_to_string(&model_path).map_err(|e| {
        RunError::Config(format!("cannot read model {}: {e}", model_path.display()))
    })?;
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|e| RunError::Config(format!("model {}: {e}", model_path.display())))?;
    let l = parse_matrix(&file.l, file.n, file.n, "L")?;
    let r = parse_matrix(&file.r, file.m, file.n, "R")?;
    let j = parse_matrix(&file.j, file.n, file.m, "J")?;
    let proj = ProjectorFactorization::new(r, j).map_err(|e| RunError::Config(e.to_string()))?;

    let order = cfg
        .orders
        .iter()
        .copied()
        .max()
        .expect("validated nonempty");
    let gen = build_f_terms(&l, &proj, order)?;
    let m = proj.reduced_dim();

    let f_terms: Vec<(usize, &CMatrix)> = (1..=order + 1).map(|k| (k, gen.coeff(k))).collect();
    let (header, rows) = coefficient_rows(&f_terms, m);
    write_csv(&cfg.output_dir.join("f_terms.csv"), &header, &rows)?;

    let series = build_e_terms(&gen, cfg.series_terms)?;
    let e_terms: Vec<(usize, &CMatrix)> = series
        .terms()
        .iter()
        .enumerate()
        .collect();
    let (header, rows) = coefficient_rows(&e_terms, m);
    write_csv(&cfg.output_dir.join("e_terms.csv"), &header, &rows)?;

    let mut files = vec!["f_terms.csv".to_string(), "e_terms.csv".to_string()];
    let mut breakdowns = Vec::new();

    // Exact time-local generator samples for small models; breakdown of
    // M_t ends the scan but keeps everything collected so far.
    if proj.full_dim() <= ORACLE_DIM_LIMIT {
        let mut header = vec!["t".to_string()];
        for i in 0..m {
            for jj in 0..m {
                header.push(format!("re_{i}_{jj}"));
                header.push(format!("im_{i}_{jj}"));
            }
        }
        let mut rows = Vec::new();
        for idx in 1..=ORACLE_SAMPLES {
            let t = cfg.t_max * idx as f64 / ORACLE_SAMPLES as f64;
            let panels = (4.0 + 8.0 * t).ceil() as usize;
            match exact_tcl_oracle(&l, &proj, t, panels) {
                Ok(f_t) => {
                    let mut row = vec![fmt_f64(t)];
                    for i in 0..m {
                        for jj in 0..m {
                            row.push(fmt_f64(f_t[(i, jj)].re));
                            row.push(fmt_f64(f_t[(i, jj)].im));
                        }
                    }
                    rows.push(row);
                }
                Err(CoreError::SingularResolvent { t, condition }) => {
                    breakdowns.push(format!(
                        "time-local generator breakdown: M_t singular at t = {t} \
                         (1-norm condition {condition:.3e}); later samples skipped"
                    ));
                    break;
                }
                Err(e) => return Err(e.into()),
            }
        }
        write_csv(&cfg.output_dir.join("tcl_oracle.csv"), &header, &rows)?;
        files.push("tcl_oracle.csv".to_string());
    }

    Ok(RunOutputs {
        files,
        breakdowns,
        warnings: Vec::new(),
    })
}
