//! Output records and their canonical JSON/CSV renderings.
//!
//! All renderings are built deterministically: floats print in shortest
//! round-trip form, field order is fixed, and nothing depends on thread
//! scheduling, so byte-identical reruns are guaranteed.

use blotto_core::{DeltaBound, ExploitabilityReport, GammaSolution, Player, ValidatedGame};
use serde::Serialize;

/// One root of the incentive-balance equation, reported in the caller's
/// player labels: when the game was relabeled internally (caller's A held
/// the larger budget), the multipliers are swapped back and gamma inverts
/// accordingly, so `gamma = lambda_a / lambda_b` and
/// `omega_a = {i : caller A strong}` hold in the caller's frame.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionRecord {
    pub gamma: f64,
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub omega_a: Vec<usize>,
    pub residual: f64,
    pub relabeled: bool,
}

impl SolutionRecord {
    pub fn in_caller_labels(game: &ValidatedGame, sol: &GammaSolution) -> SolutionRecord {
        if !game.swapped() {
            return SolutionRecord {
                gamma: sol.gamma,
                lambda_a: sol.lambda_a,
                lambda_b: sol.lambda_b,
                omega_a: sol.omega_a.clone(),
                residual: sol.residual,
                relabeled: false,
            };
        }
        let gamma = sol.lambda_b / sol.lambda_a;
        let va = game.norm_high(); // caller A is the internal high side
        let vb = game.norm_low();
        let omega_a = (0..game.n()).filter(|&i| va[i] / vb[i] > gamma).collect();
        SolutionRecord {
            gamma,
            lambda_a: sol.lambda_b,
            lambda_b: sol.lambda_a,
            omega_a,
            residual: sol.residual,
            relabeled: true,
        }
    }

    pub fn csv_header() -> &'static str {
        "gamma,lambda_a,lambda_b,omega_a,residual,relabeled"
    }

    pub fn csv_row(&self) -> String {
        let omega = self
            .omega_a
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "{},{},{},{},{},{}",
            self.gamma, self.lambda_a, self.lambda_b, omega, self.residual, self.relabeled
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExploitRecord {
    pub player: &'static str,
    pub iu_value: f64,
    pub br_value: f64,
    pub epsilon_hat: f64,
    pub ci_halfwidth: f64,
    pub m_samples: usize,
    pub grid_points: usize,
    pub seed: u64,
}

impl ExploitRecord {
    pub fn from_report(r: &ExploitabilityReport) -> ExploitRecord {
        ExploitRecord {
            player: match r.player {
                Player::A => "A",
                Player::B => "B",
            },
            iu_value: r.iu_value,
            br_value: r.br_value,
            epsilon_hat: r.epsilon_hat,
            ci_halfwidth: r.ci_halfwidth,
            m_samples: r.m_samples,
            grid_points: r.grid_points,
            seed: r.seed,
        }
    }

    pub fn csv_header() -> &'static str {
        "player,iu_value,br_value,epsilon_hat,ci_halfwidth,m_samples,grid_points,seed"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.player,
            self.iu_value,
            self.br_value,
            self.epsilon_hat,
            self.ci_halfwidth,
            self.m_samples,
            self.grid_points,
            self.seed
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaRecord {
    pub delta: f64,
    pub method: String,
    pub argmax_y: Option<f64>,
    pub argmax_battlefield: Option<usize>,
    pub eps: f64,
}

impl DeltaRecord {
    pub fn from_bound(b: &DeltaBound) -> DeltaRecord {
        DeltaRecord {
            delta: b.delta,
            method: format!("{:?}", b.method),
            argmax_y: b.argmax_y,
            argmax_battlefield: b.argmax_battlefield,
            eps: b.epsilon,
        }
    }

    pub fn csv_header() -> &'static str {
        "delta,method,argmax_y,argmax_battlefield,eps"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.delta,
            self.method,
            opt_cell(self.argmax_y),
            self.argmax_battlefield
                .map(|i| i.to_string())
                .unwrap_or_default(),
            self.eps
        )
    }
}

/// One sweep measurement. The `ms` column is part of the stable schema but
/// is pinned to zero in canonical output so files are byte-reproducible;
/// measured timings are reported on stderr and in the interim `.partial`
/// file.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub axis: String,
    pub value: f64,
    pub seed: u64,
    pub eps_a: Option<f64>,
    pub eps_b: Option<f64>,
    pub ci_a: Option<f64>,
    pub ci_b: Option<f64>,
    pub delta: Option<f64>,
    pub ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl SweepRecord {
    pub fn csv_header() -> &'static str {
        "axis,value,seed,eps_a,eps_b,ci_a,ci_b,delta,ms"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.axis,
            self.value,
            self.seed,
            opt_cell(self.eps_a),
            opt_cell(self.eps_b),
            opt_cell(self.ci_a),
            opt_cell(self.ci_b),
            opt_cell(self.delta),
            self.ms
        )
    }
}

pub fn to_json_line<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("records serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use blotto_core::{GameSpec, solve_gamma};

    #[test]
    fn caller_labels_invert_gamma_for_swapped_games() {
        // caller's A holds the larger budget; internal orientation swaps
        let game = GameSpec::constant_sum(2.0, 1.0, vec![1.0; 4], 0.5)
            .validate()
            .unwrap();
        assert!(game.swapped());
        let sol = solve_gamma(&game).unwrap().remove(0);
        let rec = SolutionRecord::in_caller_labels(&game, &sol);
        assert!(rec.relabeled);
        assert!((rec.gamma - 0.5).abs() < 1e-12);
        assert!((rec.gamma - rec.lambda_a / rec.lambda_b).abs() < 1e-12);
        // caller A is the strong (richer) player on every battlefield: the
        // strict ratio test 1 > 0.5 holds everywhere
        assert_eq!(rec.omega_a.len(), 4);
    }

    #[test]
    fn sweep_csv_row_matches_schema() {
        let r = SweepRecord {
            axis: "n".to_string(),
            value: 10.0,
            seed: 3,
            eps_a: Some(0.5),
            eps_b: None,
            ci_a: Some(0.01),
            ci_b: None,
            delta: None,
            ms: 0,
            error: Some("boom".to_string()),
        };
        assert_eq!(r.csv_row(), "n,10,3,0.5,,0.01,,,0");
        assert_eq!(SweepRecord::csv_header().split(',').count(), 9);
    }
}
