//! Ten-dimensional hierarchical model: eight group means plus
//! hyperparameters for their common mean and log-variance.
//!
//! Coordinates are `(theta_1..theta_8, mu, lambda)` with `lambda` the log of
//! the group-level variance. The posterior combines a Gaussian likelihood
//! for each observed group effect, a Gaussian prior `theta_j ~ N(mu, e^lambda)`
//! including its `-lambda/2`-per-group normalizing term, and a prior flat in
//! `(mu, group standard deviation)`, which contributes `+lambda/2` in the
//! log-variance parameterization. A prior flat in `lambda` itself would make
//! the posterior improper.
//!
//! The observed effects and their standard errors load from a CSV data file
//! with header `school,y,sigma`; a copy ships with the crate.

use std::path::Path;

use super::TargetDistribution;

const BUNDLED: &str = include_str!("../../data/eight_schools.csv");
const GROUPS: usize = 8;

#[derive(Debug, Clone)]
pub struct EightSchools {
    y: [f64; GROUPS],
    sigma2: [f64; GROUPS],
    initial: Vec<f64>,
}

fn parse_csv(text: &str) -> Result<EightSchools, String> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or("empty eight-schools data file")?;
    if header.trim_end() != "school,y,sigma" {
        return Err(format!("bad header {header:?}, expected school,y,sigma"));
    }
    let mut y = [0.0; GROUPS];
    let mut sigma2 = [0.0; GROUPS];
    let mut row = 0usize;
    for (idx, line) in lines {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if row >= GROUPS {
            return Err(format!("line {}: expected exactly {GROUPS} rows", idx + 1));
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(format!("line {}: expected 3 fields", idx + 1));
        }
        let yv: f64 = fields[1]
            .parse()
            .map_err(|_| format!("line {}: bad y value {:?}", idx + 1, fields[1]))?;
        let sv: f64 = fields[2]
            .parse()
            .map_err(|_| format!("line {}: bad sigma value {:?}", idx + 1, fields[2]))?;
        if !(sv > 0.0) {
            return Err(format!("line {}: sigma must be positive", idx + 1));
        }
        y[row] = yv;
        sigma2[row] = sv * sv;
        row += 1;
    }
    if row != GROUPS {
        return Err(format!("expected {GROUPS} rows, found {row}"));
    }

    let mean_y = y.iter().sum::<f64>() / GROUPS as f64;
    let var_y = y.iter().map(|v| (v - mean_y) * (v - mean_y)).sum::<f64>() / GROUPS as f64;
    let mut initial = y.to_vec();
    initial.push(mean_y);
    initial.push(var_y.ln());
    Ok(EightSchools { y, sigma2, initial })
}

/// The bundled data set.
pub fn eight_schools() -> EightSchools {
    parse_csv(BUNDLED).expect("bundled eight-schools data is valid")
}

/// Same model with group effects read from an external CSV file.
pub fn eight_schools_from_path(path: &Path) -> Result<EightSchools, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_csv(&text)
}

impl TargetDistribution for EightSchools {
    fn name(&self) -> &str {
        "eight_schools"
    }

    fn dim(&self) -> usize {
        GROUPS + 2
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let (theta, rest) = x.split_at(GROUPS);
        let mu = rest[0];
        let lambda = rest[1];
        let inv_ev = (-lambda).exp();
        let mut lp = -3.5 * lambda; // -(GROUPS/2) lambda from the prior normalizers, +lambda/2 Jacobian
        for j in 0..GROUPS {
            let r_obs = self.y[j] - theta[j];
            lp -= r_obs * r_obs / (2.0 * self.sigma2[j]);
            let r_grp = theta[j] - mu;
            lp -= 0.5 * r_grp * r_grp * inv_ev;
        }
        if lp.is_nan() {
            f64::NEG_INFINITY
        } else {
            lp
        }
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> bool {
        let (theta, rest) = x.split_at(GROUPS);
        let mu = rest[0];
        let lambda = rest[1];
        let inv_ev = (-lambda).exp();
        let mut d_mu = 0.0;
        let mut sq = 0.0;
        for j in 0..GROUPS {
            let r_grp = theta[j] - mu;
            out[j] = (self.y[j] - theta[j]) / self.sigma2[j] - r_grp * inv_ev;
            d_mu += r_grp * inv_ev;
            sq += r_grp * r_grp;
        }
        out[GROUPS] = d_mu;
        out[GROUPS + 1] = 0.5 * sq * inv_ev - 3.5;
        true
    }

    fn default_initial_point(&self) -> Vec<f64> {
        self.initial.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::super::gradcheck::assert_gradient_matches;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn log_density_finite_at_data_point() {
        let t = eight_schools();
        let mut x = t.y.to_vec();
        x.push(t.y.iter().sum::<f64>() / 8.0);
        x.push(0.0);
        assert!(t.log_density(&x).is_finite());
        assert!(t.log_density(&t.default_initial_point()).is_finite());
    }

    #[test]
    fn gradient_matches_finite_differences_at_origin() {
        let t = eight_schools();
        assert_gradient_matches(&t, &vec![0.0; 10], 1e-5);
    }

    #[test]
    fn gradient_matches_finite_differences_at_random_points() {
        let t = eight_schools();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let mut x: Vec<f64> = (0..10).map(|_| 20.0 * rng.random::<f64>() - 10.0).collect();
            x[9] = 4.0 * rng.random::<f64>(); // keep group variance in a sane band
            assert_gradient_matches(&t, &x, 1e-5);
        }
    }

    #[test]
    fn group_prior_pull_vanishes_as_variance_grows() {
        // d logp / d theta_j at theta_j = y_j is the prior term alone; it
        // goes to zero as e^lambda grows
        let t = eight_schools();
        let mut x = t.default_initial_point();
        x[9] = 40.0;
        let mut grad = vec![0.0; 10];
        t.gradient(&x, &mut grad);
        for g in &grad[..8] {
            assert!(g.abs() < 1e-10, "prior pull {g} did not vanish");
        }
    }

    #[test]
    fn bundled_and_file_constructions_agree() {
        let a = eight_schools();
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/eight_schools.csv");
        let b = eight_schools_from_path(&path).unwrap();
        assert_eq!(a.y, b.y);
        assert_eq!(a.sigma2, b.sigma2);
    }

    #[test]
    fn malformed_data_is_rejected() {
        assert!(parse_csv("school,y\n1,2\n").is_err());
        assert!(parse_csv("school,y,sigma\n1,2,0\n").is_err());
        assert!(parse_csv("school,y,sigma\n1,abc,3\n").unwrap_err().contains("line 2"));
        let short = "school,y,sigma\n1,28,15\n";
        assert!(parse_csv(short).unwrap_err().contains("8 rows"));
    }
}
