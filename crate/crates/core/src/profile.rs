//! Temporal envelopes ξ(t) of the incoming single-photon wavepacket.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use crate::quad::{integrate_real, QuadOptions};
use crate::{Error, PhysParams, Result, C64};

/// Piecewise-linear complex samples; zero outside `[times[0], times[last]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    times: Vec<f64>,
    values: Vec<C64>,
}

impl SampledProfile {
    pub fn new(times: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Profile(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::Profile(
                "sampled profile needs at least two points".into(),
            ));
        }
        if times.iter().any(|t| !t.is_finite())
            || values
                .iter()
                .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::Profile(
                "sampled profile contains non-finite entries".into(),
            ));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Profile(format!(
                "sample times must be strictly ascending ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(SampledProfile { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn min_spacing(&self) -> f64 {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    fn first(&self) -> f64 {
        self.times[0]
    }

    fn last(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    // Linear interpolation; caller guarantees first <= t <= last.
    fn lerp(&self, t: f64) -> C64 {
        let i = self.times.partition_point(|&x| x <= t);
        if i == 0 {
            return self.values[0];
        }
        if i >= self.times.len() {
            return self.values[self.times.len() - 1];
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = (t - t0) / (t1 - t0);
        self.values[i - 1] * (1.0 - w) + self.values[i] * w
    }

    /// Reads a `t,re[,im]` CSV file. A non-numeric first row is taken as a header.
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Profile(format!("{}: {e}", path.display())))?;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Profile(format!("{}: {e}", path.display())))?;
            if rec.len() < 2 || rec.len() > 3 {
                return Err(Error::Profile(format!(
                    "{}: row {} has {} columns, expected t,re[,im]",
                    path.display(),
                    row + 1,
                    rec.len()
                )));
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                rec.iter().map(str::parse::<f64>).collect();
            match parsed {
                Ok(nums) => {
                    times.push(nums[0]);
                    values.push(C64::new(nums[1], nums.get(2).copied().unwrap_or(0.0)));
                }
                Err(_) if row == 0 => continue,
                Err(e) => {
                    return Err(Error::Profile(format!(
                        "{}: row {}: {e}",
                        path.display(),
                        row + 1
                    )));
                }
            }
        }
        SampledProfile::new(times, values)
    }
}

/// The photon envelope ξ(t). Every variant vanishes for t < 0.
#[derive(Debug, Clone, PartialEq)]
pub enum PhotonProfile {
    Zero,
    /// √(αΓ)·e^{−αΓt/2} for t ≥ 0.
    Exponential {
        alpha: f64,
        gamma: f64,
    },
    /// √(Γ/(e^{ΓT}−1))·e^{Γτ/2} on [0, T], the pulse maximizing P_e(T).
    OptimalPulse {
        horizon: f64,
        gamma: f64,
    },
    Sampled(Arc<SampledProfile>),
}

impl PhotonProfile {
    pub fn exponential(alpha: f64, params: &PhysParams) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid("alpha", format!("must be > 0, got {alpha}")));
        }
        Ok(PhotonProfile::Exponential {
            alpha,
            gamma: params.gamma_total,
        })
    }

    pub fn sampled(samples: SampledProfile) -> Self {
        PhotonProfile::Sampled(Arc::new(samples))
    }

    /// ξ(t).
    pub fn eval(&self, t: f64) -> C64 {
        let zero = C64::new(0.0, 0.0);
        if !(t >= 0.0) {
            return zero;
        }
        match self {
            PhotonProfile::Zero => zero,
            PhotonProfile::Exponential { alpha, gamma } => {
                let rate = alpha * gamma;
                C64::new(rate.sqrt() * (-0.5 * rate * t).exp(), 0.0)
            }
            PhotonProfile::OptimalPulse { horizon, gamma } => {
                if t <= *horizon {
                    C64::new(
                        optimal_amplitude(*horizon, *gamma) * (0.5 * gamma * t).exp(),
                        0.0,
                    )
                } else {
                    zero
                }
            }
            PhotonProfile::Sampled(s) => {
                if t < s.first() || t > s.last() {
                    zero
                } else {
                    s.lerp(t)
                }
            }
        }
    }

    /// ξ evaluated inside the closed segment `[start, end]`, taking one-sided
    /// limits at the endpoints. Integrators stop at every breakpoint, so this
    /// gives each segment a continuous integrand.
    pub fn eval_on(&self, t: f64, start: f64, end: f64) -> C64 {
        if t <= start {
            self.right_limit(start)
        } else if t >= end {
            self.left_limit(end)
        } else {
            self.eval(t)
        }
    }

    fn right_limit(&self, x: f64) -> C64 {
        match self {
            PhotonProfile::OptimalPulse { horizon, .. } if x >= *horizon => C64::new(0.0, 0.0),
            PhotonProfile::Sampled(s) if x >= s.last() => C64::new(0.0, 0.0),
            _ => self.eval(x),
        }
    }

    fn left_limit(&self, x: f64) -> C64 {
        match self {
            _ if x <= 0.0 => C64::new(0.0, 0.0),
            PhotonProfile::Sampled(s) if x <= s.first() => C64::new(0.0, 0.0),
            _ => self.eval(x),
        }
    }

    /// Points in (0, ∞) where ξ is discontinuous or has a kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            PhotonProfile::Zero | PhotonProfile::Exponential { .. } => Vec::new(),
            PhotonProfile::OptimalPulse { horizon, .. } => vec![*horizon],
            PhotonProfile::Sampled(s) => s.times().iter().copied().filter(|&t| t > 0.0).collect(),
        }
    }

    /// Upper bound on integrator steps so a step never spans a kink.
    pub fn max_step_hint(&self) -> f64 {
        match self {
            PhotonProfile::Sampled(s) => 0.5 * s.min_spacing(),
            _ => f64::INFINITY,
        }
    }

    /// True when ξ(t) is real everywhere.
    pub fn is_real(&self) -> bool {
        match self {
            PhotonProfile::Sampled(s) => s.values().iter().all(|v| v.im == 0.0),
            _ => true,
        }
    }

    /// True when ξ(t) is real and nonnegative everywhere.
    pub fn is_real_nonnegative(&self) -> bool {
        match self {
            PhotonProfile::Sampled(s) => s.values().iter().all(|v| v.im == 0.0 && v.re >= 0.0),
            _ => true,
        }
    }
}

fn optimal_amplitude(horizon: f64, gamma: f64) -> f64 {
    (gamma / (gamma * horizon).exp_m1()).sqrt()
}

/// ξ(t) for any profile variant.
pub fn profile_eval(profile: &PhotonProfile, t: f64) -> C64 {
    profile.eval(t)
}

/// ∫₀^{t_max} |ξ(t)|² dt, to absolute accuracy `tol`.
pub fn profile_norm(profile: &PhotonProfile, t_max: f64, tol: f64) -> Result<f64> {
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::invalid("t_max", "must be finite and >= 0"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be > 0"));
    }
    let breaks = profile.breakpoints();
    let opts = QuadOptions::with_breaks(tol, breaks.len());
    let (value, _) = integrate_real(|t| profile.eval(t).norm_sqr(), 0.0, t_max, &breaks, opts)?;
    Ok(value)
}

/// The pulse that maximizes the excited population at `t_target` starting
/// from the ground state (on resonance).
pub fn make_optimal_pulse(t_target: f64, params: &PhysParams) -> Result<PhotonProfile> {
    if !(t_target.is_finite() && t_target > 0.0) {
        return Err(Error::invalid(
            "t_target",
            format!("must be > 0, got {t_target}"),
        ));
    }
    Ok(PhotonProfile::OptimalPulse {
        horizon: t_target,
        gamma: params.gamma_total,
    })
}

/// Textual profile description used by the command line and config files:
/// `zero`, `exp:ALPHA`, `optimal:T`, `sampled:PATH`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSpec {
    Zero,
    Exp(f64),
    Optimal(f64),
    Sampled(PathBuf),
}

impl ProfileSpec {
    pub fn resolve(&self, params: &PhysParams) -> Result<PhotonProfile> {
        match self {
            ProfileSpec::Zero => Ok(PhotonProfile::Zero),
            ProfileSpec::Exp(alpha) => PhotonProfile::exponential(*alpha, params),
            ProfileSpec::Optimal(t) => make_optimal_pulse(*t, params),
            ProfileSpec::Sampled(path) => {
                Ok(PhotonProfile::sampled(SampledProfile::from_csv_path(path)?))
            }
        }
    }
}

impl FromStr for ProfileSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |why: &str| Error::invalid("profile", format!("'{s}': {why}"));
        let number = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| bad("expected a number after ':'"))
        };
        match s.split_once(':') {
            None if s == "zero" => Ok(ProfileSpec::Zero),
            Some(("exp", v)) => {
                let alpha = number(v)?;
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(bad("alpha must be > 0"));
                }
                Ok(ProfileSpec::Exp(alpha))
            }
            Some(("optimal", v)) => {
                let t = number(v)?;
                if !(t > 0.0 && t.is_finite()) {
                    return Err(bad("horizon must be > 0"));
                }
                Ok(ProfileSpec::Optimal(t))
            }
            Some(("sampled", p)) if !p.is_empty() => Ok(ProfileSpec::Sampled(PathBuf::from(p))),
            _ => Err(bad("expected zero, exp:ALPHA, optimal:T or sampled:PATH")),
        }
    }
}

impl fmt::Display for ProfileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileSpec::Zero => write!(f, "zero"),
            ProfileSpec::Exp(a) => write!(f, "exp:{a}"),
            ProfileSpec::Optimal(t) => write!(f, "optimal:{t}"),
            ProfileSpec::Sampled(p) => write!(f, "sampled:{}", p.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn unit() -> PhysParams {
        PhysParams::new(1.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn exponential_values() {
        let p = PhotonProfile::exponential(1.0, &unit()).unwrap();
        assert_eq!(profile_eval(&p, 0.0), C64::new(1.0, 0.0));
        assert_eq!(profile_eval(&p, -0.5), C64::new(0.0, 0.0));
        let p2 = PhotonProfile::exponential(2.0, &unit()).unwrap();
        let v = profile_eval(&p2, 1.0).re;
        assert!((v - 2f64.sqrt() * (-1f64).exp()).abs() < 1e-15);
        assert!((v - 0.520_260_095).abs() < 1e-9);
    }

    #[test]
    fn every_variant_vanishes_before_zero() {
        let s = SampledProfile::new(vec![-1.0, 0.5, 1.0], vec![C64::new(1.0, 1.0); 3]).unwrap();
        let all = [
            PhotonProfile::Zero,
            PhotonProfile::exponential(3.0, &unit()).unwrap(),
            make_optimal_pulse(1.0, &unit()).unwrap(),
            PhotonProfile::sampled(s),
        ];
        for p in &all {
            for t in [-1e-12, -0.3, -1.0, -100.0] {
                assert_eq!(p.eval(t), C64::new(0.0, 0.0), "{p:?} at {t}");
            }
        }
    }

    #[test]
    fn norms() {
        let p = PhotonProfile::exponential(1.0, &unit()).unwrap();
        assert!((profile_norm(&p, 50.0, 1e-12).unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(profile_norm(&PhotonProfile::Zero, 7.0, 1e-12).unwrap(), 0.0);
        let opt = make_optimal_pulse(2.0, &unit()).unwrap();
        assert!((profile_norm(&opt, 2.0, 1e-12).unwrap() - 1.0).abs() < 1e-10);
        // Tail beyond T contributes nothing.
        assert!((profile_norm(&opt, 9.0, 1e-12).unwrap() - 1.0).abs() < 1e-10);
        // Exponential tail e^{-αΓ t_max} < 1e-12 at t_max = 30 for α = 1.
        let p3 = PhotonProfile::exponential(0.95, &unit()).unwrap();
        let tail = (-0.95f64 * 30.0).exp();
        assert!((profile_norm(&p3, 30.0, 1e-13).unwrap() - (1.0 - tail)).abs() < 1e-12);
    }

    #[test]
    fn optimal_pulse_shape() {
        let p = make_optimal_pulse(2.0, &unit()).unwrap();
        let x0 = p.eval(0.0).re;
        assert!((x0 - (1.0 / (2f64.exp() - 1.0)).sqrt()).abs() < 1e-14);
        assert!((x0 - 0.395_623).abs() < 1e-6);
        assert!((p.eval(2.0).re / x0 - 1f64.exp()).abs() < 1e-14);
        assert_eq!(p.eval(2.0 + 1e-9), C64::new(0.0, 0.0));
        for i in 1..100 {
            let v = p.eval(2.0 * i as f64 / 100.0);
            assert!(v.im == 0.0 && v.re > 0.0);
        }
        assert!(make_optimal_pulse(0.0, &unit()).is_err());
        assert!(make_optimal_pulse(-1.0, &unit()).is_err());
    }

    #[test]
    fn one_sided_limits_at_breakpoints() {
        let p = make_optimal_pulse(1.0, &unit()).unwrap();
        assert!(p.eval_on(1.0, 0.0, 1.0).re > 0.0);
        assert_eq!(p.eval_on(1.0, 1.0, 2.0), C64::new(0.0, 0.0));
        let e = PhotonProfile::exponential(1.0, &unit()).unwrap();
        assert_eq!(e.eval_on(0.0, 0.0, 1.0), C64::new(1.0, 0.0));
    }

    #[test]
    fn sampled_interpolation_and_bounds() {
        let s = SampledProfile::new(
            vec![0.0, 1.0, 3.0],
            vec![C64::new(0.0, 0.0), C64::new(2.0, -2.0), C64::new(0.0, 0.0)],
        )
        .unwrap();
        let p = PhotonProfile::sampled(s);
        assert_eq!(p.eval(0.5), C64::new(1.0, -1.0));
        assert_eq!(p.eval(2.0), C64::new(1.0, -1.0));
        assert_eq!(p.eval(3.5), C64::new(0.0, 0.0));
        assert_eq!(p.max_step_hint(), 0.5);
        assert!(!p.is_real_nonnegative());
        assert!(SampledProfile::new(vec![0.0, 0.0], vec![C64::new(1.0, 0.0); 2]).is_err());
        assert!(SampledProfile::new(vec![0.0], vec![C64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn sampled_from_csv() {
        let mut f = tempfile_path("prof.csv");
        writeln!(f.1, "t,re,im").unwrap();
        writeln!(f.1, "0,1,0").unwrap();
        writeln!(f.1, "1,0.5,0.25").unwrap();
        writeln!(f.1, "2,0").unwrap();
        drop(f.1);
        let spec: ProfileSpec = format!("sampled:{}", f.0.display()).parse().unwrap();
        let p = spec.resolve(&unit()).unwrap();
        assert_eq!(p.eval(1.0), C64::new(0.5, 0.25));
        assert_eq!(p.eval(1.5), C64::new(0.25, 0.125));
        std::fs::remove_file(&f.0).ok();

        let mut g = tempfile_path("bad.csv");
        writeln!(g.1, "0,1").unwrap();
        writeln!(g.1, "0,2").unwrap();
        drop(g.1);
        assert!(SampledProfile::from_csv_path(&g.0).is_err());
        std::fs::remove_file(&g.0).ok();
    }

    fn tempfile_path(name: &str) -> (PathBuf, std::fs::File) {
        let dir = std::env::temp_dir().join(format!("photonq-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        let f = std::fs::File::create(&path).unwrap();
        (path, f)
    }

    #[test]
    fn spec_grammar() {
        assert_eq!("zero".parse::<ProfileSpec>().unwrap(), ProfileSpec::Zero);
        assert_eq!(
            "exp:1.5".parse::<ProfileSpec>().unwrap(),
            ProfileSpec::Exp(1.5)
        );
        assert_eq!(
            "optimal:2".parse::<ProfileSpec>().unwrap(),
            ProfileSpec::Optimal(2.0)
        );
        assert!("exp:-1".parse::<ProfileSpec>().is_err());
        assert!("exp:abc".parse::<ProfileSpec>().is_err());
        assert!("gauss:1".parse::<ProfileSpec>().is_err());
        assert!("sampled:".parse::<ProfileSpec>().is_err());
        for s in ["zero", "exp:9.5", "optimal:0.5", "sampled:/tmp/x.csv"] {
            assert_eq!(s.parse::<ProfileSpec>().unwrap().to_string(), s);
        }
    }
}
