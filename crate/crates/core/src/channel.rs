//! Planar geometry and link budget for the two-user, K-RIS uplink.
//!
//! RIS_1 sits at the origin, the BS on the +x axis, and RIS_k is stacked
//! below RIS_1 every `ris_spacing` meters. The desired user `U_D` is seen
//! from RIS_1 at `angle_bs_ud` from the BS direction, and the interferer
//! `U_I` at `theta` from `U_D`, towards the BS.
//!
//! Propagation is log-distance, `(λ/4π)²·d^(−n)` with a 1 m reference.
//! With phases matched to `U_D`, each RIS adds a coherent amplitude term
//! `a·N·√(g₁g₂)` to the desired signal; the interferer leaks through the same
//! phase profile with power `a²·N^e·g₁g₂·min(1, θ_ref/θ)`. Powers are kept in
//! milliwatts internally and converted to dB(m) only at the edges.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Propagation speed used for the carrier wavelength, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `-inf` dBm maps to 0 mW.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    linear_to_db(mw)
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ScenarioParams {
    /// RIS_1 to U_D, m.
    pub d_ris_ud: f64,
    /// RIS_1 to U_I, m.
    pub d_ris_ui: f64,
    /// RIS_1 to BS, m.
    pub d_ris_bs: f64,
    /// Angle between BS and U_D seen from RIS_1, degrees.
    pub angle_bs_ud: f64,
    /// Angle between U_D and U_I seen from RIS_1, degrees.
    pub theta: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub ris_spacing: f64,
    /// Elements per RIS.
    #[serde(rename = "N")]
    pub n: usize,
    pub amp_coeff: f64,
    /// Transmit power of U_D, dBm.
    pub p_d: f64,
    /// Transmit power of U_I, dBm; `-inf` switches the interferer off.
    pub p_i: f64,
    /// Receiver noise power, dBm.
    pub noise: f64,
    /// Carrier frequency, Hz.
    pub carrier: f64,
    pub pl_exp_direct: f64,
    pub pl_exp_ris: f64,
    /// Angle below which interferer leakage is not attenuated, degrees.
    pub theta_ref: f64,
    /// Array-gain exponent of the leaked interferer reflection (2 = coherent, 1 = random phase).
    pub interferer_array_exponent: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            d_ris_ud: 60.0,
            d_ris_ui: 10.0,
            d_ris_bs: 80.0,
            angle_bs_ud: 150.0,
            theta: 90.0,
            k: 1,
            ris_spacing: 5.0,
            n: 256,
            amp_coeff: 1.0,
            p_d: 23.0,
            p_i: 10.0,
            noise: -94.0,
            carrier: 2.4e9,
            pl_exp_direct: 3.5,
            pl_exp_ris: 2.0,
            theta_ref: 30.0,
            interferer_array_exponent: 2.0,
        }
    }
}

impl ScenarioParams {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier
    }

    pub fn with_theta(&self, theta: f64) -> Self {
        Self {
            theta,
            ..self.clone()
        }
    }

    pub fn with_k(&self, k: usize) -> Self {
        Self { k, ..self.clone() }
    }

    /// Same scenario with the interferer silent.
    pub fn without_interferer(&self) -> Self {
        Self {
            p_i: f64::NEG_INFINITY,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        for (name, v) in [
            ("d_ris_ud", self.d_ris_ud),
            ("d_ris_ui", self.d_ris_ui),
            ("d_ris_bs", self.d_ris_bs),
            ("carrier", self.carrier),
            ("pl_exp_direct", self.pl_exp_direct),
            ("pl_exp_ris", self.pl_exp_ris),
            ("theta_ref", self.theta_ref),
            ("interferer_array_exponent", self.interferer_array_exponent),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.ris_spacing >= 0.0 && self.ris_spacing.is_finite()) {
            return bad(format!("ris_spacing must be >= 0, got {}", self.ris_spacing));
        }
        if !(0.0..=150.0).contains(&self.theta) {
            return bad(format!("theta must lie in [0, 150], got {}", self.theta));
        }
        if !(0.0..=180.0).contains(&self.angle_bs_ud) {
            return bad(format!("angle_bs_ud must lie in [0, 180], got {}", self.angle_bs_ud));
        }
        if !(self.amp_coeff > 0.0 && self.amp_coeff <= 1.0) {
            return bad(format!("amp_coeff must lie in (0, 1], got {}", self.amp_coeff));
        }
        if self.k == 0 || self.n == 0 {
            return bad(format!("K and N must be >= 1, got K={} N={}", self.k, self.n));
        }
        if self.p_d.is_nan() || self.p_i.is_nan() || !self.noise.is_finite() || self.p_d == f64::INFINITY || self.p_i == f64::INFINITY {
            return bad("powers must be finite dBm (p_d, p_i may be -inf)".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(r: f64, deg: f64) -> Self {
        let a = deg.to_radians();
        Self::new(r * a.cos(), r * a.sin())
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Node positions and the distances derived from them.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub bs: Point,
    pub ud: Point,
    pub ui: Point,
    pub ris: Vec<Point>,
    pub d_ud_bs: f64,
    pub d_ui_bs: f64,
    pub d_ris_ud: Vec<f64>,
    pub d_ris_ui: Vec<f64>,
    pub d_ris_bs: Vec<f64>,
}

impl Layout {
    pub fn k(&self) -> usize {
        self.ris.len()
    }
}

pub fn layout(params: &ScenarioParams) -> Layout {
    let bs = Point::new(params.d_ris_bs, 0.0);
    let ud = Point::polar(params.d_ris_ud, params.angle_bs_ud);
    let ui = Point::polar(params.d_ris_ui, params.angle_bs_ud - params.theta);
    let ris: Vec<Point> = (0..params.k)
        .map(|k| Point::new(0.0, -params.ris_spacing * k as f64))
        .collect();
    Layout {
        bs,
        ud,
        ui,
        d_ud_bs: ud.distance(bs),
        d_ui_bs: ui.distance(bs),
        d_ris_ud: ris.iter().map(|r| r.distance(ud)).collect(),
        d_ris_ui: ris.iter().map(|r| r.distance(ui)).collect(),
        d_ris_bs: ris.iter().map(|r| r.distance(bs)).collect(),
        ris,
    }
}

/// Log-distance power gain `(λ/4π)²·d^(−exponent)` (reference distance 1 m).
pub fn path_gain(d: f64, exponent: f64, wavelength: f64) -> Result<f64> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidArgument(format!("distance must be > 0, got {d}")));
    }
    let friis_1m = (wavelength / (4.0 * PI)).powi(2);
    Ok(friis_1m * d.powf(-exponent))
}

/// Two-hop gain through an RIS whose phases are matched to this link: `a²·N²·g₁·g₂`.
pub fn ris_reflected_gain_desired(
    d1: f64,
    d2: f64,
    n: usize,
    amp_coeff: f64,
    exponent: f64,
    wavelength: f64,
) -> Result<f64> {
    let g = path_gain(d1, exponent, wavelength)? * path_gain(d2, exponent, wavelength)?;
    let n = n as f64;
    Ok(amp_coeff * amp_coeff * n * n * g)
}

/// Leakage factor `min(1, θ_ref/θ)`; θ = 0 is degenerate.
pub fn interference_angle_factor(theta: f64, theta_ref: f64) -> Result<f64> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "incidence angle must be > 0 degrees, got {theta}"
        )));
    }
    Ok((theta_ref / theta).min(1.0))
}

/// Two-hop gain of the interferer through a RIS focused on another user:
/// `a²·N^array_exponent·g₁·g₂·min(1, θ_ref/θ)`.
#[allow(clippy::too_many_arguments)]
pub fn ris_reflected_gain_interferer(
    d1: f64,
    d2: f64,
    n: usize,
    amp_coeff: f64,
    theta: f64,
    theta_ref: f64,
    array_exponent: f64,
    exponent: f64,
    wavelength: f64,
) -> Result<f64> {
    let g = path_gain(d1, exponent, wavelength)? * path_gain(d2, exponent, wavelength)?;
    let leak = interference_angle_factor(theta, theta_ref)?;
    Ok(amp_coeff * amp_coeff * (n as f64).powf(array_exponent) * g * leak)
}

/// ON/OFF status of each RIS; `true` = reflecting.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RisStates(pub Vec<bool>);

impl RisStates {
    pub fn all_on(k: usize) -> Self {
        Self(vec![true; k])
    }

    pub fn all_off(k: usize) -> Self {
        Self(vec![false; k])
    }

    /// Bit `i` of `mask` is RIS `i`.
    pub fn from_mask(mask: u32, k: usize) -> Self {
        Self((0..k).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_on(&self) -> usize {
        self.0.iter().filter(|&&s| s).count()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinrBreakdown {
    /// mW, direct and reflected paths combined coherently.
    pub desired_power: f64,
    /// mW, direct and leaked paths summed in power.
    pub interference_power: f64,
    /// mW.
    pub noise_power: f64,
    pub sinr_db: f64,
}

/// Per-path received amplitudes and powers for one scenario, so that any
/// ON/OFF configuration can be scored without recomputing the geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkBudget {
    pub direct_desired_amp: f64,
    pub direct_interference: f64,
    pub reflected_desired_amp: Vec<f64>,
    pub reflected_interference: Vec<f64>,
    pub noise: f64,
}

impl LinkBudget {
    pub fn new(params: &ScenarioParams, layout: &Layout) -> Result<Self> {
        params.validate()?;
        if layout.k() != params.k {
            return Err(Error::LengthMismatch {
                expected: params.k,
                got: layout.k(),
            });
        }
        let lambda = params.wavelength();
        let p_d = dbm_to_mw(params.p_d);
        let p_i = dbm_to_mw(params.p_i);

        let direct_desired_amp = (p_d * path_gain(layout.d_ud_bs, params.pl_exp_direct, lambda)?).sqrt();
        let direct_interference = p_i * path_gain(layout.d_ui_bs, params.pl_exp_direct, lambda)?;

        let mut reflected_desired_amp = Vec::with_capacity(params.k);
        let mut reflected_interference = Vec::with_capacity(params.k);
        for k in 0..params.k {
            let gd = ris_reflected_gain_desired(
                layout.d_ris_ud[k],
                layout.d_ris_bs[k],
                params.n,
                params.amp_coeff,
                params.pl_exp_ris,
                lambda,
            )?;
            reflected_desired_amp.push((p_d * gd).sqrt());
            let gi = ris_reflected_gain_interferer(
                layout.d_ris_ui[k],
                layout.d_ris_bs[k],
                params.n,
                params.amp_coeff,
                params.theta,
                params.theta_ref,
                params.interferer_array_exponent,
                params.pl_exp_ris,
                lambda,
            )?;
            reflected_interference.push(p_i * gi);
        }
        Ok(Self {
            direct_desired_amp,
            direct_interference,
            reflected_desired_amp,
            reflected_interference,
            noise: dbm_to_mw(params.noise),
        })
    }

    pub fn k(&self) -> usize {
        self.reflected_desired_amp.len()
    }

    /// Panics if `states` does not have one entry per RIS.
    pub fn evaluate(&self, states: &[bool]) -> SinrBreakdown {
        assert_eq!(states.len(), self.k(), "one state per RIS");
        let mut amp = self.direct_desired_amp;
        let mut interference = self.direct_interference;
        for ((&on, &a), &i) in states
            .iter()
            .zip(&self.reflected_desired_amp)
            .zip(&self.reflected_interference)
        {
            if on {
                amp += a;
                interference += i;
            }
        }
        let desired_power = amp * amp;
        SinrBreakdown {
            desired_power,
            interference_power: interference,
            noise_power: self.noise,
            sinr_db: linear_to_db(desired_power / (interference + self.noise)),
        }
    }

    pub fn sinr_db(&self, states: &[bool]) -> f64 {
        self.evaluate(states).sinr_db
    }
}

/// SINR at the BS for the given ON/OFF configuration.
pub fn sinr(params: &ScenarioParams, layout: &Layout, states: &RisStates) -> Result<SinrBreakdown> {
    if states.len() != params.k {
        return Err(Error::LengthMismatch {
            expected: params.k,
            got: states.len(),
        });
    }
    Ok(LinkBudget::new(params, layout)?.evaluate(states.as_slice()))
}
