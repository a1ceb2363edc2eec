use crate::error::{invalid, Result};

/// Neutron mass in kg (CODATA 2018).
pub const NEUTRON_MASS: f64 = 1.674_927_498_04e-27;
/// Magnitude of the neutron magnetic moment in J/T (CODATA 2018).
pub const NEUTRON_MOMENT: f64 = 9.662_365_1e-27;
/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Physical parameterization of a Stern-Gerlach setup.
///
/// The field model is `B = (-b x, 0, B0 + b z)` inside the magnet. `moment`
/// is a magnitude; the `Plus` branch is always the one deflected toward +z.
/// All quantities are SI unless `hbar`, `mass` and `sigma0` are set to one
/// for a nondimensional run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SGParams {
    pub mass: f64,
    pub moment: f64,
    pub b0: f64,
    pub gradient_b: f64,
    pub tau: f64,
    pub sigma0: f64,
    pub vy: f64,
    pub hbar: f64,
}

impl SGParams {
    pub fn neutron(b0: f64, gradient_b: f64, tau: f64, sigma0: f64, vy: f64) -> Self {
        Self {
            mass: NEUTRON_MASS,
            moment: NEUTRON_MOMENT,
            b0,
            gradient_b,
            tau,
            sigma0,
            vy,
            hbar: HBAR,
        }
    }

    /// Nondimensional parameters with `hbar = mass = moment = sigma0 = 1`.
    pub fn natural(b0: f64, gradient_b: f64, tau: f64, vy: f64) -> Self {
        Self {
            mass: 1.0,
            moment: 1.0,
            b0,
            gradient_b,
            tau,
            sigma0: 1.0,
            vy,
            hbar: 1.0,
        }
    }

    /// Natural-unit parameters realizing the dimensionless groups `P` and `K`.
    ///
    /// In natural units `v_z = b τ`, `P = b τ²` and `K = b τ`, so
    /// `τ = P / K` and `b = K² / P`. `P = K = 0` maps to `b = 0, τ = 1`.
    pub fn from_groups(p: f64, k: f64, b0: f64, vy: f64) -> Result<Self> {
        if !(p.is_finite() && k.is_finite()) || p < 0.0 || k < 0.0 {
            return Err(invalid("P/K", "groups must be finite and nonnegative"));
        }
        match (p > 0.0, k > 0.0) {
            (false, false) => Ok(Self::natural(b0, 0.0, 1.0, vy)),
            (true, true) => Ok(Self::natural(b0, k * k / p, p / k, vy)),
            _ => Err(invalid(
                "P/K",
                "P and K vanish together (both are proportional to v_z)",
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass", self.mass),
            ("moment", self.moment),
            ("b0", self.b0),
            ("gradient_b", self.gradient_b),
            ("tau", self.tau),
            ("sigma0", self.sigma0),
            ("vy", self.vy),
            ("hbar", self.hbar),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        for (name, v) in [
            ("mass", self.mass),
            ("moment", self.moment),
            ("sigma0", self.sigma0),
            ("hbar", self.hbar),
        ] {
            if v <= 0.0 {
                return Err(invalid(name, format!("must be > 0, got {v}")));
            }
        }
        for (name, v) in [
            ("b0", self.b0),
            ("gradient_b", self.gradient_b),
            ("tau", self.tau),
            ("vy", self.vy),
        ] {
            if v < 0.0 {
                return Err(invalid(name, format!("must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Computes the derived kinematics and dimensionless groups.
    pub fn derive(&self) -> Result<DerivedParams> {
        self.validate()?;
        let vz = self.moment * self.gradient_b * self.tau / self.mass;
        let ky = self.mass * self.vy / self.hbar;
        let kz = self.mass * vz / self.hbar;
        let r = if self.b0 > 0.0 {
            self.gradient_b * self.sigma0 / self.b0
        } else {
            f64::INFINITY
        };
        Ok(DerivedParams {
            vz,
            ky,
            kz,
            p: vz * self.tau / self.sigma0,
            k: kz * self.sigma0,
            r,
            t_spread: 2.0 * self.mass * self.sigma0 * self.sigma0 / self.hbar,
        })
    }

    /// Complex width `s_t = σ0 (1 + iħt / 2mσ0²)` at time `t` after entry.
    pub fn width_at(&self, t: f64) -> super::ComplexWidth {
        super::ComplexWidth::new(self.sigma0, t / self.spread_time())
    }

    pub(crate) fn spread_time(&self) -> f64 {
        2.0 * self.mass * self.sigma0 * self.sigma0 / self.hbar
    }
}

/// Kinematics computed from [`SGParams`]; holds no independent state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// Transverse exit speed `μbτ/m`.
    pub vz: f64,
    pub ky: f64,
    pub kz: f64,
    /// Exit-time separation in initial widths, `v_z τ / σ0`.
    pub p: f64,
    /// Momentum separation in inverse widths, `m v_z σ0 / ħ`.
    pub k: f64,
    /// Decoupling ratio `bσ0/B0`; `+inf` when `B0 = 0`.
    pub r: f64,
    /// Spreading time `2mσ0²/ħ`.
    pub t_spread: f64,
}
