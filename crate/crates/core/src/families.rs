//! Random complex test functions for the modulus inequality
//! `∫|f||g| ≥ |∫ f* g|`.

use num_complex::Complex64;
use rand::Rng;

/// Window on which the random families are negligible outside.
pub const WINDOW: (f64, f64) = (-20.0, 20.0);

/// `exp(-(u-c)²/(4w²)) · exp(i(k u + β u² + φ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpedGaussian {
    pub center: f64,
    pub width: f64,
    pub wavenumber: f64,
    pub chirp: f64,
    pub phase: f64,
}

impl ChirpedGaussian {
    pub fn value(&self, u: f64) -> Complex64 {
        let d = u - self.center;
        let envelope = (-d * d / (4.0 * self.width * self.width)).exp();
        Complex64::from_polar(
            envelope,
            self.wavenumber * u + self.chirp * u * u + self.phase,
        )
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            center: rng.random_range(-3.0..3.0),
            width: rng.random_range(0.3..2.0),
            wavenumber: rng.random_range(-5.0..5.0),
            chirp: rng.random_range(-1.0..1.0),
            phase: rng.random_range(0.0..std::f64::consts::TAU),
        }
    }
}

/// Smooth phase mask `exp(i a sin(ω u + φ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMask {
    pub amplitude: f64,
    pub frequency: f64,
    pub offset: f64,
}

impl PhaseMask {
    pub fn value(&self, u: f64) -> Complex64 {
        Complex64::from_polar(
            1.0,
            self.amplitude * (self.frequency * u + self.offset).sin(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    /// Two independent chirped Gaussians.
    Independent,
    /// `g = f · mask` with a nonconstant smooth phase mask.
    Masked,
    /// `g = f`, the equality case.
    Identical,
}

impl PairKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PairKind::Independent => "independent",
            PairKind::Masked => "masked",
            PairKind::Identical => "identical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionPair {
    pub kind: PairKind,
    pub f: ChirpedGaussian,
    pub g: ChirpedGaussian,
    pub mask: Option<PhaseMask>,
}

impl FunctionPair {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, kind: PairKind) -> Self {
        let f = ChirpedGaussian::random(rng);
        match kind {
            PairKind::Independent => Self {
                kind,
                f,
                g: ChirpedGaussian::random(rng),
                mask: None,
            },
            PairKind::Masked => Self {
                kind,
                f,
                g: f,
                mask: Some(PhaseMask {
                    amplitude: rng.random_range(0.5..3.0),
                    frequency: rng.random_range(0.2..2.0),
                    offset: rng.random_range(0.0..std::f64::consts::TAU),
                }),
            },
            PairKind::Identical => Self {
                kind,
                f,
                g: f,
                mask: None,
            },
        }
    }

    pub fn f(&self, u: f64) -> Complex64 {
        self.f.value(u)
    }

    pub fn g(&self, u: f64) -> Complex64 {
        match &self.mask {
            Some(m) => self.g.value(u) * m.value(u),
            None => self.g.value(u),
        }
    }
}

/// Kind of the `index`-th pair in a mixed randomized run.
pub fn kind_for_index(index: usize) -> PairKind {
    match index % 3 {
        0 => PairKind::Independent,
        1 => PairKind::Masked,
        _ => PairKind::Identical,
    }
}
