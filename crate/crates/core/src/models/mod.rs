//! Built-in parametric integrand families and the special functions they use.

pub mod analytic;
pub mod cgmy;
pub mod gamma;
pub mod stft;

use std::fmt;
use std::str::FromStr;

pub use analytic::{test_family_exp, ExpFamily, PolynomialFamily, ScaledSineFamily};
pub use cgmy::{
    cgmy_cf, cgmy_density_oracle, cgmy_integrand, CgmyError, CgmyFamily, CgmyFamilySpec, CgmyParams,
};
pub use gamma::{gamma_real, GammaError};
pub use stft::{gauss_window, stft_integrand, StftFamily, StftFamilySpec};

/// String identifiers of the families exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyId {
    Cgmy,
    StftGauss,
    ExpTest,
}

impl FamilyId {
    pub const ALL: [FamilyId; 3] = [FamilyId::Cgmy, FamilyId::StftGauss, FamilyId::ExpTest];

    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyId::Cgmy => "cgmy",
            FamilyId::StftGauss => "stft-gauss",
            FamilyId::ExpTest => "exp-test",
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FamilyId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| format!("unknown family '{s}' (expected cgmy, stft-gauss or exp-test)"))
    }
}
