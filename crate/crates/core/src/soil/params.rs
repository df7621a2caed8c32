use super::SoilError;

/// Soil constitutive parameters, SI units throughout.
///
/// `k_phi` is scaled so that `k_phi * y^n` is in Pa with `y` in metres.
/// `friction_angle` is stored in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct SoilParams {
    /// Cohesive modulus of the Bekker law (Pa·m^(1-n), divided by patch width b).
    pub k_c: f64,
    /// Frictional modulus of the Bekker law (Pa·m^(-n)).
    pub k_phi: f64,
    /// Sinkage exponent.
    pub n: f64,
    /// Mohr cohesion (Pa).
    pub cohesion_c: f64,
    /// Internal friction angle (rad).
    pub friction_angle: f64,
    /// Janosi-Hanamoto shear modulus parameter (m).
    pub janosi_k: f64,
    /// Unload/reload stiffness (Pa/m).
    pub elastic_k: f64,
    /// Vertical damping coefficient (Pa·s/m).
    pub damping_r: f64,
}

impl Default for SoilParams {
    fn default() -> Self {
        SoilParams {
            k_c: 0.0,
            k_phi: 0.2e6,
            n: 1.1,
            cohesion_c: 0.0,
            friction_angle: 30.0_f64.to_radians(),
            janosi_k: 0.01,
            elastic_k: 4e7,
            damping_r: 3e4,
        }
    }
}

impl SoilParams {
    pub fn validate(&self) -> Result<(), SoilError> {
        if !(self.k_phi > 0.0) {
            return Err(SoilError::Parameter(format!("k_phi must be > 0, got {}", self.k_phi)));
        }
        if !(self.n > 0.0) {
            return Err(SoilError::Parameter(format!("n must be > 0, got {}", self.n)));
        }
        if !(self.janosi_k > 0.0) {
            return Err(SoilError::Parameter(format!(
                "janosi_k must be > 0, got {}",
                self.janosi_k
            )));
        }
        if !(self.elastic_k > 0.0) {
            return Err(SoilError::Parameter(format!(
                "elastic_k must be > 0, got {}",
                self.elastic_k
            )));
        }
        if !(self.damping_r >= 0.0) {
            return Err(SoilError::Parameter(format!(
                "damping_r must be >= 0, got {}",
                self.damping_r
            )));
        }
        if !(self.friction_angle >= 0.0 && self.friction_angle < std::f64::consts::FRAC_PI_2) {
            return Err(SoilError::Parameter(format!(
                "friction_angle must be in [0, pi/2), got {}",
                self.friction_angle
            )));
        }
        if !(self.k_c >= 0.0) {
            return Err(SoilError::Parameter(format!("k_c must be >= 0, got {}", self.k_c)));
        }
        if !(self.cohesion_c >= 0.0) {
            return Err(SoilError::Parameter(format!(
                "cohesion_c must be >= 0, got {}",
                self.cohesion_c
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        assert!(SoilParams::default().validate().is_ok());
    }

    #[test]
    fn default_friction_angle_is_30_degrees() {
        let p = SoilParams::default();
        assert!((p.friction_angle - std::f64::consts::PI / 6.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_exponent() {
        let p = SoilParams { n: -1.0, ..SoilParams::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn rejects_nonpositive_k_phi() {
        let p = SoilParams { k_phi: 0.0, ..SoilParams::default() };
        assert!(p.validate().is_err());
    }
}
