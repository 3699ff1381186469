//! C ABI for the tristab library.
//!
//! Central configurations travel as opaque handles; every fallible call
//! returns a status code and writes results through out-pointers. The
//! header is generated by cbindgen into `include/tristab.h` at build time.

use tristab::centralconfig::{
    build_configuration, cc_residual, BodySetup, CentralConfiguration, ConfigError,
};
use tristab::monodromy::{self, MonodromyError, StabilityClass};
use tristab::reduction::ReductionError;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrsStatus {
    TrsOk = 0,
    /// Null pointer or out-of-range numeric argument.
    TrsInvalidArgument = 1,
    /// Masses and charges do not admit a non-collinear central configuration.
    TrsInadmissible = 2,
    /// A numerical guard tripped (integration tolerances).
    TrsNumericalFailure = 3,
}

/// Stability classes of the essential monodromy.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrsStabilityClass {
    TrsEe = 0,
    TrsEh = 1,
    TrsHh = 2,
    TrsCs = 3,
    /// On the transition set (a multiplier pair at +-1 or a Krein collision).
    TrsBoundary = 4,
}

/// Opaque handle: a body setup together with its central configuration.
pub struct TrsConfig {
    setup: BodySetup,
    config: CentralConfiguration,
}

fn status_of_config_error(err: &ConfigError) -> TrsStatus {
    match err {
        ConfigError::NonPositiveMass { .. } | ConfigError::NonFiniteMass { .. } => {
            TrsStatus::TrsInvalidArgument
        }
        _ => TrsStatus::TrsInadmissible,
    }
}

fn status_of_monodromy_error(err: &MonodromyError) -> TrsStatus {
    match err {
        MonodromyError::Reduction(ReductionError::BetaRange(_))
        | MonodromyError::Reduction(ReductionError::EccentricityRange(_))
        | MonodromyError::StepUnderflow { .. } => TrsStatus::TrsInvalidArgument,
        MonodromyError::SymplecticDefect { .. } => TrsStatus::TrsNumericalFailure,
    }
}

fn class_code(class: StabilityClass) -> TrsStabilityClass {
    match class {
        StabilityClass::EE => TrsStabilityClass::TrsEe,
        StabilityClass::EH => TrsStabilityClass::TrsEh,
        StabilityClass::HH => TrsStabilityClass::TrsHh,
        StabilityClass::CS => TrsStabilityClass::TrsCs,
        StabilityClass::Boundary(_) => TrsStabilityClass::TrsBoundary,
    }
}

/// Builds the central configuration for three masses and three charges.
///
/// `masses` and `charges` point at three doubles each; on success the new
/// handle is written to `out` and must be released with `trs_config_free`.
///
/// # Safety
/// `masses` and `charges` must be valid for reads of three doubles and
/// `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn trs_config_new(
    masses: *const f64,
    charges: *const f64,
    out: *mut *mut TrsConfig,
) -> TrsStatus {
    if masses.is_null() || charges.is_null() || out.is_null() {
        return TrsStatus::TrsInvalidArgument;
    }
    let m = std::slice::from_raw_parts(masses, 3);
    let q = std::slice::from_raw_parts(charges, 3);
    let setup = match BodySetup::new([m[0], m[1], m[2]], [q[0], q[1], q[2]]) {
        Ok(s) => s,
        Err(err) => return status_of_config_error(&err),
    };
    match build_configuration(&setup) {
        Ok(config) => {
            *out = Box::into_raw(Box::new(TrsConfig { setup, config }));
            TrsStatus::TrsOk
        }
        Err(err) => status_of_config_error(&err),
    }
}

/// Releases a handle created by `trs_config_new`. Null is a no-op.
///
/// # Safety
/// `ptr` must be null or a pointer from `trs_config_new`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn trs_config_free(ptr: *mut TrsConfig) {
    if !ptr.is_null() {
        drop(Box::from_raw(ptr));
    }
}

/// Shape parameter beta in [0, 9]; NaN on null input.
///
/// # Safety
/// `ptr` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn trs_config_beta(ptr: *const TrsConfig) -> f64 {
    ptr.as_ref().map_or(f64::NAN, |c| c.config.beta)
}

/// Gravitational parameter mu = k^3 of the equivalent Kepler problem.
///
/// # Safety
/// `ptr` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn trs_config_mu(ptr: *const TrsConfig) -> f64 {
    ptr.as_ref().map_or(f64::NAN, |c| c.config.mu)
}

/// Max-norm residual of the central-configuration equation.
///
/// # Safety
/// `ptr` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn trs_config_residual(ptr: *const TrsConfig) -> f64 {
    ptr.as_ref()
        .map_or(f64::NAN, |c| cc_residual(&c.config, &c.setup))
}

/// Writes the three inner angles (radians) to `out`.
///
/// # Safety
/// `ptr` must be a valid handle and `out` valid for three double writes.
#[no_mangle]
pub unsafe extern "C" fn trs_config_angles(ptr: *const TrsConfig, out: *mut f64) -> TrsStatus {
    let Some(handle) = ptr.as_ref() else {
        return TrsStatus::TrsInvalidArgument;
    };
    if out.is_null() {
        return TrsStatus::TrsInvalidArgument;
    }
    std::slice::from_raw_parts_mut(out, 3).copy_from_slice(&handle.config.angles_rad);
    TrsStatus::TrsOk
}

/// Writes the planar positions as (x1, y1, x2, y2, x3, y3).
///
/// # Safety
/// `ptr` must be a valid handle and `out` valid for six double writes.
#[no_mangle]
pub unsafe extern "C" fn trs_config_positions(ptr: *const TrsConfig, out: *mut f64) -> TrsStatus {
    let Some(handle) = ptr.as_ref() else {
        return TrsStatus::TrsInvalidArgument;
    };
    if out.is_null() {
        return TrsStatus::TrsInvalidArgument;
    }
    let slice = std::slice::from_raw_parts_mut(out, 6);
    for i in 0..3 {
        slice[2 * i] = handle.config.positions[i][0];
        slice[2 * i + 1] = handle.config.positions[i][1];
    }
    TrsStatus::TrsOk
}

/// Classifies the essential monodromy at bare parameters (beta, ecc).
///
/// # Safety
/// `out_class` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn trs_classify(
    beta: f64,
    ecc: f64,
    out_class: *mut TrsStabilityClass,
) -> TrsStatus {
    if out_class.is_null() {
        return TrsStatus::TrsInvalidArgument;
    }
    match monodromy::classify(beta, ecc) {
        Ok(class) => {
            *out_class = class_code(class);
            TrsStatus::TrsOk
        }
        Err(err) => status_of_monodromy_error(&err),
    }
}

/// Classifies the configuration's stability at eccentricity `ecc`.
///
/// # Safety
/// `ptr` must be a valid handle and `out_class` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn trs_classify_config(
    ptr: *const TrsConfig,
    ecc: f64,
    out_class: *mut TrsStabilityClass,
) -> TrsStatus {
    let Some(handle) = ptr.as_ref() else {
        return TrsStatus::TrsInvalidArgument;
    };
    trs_classify(handle.config.beta, ecc, out_class)
}

/// Writes the four Floquet multipliers of the essential monodromy as
/// separate real and imaginary arrays of length four.
///
/// # Safety
/// `out_re` and `out_im` must each be valid for four double writes.
#[no_mangle]
pub unsafe extern "C" fn trs_multipliers(
    beta: f64,
    ecc: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> TrsStatus {
    if out_re.is_null() || out_im.is_null() {
        return TrsStatus::TrsInvalidArgument;
    }
    match monodromy::fundamental_solution(beta, ecc) {
        Ok(mon) => {
            let re = std::slice::from_raw_parts_mut(out_re, 4);
            let im = std::slice::from_raw_parts_mut(out_im, 4);
            for (i, m) in mon.multipliers.iter().enumerate() {
                re[i] = m.re;
                im[i] = m.im;
            }
            TrsStatus::TrsOk
        }
        Err(err) => status_of_monodromy_error(&err),
    }
}

/// Nullity of gamma(2 pi) - I (3 on the beta = 0 line, else 0).
///
/// # Safety
/// `out_nullity` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn trs_nullity(beta: f64, ecc: f64, out_nullity: *mut u32) -> TrsStatus {
    if out_nullity.is_null() {
        return TrsStatus::TrsInvalidArgument;
    }
    match monodromy::fundamental_solution(beta, ecc) {
        Ok(mon) => {
            *out_nullity = monodromy::nullity(&mon) as u32;
            TrsStatus::TrsOk
        }
        Err(err) => status_of_monodromy_error(&err),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn trs_version() -> *const std::os::raw::c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const std::os::raw::c_char
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lifecycle_through_the_c_surface() {
        let masses = [1.0, 1.0, 1.0];
        let charges = [0.1, 0.1, 0.1];
        let mut handle: *mut TrsConfig = std::ptr::null_mut();
        let status = unsafe { trs_config_new(masses.as_ptr(), charges.as_ptr(), &mut handle) };
        assert_eq!(status, TrsStatus::TrsOk);
        assert!(!handle.is_null());

        unsafe {
            assert!((trs_config_beta(handle) - 9.0).abs() < 1e-12);
            assert!(trs_config_residual(handle) < 1e-10);
            let mut angles = [0.0; 3];
            assert_eq!(
                trs_config_angles(handle, angles.as_mut_ptr()),
                TrsStatus::TrsOk
            );
            for a in angles {
                assert!((a - std::f64::consts::FRAC_PI_3).abs() < 1e-12);
            }
            let mut pos = [0.0; 6];
            assert_eq!(
                trs_config_positions(handle, pos.as_mut_ptr()),
                TrsStatus::TrsOk
            );
            let moment: f64 = (0..3)
                .map(|i| (pos[2 * i].powi(2) + pos[2 * i + 1].powi(2)) / 3.0)
                .sum();
            assert!((moment - 1.0).abs() < 1e-12);

            // beta = 9 at e = 0 is the resonant corner where the unstable
            // quadruple degenerates onto the real axis: HH, not CS
            let mut class = TrsStabilityClass::TrsEe;
            assert_eq!(
                trs_classify_config(handle, 0.0, &mut class),
                TrsStatus::TrsOk
            );
            assert_eq!(class, TrsStabilityClass::TrsHh);
            trs_config_free(handle);
        }
    }

    #[test]
    fn classify_and_multipliers_by_parameters() {
        let mut class = TrsStabilityClass::TrsCs;
        assert_eq!(
            unsafe { trs_classify(0.5, 0.0, &mut class) },
            TrsStatus::TrsOk
        );
        assert_eq!(class, TrsStabilityClass::TrsEe);
        assert_eq!(
            unsafe { trs_classify(0.75, 0.0, &mut class) },
            TrsStatus::TrsOk
        );
        assert_eq!(class, TrsStabilityClass::TrsBoundary);

        let (mut re, mut im) = ([0.0; 4], [0.0; 4]);
        let status = unsafe { trs_multipliers(0.5, 0.0, re.as_mut_ptr(), im.as_mut_ptr()) };
        assert_eq!(status, TrsStatus::TrsOk);
        for i in 0..4 {
            let norm = (re[i] * re[i] + im[i] * im[i]).sqrt();
            assert!((norm - 1.0).abs() < 1e-9, "multiplier {i} off the circle");
        }

        let mut nullity = 99;
        assert_eq!(
            unsafe { trs_nullity(0.0, 0.3, &mut nullity) },
            TrsStatus::TrsOk
        );
        assert_eq!(nullity, 3);
    }

    #[test]
    fn error_paths_map_to_codes() {
        let mut handle: *mut TrsConfig = std::ptr::null_mut();
        let masses = [1.0, 1.0, 1.0];
        let repulsive = [2.0, 2.0, 2.0];
        let status = unsafe { trs_config_new(masses.as_ptr(), repulsive.as_ptr(), &mut handle) };
        assert_eq!(status, TrsStatus::TrsInadmissible);
        assert!(handle.is_null());

        let bad_mass = [-1.0, 1.0, 1.0];
        let zero = [0.0; 3];
        let status = unsafe { trs_config_new(bad_mass.as_ptr(), zero.as_ptr(), &mut handle) };
        assert_eq!(status, TrsStatus::TrsInvalidArgument);

        let mut class = TrsStabilityClass::TrsEe;
        assert_eq!(
            unsafe { trs_classify(12.0, 0.0, &mut class) },
            TrsStatus::TrsInvalidArgument
        );
        assert_eq!(
            unsafe { trs_classify(0.5, 0.0, std::ptr::null_mut()) },
            TrsStatus::TrsInvalidArgument
        );

        let version = unsafe { std::ffi::CStr::from_ptr(trs_version()) };
        assert!(!version.to_str().unwrap().is_empty());
    }
}
