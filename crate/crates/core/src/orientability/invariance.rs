use serde::{Deserialize, Serialize};

use super::{orientability_verdict, Mode, Verdict, VerdictOptions};
use crate::error::Result;
use crate::group::Automorphism;
use crate::surfaces::{find_characteristic_points, CharacteristicPoint, ParametrizedPatch, Surface};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictPair {
    pub mode: Mode,
    pub original: Verdict,
    pub transformed: Verdict,
}

/// Comparison of a patch with its image under an automorphism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub automorphism: Automorphism,
    pub original: Vec<CharacteristicPoint>,
    pub transformed: Vec<CharacteristicPoint>,
    pub max_param_diff: f64,
    pub max_ambient_diff: f64,
    pub verdicts: Vec<VerdictPair>,
    /// Human-readable description of every failed check.
    pub diffs: Vec<String>,
    pub passed: bool,
}

/// Ambient agreement required between `m(p)` and the transformed search.
pub const AMBIENT_TOL: f64 = 1e-10;

/// Runs the characteristic search and both verdicts on `patch` and on
/// `m ∘ patch` and checks that parameters, ambient points and verdicts
/// correspond. Parameters must agree to `10 · tol`.
pub fn invariance_audit(
    patch: &ParametrizedPatch,
    m: &Automorphism,
    opts: &VerdictOptions,
) -> Result<InvarianceReport> {
    let image = patch.transformed(m)?;
    let search = opts.search();
    let original = find_characteristic_points(&Surface::Patch(patch.clone()), &search)?;
    let transformed = find_characteristic_points(&Surface::Patch(image.clone()), &search)?;

    let mut diffs = Vec::new();
    if original.len() != transformed.len() {
        diffs.push(format!(
            "characteristic point count changed: {} -> {}",
            original.len(),
            transformed.len()
        ));
    }
    let mut max_param_diff: f64 = 0.0;
    let mut max_ambient_diff: f64 = 0.0;
    for (a, b) in original.iter().zip(&transformed) {
        if let (Some(pa), Some(pb)) = (a.params, b.params) {
            let d = patch.param_distance(pa, pb);
            max_param_diff = max_param_diff.max(d);
            if d > 10.0 * opts.tol {
                diffs.push(format!("parameters moved from {pa:?} to {pb:?} ({d:e})"));
            }
        }
        let mapped = m.apply(&a.point)?;
        let d = mapped.max_abs_diff(&b.point)?;
        max_ambient_diff = max_ambient_diff.max(d);
        if d > AMBIENT_TOL {
            diffs.push(format!(
                "image of {:?} is {:?} but the search found {:?} ({d:e})",
                a.point.coords(),
                mapped.coords(),
                b.point.coords()
            ));
        }
    }

    let mut verdicts = Vec::with_capacity(2);
    for mode in Mode::ALL {
        let before = orientability_verdict(patch, mode, opts)?.verdict;
        let after = orientability_verdict(&image, mode, opts)?.verdict;
        if before != after {
            diffs.push(format!("{mode:?} verdict changed: {before:?} -> {after:?}"));
        }
        verdicts.push(VerdictPair {
            mode,
            original: before,
            transformed: after,
        });
    }

    Ok(InvarianceReport {
        automorphism: m.clone(),
        original,
        transformed,
        max_param_diff,
        max_ambient_diff,
        verdicts,
        passed: diffs.is_empty(),
        diffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupElement;

    #[test]
    fn translation_and_dilation_preserve_everything() {
        let p = ParametrizedPatch::mobius(0.2, 0.1).unwrap();
        let opts = VerdictOptions::default();
        for m in [
            Automorphism::LeftTranslation(GroupElement::h1(0.3, -0.7, 1.1)),
            Automorphism::Dilation(2.0),
        ] {
            let rep = invariance_audit(&p, &m, &opts).unwrap();
            assert!(rep.passed, "{:?}", rep.diffs);
            assert_eq!(rep.transformed.len(), 1);
            assert!(rep.max_param_diff <= 1e-8);
            assert!(rep.max_ambient_diff <= 1e-10);
        }
    }

    #[test]
    fn identity_is_bitwise_stable() {
        let p = ParametrizedPatch::mobius(0.3, 0.1).unwrap();
        let opts = VerdictOptions {
            grid: (90, 20),
            ..VerdictOptions::default()
        };
        let rep = invariance_audit(&p, &Automorphism::Dilation(1.0), &opts).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.original, rep.transformed);
        assert_eq!(rep.max_ambient_diff, 0.0);
    }

    #[test]
    fn dilation_by_three_passes() {
        let p = ParametrizedPatch::mobius(0.2, 0.1).unwrap();
        let opts = VerdictOptions {
            tol: 1e-10,
            ..VerdictOptions::default()
        };
        let rep = invariance_audit(&p, &Automorphism::Dilation(3.0), &opts).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.verdicts.len(), 2);
    }
}
