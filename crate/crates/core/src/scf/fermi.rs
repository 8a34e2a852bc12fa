//! Aufbau filling with equal fractional occupation of a degenerate Fermi
//! shell.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Filling {
    pub occupations: Vec<f64>,
    pub fermi_energy: f64,
    /// Index range of the partially or exactly filled Fermi shell.
    pub shell: std::ops::Range<usize>,
    /// True when the shell reaches the last supplied level, so further
    /// degenerate levels may exist beyond the computed ones.
    pub shell_truncated: bool,
}

/// Fills ascending `levels` with `electrons` electrons. Levels within
/// `degeneracy` of the highest occupied level share its occupation equally.
pub fn fermi_fill(levels: &[f64], electrons: f64, degeneracy: f64) -> Result<Filling> {
    if !(electrons > 0.0) || !electrons.is_finite() {
        return Err(Error::invalid(format!("electron count must be positive, got {electrons}")));
    }
    if levels.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("levels must be ascending"));
    }
    let top = electrons.ceil() as usize;
    if top > levels.len() {
        return Err(Error::NotEnoughStates {
            requested: electrons,
            available: levels.len(),
        });
    }
    let pivot = levels[top - 1];
    let lo = levels.iter().position(|&l| l >= pivot - degeneracy).unwrap_or(0);
    let hi = levels
        .iter()
        .rposition(|&l| l <= pivot + degeneracy)
        .map_or(levels.len(), |i| i + 1);
    let below = lo as f64;
    let shell_occ = ((electrons - below) / (hi - lo) as f64).clamp(0.0, 1.0);
    let mut occupations = vec![0.0; levels.len()];
    for o in occupations.iter_mut().take(lo) {
        *o = 1.0;
    }
    for o in occupations.iter_mut().take(hi).skip(lo) {
        *o = shell_occ;
    }
    let fermi_energy = if shell_occ >= 1.0 && hi < levels.len() {
        0.5 * (levels[hi - 1] + levels[hi])
    } else {
        pivot
    };
    Ok(Filling {
        occupations,
        fermi_energy,
        shell: lo..hi,
        shell_truncated: hi == levels.len() && shell_occ < 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_fill() {
        let f = fermi_fill(&[-1.0, -0.5, 0.2], 2.0, 1e-9).unwrap();
        assert_eq!(f.occupations, vec![1.0, 1.0, 0.0]);
        assert!(f.fermi_energy > -0.5 && f.fermi_energy < 0.2);
    }

    #[test]
    fn degenerate_split() {
        let f = fermi_fill(&[-1.0, -1.0], 1.0, 1e-9).unwrap();
        assert_eq!(f.occupations, vec![0.5, 0.5]);
        assert_eq!(f.fermi_energy, -1.0);
    }

    #[test]
    fn too_many_electrons() {
        assert!(matches!(
            fermi_fill(&[-1.0, 0.0], 2.5, 1e-9),
            Err(Error::NotEnoughStates { .. })
        ));
        assert!(fermi_fill(&[0.0, -1.0], 1.0, 1e-9).is_err());
    }

    #[test]
    fn fractional_non_degenerate() {
        let f = fermi_fill(&[-2.0, -1.0, 0.0], 1.5, 1e-9).unwrap();
        assert_eq!(f.occupations, vec![1.0, 0.5, 0.0]);
        assert_eq!(f.fermi_energy, -1.0);
    }
}
