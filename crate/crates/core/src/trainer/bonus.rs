//! The adaptive goal-completion bonus: twice the previous cycle's mean
//! target return, floored so early cycles still pay something.

use crate::Real;

pub fn update_bonus(floor: Real, r_prev: Real) -> Real {
    (2.0 * r_prev).max(floor)
}

/// Schedule state carried across cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BonusState {
    /// Bonus paid on goal completion during the current cycle.
    pub current: Real,
    /// Mean target return observed in the previous cycle.
    pub last_target_return: Real,
    /// Lower bound d.
    pub floor: Real,
}

impl BonusState {
    pub fn new(floor: Real) -> BonusState {
        BonusState {
            current: floor,
            last_target_return: 0.0,
            floor,
        }
    }

    /// Feed the previous cycle's mean target return; returns the new bonus.
    pub fn update(&mut self, r_prev: Real) -> Real {
        self.last_target_return = r_prev;
        self.current = update_bonus(self.floor, r_prev);
        self.current
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tabulated_cases() {
        assert_eq!(update_bonus(1.0, 10.0), 20.0);
        assert_eq!(update_bonus(1.0, 0.3), 1.0);
        assert_eq!(update_bonus(1.0, -2.0), 1.0);
    }

    #[test]
    fn state_tracks_inputs() {
        let mut b = BonusState::new(1.0);
        assert_eq!(b.current, 1.0);
        assert_eq!(b.update(3.0), 6.0);
        assert_eq!(b.last_target_return, 3.0);
        b.update(0.1);
        assert_eq!(b.current, 1.0, "floor re-engages");
    }

    proptest! {
        #[test]
        fn monotone_and_floored(r1 in -100.0f64..100.0, r2 in -100.0f64..100.0) {
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            prop_assert!(update_bonus(1.0, lo) <= update_bonus(1.0, hi));
            prop_assert!(update_bonus(1.0, r1) >= 1.0);
        }
    }
}
