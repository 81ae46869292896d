//! Goal-conditioned action values, stored sparsely and dumped to a small
//! versioned binary format.

use std::collections::HashMap;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use thiserror::Error;

use crate::config::CurriculumConfig;
use crate::registry::Action;
use crate::rngstream;
use crate::Real;

/// Table key: the packed world state plus the goal's achievement bits.
/// Keeping the goal inside the key separates values learned under
/// different goals.
pub type StateGoalKey = (u64, u16);

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("policy io: {0}")]
    Io(#[from] std::io::Error),
    #[error("policy format: {0}")]
    Format(String),
}

/// `policy.bin` layout, all little-endian:
/// magic "DCPT", version u16, action count u16, alpha/gamma/q_init f64,
/// entry count u64, then per entry: state u64, goal u16, one f64 per action.
/// Entries are sorted by key so the dump is byte-reproducible.
const MAGIC: [u8; 4] = *b"DCPT";
const VERSION: u16 = 1;

#[derive(Debug, Clone)]
pub struct PolicyTable {
    values: HashMap<StateGoalKey, [Real; Action::COUNT]>,
    pub alpha: Real,
    pub gamma: Real,
    pub q_init: Real,
}

impl PolicyTable {
    pub fn new(cfg: &CurriculumConfig) -> PolicyTable {
        PolicyTable {
            values: HashMap::new(),
            alpha: cfg.alpha,
            gamma: cfg.gamma,
            q_init: cfg.q_init,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Stored action values for a key, or the initial row if unseen.
    pub fn row(&self, key: StateGoalKey) -> [Real; Action::COUNT] {
        self.values
            .get(&key)
            .copied()
            .unwrap_or([self.q_init; Action::COUNT])
    }

    /// Greedy action; ties break toward the lower action index.
    pub fn best_action(&self, key: StateGoalKey) -> Action {
        let row = self.row(key);
        let mut best = 0;
        for (i, v) in row.iter().enumerate() {
            if *v > row[best] {
                best = i;
            }
        }
        Action::from_index(best).unwrap()
    }

    pub fn max_value(&self, key: StateGoalKey) -> Real {
        self.row(key).into_iter().fold(Real::NEG_INFINITY, Real::max)
    }

    pub fn select_action<R: Rng>(&self, key: StateGoalKey, epsilon: Real, rng: &mut R) -> Action {
        if rng.gen::<f64>() < epsilon {
            Action::from_index(rng.gen_range(0..Action::COUNT)).unwrap()
        } else {
            self.best_action(key)
        }
    }

    /// One Q-learning backup. Terminal transitions do not bootstrap.
    pub fn update(
        &mut self,
        key: StateGoalKey,
        action: Action,
        reward: Real,
        next: StateGoalKey,
        done: bool,
    ) {
        let bootstrap = if done {
            0.0
        } else {
            self.gamma * self.max_value(next)
        };
        let row = self.values.entry(key).or_insert([self.q_init; Action::COUNT]);
        let q = &mut row[action.index()];
        *q += self.alpha * (reward + bootstrap - *q);
        debug_assert!(q.is_finite());
    }

    /// All entries in sorted key order.
    pub fn sorted_entries(&self) -> Vec<(StateGoalKey, [Real; Action::COUNT])> {
        let mut entries: Vec<_> = self.values.iter().map(|(k, v)| (*k, *v)).collect();
        entries.sort_by_key(|(k, _)| *k);
        entries
    }

    /// Order-independent digest of the whole table; a cheap witness that
    /// two tables are (or stayed) identical.
    pub fn fingerprint(&self) -> u64 {
        let mut acc = 0xcbf2_9ce4_8422_2325u64;
        for (key, row) in self.sorted_entries() {
            acc = rngstream::mix(acc ^ key.0);
            acc = rngstream::mix(acc ^ u64::from(key.1));
            for v in row {
                acc = rngstream::mix(acc ^ v.to_bits());
            }
        }
        acc
    }

    pub fn save(&self, path: &Path) -> Result<(), PolicyError> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        w.write_all(&MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(Action::COUNT as u16).to_le_bytes())?;
        w.write_all(&self.alpha.to_le_bytes())?;
        w.write_all(&self.gamma.to_le_bytes())?;
        w.write_all(&self.q_init.to_le_bytes())?;
        w.write_all(&(self.values.len() as u64).to_le_bytes())?;
        for (key, row) in self.sorted_entries() {
            w.write_all(&key.0.to_le_bytes())?;
            w.write_all(&key.1.to_le_bytes())?;
            for v in row {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<PolicyTable, PolicyError> {
        let mut r = BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != MAGIC {
            return Err(PolicyError::Format("bad magic".into()));
        }
        let version = read_u16(&mut r)?;
        if version != VERSION {
            return Err(PolicyError::Format(format!("unsupported version {version}")));
        }
        let actions = read_u16(&mut r)?;
        if usize::from(actions) != Action::COUNT {
            return Err(PolicyError::Format(format!(
                "table built for {actions} actions, expected {}",
                Action::COUNT
            )));
        }
        let alpha = read_f64(&mut r)?;
        let gamma = read_f64(&mut r)?;
        let q_init = read_f64(&mut r)?;
        let count = read_u64(&mut r)?;
        let mut values = HashMap::with_capacity(count as usize);
        for _ in 0..count {
            let state = read_u64(&mut r)?;
            let goal = read_u16(&mut r)?;
            let mut row = [0.0; Action::COUNT];
            for v in row.iter_mut() {
                *v = read_f64(&mut r)?;
            }
            values.insert((state, goal), row);
        }
        Ok(PolicyTable {
            values,
            alpha,
            gamma,
            q_init,
        })
    }
}

fn read_u16<R: Read>(r: &mut R) -> Result<u16, PolicyError> {
    let mut buf = [0u8; 2];
    r.read_exact(&mut buf)?;
    Ok(u16::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, PolicyError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64, PolicyError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rngstream::stream;

    fn table() -> PolicyTable {
        PolicyTable::new(&CurriculumConfig::desk_default())
    }

    #[test]
    fn update_moves_toward_bootstrapped_target() {
        let mut p = table();
        let key = (1, 0);
        let next = (2, 0);
        p.update(key, Action::Up, 1.0, next, false);
        // q_init 0.4, alpha 0.1, gamma 0.99: 0.4 + 0.1*(1 + 0.396 - 0.4)
        assert!((p.row(key)[Action::Up.index()] - 0.4996).abs() < 1e-12);
    }

    #[test]
    fn terminal_update_skips_bootstrap() {
        let mut p = table();
        let key = (1, 0);
        p.update(key, Action::Up, 1.0, (2, 0), true);
        assert!((p.row(key)[Action::Up.index()] - 0.46).abs() < 1e-12);
    }

    #[test]
    fn greedy_breaks_ties_toward_first_action() {
        let p = table();
        assert_eq!(p.best_action((7, 3)), Action::ALL[0]);
    }

    #[test]
    fn epsilon_one_always_explores_and_zero_never_does() {
        let mut p = table();
        let key = (5, 0);
        p.update(key, Action::Down, 10.0, key, true);
        let mut rng = stream(3, "eps", &[]);
        let mut seen = [false; Action::COUNT];
        for _ in 0..500 {
            seen[p.select_action(key, 1.0, &mut rng).index()] = true;
        }
        assert!(seen.iter().all(|s| *s), "eps=1 reaches every action");
        for _ in 0..50 {
            assert_eq!(p.select_action(key, 0.0, &mut rng), Action::Down);
        }
    }

    #[test]
    fn save_load_round_trip() {
        let mut p = table();
        let mut rng = stream(8, "fill", &[]);
        for i in 0..200u64 {
            p.update(
                (i * 31, (i % 7) as u16),
                Action::from_index((i % Action::COUNT as u64) as usize).unwrap(),
                rng.gen::<f64>() * 4.0 - 1.0,
                (i * 31 + 1, (i % 7) as u16),
                i % 5 == 0,
            );
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("policy.bin");
        p.save(&path).unwrap();
        let q = PolicyTable::load(&path).unwrap();
        assert_eq!(p.sorted_entries(), q.sorted_entries());
        assert_eq!(p.fingerprint(), q.fingerprint());
        assert_eq!(p.alpha, q.alpha);
        assert_eq!(p.gamma, q.gamma);
        assert_eq!(p.q_init, q.q_init);
    }

    #[test]
    fn load_rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("not-a-policy.bin");
        std::fs::write(&path, b"PKZQ0000000000000000").unwrap();
        assert!(matches!(
            PolicyTable::load(&path),
            Err(PolicyError::Format(_))
        ));
    }

    #[test]
    fn fingerprint_tracks_content() {
        let mut p = table();
        let f0 = p.fingerprint();
        p.update((9, 1), Action::Up, 1.0, (9, 1), true);
        assert_ne!(f0, p.fingerprint());
    }

    /// Deterministic 3-state chain: action index 1 moves right and pays 1
    /// on leaving the last state; action 0 moves left; everything else
    /// stays put. Rewards are otherwise zero.
    fn chain_step(s: usize, a: usize) -> (Option<usize>, f64) {
        match a {
            1 if s == 2 => (None, 1.0),
            1 => (Some(s + 1), 0.0),
            0 => (Some(s.saturating_sub(1)), 0.0),
            _ => (Some(s), 0.0),
        }
    }

    #[test]
    fn chain_mdp_matches_value_iteration() {
        let gamma = 0.99;
        let mut v = [0.0f64; 3];
        for _ in 0..2000 {
            for s in 0..3 {
                v[s] = (0..Action::COUNT)
                    .map(|a| {
                        let (ns, r) = chain_step(s, a);
                        r + gamma * ns.map_or(0.0, |n| v[n])
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
            }
        }
        let oracle_action = |s: usize| -> usize {
            (0..Action::COUNT)
                .map(|a| {
                    let (ns, r) = chain_step(s, a);
                    (a, r + gamma * ns.map_or(0.0, |n| v[n]))
                })
                .fold((0, f64::NEG_INFINITY), |acc, (a, q)| {
                    if q > acc.1 {
                        (a, q)
                    } else {
                        acc
                    }
                })
                .0
        };

        let mut cfg = CurriculumConfig::desk_default();
        cfg.alpha = 0.2;
        let mut p = PolicyTable::new(&cfg);
        let mut rng = stream(41, "chain", &[]);
        for _ in 0..500 {
            let mut s = 0usize;
            for _ in 0..40 {
                let key = (s as u64, 0u16);
                let action = p.select_action(key, 0.5, &mut rng);
                let (ns, r) = chain_step(s, action.index());
                match ns {
                    None => {
                        p.update(key, action, r, (0, 0), true);
                        break;
                    }
                    Some(n) => {
                        p.update(key, action, r, (n as u64, 0), false);
                        s = n;
                    }
                }
            }
        }
        for s in 0..3 {
            assert_eq!(
                p.best_action((s as u64, 0)).index(),
                oracle_action(s),
                "greedy choice at state {s}"
            );
        }
        assert!((p.row((2, 0))[1] - v[2]).abs() < 0.05);
    }
}
