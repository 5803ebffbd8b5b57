//! State reduction by downward bisimulation.

use std::collections::HashMap;

use super::{Letter, State, TreeAutomaton};

/// Merges states with the same leaf letters and the same transitions up to
/// the current partition, iterated to a fixpoint. The result is trimmed and
/// language-equivalent; it is not canonical.
pub fn reduce(a: &TreeAutomaton) -> TreeAutomaton {
    let a = a.trim();
    let n = a.n_states() as usize;
    if n <= 1 {
        return a;
    }
    let mut class = vec![0u32; n];
    let mut count = 1;
    loop {
        let mut ids: HashMap<(u32, Vec<Letter>, Vec<(Letter, u32, u32)>), u32> = HashMap::new();
        let mut next = vec![0u32; n];
        for (q, slot) in next.iter_mut().enumerate() {
            let leaves: Vec<Letter> = a.leaves_of(q as State).iter().map(|&(_, l)| l).collect();
            let mut moves: Vec<(Letter, u32, u32)> = a
                .transitions_from(q as State)
                .iter()
                .map(|t| (t.letter, class[t.left as usize], class[t.right as usize]))
                .collect();
            moves.sort_unstable();
            moves.dedup();
            let len = ids.len() as u32;
            *slot = *ids.entry((class[q], leaves, moves)).or_insert(len);
        }
        class = next;
        if ids.len() == count {
            break;
        }
        count = ids.len();
    }
    if count == n {
        return a;
    }
    a.quotient(&class, count as u32)
}
