use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

/// A word in noncommuting letters `x_0, x_1, ...`.
///
/// Stored run-length encoded: `x_0^5 x_1 x_0^2` is `[(0,5), (1,1), (0,2)]`.
/// Adjacent runs always carry different letters and every count is positive,
/// so the encoding is canonical and the derived `Eq`/`Hash` are word equality.
/// High powers of a single letter, which dominate the Herglotz approximants,
/// then cost O(1) to store and concatenate.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct FreeWord {
    runs: SmallVec<[(u32, u32); 2]>,
    len: usize,
}

impl FreeWord {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn letter(i: usize) -> Self {
        Self::power(i, 1)
    }

    pub fn power(i: usize, k: usize) -> Self {
        let mut w = Self::empty();
        w.push_run(i as u32, k as u32);
        w
    }

    pub fn from_letters<I: IntoIterator<Item = usize>>(letters: I) -> Self {
        let mut w = Self::empty();
        for l in letters {
            w.push_run(l as u32, 1);
        }
        w
    }

    fn push_run(&mut self, letter: u32, count: u32) {
        if count == 0 {
            return;
        }
        self.len += count as usize;
        match self.runs.last_mut() {
            Some((l, c)) if *l == letter => *c += count,
            _ => self.runs.push((letter, count)),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `(letter, multiplicity)` runs, left to right.
    pub fn runs(&self) -> &[(u32, u32)] {
        &self.runs
    }

    pub fn max_letter(&self) -> Option<usize> {
        self.runs.iter().map(|&(l, _)| l as usize).max()
    }

    pub fn letters(&self) -> impl Iterator<Item = usize> + '_ {
        self.letters_from(0)
    }

    /// Letters starting at position `start`, skipping whole runs without
    /// expanding them.
    pub fn letters_from(&self, start: usize) -> impl Iterator<Item = usize> + '_ {
        let mut skip = start;
        let mut first = self.runs.len();
        let mut offset = 0;
        for (k, &(_, c)) in self.runs.iter().enumerate() {
            if skip < c as usize {
                first = k;
                offset = skip;
                break;
            }
            skip -= c as usize;
        }
        self.runs[first.min(self.runs.len())..]
            .iter()
            .enumerate()
            .flat_map(move |(k, &(l, c))| {
                let from = if k == 0 { offset } else { 0 };
                std::iter::repeat_n(l as usize, c as usize - from)
            })
    }

    pub fn concat(&self, other: &FreeWord) -> FreeWord {
        let mut out = self.clone();
        for &(l, c) in &other.runs {
            out.push_run(l, c);
        }
        out
    }

    /// Plain lexicographic order (a proper prefix sorts first).
    pub fn lex_cmp(&self, other: &FreeWord) -> Ordering {
        let (a, b) = (&self.runs, &other.runs);
        let (mut i, mut j) = (0, 0);
        let (mut used_a, mut used_b) = (0u32, 0u32);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(&(la, ca)), Some(&(lb, cb))) => {
                    if la != lb {
                        return la.cmp(&lb);
                    }
                    let step = (ca - used_a).min(cb - used_b);
                    used_a += step;
                    used_b += step;
                    if used_a == ca {
                        i += 1;
                        used_a = 0;
                    }
                    if used_b == cb {
                        j += 1;
                        used_b = 0;
                    }
                }
            }
        }
    }

    /// Length of the longest common prefix.
    pub fn common_prefix_len(&self, other: &FreeWord) -> usize {
        let mut common = 0;
        for (&(la, ca), &(lb, cb)) in self.runs.iter().zip(other.runs.iter()) {
            if la != lb {
                break;
            }
            common += ca.min(cb) as usize;
            if ca != cb {
                break;
            }
        }
        common
    }
}

impl Ord for FreeWord {
    /// Length first, then lexicographic.
    fn cmp(&self, other: &Self) -> Ordering {
        self.len.cmp(&other.len).then_with(|| self.lex_cmp(other))
    }
}

impl PartialOrd for FreeWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.runs.is_empty() {
            return f.write_str("1");
        }
        for &(l, c) in &self.runs {
            if c == 1 {
                write!(f, "x{l}")?;
            } else {
                write!(f, "x{l}^{c}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for FreeWord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.letters())
    }
}

impl<'de> Deserialize<'de> for FreeWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let letters: Vec<usize> = Vec::deserialize(d)?;
        Ok(FreeWord::from_letters(letters))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn word() -> impl Strategy<Value = Vec<usize>> {
        prop::collection::vec(0usize..3, 0..12)
    }

    #[test]
    fn runs_are_merged() {
        let w = FreeWord::from_letters([0, 0, 1, 0, 0, 0]);
        assert_eq!(w.runs(), &[(0, 2), (1, 1), (0, 3)]);
        assert_eq!(w.len(), 6);
        assert_eq!(w.to_string(), "x0^2x1x0^3");
        assert_eq!(FreeWord::empty().to_string(), "1");
    }

    #[test]
    fn canonical_order_is_length_then_lex() {
        let mut ws = vec![
            FreeWord::from_letters([1, 0]),
            FreeWord::from_letters([1]),
            FreeWord::empty(),
            FreeWord::from_letters([0, 1]),
            FreeWord::from_letters([0]),
        ];
        ws.sort();
        let got: Vec<String> = ws.iter().map(|w| w.to_string()).collect();
        assert_eq!(got, ["1", "x0", "x1", "x0x1", "x1x0"]);
    }

    proptest! {
        #[test]
        fn concat_matches_vec_concat(a in word(), b in word()) {
            let w = FreeWord::from_letters(a.clone()).concat(&FreeWord::from_letters(b.clone()));
            let mut ab = a.clone();
            ab.extend(b);
            prop_assert_eq!(&w, &FreeWord::from_letters(ab.clone()));
            prop_assert_eq!(w.letters().collect::<Vec<_>>(), ab);
        }

        #[test]
        fn orders_match_expanded_vectors(a in word(), b in word()) {
            let (wa, wb) = (FreeWord::from_letters(a.clone()), FreeWord::from_letters(b.clone()));
            prop_assert_eq!(wa.lex_cmp(&wb), a.cmp(&b));
            prop_assert_eq!(wa.cmp(&wb), a.len().cmp(&b.len()).then(a.cmp(&b)));
            let common = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
            prop_assert_eq!(wa.common_prefix_len(&wb), common);
        }

        #[test]
        fn letters_from_skips(a in word(), start in 0usize..14) {
            let w = FreeWord::from_letters(a.clone());
            let expect: Vec<usize> = a.iter().copied().skip(start).collect();
            prop_assert_eq!(w.letters_from(start).collect::<Vec<_>>(), expect);
        }
    }
}
