//! Permutations of `{0,…,d−1}` and the winning-permutation sets of XOR-d games.

use std::collections::HashSet;
use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let d = map.len();
        if d == 0 {
            return Err(Error::InvalidArgument("empty permutation".into()));
        }
        let mut seen = vec![false; d];
        for &b in &map {
            if b >= d || seen[b] {
                return Err(Error::InvalidArgument(format!("{map:?} is not a bijection on [{d}]")));
            }
            seen[b] = true;
        }
        Ok(Self { map })
    }

    pub fn identity(d: usize) -> Self {
        Self { map: (0..d).collect() }
    }

    /// σ_k(x) = x + k mod d, the switching maps of L_d′.
    pub fn translation(d: usize, k: usize) -> Self {
        Self { map: (0..d).map(|x| (x + k) % d).collect() }
    }

    /// π_i(a) = i − a mod d.
    pub fn reflection(d: usize, i: usize) -> Self {
        Self { map: (0..d).map(|a| (i % d + d - a) % d).collect() }
    }

    pub fn d(&self) -> usize {
        self.map.len()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, a: usize) -> usize {
        self.map[a]
    }

    /// `self ∘ other`, i.e. `other` acts first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.d(), other.d(), "composing permutations of different degree");
        Permutation { map: other.map.iter().map(|&x| self.map[x]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.d()];
        for (a, &b) in self.map.iter().enumerate() {
            inv[b] = a;
        }
        Permutation { map: inv }
    }

    pub fn fixed_points(&self) -> usize {
        self.map.iter().enumerate().filter(|(a, b)| a == *b).count()
    }

    pub fn is_involution(&self) -> bool {
        self.map.iter().enumerate().all(|(a, &b)| self.map[b] == a)
    }

    pub fn is_identity(&self) -> bool {
        self.fixed_points() == self.d()
    }

    /// Index `i` with `self = π_i ∈ L_d`, if any.
    pub fn ld_index(&self) -> Option<usize> {
        let d = self.d();
        let i = self.map[0];
        (*self == Permutation::reflection(d, i)).then_some(i)
    }

    /// Index `k` with `self = σ_k ∈ L_d′`, if any.
    pub fn translation_index(&self) -> Option<usize> {
        let d = self.d();
        let k = self.map[0];
        (*self == Permutation::translation(d, k)).then_some(k)
    }
}

/// Cycle notation, fixed points omitted; the identity prints as `()`.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.d();
        let mut seen = vec![false; d];
        let mut any = false;
        let sep = if d > 10 { "," } else { "" };
        for start in 0..d {
            if seen[start] || self.map[start] == start {
                continue;
            }
            any = true;
            let mut cyc = vec![start];
            seen[start] = true;
            let mut x = self.map[start];
            while x != start {
                seen[x] = true;
                cyc.push(x);
                x = self.map[x];
            }
            write!(f, "({})", cyc.iter().join(sep))?;
        }
        if !any {
            f.write_str("()")?;
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PermutationSet {
    d: usize,
    perms: Vec<Permutation>,
}

impl PermutationSet {
    pub fn new(perms: Vec<Permutation>) -> Result<Self> {
        let d = perms.first().map(Permutation::d).unwrap_or(0);
        if d == 0 {
            return Err(Error::InvalidArgument("empty permutation set".into()));
        }
        if perms.iter().any(|p| p.d() != d) {
            return Err(Error::InvalidArgument("permutations act on different sets".into()));
        }
        if perms.len() != d {
            return Err(Error::InvalidArgument(format!("expected {d} permutations, got {}", perms.len())));
        }
        Ok(Self { d, perms })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn get(&self, i: usize) -> &Permutation {
        &self.perms[i]
    }
}

/// The canonical set L_d with `perms[i](a) = i − a mod d`.
pub fn make_ld(d: usize) -> Result<PermutationSet> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("d must be at least 2, got {d}")));
    }
    Ok(PermutationSet { d, perms: (0..d).map(|i| Permutation::reflection(d, i)).collect() })
}

/// The switching set L_d′ of translations σ_k(x) = x + k.
pub fn translations(d: usize) -> Result<PermutationSet> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("d must be at least 2, got {d}")));
    }
    Ok(PermutationSet { d, perms: (0..d).map(|k| Permutation::translation(d, k)).collect() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum P1P2Violation {
    /// `perms[index]` maps `point` somewhere that does not map back.
    NotInvolution { index: usize, point: usize },
    /// The ordered pair `(a, b)` is produced by more than one permutation.
    RepeatedPair { a: usize, b: usize },
}

impl fmt::Display for P1P2Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            P1P2Violation::NotInvolution { index, point } => {
                write!(f, "P1 fails: permutation {index} is not an involution at {point}")
            }
            P1P2Violation::RepeatedPair { a, b } => write!(f, "P2 fails: pair ({a},{b}) repeated"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct P1P2Report {
    pub p1: bool,
    pub p2: bool,
    /// First violated property, P1 checked before P2.
    pub violation: Option<P1P2Violation>,
}

impl P1P2Report {
    pub fn holds(&self) -> bool {
        self.p1 && self.p2
    }
}

pub fn verify_p1p2(set: &PermutationSet) -> P1P2Report {
    let d = set.d;
    let mut violation = None;
    let mut p1 = true;
    for (index, p) in set.perms.iter().enumerate() {
        if let Some(point) = (0..d).find(|&a| p.apply(p.apply(a)) != a) {
            p1 = false;
            violation.get_or_insert(P1P2Violation::NotInvolution { index, point });
        }
    }
    let mut p2 = true;
    let mut seen = vec![false; d * d];
    'outer: for p in &set.perms {
        for a in 0..d {
            let b = p.apply(a);
            if std::mem::replace(&mut seen[a * d + b], true) {
                p2 = false;
                violation.get_or_insert(P1P2Violation::RepeatedPair { a, b });
                break 'outer;
            }
        }
    }
    P1P2Report { p1, p2, violation }
}

/// d / ((d−1)/2)! · ∏_{j=0}^{(d−3)/2} C(d−2j−1, 2), the number of involutions
/// with exactly one fixed point for odd d.
pub fn m_formula(d: usize) -> u128 {
    assert!(d % 2 == 1 && d >= 3);
    let h = (d - 1) / 2;
    let mut num = d as u128;
    for j in 0..h {
        let m = (d - 2 * j - 1) as u128;
        num *= m * (m - 1) / 2;
    }
    let fact: u128 = (1..=h as u128).product();
    num / fact
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct P1P2Census {
    pub m_formula: u128,
    pub m_bruteforce: u128,
    pub all_sets_are_relabelings: bool,
    /// Number of distinct P1/P2 sets found by exhaustive search.
    pub sets: usize,
}

pub fn count_p1p2_structures(d: usize) -> Result<P1P2Census> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!("d must be an odd integer ≥ 3, got {d}")));
    }
    if d % 2 == 0 {
        return Err(Error::Unsupported(format!("d = {d} is even; the characterization only holds for odd d")));
    }
    if d > 7 {
        return Err(Error::ResourceLimit(format!("d = {d} exceeds the exhaustive limit 7")));
    }
    let m_bruteforce = (0..d)
        .permutations(d)
        .filter(|m| {
            let p = Permutation { map: m.clone() };
            p.is_involution() && p.fixed_points() == 1
        })
        .count() as u128;
    let sets = enumerate_p1p2_sets(d)?;
    let conjugates = ld_conjugates(d);
    let all = sets.iter().all(|s| conjugates.contains(&sorted_maps(s)));
    Ok(P1P2Census { m_formula: m_formula(d), m_bruteforce, all_sets_are_relabelings: all, sets: sets.len() })
}

fn sorted_maps(set: &PermutationSet) -> Vec<Vec<usize>> {
    let mut v: Vec<Vec<usize>> = set.perms.iter().map(|p| p.map.clone()).collect();
    v.sort();
    v
}

/// All sets {Π π Π⁻¹ : π ∈ L_d} over Π ∈ S_d, each as a sorted list of maps.
fn ld_conjugates(d: usize) -> HashSet<Vec<Vec<usize>>> {
    let ld = make_ld(d).expect("d ≥ 2");
    (0..d)
        .permutations(d)
        .map(|m| {
            let pi = Permutation { map: m };
            let inv = pi.inverse();
            let conj = PermutationSet { d, perms: ld.perms.iter().map(|p| pi.compose(p).compose(&inv)).collect() };
            sorted_maps(&conj)
        })
        .collect()
}

/// True iff `set` equals a simultaneous relabeling of L_d (as an unordered set).
pub fn is_relabeling_of_ld(set: &PermutationSet) -> bool {
    set.d <= 8 && ld_conjugates(set.d).contains(&sorted_maps(set))
}

/// Every unordered set of d permutations satisfying P1 and P2, ordered by
/// image of 0 within each set. Works for any d ≤ 7.
pub fn enumerate_p1p2_sets(d: usize) -> Result<Vec<PermutationSet>> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("d must be at least 2, got {d}")));
    }
    if d > 7 {
        return Err(Error::ResourceLimit(format!("d = {d} exceeds the exhaustive limit 7")));
    }
    // P2 forces exactly one permutation with π(0) = b for each b.
    let mut by_image: Vec<Vec<Permutation>> = vec![Vec::new(); d];
    for m in (0..d).permutations(d) {
        let p = Permutation { map: m };
        if p.is_involution() {
            by_image[p.map[0]].push(p);
        }
    }
    let mut out = Vec::new();
    let mut used = vec![false; d * d];
    let mut chosen = Vec::with_capacity(d);
    extend_p1p2(d, &by_image, &mut used, &mut chosen, &mut out);
    Ok(out)
}

fn extend_p1p2(
    d: usize,
    by_image: &[Vec<Permutation>],
    used: &mut [bool],
    chosen: &mut Vec<Permutation>,
    out: &mut Vec<PermutationSet>,
) {
    let b = chosen.len();
    if b == d {
        out.push(PermutationSet { d, perms: chosen.clone() });
        return;
    }
    for p in &by_image[b] {
        if (0..d).any(|a| used[a * d + p.map[a]]) {
            continue;
        }
        for a in 0..d {
            used[a * d + p.map[a]] = true;
        }
        chosen.push(p.clone());
        extend_p1p2(d, by_image, used, chosen, out);
        chosen.pop();
        for a in 0..d {
            used[a * d + p.map[a]] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l3_maps() {
        let l3 = make_ld(3).unwrap();
        assert_eq!(l3.get(0).map(), &[0, 2, 1]);
        assert_eq!(l3.get(1).map(), &[1, 0, 2]);
        assert_eq!(l3.get(2).map(), &[2, 1, 0]);
        assert_eq!(l3.get(0).to_string(), "(12)");
        assert_eq!(l3.get(1).to_string(), "(01)");
        assert_eq!(l3.get(2).to_string(), "(02)");
        assert!(verify_p1p2(&l3).holds());
    }

    #[test]
    fn l2_is_identity_and_swap() {
        let l2 = make_ld(2).unwrap();
        assert!(l2.get(0).is_identity());
        assert_eq!(l2.get(1).map(), &[1, 0]);
        assert!(make_ld(1).is_err());
    }

    #[test]
    fn l5_fixed_points() {
        let l5 = make_ld(5).unwrap();
        for i in 0..5 {
            let p = l5.get(i);
            assert_eq!(p.fixed_points(), 1);
            let fp = (0..5).find(|&a| p.apply(a) == a).unwrap();
            assert_eq!(fp, 3 * i % 5);
        }
    }

    #[test]
    fn p1p2_violations() {
        let id = Permutation::identity(2);
        let s = PermutationSet::new(vec![id.clone(), id]).unwrap();
        let r = verify_p1p2(&s);
        assert!(r.p1 && !r.p2);
        assert_eq!(r.violation, Some(P1P2Violation::RepeatedPair { a: 0, b: 0 }));

        let cyc = Permutation::new(vec![1, 2, 0]).unwrap();
        let s = PermutationSet::new(vec![cyc, Permutation::identity(3), Permutation::reflection(3, 1)]).unwrap();
        let r = verify_p1p2(&s);
        assert!(!r.p1);
        assert!(matches!(r.violation, Some(P1P2Violation::NotInvolution { index: 0, .. })));
    }

    #[test]
    fn m_formula_values() {
        assert_eq!(m_formula(3), 3);
        assert_eq!(m_formula(5), 15);
        assert_eq!(m_formula(7), 105);
        assert_eq!(m_formula(9), 945);
    }

    #[test]
    fn census_small() {
        let c = count_p1p2_structures(3).unwrap();
        assert_eq!((c.m_formula, c.m_bruteforce, c.all_sets_are_relabelings), (3, 3, true));
        let c = count_p1p2_structures(5).unwrap();
        assert_eq!((c.m_formula, c.m_bruteforce, c.all_sets_are_relabelings), (15, 15, true));
        assert!(matches!(count_p1p2_structures(4), Err(Error::Unsupported(_))));
        assert!(matches!(count_p1p2_structures(9), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn composition_convention() {
        let s1 = Permutation::translation(3, 1);
        let p0 = Permutation::reflection(3, 0);
        // (π_0 ∘ σ_1)(x) = −(x + 1)
        assert_eq!(p0.compose(&s1), Permutation::reflection(3, 2));
        assert_eq!(s1.compose(&p0), Permutation::reflection(3, 1));
        assert_eq!(p0.compose(&p0), Permutation::identity(3));
        assert_eq!(s1.inverse(), Permutation::translation(3, 2));
    }

    #[test]
    fn index_lookup() {
        assert_eq!(Permutation::reflection(5, 3).ld_index(), Some(3));
        assert_eq!(Permutation::translation(5, 3).translation_index(), Some(3));
        assert_eq!(Permutation::translation(5, 3).ld_index(), None);
    }
}
