//! The finite presentation read off the multiplication tables, and a rewriting
//! engine that certifies words equal their normal forms using only its relations.
//!
//! For each cross pair `(a, b)` and target `c` the relations are `a^i b = c^j` for
//! each `i` in the finite head of `T(a,b,c)`, plus `a^p b = c^r` and
//! `a^(p+q) b = c^(r+s)` for the progression. Every other `a^k b` follows from those
//! two by induction on `t` in `k = p + q·t`; [`derive`] replays that induction.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::analysis::{t_set_of_map, Finding, ShapeViolation};
use crate::model::{length_lex, words_of_length, Element, Gen, SemigroupSpec, Word};
use crate::wordprob::Multiplier;

/// `lhs = rhs` with `lhs` the larger side in length-lex order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    pub lhs: Word,
    pub rhs: Word,
}

impl Relation {
    pub fn new(u: Word, v: Word) -> Self {
        if length_lex(u.letters(), v.letters()) == Ordering::Less {
            Relation { lhs: v, rhs: u }
        } else {
            Relation { lhs: u, rhs: v }
        }
    }

    fn side(&self, forward: bool) -> (&[Gen], &[Gen]) {
        if forward {
            (self.lhs.letters(), self.rhs.letters())
        } else {
            (self.rhs.letters(), self.lhs.letters())
        }
    }
}

impl PartialOrd for Relation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Relation {
    fn cmp(&self, other: &Self) -> Ordering {
        length_lex(self.lhs.letters(), other.lhs.letters())
            .then_with(|| length_lex(self.rhs.letters(), other.rhs.letters()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub names: Vec<String>,
    pub relations: Vec<Relation>,
}

impl Presentation {
    fn word(&self, letters: &[Gen]) -> String {
        let sep = if self.names.iter().all(|n| n.chars().count() == 1) { "" } else { " " };
        letters.iter().map(|g| self.names[g.0].as_str()).collect::<Vec<_>>().join(sep)
    }

    pub fn render_relation(&self, r: &Relation) -> String {
        format!("{} = {}", self.word(r.lhs.letters()), self.word(r.rhs.letters()))
    }

    /// One `u = v` line per relation, sorted.
    pub fn lines(&self) -> Vec<String> {
        self.relations.iter().map(|r| self.render_relation(r)).collect()
    }

    pub fn render(&self) -> String {
        self.lines().iter().map(|l| format!("{l}\n")).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({ "generators": self.names, "relations": self.lines() })
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn power_word(g: Gen, k: u64) -> Vec<Gen> {
    vec![g; k as usize]
}

/// The presentation built from the T-sets of generator pairs. Forced relations
/// `a^k a = a^(k+1)` are letter-identical and omitted.
pub fn extract_presentation(spec: &SemigroupSpec) -> Result<Presentation, ShapeViolation> {
    let mut relations = Vec::new();
    for a in spec.gens() {
        for b in spec.gens() {
            if a == b {
                continue;
            }
            let map = spec.table(a, b);
            for c in spec.gens() {
                let t = t_set_of_map(map, a, &Element::generator(b), c)?;
                let mut points = t.finite.clone();
                if let Some((p, q)) = t.prog {
                    points.extend([p, p + q]);
                }
                for i in points {
                    let target = map.apply_u64(i);
                    let exp = target.exp.to_u64().expect("relation exponent fits a word");
                    let mut lhs = power_word(a, i);
                    lhs.push(b);
                    let rhs = power_word(target.gen, exp);
                    if lhs != rhs {
                        relations.push(Relation::new(Word::from_vec_unchecked(lhs), Word::from_vec_unchecked(rhs)));
                    }
                }
            }
        }
    }
    relations.sort();
    relations.dedup();
    Ok(Presentation { names: spec.names().to_vec(), relations })
}

/// Relations whose sides have different normal forms.
pub fn unsatisfied_relations(spec: &SemigroupSpec, pres: &Presentation) -> Vec<Finding> {
    let mult = Multiplier::new(spec);
    pres.relations
        .iter()
        .filter(|r| mult.normalize(&r.lhs) != mult.normalize(&r.rhs))
        .map(|r| Finding::new("relation_sound", pres.render_relation(r)))
        .collect()
}

/// One elementary rewrite: replace an occurrence of one side of `relation` at
/// `position` by the other side. `forward` means `lhs → rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub relation: usize,
    pub position: usize,
    pub forward: bool,
    pub result: Word,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub start: Word,
    pub steps: Vec<Step>,
}

impl Derivation {
    pub fn end(&self) -> &Word {
        self.steps.last().map_or(&self.start, |s| &s.result)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The same rewrites read backwards, from `end` to `start`.
    pub fn reversed(&self) -> Derivation {
        let mut words: Vec<&Word> = vec![&self.start];
        words.extend(self.steps.iter().map(|s| &s.result));
        let steps = self
            .steps
            .iter()
            .enumerate()
            .rev()
            .map(|(i, s)| Step { relation: s.relation, position: s.position, forward: !s.forward, result: words[i].clone() })
            .collect();
        Derivation { start: self.end().clone(), steps }
    }

    pub fn to_json(&self, pres: &Presentation) -> Value {
        json!({
            "start": pres.word(self.start.letters()),
            "steps": self.steps.iter().map(|s| json!({
                "relation": s.relation,
                "position": s.position,
                "direction": if s.forward { "forward" } else { "backward" },
                "word": pres.word(s.result.letters()),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Verifies every step as a single legal replacement; shares no code with [`derive`].
pub fn check_derivation(pres: &Presentation, d: &Derivation) -> bool {
    let mut cur: &[Gen] = d.start.letters();
    for s in &d.steps {
        let Some(r) = pres.relations.get(s.relation) else {
            return false;
        };
        let (from, to) = if s.forward { (&r.lhs, &r.rhs) } else { (&r.rhs, &r.lhs) };
        let (from, to) = (from.letters(), to.letters());
        if s.position + from.len() > cur.len() || &cur[s.position..s.position + from.len()] != from {
            return false;
        }
        let mut next = cur[..s.position].to_vec();
        next.extend_from_slice(to);
        next.extend_from_slice(&cur[s.position + from.len()..]);
        if next.as_slice() != s.result.letters() {
            return false;
        }
        cur = s.result.letters();
    }
    true
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeriveError {
    #[error("no derivation found within {0} steps (inconclusive)")]
    BudgetExhausted(usize),
}

pub fn default_budget(u: &Word, v: &Word) -> usize {
    10 * u.len() + v.len()
}

/// Which side of relation `idx` is `c^i b`, and what it equals.
#[derive(Clone, Copy, Debug)]
struct Point {
    idx: usize,
    // direction that turns `c^i b` into `d^m`
    forward: bool,
    to: Gen,
    exp: u64,
}

/// Relation points grouped by `(c, b)`: `c^i b → d^m`.
struct PointIndex {
    points: HashMap<(Gen, Gen), BTreeMap<u64, Point>>,
}

fn as_power(w: &[Gen]) -> Option<(Gen, u64)> {
    let g = *w.first()?;
    w.iter().all(|&x| x == g).then_some((g, w.len() as u64))
}

fn as_power_then_letter(w: &[Gen]) -> Option<(Gen, u64, Gen)> {
    let (&b, head) = w.split_last()?;
    let (c, i) = as_power(head)?;
    (c != b).then_some((c, i, b))
}

impl PointIndex {
    fn new(pres: &Presentation) -> Self {
        let mut points: HashMap<(Gen, Gen), BTreeMap<u64, Point>> = HashMap::new();
        for (idx, r) in pres.relations.iter().enumerate() {
            for forward in [true, false] {
                let (from, to) = r.side(forward);
                if let (Some((c, i, b)), Some((d, m))) = (as_power_then_letter(from), as_power(to)) {
                    points.entry((c, b)).or_default().insert(i, Point { idx, forward, to: d, exp: m });
                }
            }
        }
        PointIndex { points }
    }

    /// The period and the two relation points of the progression through `j`.
    fn progression(&self, c: Gen, b: Gen, j: u64) -> Option<(u64, Point, Point)> {
        let pts = self.points.get(&(c, b))?;
        let mut by_target: BTreeMap<Gen, Vec<(u64, Point)>> = BTreeMap::new();
        for (&i, &pt) in pts {
            by_target.entry(pt.to).or_default().push((i, pt));
        }
        by_target.values().find_map(|v| {
            let [.., (p, first), (pq, second)] = v.as_slice() else {
                return None;
            };
            let q = pq - p;
            (j > *pq && (j - p) % q == 0).then_some((q, *first, *second))
        })
    }
}

struct Rewriter<'p> {
    pres: &'p Presentation,
    index: PointIndex,
    budget: usize,
}

impl Rewriter<'_> {
    fn apply(&self, w: &mut Vec<Gen>, steps: &mut Vec<Step>, idx: usize, pos: usize, forward: bool) -> Option<()> {
        if steps.len() >= self.budget {
            return None;
        }
        let (from, to) = self.pres.relations[idx].side(forward);
        if w.get(pos..pos + from.len())? != from {
            return None;
        }
        w.splice(pos..pos + from.len(), to.iter().copied());
        steps.push(Step { relation: idx, position: pos, forward, result: Word::from_vec_unchecked(w.clone()) });
        Some(())
    }

    /// Rewrites `c^j b` at offset `o` into a power of one generator.
    fn pair(&self, w: &mut Vec<Gen>, steps: &mut Vec<Step>, o: usize, c: Gen, j: u64, b: Gen) -> Option<(Gen, u64)> {
        if let Some(pt) = self.index.points.get(&(c, b)).and_then(|m| m.get(&j)) {
            self.apply(w, steps, pt.idx, o, pt.forward)?;
            return Some((pt.to, pt.exp));
        }
        let (q, first, second) = self.index.progression(c, b, j)?;
        // c^q · c^(j−q) b → c^q d^(r+s(t−1)) → c^q c^p b d^(s(t−1)) → d^(r+st)
        let (d, m) = self.pair(w, steps, o + q as usize, c, j - q, b)?;
        self.apply(w, steps, first.idx, o + q as usize, !first.forward)?;
        self.apply(w, steps, second.idx, o, second.forward)?;
        Some((d, m - first.exp + second.exp))
    }

    /// Left-to-right fold into the expanded normal form word.
    fn fold(&self, u: &Word) -> Option<Derivation> {
        let mut w = u.letters().to_vec();
        let mut steps = Vec::new();
        let mut c = w[0];
        let mut j = 1u64;
        while (j as usize) < w.len() {
            let b = w[j as usize];
            if b == c {
                j += 1;
            } else {
                c = self.pair(&mut w, &mut steps, 0, c, j, b)?.0;
                j = w.iter().take_while(|&&g| g == c).count() as u64;
            }
        }
        Some(Derivation { start: u.clone(), steps })
    }

    /// Leftmost length-lex-reducing rewrites until none applies.
    fn greedy(&self, u: &Word) -> Derivation {
        let mut w = u.letters().to_vec();
        let mut steps = Vec::new();
        'outer: while steps.len() < self.budget {
            for pos in 0..w.len() {
                for (idx, r) in self.pres.relations.iter().enumerate() {
                    let from = r.lhs.letters();
                    if w[pos..].starts_with(from) && r.lhs != r.rhs {
                        self.apply(&mut w, &mut steps, idx, pos, true);
                        continue 'outer;
                    }
                }
            }
            break;
        }
        Derivation { start: u.clone(), steps }
    }

    fn neighbours(&self, w: &[Gen], cap: usize) -> Vec<(Vec<Gen>, usize, usize, bool)> {
        let mut out = Vec::new();
        for (idx, r) in self.pres.relations.iter().enumerate() {
            for forward in [true, false] {
                let (from, to) = r.side(forward);
                if w.len() - from.len().min(w.len()) + to.len() > cap {
                    continue;
                }
                for pos in 0..w.len() {
                    if w[pos..].starts_with(from) {
                        let mut next = w[..pos].to_vec();
                        next.extend_from_slice(to);
                        next.extend_from_slice(&w[pos + from.len()..]);
                        out.push((next, idx, pos, forward));
                    }
                }
            }
        }
        out
    }

    /// Bidirectional breadth-first search over elementary rewrites.
    fn meet(&self, u: &Word, v: &Word) -> Option<Derivation> {
        const NODE_CAP: usize = 200_000;
        let longest = self.pres.relations.iter().map(|r| r.lhs.len()).max().unwrap_or(0);
        let cap = u.len().max(v.len()) + 2 * longest;
        type Parents = HashMap<Vec<Gen>, Option<(Vec<Gen>, usize, usize, bool)>>;
        let mut sides: [Parents; 2] = [HashMap::new(), HashMap::new()];
        let mut queues: [VecDeque<(Vec<Gen>, usize)>; 2] = [VecDeque::new(), VecDeque::new()];
        for (i, w) in [u, v].into_iter().enumerate() {
            sides[i].insert(w.letters().to_vec(), None);
            queues[i].push_back((w.letters().to_vec(), 0));
        }
        let path = |parents: &Parents, mut w: Vec<Gen>| {
            // steps from the root to w, each as (previous word, idx, pos, forward)
            let mut out = Vec::new();
            while let Some(Some((prev, idx, pos, fwd))) = parents.get(&w) {
                out.push((w.clone(), *idx, *pos, *fwd));
                w = prev.clone();
            }
            out.reverse();
            out
        };
        let mut meeting = sides[0].contains_key(v.letters()).then(|| v.letters().to_vec());
        let mut turn = 0;
        while meeting.is_none() {
            if queues[0].is_empty() && queues[1].is_empty() {
                return None;
            }
            if queues[turn].is_empty() {
                turn = 1 - turn;
            }
            let (w, depth) = queues[turn].pop_front().expect("nonempty");
            if 2 * depth >= self.budget || sides[0].len() + sides[1].len() > NODE_CAP {
                return None;
            }
            for (next, idx, pos, fwd) in self.neighbours(&w, cap) {
                if sides[turn].contains_key(&next) {
                    continue;
                }
                sides[turn].insert(next.clone(), Some((w.clone(), idx, pos, fwd)));
                if sides[1 - turn].contains_key(&next) {
                    meeting = Some(next);
                    break;
                }
                queues[turn].push_back((next, depth + 1));
            }
            turn = 1 - turn;
        }
        let mid = meeting.expect("met");
        let mut steps: Vec<Step> = path(&sides[0], mid.clone())
            .into_iter()
            .map(|(w, idx, pos, fwd)| Step { relation: idx, position: pos, forward: fwd, result: Word::from_vec_unchecked(w) })
            .collect();
        let back = Derivation {
            start: v.clone(),
            steps: path(&sides[1], mid)
                .into_iter()
                .map(|(w, idx, pos, fwd)| Step { relation: idx, position: pos, forward: fwd, result: Word::from_vec_unchecked(w) })
                .collect(),
        };
        steps.extend(back.reversed().steps);
        Some(Derivation { start: u.clone(), steps })
    }
}

fn join(a: Derivation, b: &Derivation) -> Derivation {
    let mut steps = a.steps;
    steps.extend(b.reversed().steps);
    Derivation { start: a.start, steps }
}

/// Finds a derivation from `u` to `v`. Both words are first rewritten greedily
/// towards their least forms; if those differ, the table-driven fold into the
/// expanded normal form is tried, then a bounded bidirectional search.
pub fn derive(pres: &Presentation, u: &Word, v: &Word, budget: usize) -> Result<Derivation, DeriveError> {
    let rw = Rewriter { pres, index: PointIndex::new(pres), budget };
    if u == v {
        return Ok(Derivation { start: u.clone(), steps: Vec::new() });
    }
    let (gu, gv) = (rw.greedy(u), rw.greedy(v));
    if gu.end() == gv.end() && gu.len() + gv.len() <= budget {
        return Ok(join(gu, &gv));
    }
    if let (Some(fu), Some(fv)) = (rw.fold(u), rw.fold(v)) {
        if fu.end() == fv.end() && fu.len() + fv.len() <= budget {
            return Ok(join(fu, &fv));
        }
    }
    rw.meet(u, v).filter(|d| d.len() <= budget).ok_or(DeriveError::BudgetExhausted(budget))
}

/// Outcome of certifying every short word against its normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresentationReport {
    pub max_len: usize,
    pub words: usize,
    pub certified: usize,
    pub total_steps: usize,
    pub longest: usize,
    pub unsound: Vec<Finding>,
    pub failures: Vec<Finding>,
}

impl PresentationReport {
    pub fn passed(&self) -> bool {
        self.unsound.is_empty() && self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "max_len": self.max_len,
            "words": self.words,
            "certified": self.certified,
            "total_steps": self.total_steps,
            "max_derivation_length": self.longest,
            "unsound_relations": self.unsound.iter().map(Finding::to_json).collect::<Vec<_>>(),
            "failures": self.failures.iter().map(Finding::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Derives every word of length `≤ max_len` to its expanded normal form and
/// re-checks each derivation with [`check_derivation`].
pub fn verify_presentation(spec: &SemigroupSpec, pres: &Presentation, max_len: usize) -> PresentationReport {
    let mult = Multiplier::new(spec);
    let words: Vec<Word> = (1..=max_len).flat_map(|l| words_of_length(spec.len(), l)).collect();
    let results: Vec<Result<usize, Finding>> = words
        .par_iter()
        .map(|u| {
            let nf = mult.normalize(u);
            let target = nf.to_word();
            let budget = default_budget(u, &target);
            match derive(pres, u, &target, budget) {
                Ok(d) if check_derivation(pres, &d) && d.end() == &target => Ok(d.len()),
                Ok(_) => Err(Finding::new("derivation_check", spec.render_word(u))),
                Err(e) => Err(Finding::new("derivation_budget", format!("{}: {e}", spec.render_word(u)))),
            }
        })
        .collect();
    let mut report = PresentationReport {
        max_len,
        words: words.len(),
        certified: 0,
        total_steps: 0,
        longest: 0,
        unsound: unsatisfied_relations(spec, pres),
        failures: Vec::new(),
    };
    for r in results {
        match r {
            Ok(n) => {
                report.certified += 1;
                report.total_steps += n;
                report.longest = report.longest.max(n);
            }
            Err(f) => report.failures.push(f),
        }
    }
    report
}
