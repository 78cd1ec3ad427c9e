//! Finite-index right congruences and the finite quotients they induce.
//!
//! `ρ` relates `x` and `y` when `xz` and `yz` share a block for every `z` in
//! `S¹`. Its classes on block `a` are the atoms of the T-sets `T(a,x,b)`, and it
//! has the shape `{i = j} ∪ {i, j ≥ p_a, i ≡ j mod q_a}`. Two `ρ`-related elements
//! at distance `d` are split by the coarser congruence `τ` that keeps residues
//! mod `2·d·q_a`. Either congruence acts on its classes plus an identity state,
//! giving a finite transformation semigroup in which the two elements differ.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::analysis::{elements_up_to, Finding};
use crate::evlin::EPSet;
use crate::model::{words_of_length, Element, Gen, SemigroupSpec};
use crate::wordprob::Multiplier;

pub const DEFAULT_MAX_HORIZON: usize = 6;

/// A partition of every block into finitely many eventually periodic classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RightCongruence {
    /// Classes per block, ordered by least member.
    pub blocks: Vec<Vec<EPSet>>,
    /// Word-length horizon the classes were read from, when computed as `ρ`.
    pub horizon: Option<usize>,
}

impl RightCongruence {
    pub fn from_blocks(blocks: Vec<Vec<EPSet>>) -> Self {
        let mut blocks = blocks;
        for classes in &mut blocks {
            classes.sort_by_key(|c| c.least());
        }
        RightCongruence { blocks, horizon: None }
    }

    pub fn class_count(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// Index of the class of `x` within its block.
    pub fn class_of(&self, x: &Element) -> usize {
        self.blocks[x.gen.0]
            .iter()
            .position(|c| c.member_big(&x.exp))
            .expect("classes cover the block")
    }

    pub fn related(&self, x: &Element, y: &Element) -> bool {
        x.gen == y.gen && self.class_of(x) == self.class_of(y)
    }

    pub fn to_json(&self, spec: &SemigroupSpec) -> Value {
        json!({
            "horizon": self.horizon,
            "classes": spec.gens().map(|a| json!({
                "block": spec.name(a),
                "classes": self.blocks[a.0].iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Where the right action fails to be well defined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CloseWitness {
    pub block: Gen,
    pub class: usize,
    pub by: Gen,
    pub image: String,
}

impl fmt::Display for CloseWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "class {} of block {} times generator {} lands in {}", self.class, self.block.0, self.by.0, self.image)
    }
}

/// For each class `C` of block `a` and generator `g`, `C·g` is a subset of one class.
/// Returns the target class of each `(a, C, g)`, or the first failure.
///
/// A closed partition only certifies a right congruence. It equals `ρ` when it
/// was built from T-set atoms, never for an arbitrary refinement.
pub fn close_check(spec: &SemigroupSpec, cong: &RightCongruence) -> Result<Vec<Vec<Vec<(Gen, usize)>>>, CloseWitness> {
    let mut out = Vec::new();
    for a in spec.gens() {
        let mut per_class = Vec::new();
        for (ci, class) in cong.blocks[a.0].iter().enumerate() {
            let mut per_gen = Vec::new();
            for g in spec.gens() {
                let image = spec.table(a, g).image(class);
                let fail = |what: String| CloseWitness { block: a, class: ci, by: g, image: what };
                let mut targets = image.iter().filter(|(_, s)| !s.is_empty());
                let (Some((&b, set)), None) = (targets.next(), targets.next()) else {
                    return Err(fail(format!("{image:?}")));
                };
                let Some(target) = cong.blocks[b.0].iter().position(|c| set.is_subset(c)) else {
                    return Err(fail(format!("{} in block {}", set, spec.name(b))));
                };
                per_gen.push((b, target));
            }
            per_class.push(per_gen);
        }
        out.push(per_class);
    }
    Ok(out)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResidualError {
    #[error("ρ not closed by horizon {horizon}: {witness} (inconclusive)")]
    NotClosed { horizon: usize, witness: String, last: Box<RightCongruence> },
    #[error("non-monogenic congruence shape on block {block}: {classes}")]
    Shape { block: String, classes: String },
    #[error("elements are equal")]
    Equal,
    #[error("{0} and {1} are not ρ-related")]
    NotRelated(String, String),
    #[error("separating congruence is not a right congruence: {0}")]
    Safety(String),
    #[error("distance too large for a finite quotient")]
    TooLarge,
}

fn refine(classes: &mut Vec<EPSet>, by: &EPSet) {
    let mut next = Vec::with_capacity(classes.len() + 1);
    for c in classes.drain(..) {
        let inside = c.intersect(by);
        let outside = c.difference(by);
        for part in [inside, outside] {
            if !part.is_empty() {
                next.push(part);
            }
        }
    }
    *classes = next;
}

/// T-set atoms of words up to `horizon`, per block.
pub fn atoms(mult: &Multiplier<'_>, horizon: usize) -> RightCongruence {
    let spec = mult.spec();
    let elems = elements_up_to(mult, horizon);
    let per_elem: Vec<Vec<(Gen, EPSet)>> = elems
        .par_iter()
        .map(|(_, x)| {
            let fam = mult.family(x);
            spec.gens()
                .flat_map(|a| spec.gens().map(move |b| (a, b)))
                .map(|(a, b)| (a, fam[a.0].preimage_of_block(b)))
                .collect()
        })
        .collect();
    let mut blocks: Vec<Vec<EPSet>> = spec.gens().map(|_| vec![EPSet::full()]).collect();
    let mut seen = HashSet::new();
    for (a, t) in per_elem.into_iter().flatten() {
        if seen.insert((a, t.clone())) {
            refine(&mut blocks[a.0], &t);
        }
    }
    let mut cong = RightCongruence::from_blocks(blocks);
    cong.horizon = Some(horizon);
    cong
}

/// `ρ`, found by increasing the horizon until the atoms are closed.
pub fn rho(spec: &SemigroupSpec, max_horizon: usize) -> Result<RightCongruence, ResidualError> {
    let mult = Multiplier::new(spec);
    rho_with(&mult, max_horizon)
}

pub fn rho_with(mult: &Multiplier<'_>, max_horizon: usize) -> Result<RightCongruence, ResidualError> {
    let mut last = None;
    for h in 0..=max_horizon {
        let cong = atoms(mult, h);
        match close_check(mult.spec(), &cong) {
            Ok(_) => return Ok(cong),
            Err(w) => last = Some((w, cong)),
        }
    }
    let (w, cong) = last.expect("at least one horizon");
    Err(ResidualError::NotClosed { horizon: max_horizon, witness: w.to_string(), last: Box::new(cong) })
}

/// `(p_a, q_a)` per block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockCongParams {
    pub params: Vec<(u64, u64)>,
}

impl BlockCongParams {
    pub fn get(&self, a: Gen) -> (u64, u64) {
        self.params[a.0]
    }

    /// Rebuilds the classes: singletons below `p_a`, residues mod `q_a` from `p_a` on.
    pub fn classes(&self) -> RightCongruence {
        RightCongruence::from_blocks(self.params.iter().map(|&(p, q)| monogenic_classes(p, q)).collect())
    }

    pub fn to_json(&self, spec: &SemigroupSpec) -> Value {
        json!(spec.gens().map(|a| json!({
            "block": spec.name(a), "p": self.params[a.0].0, "q": self.params[a.0].1,
        })).collect::<Vec<_>>())
    }
}

fn monogenic_classes(p: u64, m: u64) -> Vec<EPSet> {
    let mut v: Vec<EPSet> = (1..p).map(|k| EPSet::finite([k])).collect();
    v.extend((0..m).map(|i| EPSet::progression(p + i, m)));
    v
}

/// Reads `(p_a, q_a)` off a congruence, checking it has exactly that shape.
pub fn block_params(spec: &SemigroupSpec, cong: &RightCongruence) -> Result<BlockCongParams, ResidualError> {
    let mut params = Vec::new();
    for a in spec.gens() {
        let classes = &cong.blocks[a.0];
        let p = 1 + classes.iter().filter(|c| c.is_finite()).count() as u64;
        let q = classes.len() as u64 + 1 - p;
        let mut want = monogenic_classes(p, q.max(1));
        want.sort_by_key(|c| c.least());
        if q == 0 || *classes != want {
            return Err(ResidualError::Shape {
                block: spec.name(a).to_string(),
                classes: classes.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" | "),
            });
        }
        params.push((p, q));
    }
    Ok(BlockCongParams { params })
}

/// `|i − j| / q_a` for `ρ`-related `a^i`, `a^j`.
pub fn distance(spec: &SemigroupSpec, params: &BlockCongParams, x: &Element, y: &Element) -> Result<BigUint, ResidualError> {
    let not_related = || ResidualError::NotRelated(spec.render_element(x), spec.render_element(y));
    if x.gen != y.gen {
        return Err(not_related());
    }
    if x.exp == y.exp {
        return Ok(BigUint::zero());
    }
    let (p, q) = params.get(x.gen);
    let p = BigUint::from(p);
    let diff = if x.exp > y.exp { &x.exp - &y.exp } else { &y.exp - &x.exp };
    let (d, r) = diff.div_rem(&BigUint::from(q));
    if x.exp < p || y.exp < p || !r.is_zero() {
        return Err(not_related());
    }
    Ok(d)
}

/// `τ`: singletons below `p_a`, residues mod `2·d·q_a` from `p_a` on, re-checked
/// to be a right congruence.
pub fn separating_congruence(
    spec: &SemigroupSpec,
    params: &BlockCongParams,
    d: &BigUint,
) -> Result<RightCongruence, ResidualError> {
    let d = d.to_u64().filter(|&d| d >= 1).ok_or(ResidualError::TooLarge)?;
    let blocks = params
        .params
        .iter()
        .map(|&(p, q)| {
            let m = 2u64.checked_mul(d).and_then(|x| x.checked_mul(q)).filter(|&m| m <= 1 << 20);
            m.map(|m| monogenic_classes(p, m)).ok_or(ResidualError::TooLarge)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let tau = RightCongruence::from_blocks(blocks);
    close_check(spec, &tau).map_err(|w| ResidualError::Safety(w.to_string()))?;
    Ok(tau)
}

/// A state transformation, composed left to right.
pub type Transformation = Vec<usize>;

/// `f` then `g`.
pub fn then(f: &[usize], g: &[usize]) -> Transformation {
    f.iter().map(|&i| g[i]).collect()
}

fn transformation_power(f: &[usize], k: &BigUint) -> Transformation {
    let mut acc: Transformation = (0..f.len()).collect();
    let mut base = f.to_vec();
    for i in 0..k.bits() {
        if k.bit(i) {
            acc = then(&acc, &base);
        }
        base = then(&base, &base);
    }
    acc
}

/// The right action of `S` on `{1} ∪ classes`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteQuotient {
    pub names: Vec<String>,
    /// State labels; state 0 is the identity.
    pub states: Vec<String>,
    /// Per generator, the image of every state.
    pub actions: Vec<Transformation>,
}

pub const IDENTITY_STATE: usize = 0;

impl FiniteQuotient {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// The transformation induced by `g^k`.
    pub fn transformation(&self, x: &Element) -> Transformation {
        transformation_power(&self.actions[x.gen.0], &x.exp)
    }

    pub fn to_json(&self) -> Value {
        let actions: serde_json::Map<String, Value> =
            self.names.iter().zip(&self.actions).map(|(n, a)| (n.clone(), json!(a))).collect();
        json!({ "states": self.states, "actions": actions })
    }
}

/// The right action on classes of a closed congruence.
pub fn build_quotient(spec: &SemigroupSpec, cong: &RightCongruence) -> Result<FiniteQuotient, ResidualError> {
    let targets = close_check(spec, cong).map_err(|w| ResidualError::Safety(w.to_string()))?;
    let mut offset = Vec::new();
    let mut states = vec!["1".to_string()];
    for a in spec.gens() {
        offset.push(states.len());
        for c in &cong.blocks[a.0] {
            states.push(format!("{}: {}", spec.name(a), c));
        }
    }
    let actions = spec
        .gens()
        .map(|g| {
            let mut act = vec![0; states.len()];
            act[IDENTITY_STATE] = offset[g.0] + cong.class_of(&Element::generator(g));
            for a in spec.gens() {
                for (ci, per_gen) in targets[a.0].iter().enumerate() {
                    let (b, t) = per_gen[g.0];
                    act[offset[a.0] + ci] = offset[b.0] + t;
                }
            }
            act
        })
        .collect();
    Ok(FiniteQuotient { names: spec.names().to_vec(), states, actions })
}

/// A finite quotient in which `x` and `y` move the identity state differently.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationCertificate {
    pub x: Element,
    pub y: Element,
    /// `"rho"` or `"tau"`.
    pub congruence: String,
    pub distance: Option<BigUint>,
    pub quotient: FiniteQuotient,
    pub image_x: Transformation,
    pub image_y: Transformation,
    pub witness: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertificateError {
    #[error("malformed certificate: {0}")]
    Malformed(String),
    #[error("recorded image of {0} does not match the replay")]
    ImageMismatch(&'static str),
    #[error("x and y act identically on the witness state")]
    NotSeparated,
}

impl SeparationCertificate {
    /// Replays the generator actions over the words of `x` and `y`.
    pub fn verify(&self) -> Result<(), CertificateError> {
        let q = &self.quotient;
        let n = q.states.len();
        if q.actions.len() != q.names.len() || q.actions.iter().any(|a| a.len() != n || a.iter().any(|&s| s >= n)) {
            return Err(CertificateError::Malformed("actions are not transformations of the states".into()));
        }
        for (e, rec, which) in [(&self.x, &self.image_x, "x"), (&self.y, &self.image_y, "y")] {
            if e.gen.0 >= q.actions.len() {
                return Err(CertificateError::Malformed(format!("unknown generator in {which}")));
            }
            // one letter at a time when short, by squaring otherwise
            let replay = match e.exp.to_u64().filter(|&k| k <= 4096) {
                Some(k) => {
                    let mut t: Transformation = (0..n).collect();
                    for _ in 0..k {
                        t = then(&t, &q.actions[e.gen.0]);
                    }
                    t
                }
                None => q.transformation(e),
            };
            if &replay != rec {
                return Err(CertificateError::ImageMismatch(which));
            }
        }
        if self.witness >= n || self.image_x[self.witness] == self.image_y[self.witness] {
            return Err(CertificateError::NotSeparated);
        }
        Ok(())
    }

    pub fn to_json(&self, spec: &SemigroupSpec) -> Value {
        json!({
            "x": spec.render_element(&self.x),
            "y": spec.render_element(&self.y),
            "congruence": self.congruence,
            "distance": self.distance.as_ref().map(crate::model::big_number),
            "size": self.quotient.len(),
            "states": self.quotient.states,
            "actions": self.quotient.to_json()["actions"],
            "image_x": self.image_x,
            "image_y": self.image_y,
            "witness": self.witness,
        })
    }

    /// Reads a certificate back from its JSON export; needs no spec.
    pub fn from_json(v: &Value) -> Result<Self, CertificateError> {
        let bad = |m: &str| CertificateError::Malformed(m.to_string());
        let actions_obj = v["actions"].as_object().ok_or_else(|| bad("actions"))?;
        let names: Vec<String> = actions_obj.keys().cloned().collect();
        let transformation = |x: &Value| -> Result<Transformation, CertificateError> {
            x.as_array()
                .ok_or_else(|| bad("transformation"))?
                .iter()
                .map(|s| s.as_u64().map(|s| s as usize).ok_or_else(|| bad("state index")))
                .collect()
        };
        let actions = actions_obj.values().map(transformation).collect::<Result<Vec<_>, _>>()?;
        let element = |key: &str| -> Result<Element, CertificateError> {
            let text = v[key].as_str().ok_or_else(|| bad(key))?;
            let (name, exp) = text.split_once('^').ok_or_else(|| bad(key))?;
            let gen = names.iter().position(|n| n == name).ok_or_else(|| bad(key))?;
            let exp: BigUint = exp.parse().map_err(|_| bad(key))?;
            Ok(Element { gen: Gen(gen), exp })
        };
        let states = v["states"]
            .as_array()
            .ok_or_else(|| bad("states"))?
            .iter()
            .map(|s| s.as_str().map(str::to_string).ok_or_else(|| bad("state label")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SeparationCertificate {
            x: element("x")?,
            y: element("y")?,
            congruence: v["congruence"].as_str().ok_or_else(|| bad("congruence"))?.to_string(),
            distance: v["distance"].as_str().map(|s| s.parse()).or_else(|| v["distance"].as_u64().map(|d| Ok(BigUint::from(d)))).transpose().map_err(|_| bad("distance"))?,
            quotient: FiniteQuotient { names, states, actions },
            image_x: transformation(&v["image_x"])?,
            image_y: transformation(&v["image_y"])?,
            witness: v["witness"].as_u64().ok_or_else(|| bad("witness"))? as usize,
        })
    }
}

/// Everything needed to separate pairs in one spec: `ρ`, its parameters and quotient.
pub struct Separator<'a> {
    spec: &'a SemigroupSpec,
    pub rho: RightCongruence,
    pub params: BlockCongParams,
    pub rho_quotient: FiniteQuotient,
}

impl<'a> Separator<'a> {
    pub fn new(spec: &'a SemigroupSpec, max_horizon: usize) -> Result<Self, ResidualError> {
        let rho = rho(spec, max_horizon)?;
        let params = block_params(spec, &rho)?;
        let rho_quotient = build_quotient(spec, &rho)?;
        Ok(Separator { spec, rho, params, rho_quotient })
    }

    pub fn separate(&self, x: &Element, y: &Element) -> Result<SeparationCertificate, ResidualError> {
        if x == y {
            return Err(ResidualError::Equal);
        }
        let (congruence, distance, quotient) = if self.rho.related(x, y) {
            let d = distance(self.spec, &self.params, x, y)?;
            let tau = separating_congruence(self.spec, &self.params, &d)?;
            ("tau", Some(d), build_quotient(self.spec, &tau)?)
        } else {
            ("rho", None, self.rho_quotient.clone())
        };
        let image_x = quotient.transformation(x);
        let image_y = quotient.transformation(y);
        Ok(SeparationCertificate {
            x: x.clone(),
            y: y.clone(),
            congruence: congruence.to_string(),
            distance,
            quotient,
            image_x,
            image_y,
            witness: IDENTITY_STATE,
        })
    }
}

pub fn separate(spec: &SemigroupSpec, x: &Element, y: &Element, max_horizon: usize) -> Result<SeparationCertificate, ResidualError> {
    if x == y {
        return Err(ResidualError::Equal);
    }
    Separator::new(spec, max_horizon)?.separate(x, y)
}

/// `d(x,y) | d(xz,yz)` or `xz = yz`, for `ρ`-related `x ≠ y` with exponents
/// `≤ exp_bound` and all `z` of length `≤ z_len`.
pub fn divisibility_findings(
    spec: &SemigroupSpec,
    cong: &RightCongruence,
    params: &BlockCongParams,
    exp_bound: u64,
    z_len: usize,
) -> Vec<Finding> {
    let mult = Multiplier::new(spec);
    let zs: Vec<Element> = (1..=z_len)
        .flat_map(|l| words_of_length(spec.len(), l))
        .map(|w| mult.normalize(&w))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut pairs = Vec::new();
    for a in spec.gens() {
        for i in 1..=exp_bound {
            for j in i + 1..=exp_bound {
                let (x, y) = (Element::new(a, i), Element::new(a, j));
                if cong.related(&x, &y) {
                    pairs.push((x, y));
                }
            }
        }
    }
    let found: Vec<Vec<Finding>> = pairs
        .par_iter()
        .map(|(x, y)| {
            let d = distance(spec, params, x, y).expect("related");
            let mut out = Vec::new();
            for z in &zs {
                let (xz, yz) = (mult.multiply(x, z), mult.multiply(y, z));
                if xz == yz {
                    continue;
                }
                let ok = distance(spec, params, &xz, &yz).is_ok_and(|d2| (d2 % &d).is_zero());
                if !ok {
                    out.push(Finding::new(
                        "divisibility",
                        format!(
                            "x = {}, y = {}, z = {}: xz = {}, yz = {}",
                            spec.render_element(x),
                            spec.render_element(y),
                            spec.render_element(z),
                            spec.render_element(&xz),
                            spec.render_element(&yz)
                        ),
                    ));
                }
            }
            out
        })
        .collect();
    found.into_iter().flatten().collect()
}

/// Number of states of the `τ` quotient: `Σ_a ((p_a − 1) + 2·d·q_a) + 1`.
pub fn tau_quotient_size(params: &BlockCongParams, d: u64) -> usize {
    1 + params.params.iter().map(|&(p, q)| (p - 1 + 2 * d * q) as usize).sum::<usize>()
}

/// Class counts per block, for reports.
pub fn class_summary(spec: &SemigroupSpec, cong: &RightCongruence) -> BTreeMap<String, usize> {
    spec.gens().map(|a| (spec.name(a).to_string(), cong.blocks[a.0].len())).collect()
}
