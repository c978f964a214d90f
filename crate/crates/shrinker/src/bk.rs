//! Background-knowledge ingestion: parsing ground fact files, inferring a
//! total typing of argument positions, and serving indexed access to facts.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex};

pub type PredId = usize;
pub type ConstId = usize;
pub type TypeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}, column {col}: variable-like argument `{name}` in a ground fact")]
    VariableArgument { line: usize, col: usize, name: String },
    #[error("line {line}, column {col}: zero-arity fact `{name}` is not allowed")]
    ZeroArity { line: usize, col: usize, name: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypeError {
    #[error("constant `{constant}` is forced into two distinct types `{a}` and `{b}`")]
    Conflict { constant: String, a: String, b: String },
    #[error("type declaration names unknown predicate `{pred}`")]
    UnknownPredicate { pred: String },
    #[error("type declaration index {index} is out of range for predicate `{pred}`")]
    IndexOutOfRange { pred: String, index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IndexError {
    #[error("unknown predicate id {0}")]
    UnknownPredicate(PredId),
    #[error("key position {pos} out of range for arity {arity}")]
    PositionOutOfRange { pos: usize, arity: usize },
}

/// A predicate observed in the fact base. Identity is (name, arity).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PredicateSignature {
    pub name: String,
    pub arity: usize,
}

/// A `type(pred, index, typename).` declaration, 1-based index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub pred: String,
    pub index: usize,
    pub type_name: String,
}

/// Grouping of a predicate's facts by their projection onto a key position set.
pub type Index = BTreeMap<Vec<ConstId>, BTreeSet<Vec<ConstId>>>;

/// Immutable, indexed store of ground facts.
pub struct FactBase {
    preds: Vec<PredicateSignature>,
    pred_lookup: HashMap<(String, usize), PredId>,
    consts: Vec<String>,
    const_lookup: HashMap<String, ConstId>,
    /// Per-predicate facts in first-occurrence input order, deduplicated.
    facts: Vec<Vec<Vec<ConstId>>>,
    fact_sets: Vec<HashSet<Vec<ConstId>>>,
    indexes: Mutex<HashMap<(PredId, Vec<usize>), Arc<Index>>>,
}

impl fmt::Debug for FactBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FactBase")
            .field("preds", &self.preds)
            .field("consts", &self.consts)
            .field("facts", &self.facts)
            .finish()
    }
}

impl PartialEq for FactBase {
    fn eq(&self, other: &Self) -> bool {
        self.preds == other.preds
            && self.consts == other.consts
            && self.facts == other.facts
    }
}
impl Eq for FactBase {}

impl FactBase {
    /// Builds a fact base from (name, tuple) pairs. Symbol tables are assigned
    /// in sorted order so that the result is independent of input order up to
    /// the stored per-predicate fact order.
    pub fn from_raw_facts(raw: Vec<(String, Vec<String>)>) -> FactBase {
        let mut pred_keys: BTreeSet<(String, usize)> = BTreeSet::new();
        let mut const_names: BTreeSet<String> = BTreeSet::new();
        for (name, args) in &raw {
            pred_keys.insert((name.clone(), args.len()));
            for a in args {
                const_names.insert(a.clone());
            }
        }
        let preds: Vec<PredicateSignature> = pred_keys
            .iter()
            .map(|(name, arity)| PredicateSignature { name: name.clone(), arity: *arity })
            .collect();
        let pred_lookup: HashMap<(String, usize), PredId> = pred_keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        let consts: Vec<String> = const_names.iter().cloned().collect();
        let const_lookup: HashMap<String, ConstId> = consts
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        let mut facts: Vec<Vec<Vec<ConstId>>> = vec![Vec::new(); preds.len()];
        let mut fact_sets: Vec<HashSet<Vec<ConstId>>> = vec![HashSet::new(); preds.len()];
        for (name, args) in raw {
            let pid = pred_lookup[&(name, args.len())];
            let tuple: Vec<ConstId> = args.iter().map(|a| const_lookup[a]).collect();
            if fact_sets[pid].insert(tuple.clone()) {
                facts[pid].push(tuple);
            }
        }
        FactBase {
            preds,
            pred_lookup,
            consts,
            const_lookup,
            facts,
            fact_sets,
            indexes: Mutex::new(HashMap::new()),
        }
    }

    pub fn num_preds(&self) -> usize {
        self.preds.len()
    }

    pub fn pred_ids(&self) -> impl Iterator<Item = PredId> {
        0..self.preds.len()
    }

    pub fn signature(&self, pid: PredId) -> &PredicateSignature {
        &self.preds[pid]
    }

    pub fn pred_id(&self, name: &str, arity: usize) -> Option<PredId> {
        self.pred_lookup.get(&(name.to_string(), arity)).copied()
    }

    /// All predicate ids with this name, any arity.
    pub fn pred_ids_by_name(&self, name: &str) -> Vec<PredId> {
        self.preds
            .iter()
            .enumerate()
            .filter(|(_, s)| s.name == name)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn facts(&self, pid: PredId) -> &[Vec<ConstId>] {
        &self.facts[pid]
    }

    pub fn num_facts(&self, pid: PredId) -> usize {
        self.facts[pid].len()
    }

    pub fn has_fact(&self, pid: PredId, tuple: &[ConstId]) -> bool {
        self.fact_sets[pid].contains(tuple)
    }

    pub fn num_consts(&self) -> usize {
        self.consts.len()
    }

    pub fn const_name(&self, cid: ConstId) -> &str {
        &self.consts[cid]
    }

    pub fn const_id(&self, name: &str) -> Option<ConstId> {
        self.const_lookup.get(name).copied()
    }

    /// Grouping of `pred`'s facts keyed by projection onto `key_positions`
    /// (1-based). Built lazily and cached; concurrent first access builds each
    /// index exactly once from the caller's point of view.
    pub fn index(&self, pid: PredId, key_positions: &[usize]) -> Result<Arc<Index>, IndexError> {
        if pid >= self.preds.len() {
            return Err(IndexError::UnknownPredicate(pid));
        }
        let arity = self.preds[pid].arity;
        for &p in key_positions {
            if p < 1 || p > arity {
                return Err(IndexError::PositionOutOfRange { pos: p, arity });
            }
        }
        let key = (pid, key_positions.to_vec());
        let mut cache = self.indexes.lock().unwrap();
        if let Some(ix) = cache.get(&key) {
            return Ok(Arc::clone(ix));
        }
        let mut ix: Index = BTreeMap::new();
        let value_positions: Vec<usize> =
            (1..=arity).filter(|p| !key_positions.contains(p)).collect();
        for fact in &self.facts[pid] {
            let k: Vec<ConstId> = key_positions.iter().map(|&p| fact[p - 1]).collect();
            let v: Vec<ConstId> = value_positions.iter().map(|&p| fact[p - 1]).collect();
            ix.entry(k).or_default().insert(v);
        }
        let ix = Arc::new(ix);
        cache.insert(key, Arc::clone(&ix));
        Ok(ix)
    }

    /// Serializes the fact base back to the input grammar.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for pid in 0..self.preds.len() {
            for fact in &self.facts[pid] {
                out.push_str(&self.preds[pid].name);
                out.push('(');
                for (i, &c) in fact.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&self.consts[c]);
                }
                out.push_str(").\n");
            }
        }
        out
    }
}

struct Scanner<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Scanner<'a> {
        Scanner { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn skip_ws_and_comments(&mut self) {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'%') => {
                    while let Some(b) = self.bump() {
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                _ => return,
            }
        }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line, col: self.col, msg: msg.into() }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        match self.peek() {
            Some(b) if b == c => {
                self.bump();
                Ok(())
            }
            Some(b) => Err(self.err(format!("expected `{}`, found `{}`", c as char, b as char))),
            None => Err(self.err(format!("expected `{}`, found end of input", c as char))),
        }
    }

    /// A lowercase symbol or a non-negative integer.
    fn constant(&mut self) -> Result<String, ParseError> {
        let (line, col) = (self.line, self.col);
        match self.peek() {
            Some(b) if b.is_ascii_lowercase() => Ok(self.symbol_tail()),
            Some(b) if b.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(b) = self.peek() {
                    if b.is_ascii_digit() {
                        s.push(b as char);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Ok(s)
            }
            Some(b) if b.is_ascii_uppercase() || b == b'_' => {
                let name = self.symbol_tail();
                Err(ParseError::VariableArgument { line, col, name })
            }
            Some(b) => Err(self.err(format!("expected constant, found `{}`", b as char))),
            None => Err(self.err("expected constant, found end of input")),
        }
    }

    fn symbol_tail(&mut self) -> String {
        let mut s = String::new();
        while let Some(b) = self.peek() {
            if b.is_ascii_alphanumeric() || b == b'_' {
                s.push(b as char);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn predicate_name(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(b) if b.is_ascii_lowercase() => Ok(self.symbol_tail()),
            Some(b) => Err(self.err(format!(
                "expected predicate symbol (lowercase initial), found `{}`",
                b as char
            ))),
            None => Err(self.err("expected predicate symbol, found end of input")),
        }
    }
}

/// Parses a ground fact listing: `pred(c1,...,cn).` separated by whitespace,
/// `%` line comments. Duplicate facts are dropped.
pub fn parse_bk(text: &str) -> Result<FactBase, ParseError> {
    let mut sc = Scanner::new(text);
    let mut raw: Vec<(String, Vec<String>)> = Vec::new();
    loop {
        sc.skip_ws_and_comments();
        if sc.peek().is_none() {
            break;
        }
        let (line, col) = (sc.line, sc.col);
        let name = sc.predicate_name()?;
        sc.skip_ws_and_comments();
        if sc.peek() != Some(b'(') {
            return Err(ParseError::ZeroArity { line, col, name });
        }
        sc.expect(b'(')?;
        let mut args = Vec::new();
        loop {
            sc.skip_ws_and_comments();
            args.push(sc.constant()?);
            sc.skip_ws_and_comments();
            match sc.peek() {
                Some(b',') => {
                    sc.bump();
                }
                Some(b')') => {
                    sc.bump();
                    break;
                }
                Some(b) => return Err(sc.err(format!("expected `,` or `)`, found `{}`", b as char))),
                None => return Err(sc.err("unterminated argument list")),
            }
        }
        sc.skip_ws_and_comments();
        sc.expect(b'.')?;
        raw.push((name, args));
    }
    Ok(FactBase::from_raw_facts(raw))
}

/// Parses `type(pred, index, typename).` declarations, in input order.
pub fn parse_types(text: &str) -> Result<Vec<TypeDecl>, ParseError> {
    let mut sc = Scanner::new(text);
    let mut decls = Vec::new();
    loop {
        sc.skip_ws_and_comments();
        if sc.peek().is_none() {
            break;
        }
        let kw = sc.predicate_name()?;
        if kw != "type" {
            return Err(sc.err(format!("expected `type` declaration, found `{kw}`")));
        }
        sc.skip_ws_and_comments();
        sc.expect(b'(')?;
        sc.skip_ws_and_comments();
        let pred = sc.predicate_name()?;
        sc.skip_ws_and_comments();
        sc.expect(b',')?;
        sc.skip_ws_and_comments();
        let (iline, icol) = (sc.line, sc.col);
        let index_str = sc.constant()?;
        let index: usize = index_str.parse().map_err(|_| ParseError::Syntax {
            line: iline,
            col: icol,
            msg: format!("expected argument index, found `{index_str}`"),
        })?;
        if index < 1 {
            return Err(ParseError::Syntax {
                line: iline,
                col: icol,
                msg: "argument index must be >= 1".to_string(),
            });
        }
        sc.skip_ws_and_comments();
        sc.expect(b',')?;
        sc.skip_ws_and_comments();
        let type_name = sc.predicate_name()?;
        sc.skip_ws_and_comments();
        sc.expect(b')')?;
        sc.skip_ws_and_comments();
        sc.expect(b'.')?;
        decls.push(TypeDecl { pred, index, type_name });
    }
    Ok(decls)
}

/// A total typing of argument positions with one domain per type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeAssignment {
    /// type_of[pred][position-1] = TypeId
    type_of: Vec<Vec<TypeId>>,
    names: Vec<String>,
    domains: Vec<BTreeSet<ConstId>>,
}

impl TypeAssignment {
    pub fn type_of(&self, pid: PredId, position: usize) -> TypeId {
        self.type_of[pid][position - 1]
    }

    pub fn type_name(&self, t: TypeId) -> &str {
        &self.names[t]
    }

    pub fn domain(&self, t: TypeId) -> &BTreeSet<ConstId> {
        &self.domains[t]
    }

    pub fn num_types(&self) -> usize {
        self.domains.len()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
        }
        self.parent[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller root for determinism
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Assigns one type per argument-position class. With no declarations the
/// classes are induced by "two positions share at least one constant"; partial
/// declarations additionally unify positions sharing a declared type name.
/// With declarations covering every position the declared names are used
/// verbatim. In all cases a constant landing in two distinct types is an
/// error.
pub fn infer_types(fb: &FactBase, decls: &[TypeDecl]) -> Result<TypeAssignment, TypeError> {
    // (pred, position) -> flat index
    let mut flat: Vec<(PredId, usize)> = Vec::new();
    let mut flat_of: HashMap<(PredId, usize), usize> = HashMap::new();
    for pid in fb.pred_ids() {
        for pos in 1..=fb.signature(pid).arity {
            flat_of.insert((pid, pos), flat.len());
            flat.push((pid, pos));
        }
    }

    // validate declarations and expand to (flat position, type name)
    let mut declared: Vec<(usize, String)> = Vec::new();
    for d in decls {
        let pids = fb.pred_ids_by_name(&d.pred);
        if pids.is_empty() {
            return Err(TypeError::UnknownPredicate { pred: d.pred.clone() });
        }
        let mut applied = false;
        for pid in pids {
            if d.index <= fb.signature(pid).arity {
                declared.push((flat_of[&(pid, d.index)], d.type_name.clone()));
                applied = true;
            }
        }
        if !applied {
            return Err(TypeError::IndexOutOfRange { pred: d.pred.clone(), index: d.index });
        }
    }

    let full_coverage = !declared.is_empty() && {
        let covered: HashSet<usize> = declared.iter().map(|(f, _)| *f).collect();
        covered.len() == flat.len()
    };

    // class id per flat position
    let class_of: Vec<usize>;
    let mut class_names: BTreeMap<usize, String> = BTreeMap::new();
    if full_coverage {
        // classes are the declared names themselves
        let mut name_ids: BTreeMap<String, usize> = BTreeMap::new();
        let mut assigned: Vec<Option<usize>> = vec![None; flat.len()];
        for (f, name) in &declared {
            let next = name_ids.len();
            let id = *name_ids.entry(name.clone()).or_insert(next);
            assigned[*f] = Some(id);
        }
        class_of = assigned.into_iter().map(|o| o.unwrap()).collect();
        for (name, id) in name_ids {
            class_names.insert(id, name);
        }
    } else {
        let mut uf = UnionFind::new(flat.len());
        // positions sharing a constant coincide
        let mut seen_at: HashMap<ConstId, usize> = HashMap::new();
        for pid in fb.pred_ids() {
            for fact in fb.facts(pid) {
                for (i, &c) in fact.iter().enumerate() {
                    let f = flat_of[&(pid, i + 1)];
                    match seen_at.get(&c) {
                        Some(&g) => uf.union(f, g),
                        None => {
                            seen_at.insert(c, f);
                        }
                    }
                }
            }
        }
        // positions declared with the same type name coincide
        let mut name_rep: HashMap<&str, usize> = HashMap::new();
        for (f, name) in &declared {
            match name_rep.get(name.as_str()) {
                Some(&g) => uf.union(*f, g),
                None => {
                    name_rep.insert(name, *f);
                }
            }
        }
        // a class carrying two distinct declared names is a conflict
        let mut root_name: HashMap<usize, &str> = HashMap::new();
        for (f, name) in &declared {
            let r = uf.find(*f);
            if let Some(&other) = root_name.get(&r) {
                if other != name {
                    // find a constant in the class for the message
                    let witness = fb
                        .pred_ids()
                        .flat_map(|pid| fb.facts(pid).iter().map(move |t| (pid, t)))
                        .find_map(|(pid, t)| {
                            t.iter().enumerate().find_map(|(i, &c)| {
                                (uf.parent[flat_of[&(pid, i + 1)]] == r
                                    || flat_of[&(pid, i + 1)] == r)
                                    .then(|| fb.const_name(c).to_string())
                            })
                        })
                        .unwrap_or_default();
                    return Err(TypeError::Conflict {
                        constant: witness,
                        a: other.to_string(),
                        b: name.clone(),
                    });
                }
            } else {
                root_name.insert(r, name);
            }
        }
        // number classes in first-flat-position order for determinism
        let mut root_ids: BTreeMap<usize, usize> = BTreeMap::new();
        let mut assigned = vec![0usize; flat.len()];
        for f in 0..flat.len() {
            let r = uf.find(f);
            let next = root_ids.len();
            let id = *root_ids.entry(r).or_insert(next);
            assigned[f] = id;
        }
        class_of = assigned;
        for (r, id) in &root_ids {
            let name = root_name
                .get(r)
                .map(|s| s.to_string())
                .unwrap_or_else(|| format!("t{id}"));
            class_names.insert(*id, name);
        }
    }

    let num_classes = class_names.len();
    let mut domains: Vec<BTreeSet<ConstId>> = vec![BTreeSet::new(); num_classes];
    let mut type_of: Vec<Vec<TypeId>> = Vec::new();
    for pid in fb.pred_ids() {
        let arity = fb.signature(pid).arity;
        let row: Vec<TypeId> =
            (1..=arity).map(|pos| class_of[flat_of[&(pid, pos)]]).collect();
        for fact in fb.facts(pid) {
            for (i, &c) in fact.iter().enumerate() {
                domains[row[i]].insert(c);
            }
        }
        type_of.push(row);
    }

    // each constant must belong to exactly one domain
    let mut owner: HashMap<ConstId, usize> = HashMap::new();
    for (t, dom) in domains.iter().enumerate() {
        for &c in dom {
            if let Some(&prev) = owner.get(&c) {
                if prev != t {
                    return Err(TypeError::Conflict {
                        constant: fb.const_name(c).to_string(),
                        a: class_names[&prev].clone(),
                        b: class_names[&t].clone(),
                    });
                }
            } else {
                owner.insert(c, t);
            }
        }
    }

    Ok(TypeAssignment {
        type_of,
        names: class_names.into_values().collect(),
        domains,
    })
}
