//! Tableau translation from LTL to nondeterministic Büchi automata.
//!
//! Pipeline: negation normal form, node expansion into a generalized
//! Büchi automaton (one acceptance set per until subformula), counter
//! degeneralization, then simplification (pruning, bisimulation
//! quotient, edge merging).

use super::ast::LtlAst;
use super::guard::GuardFormula;
use super::nba::Nba;
use super::symbols::{ApSet, Symbol};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

/// Translate a formula into an NBA over `ap`.
///
/// Every atom of `ast` must be declared in `ap`; parse with the same
/// declaration list to guarantee that.
pub fn translate(ast: &LtlAst, ap: &ApSet) -> Nba {
    let mut table = NormTable::default();
    let root = table.from_ast(ast, ap, true);
    let gba = expand_graph(&mut table, root);
    let (n_states, initial, accepting, edges) = degeneralize(&table, &gba);
    let nba = Nba::new(ap.clone(), n_states, initial, accepting, edges);
    simplify(&nba)
}

// ---------------------------------------------------------------------------
// Negation normal form with an internal release operator.

type NormId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Norm {
    True,
    False,
    Lit { atom: usize, neg: bool },
    And(NormId, NormId),
    Or(NormId, NormId),
    Next(NormId),
    Until(NormId, NormId),
    Release(NormId, NormId),
}

#[derive(Default)]
struct NormTable {
    nodes: Vec<Norm>,
    index: HashMap<Norm, NormId>,
}

impl NormTable {
    fn intern(&mut self, n: Norm) -> NormId {
        if let Some(&id) = self.index.get(&n) {
            return id;
        }
        let id = self.nodes.len() as NormId;
        self.nodes.push(n.clone());
        self.index.insert(n, id);
        id
    }

    fn get(&self, id: NormId) -> &Norm {
        &self.nodes[id as usize]
    }

    fn mk_and(&mut self, a: NormId, b: NormId) -> NormId {
        match (self.get(a), self.get(b)) {
            (Norm::False, _) | (_, Norm::False) => self.intern(Norm::False),
            (Norm::True, _) => b,
            (_, Norm::True) => a,
            _ => self.intern(Norm::And(a, b)),
        }
    }

    fn mk_or(&mut self, a: NormId, b: NormId) -> NormId {
        match (self.get(a), self.get(b)) {
            (Norm::True, _) | (_, Norm::True) => self.intern(Norm::True),
            (Norm::False, _) => b,
            (_, Norm::False) => a,
            _ => self.intern(Norm::Or(a, b)),
        }
    }

    /// Interned NNF of `ast` (negated when `positive` is false).
    fn from_ast(&mut self, ast: &LtlAst, ap: &ApSet, positive: bool) -> NormId {
        match ast {
            LtlAst::True => self.intern(if positive { Norm::True } else { Norm::False }),
            LtlAst::Atom(name) => {
                let atom = ap
                    .index_of(name)
                    .unwrap_or_else(|| panic!("atom {name:?} missing from the AP set"));
                self.intern(Norm::Lit {
                    atom,
                    neg: !positive,
                })
            }
            LtlAst::Not(a) => self.from_ast(a, ap, !positive),
            LtlAst::And(a, b) => {
                let na = self.from_ast(a, ap, positive);
                let nb = self.from_ast(b, ap, positive);
                if positive {
                    self.mk_and(na, nb)
                } else {
                    self.mk_or(na, nb)
                }
            }
            LtlAst::Or(a, b) => {
                let na = self.from_ast(a, ap, positive);
                let nb = self.from_ast(b, ap, positive);
                if positive {
                    self.mk_or(na, nb)
                } else {
                    self.mk_and(na, nb)
                }
            }
            LtlAst::Implies(a, b) => {
                let na = self.from_ast(a, ap, !positive);
                let nb = self.from_ast(b, ap, positive);
                if positive {
                    self.mk_or(na, nb)
                } else {
                    self.mk_and(na, nb)
                }
            }
            LtlAst::Next(a) => {
                let na = self.from_ast(a, ap, positive);
                self.intern(Norm::Next(na))
            }
            LtlAst::Until(a, b) => {
                let na = self.from_ast(a, ap, positive);
                let nb = self.from_ast(b, ap, positive);
                if positive {
                    self.intern(Norm::Until(na, nb))
                } else {
                    self.intern(Norm::Release(na, nb))
                }
            }
            LtlAst::Eventually(a) => {
                let na = self.from_ast(a, ap, positive);
                if positive {
                    let t = self.intern(Norm::True);
                    self.intern(Norm::Until(t, na))
                } else {
                    let f = self.intern(Norm::False);
                    self.intern(Norm::Release(f, na))
                }
            }
            LtlAst::Always(a) => {
                let na = self.from_ast(a, ap, positive);
                if positive {
                    let f = self.intern(Norm::False);
                    self.intern(Norm::Release(f, na))
                } else {
                    let t = self.intern(Norm::True);
                    self.intern(Norm::Until(t, na))
                }
            }
        }
    }

    fn negate_literal(&mut self, id: NormId) -> NormId {
        match *self.get(id) {
            Norm::Lit { atom, neg } => self.intern(Norm::Lit { atom, neg: !neg }),
            _ => panic!("not a literal"),
        }
    }

    /// Until subformulas reachable from `root`, in interning order.
    fn untils_under(&self, root: NormId) -> Vec<NormId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![root];
        let mut out = BTreeSet::new();
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            match *self.get(id) {
                Norm::True | Norm::False | Norm::Lit { .. } => {}
                Norm::Next(a) => stack.push(a),
                Norm::And(a, b) | Norm::Or(a, b) | Norm::Release(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
                Norm::Until(a, b) => {
                    out.insert(id);
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
        out.into_iter().collect()
    }
}

// ---------------------------------------------------------------------------
// Node expansion.

const INIT_ID: u32 = 0;

#[derive(Clone)]
struct PendingNode {
    incoming: BTreeSet<u32>,
    new: BTreeSet<NormId>,
    old: BTreeSet<NormId>,
    next: BTreeSet<NormId>,
}

struct StoredNode {
    id: u32,
    incoming: BTreeSet<u32>,
    old: BTreeSet<NormId>,
}

struct Gba {
    root: NormId,
    nodes: Vec<StoredNode>,
}

struct Expander<'t> {
    table: &'t mut NormTable,
    stored: Vec<StoredNode>,
    by_key: HashMap<(Vec<NormId>, Vec<NormId>), usize>,
    next_id: u32,
}

impl Expander<'_> {
    fn fresh_id(&mut self) -> u32 {
        self.next_id += 1;
        self.next_id
    }

    fn expand(&mut self, mut node: PendingNode) {
        loop {
            let Some(&eta) = node.new.iter().next() else {
                let key = (
                    node.old.iter().copied().collect::<Vec<_>>(),
                    node.next.iter().copied().collect::<Vec<_>>(),
                );
                if let Some(&idx) = self.by_key.get(&key) {
                    let inc = node.incoming.clone();
                    self.stored[idx].incoming.extend(inc);
                    return;
                }
                let id = self.fresh_id();
                self.by_key.insert(key, self.stored.len());
                let successor_new = node.next.clone();
                self.stored.push(StoredNode {
                    id,
                    incoming: node.incoming,
                    old: node.old,
                });
                node = PendingNode {
                    incoming: BTreeSet::from([id]),
                    new: successor_new,
                    old: BTreeSet::new(),
                    next: BTreeSet::new(),
                };
                continue;
            };
            node.new.remove(&eta);
            match *self.table.get(eta) {
                Norm::False => return,
                Norm::True => {
                    node.old.insert(eta);
                }
                Norm::Lit { .. } => {
                    let negated = self.table.negate_literal(eta);
                    if node.old.contains(&negated) {
                        return;
                    }
                    node.old.insert(eta);
                }
                Norm::And(a, b) => {
                    node.old.insert(eta);
                    for f in [a, b] {
                        if !node.old.contains(&f) {
                            node.new.insert(f);
                        }
                    }
                }
                Norm::Next(a) => {
                    node.old.insert(eta);
                    node.next.insert(a);
                }
                Norm::Or(a, b) => {
                    node.old.insert(eta);
                    let mut left = node.clone();
                    if !left.old.contains(&a) {
                        left.new.insert(a);
                    }
                    self.expand(left);
                    if !node.old.contains(&b) {
                        node.new.insert(b);
                    }
                }
                Norm::Until(a, b) => {
                    node.old.insert(eta);
                    let mut hold = node.clone();
                    if !hold.old.contains(&a) {
                        hold.new.insert(a);
                    }
                    hold.next.insert(eta);
                    self.expand(hold);
                    if !node.old.contains(&b) {
                        node.new.insert(b);
                    }
                }
                Norm::Release(a, b) => {
                    node.old.insert(eta);
                    let mut hold = node.clone();
                    if !hold.old.contains(&b) {
                        hold.new.insert(b);
                    }
                    hold.next.insert(eta);
                    self.expand(hold);
                    for f in [a, b] {
                        if !node.old.contains(&f) {
                            node.new.insert(f);
                        }
                    }
                }
            }
        }
    }
}

fn expand_graph(table: &mut NormTable, root: NormId) -> Gba {
    let mut ex = Expander {
        table,
        stored: Vec::new(),
        by_key: HashMap::new(),
        next_id: INIT_ID,
    };
    let start = PendingNode {
        incoming: BTreeSet::from([INIT_ID]),
        new: BTreeSet::from([root]),
        old: BTreeSet::new(),
        next: BTreeSet::new(),
    };
    ex.expand(start);
    let mut nodes = ex.stored;
    nodes.sort_by_key(|n| n.id);
    Gba { root, nodes }
}

// ---------------------------------------------------------------------------
// Degeneralization.

fn node_guard(table: &NormTable, old: &BTreeSet<NormId>) -> GuardFormula {
    GuardFormula::conjunction(old.iter().filter_map(|&id| match *table.get(id) {
        Norm::Lit { atom, neg } => Some((atom, neg)),
        _ => None,
    }))
}

/// How a strongly connected component relates to the acceptance sets.
enum SccClass {
    /// Not in a nontrivial SCC: visited finitely often by every run.
    Transient,
    /// Some acceptance set misses the SCC entirely; no run may settle here.
    Dead,
    /// Every acceptance set covers the whole SCC; any run settling here wins.
    Free,
    /// Proper intersections; a counter over the listed sets is needed.
    Mixed(Vec<usize>),
}

/// Dense GBA states are `0` for the initial pseudo-state and `1 + index`
/// for stored nodes; returns the NBA pieces before simplification.
///
/// Degeneralization runs counters only inside SCCs whose acceptance-set
/// intersections are proper, so chain-shaped formulas stay linear-size.
fn degeneralize(
    table: &NormTable,
    gba: &Gba,
) -> (usize, Vec<usize>, Vec<usize>, Vec<(usize, usize, GuardFormula)>) {
    let n_gba = gba.nodes.len() + 1;
    let mut dense_of = HashMap::new();
    dense_of.insert(INIT_ID, 0usize);
    for (i, n) in gba.nodes.iter().enumerate() {
        dense_of.insert(n.id, i + 1);
    }

    let mut gba_edges: Vec<(usize, usize, GuardFormula)> = Vec::new();
    for (i, n) in gba.nodes.iter().enumerate() {
        let guard = node_guard(table, &n.old);
        for &p in &n.incoming {
            gba_edges.push((dense_of[&p], i + 1, guard.clone()));
        }
    }

    let untils = table.untils_under(gba.root);
    let k = untils.len();
    // F_i holds the nodes with no pending obligation for until number i.
    let in_accept = |state: usize, i: usize| -> bool {
        if state == 0 {
            return false;
        }
        let old = &gba.nodes[state - 1].old;
        let u = untils[i];
        let Norm::Until(_, b) = *table.get(u) else {
            unreachable!()
        };
        !old.contains(&u) || old.contains(&b)
    };

    if k == 0 {
        return (n_gba, vec![0], (0..n_gba).collect(), gba_edges);
    }

    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n_gba];
    for (e, &(src, _, _)) in gba_edges.iter().enumerate() {
        out[src].push(e);
    }
    let scc = scc_ids(n_gba, &gba_edges);
    let classes = classify_sccs(n_gba, &gba_edges, &scc, k, &in_accept);

    let advance = |q: usize, c: usize| -> usize {
        match &classes[scc[q]] {
            SccClass::Mixed(sets) => {
                if in_accept(q, sets[c]) {
                    (c + 1) % sets.len()
                } else {
                    c
                }
            }
            _ => 0,
        }
    };
    let accepts = |q: usize, c: usize| -> bool {
        match &classes[scc[q]] {
            SccClass::Free => true,
            SccClass::Dead => false,
            SccClass::Mixed(sets) => c == 0 && in_accept(q, sets[0]),
            // Transient states are seen finitely often, so the mark is
            // free; taking the all-sets intersection lets them merge with
            // accepting sinks downstream.
            SccClass::Transient => (0..k).all(|i| in_accept(q, i)),
        }
    };

    let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut states: Vec<(usize, usize)> = Vec::new();
    let mut edges = Vec::new();
    let mut queue = VecDeque::new();
    ids.insert((0, 0), 0);
    states.push((0, 0));
    queue.push_back((0, 0));
    while let Some((q, c)) = queue.pop_front() {
        let src_id = ids[&(q, c)];
        let advanced = advance(q, c);
        for &e in &out[q] {
            let (_, dst, ref guard) = gba_edges[e];
            let stays = scc[dst] == scc[q] && matches!(classes[scc[dst]], SccClass::Mixed(_));
            let key = (dst, if stays { advanced } else { 0 });
            let dst_id = *ids.entry(key).or_insert_with(|| {
                states.push(key);
                queue.push_back(key);
                states.len() - 1
            });
            edges.push((src_id, dst_id, guard.clone()));
        }
    }
    let accepting = states
        .iter()
        .enumerate()
        .filter(|&(_, &(q, c))| accepts(q, c))
        .map(|(id, _)| id)
        .collect();
    (states.len(), vec![0], accepting, edges)
}

/// Iterative Tarjan; returns the SCC index per state.
fn scc_ids(n: usize, edges: &[(usize, usize, GuardFormula)]) -> Vec<usize> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(src, dst, _) in edges {
        out[src].push(dst);
    }
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut scc = vec![usize::MAX; n];
    let mut next_index = 0usize;
    let mut n_sccs = 0usize;

    for start in 0..n {
        if index[start] != usize::MAX {
            continue;
        }
        // (state, next child position)
        let mut call: Vec<(usize, usize)> = vec![(start, 0)];
        while let Some(&mut (v, ref mut ci)) = call.last_mut() {
            if *ci == 0 {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if *ci < out[v].len() {
                let w = out[v][*ci];
                *ci += 1;
                if index[w] == usize::MAX {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        scc[w] = n_sccs;
                        if w == v {
                            break;
                        }
                    }
                    n_sccs += 1;
                }
                call.pop();
                if let Some(&mut (u, _)) = call.last_mut() {
                    low[u] = low[u].min(low[v]);
                }
            }
        }
    }
    scc
}

fn classify_sccs(
    n: usize,
    edges: &[(usize, usize, GuardFormula)],
    scc: &[usize],
    k: usize,
    in_accept: &dyn Fn(usize, usize) -> bool,
) -> Vec<SccClass> {
    let n_sccs = scc.iter().copied().max().map_or(0, |m| m + 1);
    let mut size = vec![0usize; n_sccs];
    for q in 0..n {
        size[scc[q]] += 1;
    }
    let mut internal_edge = vec![false; n_sccs];
    for &(src, dst, _) in edges {
        if scc[src] == scc[dst] {
            internal_edge[scc[src]] = true;
        }
    }
    (0..n_sccs)
        .map(|c| {
            if size[c] < 2 && !internal_edge[c] {
                return SccClass::Transient;
            }
            let members: Vec<usize> = (0..n).filter(|&q| scc[q] == c).collect();
            let mut proper = Vec::new();
            for i in 0..k {
                let hits = members.iter().filter(|&&q| in_accept(q, i)).count();
                if hits == 0 {
                    return SccClass::Dead;
                }
                if hits < members.len() {
                    proper.push(i);
                }
            }
            if proper.is_empty() {
                SccClass::Free
            } else {
                SccClass::Mixed(proper)
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Simplification.

/// Prune states that are unreachable or cannot contribute to an accepting
/// run, quotient by forward bisimulation, and renumber breadth-first.
pub fn simplify(nba: &Nba) -> Nba {
    let pruned = prune(nba);
    let quotiented = bisim_quotient(&pruned);
    renumber_bfs(&quotiented)
}

fn empty_language_automaton(ap: &ApSet) -> Nba {
    Nba::new(ap.clone(), 1, vec![0], vec![], vec![])
}

fn prune(nba: &Nba) -> Nba {
    let n = nba.n_states();
    let mut fwd: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut back: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in nba.edges() {
        fwd[e.src].push(e.dst);
        back[e.dst].push(e.src);
    }

    let mut reachable = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &q in nba.initial() {
        if !reachable[q] {
            reachable[q] = true;
            queue.push_back(q);
        }
    }
    while let Some(q) = queue.pop_front() {
        for &d in &fwd[q] {
            if !reachable[d] {
                reachable[d] = true;
                queue.push_back(d);
            }
        }
    }

    // Accepting states that can return to themselves seed the live set.
    let mut live = vec![false; n];
    for q in 0..n {
        if !reachable[q] || !nba.is_accepting(q) || live[q] {
            continue;
        }
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = fwd[q].clone();
        let mut returns = false;
        while let Some(s) = stack.pop() {
            if s == q {
                returns = true;
                break;
            }
            if seen[s] {
                continue;
            }
            seen[s] = true;
            stack.extend(fwd[s].iter().copied());
        }
        if returns {
            live[q] = true;
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&q| live[q]).collect();
    while let Some(q) = queue.pop_front() {
        for &p in &back[q] {
            if !live[p] {
                live[p] = true;
                queue.push_back(p);
            }
        }
    }

    let keep: Vec<usize> = (0..n).filter(|&q| reachable[q] && live[q]).collect();
    if !keep.iter().any(|q| nba.initial().contains(q)) {
        return empty_language_automaton(nba.ap());
    }
    let mut remap = vec![usize::MAX; n];
    for (new, &old) in keep.iter().enumerate() {
        remap[old] = new;
    }
    let initial = nba
        .initial()
        .iter()
        .filter(|&&q| remap[q] != usize::MAX)
        .map(|&q| remap[q])
        .collect();
    let accepting = keep
        .iter()
        .enumerate()
        .filter(|&(_, &old)| nba.is_accepting(old))
        .map(|(new, _)| new)
        .collect();
    let edges = nba
        .edges()
        .iter()
        .filter(|e| remap[e.src] != usize::MAX && remap[e.dst] != usize::MAX)
        .map(|e| (remap[e.src], remap[e.dst], e.guard.clone()))
        .collect();
    Nba::new(nba.ap().clone(), keep.len(), initial, accepting, edges)
}

/// Collapse forward-bisimilar states: same acceptance and, per target
/// class, semantically equal guard disjunctions. Guard equivalence is
/// decided over the atoms any guard mentions; automata whose guards span
/// more than 16 atoms are returned untouched.
fn bisim_quotient(nba: &Nba) -> Nba {
    let n = nba.n_states();
    if n == 0 {
        return nba.clone();
    }
    let relevant: u32 = nba.edges().iter().fold(0, |m, e| m | e.guard.atom_mask());
    let bits: Vec<u32> = (0..32).filter(|i| relevant & (1 << i) != 0).collect();
    if bits.len() > 16 {
        return nba.clone();
    }
    let n_assign = 1usize << bits.len();
    let words = n_assign.div_ceil(64);

    // Satisfying-assignment bitset per edge, over the relevant atoms.
    let edge_sets: Vec<Vec<u64>> = nba
        .edges()
        .iter()
        .map(|e| {
            let mut set = vec![0u64; words];
            for a in 0..n_assign {
                let mut sym = 0u32;
                for (j, bit) in bits.iter().enumerate() {
                    if a & (1 << j) != 0 {
                        sym |= 1 << bit;
                    }
                }
                if e.guard.satisfied_by(Symbol(sym)) {
                    set[a / 64] |= 1 << (a % 64);
                }
            }
            set
        })
        .collect();

    let mut class: Vec<usize> = (0..n).map(|q| nba.is_accepting(q) as usize).collect();
    loop {
        let mut sig_of: Vec<(usize, Vec<(usize, Vec<u64>)>)> = Vec::with_capacity(n);
        for q in 0..n {
            let mut sig: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
            for &ei in nba.out_edges(q) {
                let e = &nba.edges()[ei];
                let entry = sig.entry(class[e.dst]).or_insert_with(|| vec![0u64; words]);
                for (w, v) in entry.iter_mut().zip(&edge_sets[ei]) {
                    *w |= v;
                }
            }
            sig_of.push((class[q], sig.into_iter().collect()));
        }
        let mut next_class = vec![0usize; n];
        let mut index: HashMap<&(usize, Vec<(usize, Vec<u64>)>), usize> = HashMap::new();
        let mut count = 0usize;
        for q in 0..n {
            let id = *index.entry(&sig_of[q]).or_insert_with(|| {
                count += 1;
                count - 1
            });
            next_class[q] = id;
        }
        let stable = (0..n).all(|q| {
            (0..n).all(|p| (class[p] == class[q]) == (next_class[p] == next_class[q]))
        });
        class = next_class;
        if stable {
            break;
        }
    }

    let n_classes = class.iter().max().map_or(0, |m| m + 1);
    if n_classes == n {
        return nba.clone();
    }
    // Smallest member represents each class; bisimilarity makes its
    // outgoing guards equivalent to any member's.
    let mut rep = vec![usize::MAX; n_classes];
    for q in (0..n).rev() {
        rep[class[q]] = q;
    }
    let mut edges = Vec::new();
    for (c, &r) in rep.iter().enumerate() {
        let mut per_target: BTreeMap<usize, GuardFormula> = BTreeMap::new();
        for &ei in nba.out_edges(r) {
            let e = &nba.edges()[ei];
            let tgt = class[e.dst];
            let merged = match per_target.remove(&tgt) {
                Some(g) => GuardFormula::or(g, e.guard.clone()),
                None => e.guard.clone(),
            };
            per_target.insert(tgt, merged);
        }
        for (tgt, guard) in per_target {
            edges.push((c, tgt, guard));
        }
    }
    let initial: BTreeSet<usize> = nba.initial().iter().map(|&q| class[q]).collect();
    let accepting: BTreeSet<usize> = (0..n)
        .filter(|&q| nba.is_accepting(q))
        .map(|q| class[q])
        .collect();
    Nba::new(
        nba.ap().clone(),
        n_classes,
        initial.into_iter().collect(),
        accepting.into_iter().collect(),
        edges,
    )
}

fn renumber_bfs(nba: &Nba) -> Nba {
    let n = nba.n_states();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &q in nba.initial() {
        if !seen[q] {
            seen[q] = true;
            queue.push_back(q);
        }
    }
    while let Some(q) = queue.pop_front() {
        order.push(q);
        for &ei in nba.out_edges(q) {
            let d = nba.edges()[ei].dst;
            if !seen[d] {
                seen[d] = true;
                queue.push_back(d);
            }
        }
    }
    for q in 0..n {
        if !seen[q] {
            order.push(q);
        }
    }
    let mut remap = vec![0usize; n];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new;
    }
    let initial = nba.initial().iter().map(|&q| remap[q]).collect();
    let accepting = (0..n)
        .filter(|&q| nba.is_accepting(q))
        .map(|q| remap[q])
        .collect();
    let edges = nba
        .edges()
        .iter()
        .map(|e| (remap[e.src], remap[e.dst], e.guard.clone()))
        .collect();
    Nba::new(nba.ap().clone(), n, initial, accepting, edges)
}
