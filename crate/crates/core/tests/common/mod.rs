//! Shared support for the integration suites: the formula corpus and an
//! amortized lasso-language checker fast enough for exhaustive sweeps.

use minviol::ltl::{parse_ltl_free, semantics, translate, ApSet, LtlAst, Nba, Symbol};

/// Corpus used by the automaton acceptance sweeps: formula source plus the
/// atoms it is interpreted over. Mirrors the specification patterns the
/// planner consumes: sequential visits, patrols with avoidance, and the
/// propositional/temporal operator mix.
pub fn corpus() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("<>a", vec!["a"]),
        ("[]a", vec!["a"]),
        ("[]<>a", vec!["a"]),
        ("<>[]a", vec!["a"]),
        ("X a", vec!["a"]),
        ("X X a", vec!["a"]),
        ("a U b", vec!["a", "b"]),
        ("<>(a && <>b)", vec!["a", "b"]),
        ("[]<>a && []<>b", vec!["a", "b"]),
        ("[]!b && <>a", vec!["a", "b"]),
        ("(!b) U a", vec!["a", "b"]),
        ("[](a -> <>b)", vec!["a", "b"]),
        ("<>a && <>b", vec!["a", "b"]),
        ("<>[](a || b)", vec!["a", "b"]),
        ("([]<>a) -> ([]<>b)", vec!["a", "b"]),
        ("[](a -> X b)", vec!["a", "b"]),
        ("!<>(a && b)", vec!["a", "b"]),
        ("<>(a && <>(b && <>c))", vec!["a", "b", "c"]),
        ("[]!c && []<>a && []<>b", vec!["a", "b", "c"]),
        ("a U (b U c)", vec!["a", "b", "c"]),
    ]
}

/// Post-order flattening of a formula; node values evaluate bottom-up.
enum Op {
    True,
    Atom(usize),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Next(usize),
    Until(usize, usize),
    Eventually(usize),
    Always(usize),
}

struct Flat {
    ops: Vec<Op>,
}

impl Flat {
    fn build(ast: &LtlAst, ap: &ApSet) -> Flat {
        let mut ops = Vec::new();
        Self::push(ast, ap, &mut ops);
        Flat { ops }
    }

    fn push(ast: &LtlAst, ap: &ApSet, ops: &mut Vec<Op>) -> usize {
        let op = match ast {
            LtlAst::True => Op::True,
            LtlAst::Atom(name) => Op::Atom(ap.index_of(name).expect("corpus atom")),
            LtlAst::Not(a) => Op::Not(Self::push(a, ap, ops)),
            LtlAst::And(a, b) => Op::And(Self::push(a, ap, ops), Self::push(b, ap, ops)),
            LtlAst::Or(a, b) => Op::Or(Self::push(a, ap, ops), Self::push(b, ap, ops)),
            LtlAst::Implies(a, b) => Op::Implies(Self::push(a, ap, ops), Self::push(b, ap, ops)),
            LtlAst::Next(a) => Op::Next(Self::push(a, ap, ops)),
            LtlAst::Until(a, b) => Op::Until(Self::push(a, ap, ops), Self::push(b, ap, ops)),
            LtlAst::Eventually(a) => Op::Eventually(Self::push(a, ap, ops)),
            LtlAst::Always(a) => Op::Always(Self::push(a, ap, ops)),
        };
        ops.push(op);
        ops.len() - 1
    }

    /// Truth of every node at every cycle position of `cycle^ω`, as one
    /// bitmask per node (bit i = position i). Fixpoints converge within
    /// the cycle length, matching the reference evaluator.
    fn cycle_vals(&self, cycle: &[Symbol]) -> Vec<u32> {
        let k = cycle.len();
        let full: u32 = (1u32 << k) - 1;
        let rot = |v: u32| ((v >> 1) | (v << (k - 1))) & full;
        let mut vals = vec![0u32; self.ops.len()];
        for (i, op) in self.ops.iter().enumerate() {
            vals[i] = match *op {
                Op::True => full,
                Op::Atom(a) => {
                    let mut v = 0;
                    for (p, s) in cycle.iter().enumerate() {
                        if s.contains(a) {
                            v |= 1 << p;
                        }
                    }
                    v
                }
                Op::Not(c) => !vals[c] & full,
                Op::And(a, b) => vals[a] & vals[b],
                Op::Or(a, b) => vals[a] | vals[b],
                Op::Implies(a, b) => (!vals[a] | vals[b]) & full,
                Op::Next(c) => rot(vals[c]),
                Op::Until(a, b) => {
                    let mut v = vals[b];
                    for _ in 0..k {
                        v = vals[b] | (vals[a] & rot(v));
                    }
                    v
                }
                Op::Eventually(c) => {
                    let mut v = vals[c];
                    for _ in 0..k {
                        v = vals[c] | rot(v);
                    }
                    v
                }
                Op::Always(c) => {
                    let mut v = vals[c];
                    for _ in 0..k {
                        v = vals[c] & rot(v);
                    }
                    v
                }
            };
        }
        vals
    }

    /// Truth of the root at position 0 of `prefix · cycle^ω`, given the
    /// cycle values: one backward pass over the prefix.
    fn prefix_eval(&self, prefix: &[Symbol], cycle_vals: &[u32]) -> bool {
        let n = self.ops.len();
        // Values at the junction are the cycle values at position 0.
        let mut next: Vec<bool> = (0..n).map(|i| cycle_vals[i] & 1 == 1).collect();
        let mut cur = vec![false; n];
        for s in prefix.iter().rev() {
            for (i, op) in self.ops.iter().enumerate() {
                cur[i] = match *op {
                    Op::True => true,
                    Op::Atom(a) => s.contains(a),
                    Op::Not(c) => !cur[c],
                    Op::And(a, b) => cur[a] && cur[b],
                    Op::Or(a, b) => cur[a] || cur[b],
                    Op::Implies(a, b) => !cur[a] || cur[b],
                    Op::Next(c) => next[c],
                    Op::Until(a, b) => cur[b] || (cur[a] && next[i]),
                    Op::Eventually(c) => cur[c] || next[i],
                    Op::Always(c) => cur[c] && next[i],
                };
            }
            std::mem::swap(&mut next, &mut cur);
        }
        next[n - 1]
    }
}

/// Per-symbol successor masks of an automaton; states packed into a u64.
struct NbaFast {
    n: usize,
    init: u64,
    accepting: u64,
    succ: Vec<Vec<u64>>,
}

impl NbaFast {
    fn build(nba: &Nba, n_syms: usize) -> NbaFast {
        let n = nba.n_states();
        assert!(n <= 64, "fast checker packs states into a u64");
        let mut succ = vec![vec![0u64; n]; n_syms];
        for (raw, row) in succ.iter_mut().enumerate() {
            for (q, slot) in row.iter_mut().enumerate() {
                for d in nba.successors(q, Symbol(raw as u32)) {
                    *slot |= 1 << d;
                }
            }
        }
        let mut init = 0u64;
        for &q in nba.initial() {
            init |= 1 << q;
        }
        let mut accepting = 0u64;
        for q in nba.accepting_states() {
            accepting |= 1 << q;
        }
        NbaFast { n, init, accepting, succ }
    }

    fn step(&self, mask: u64, sym: Symbol) -> u64 {
        let row = &self.succ[sym.0 as usize];
        let mut out = 0u64;
        let mut m = mask;
        while m != 0 {
            let q = m.trailing_zeros() as usize;
            m &= m - 1;
            out |= row[q];
        }
        out
    }

    /// States from which `cycle^ω` has an accepting run: per start state,
    /// reachability over whole cycle blocks with an accepting-visit flag,
    /// then a flagged-cycle search on that block graph.
    fn good_cycle_starts(&self, cycle: &[Symbol]) -> u64 {
        let n = self.n;
        let mut plain = vec![0u64; n];
        let mut hit = vec![0u64; n];
        for q in 0..n {
            let mut any = 1u64 << q;
            let mut h = 0u64;
            for &s in cycle {
                let sa = self.step(any, s);
                h = self.step(h, s) | (sa & self.accepting);
                any = sa;
            }
            plain[q] = any;
            hit[q] = h;
        }
        // reach[q]: states reachable from q over zero or more blocks
        let mut reach: Vec<u64> = (0..n).map(|q| 1u64 << q).collect();
        loop {
            let mut changed = false;
            for q in 0..n {
                let mut r = reach[q];
                let mut m = r;
                while m != 0 {
                    let p = m.trailing_zeros() as usize;
                    m &= m - 1;
                    r |= reach[p] | plain[p];
                }
                if r != reach[q] {
                    reach[q] = r;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut on_hit_cycle = 0u64;
        for a in 0..n {
            let mut m = hit[a];
            while m != 0 {
                let b = m.trailing_zeros() as usize;
                m &= m - 1;
                if reach[b] >> a & 1 == 1 {
                    on_hit_cycle |= 1 << a;
                }
            }
        }
        let mut good = 0u64;
        for q in 0..n {
            if reach[q] & on_hit_cycle != 0 {
                good |= 1 << q;
            }
        }
        good
    }
}

/// Result of one exhaustive formula sweep.
pub struct SweepReport {
    pub lassos: usize,
    pub cross_checked: usize,
}

/// Compares NBA lasso acceptance against direct LTL semantics on every
/// word `u · v^ω` with `|u| <= max_u`, `1 <= |v| <= max_v` over the full
/// alphabet of `atoms`. Panics on the first disagreement. Every
/// `sample_stride`-th word is also checked against the unamortized
/// reference evaluator and the automaton's own lasso runner, tying the
/// fast paths to the library implementations.
pub fn sweep_formula(
    src: &str,
    atoms: &[&str],
    max_u: usize,
    max_v: usize,
    sample_stride: usize,
) -> SweepReport {
    let ap = ApSet::from_strs(atoms);
    let ast = parse_ltl_free(src).expect("corpus formula parses");
    let nba = translate(&ast, &ap);
    let flat = Flat::build(&ast, &ap);
    let n_syms = 1usize << ap.len();
    let fast = NbaFast::build(&nba, n_syms);

    let mut lassos = 0usize;
    let mut cross_checked = 0usize;
    let mut v_buf: Vec<Symbol> = Vec::new();
    let mut u_buf: Vec<Symbol> = Vec::new();
    for lv in 1..=max_v {
        v_buf.resize(lv, Symbol::EMPTY);
        for v_code in 0..n_syms.pow(lv as u32) {
            let mut c = v_code;
            for slot in v_buf.iter_mut() {
                *slot = Symbol((c % n_syms) as u32);
                c /= n_syms;
            }
            let cycle_vals = flat.cycle_vals(&v_buf);
            let good = fast.good_cycle_starts(&v_buf);
            for lu in 0..=max_u {
                u_buf.resize(lu, Symbol::EMPTY);
                for u_code in 0..n_syms.pow(lu as u32) {
                    let mut c = u_code;
                    for slot in u_buf.iter_mut() {
                        *slot = Symbol((c % n_syms) as u32);
                        c /= n_syms;
                    }
                    let want = flat.prefix_eval(&u_buf, &cycle_vals);
                    let mut mask = fast.init;
                    for &s in &u_buf {
                        mask = fast.step(mask, s);
                    }
                    let got = mask & good != 0;
                    assert_eq!(
                        got, want,
                        "{src}: automaton disagrees with semantics on \
                         prefix {u_buf:?} cycle {v_buf:?}"
                    );
                    lassos += 1;
                    if lassos % sample_stride == 0 {
                        assert_eq!(
                            semantics::holds_on_lasso(&ast, &ap, &u_buf, &v_buf),
                            want,
                            "{src}: fast semantics diverges on {u_buf:?} {v_buf:?}"
                        );
                        assert_eq!(
                            nba.accepts_lasso(&u_buf, &v_buf),
                            got,
                            "{src}: fast acceptance diverges on {u_buf:?} {v_buf:?}"
                        );
                        cross_checked += 1;
                    }
                }
            }
        }
    }
    SweepReport { lassos, cross_checked }
}
