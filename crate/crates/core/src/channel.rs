//! Finite-alphabet instances of the three-pair noisy interference channel.
//!
//! Sender `l` emits `X_l`; the link maps `g[l][k]` give the signal
//! `X_{lk}` that reaches receiver `k`. Receiver `l` combines the two
//! interfering link signals through `h[l]`, passes the result through the
//! noise kernel `noise[l]` and finally mixes it with its own link signal
//! through `f[l]`:
//!
//! ```text
//! S_l  = h_l(X_{m l}, X_{n l})      m = l+1, n = l+2 (mod 3)
//! S'_l ~ p(s'_l | s_l)
//! Y_l  = f_l(X_{l l}, S'_l)
//! ```
//!
//! Indices are zero-based in code and one-based in every rendered name, so
//! receiver 0 combines `h1(X21, X31)`, receiver 1 `h2(X32, X12)` and
//! receiver 2 `h3(X13, X23)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violations};
use crate::rational::{sum_probs, sums_to_one, Prob};

pub const USERS: usize = 3;

/// The two interferers `(m, n)` of receiver `l`, in combiner argument order.
pub fn interferers(l: usize) -> (usize, usize) {
    ((l + 1) % USERS, (l + 2) % USERS)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabets {
    /// `|X_l|`
    pub x: [usize; USERS],
    /// `|X_{lk}|`, indexed `[l][k]`
    pub x_link: [[usize; USERS]; USERS],
    /// `|S_l|`
    pub s: [usize; USERS],
    /// `|S'_l|`
    pub s_noisy: [usize; USERS],
    /// `|Y_l|`
    pub y: [usize; USERS],
}

/// Lookup-table description of a channel; see the module docs for layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub alphabets: Alphabets,
    /// `g[l][k][x_l] = x_{lk}`
    pub g: Vec<Vec<Vec<usize>>>,
    /// `h[l][a][b] = s_l` with `a = x_{ml}`, `b = x_{nl}`
    pub h: Vec<Vec<Vec<usize>>>,
    /// `f[l][x_ll][s'_l] = y_l`
    pub f: Vec<Vec<Vec<usize>>>,
    /// `noise[l][s_l][s'_l] = p(s'_l | s_l)`
    pub noise: Vec<Vec<Vec<Prob>>>,
}

/// A channel that passed [`validate_channel`]. Kernels are cached as floats.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidatedChannel {
    spec: ChannelSpec,
    noise_f64: Vec<Vec<Vec<f64>>>,
    exact: bool,
}

impl ValidatedChannel {
    pub fn spec(&self) -> &ChannelSpec {
        &self.spec
    }

    pub fn alphabets(&self) -> &Alphabets {
        &self.spec.alphabets
    }

    /// True when every noise entry is rational.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn link(&self, l: usize, k: usize, x: usize) -> usize {
        self.spec.g[l][k][x]
    }

    pub fn combine(&self, l: usize, a: usize, b: usize) -> usize {
        self.spec.h[l][a][b]
    }

    pub fn receive(&self, l: usize, own: usize, s_noisy: usize) -> usize {
        self.spec.f[l][own][s_noisy]
    }

    pub fn noise(&self, l: usize) -> &[Vec<Prob>] {
        &self.spec.noise[l]
    }

    pub fn noise_f64(&self, l: usize) -> &[Vec<f64>] {
        &self.noise_f64[l]
    }

    /// Identity kernels on every receiver (`S'_l = S_l`).
    pub fn is_noiseless(&self) -> bool {
        self.spec.noise.iter().all(|kernel| {
            kernel.iter().enumerate().all(|(s, row)| {
                row.len() == kernel.len()
                    && row.iter().enumerate().all(|(t, p)| {
                        if s == t {
                            p.exact().is_some_and(|r| num_traits::One::is_one(r))
                        } else {
                            p.is_zero()
                        }
                    })
            })
        })
    }

    /// Sender 3 has a single input symbol and nothing reaches receiver 3.
    pub fn is_third_pair_degenerate(&self) -> bool {
        let a = &self.spec.alphabets;
        a.x[2] == 1
            && self.spec.g[0][2].iter().all(|&v| v == self.spec.g[0][2][0])
            && self.spec.g[1][2].iter().all(|&v| v == self.spec.g[1][2][0])
    }

    pub fn into_spec(self) -> ChannelSpec {
        self.spec
    }
}

fn check_table_1d(name: &str, table: &[usize], len: usize, codomain: usize, out: &mut Vec<Error>) {
    if table.len() != len {
        out.push(Error::IncompleteTable {
            table: name.to_string(),
            detail: format!("expected {len} entries, found {}", table.len()),
        });
    }
    for (i, &v) in table.iter().enumerate() {
        if v >= codomain {
            out.push(Error::IncompleteTable {
                table: name.to_string(),
                detail: format!("entry {i} = {v} outside codomain of size {codomain}"),
            });
        }
    }
}

fn check_table_2d(
    name: &str,
    table: &[Vec<usize>],
    rows: usize,
    cols: usize,
    codomain: usize,
    out: &mut Vec<Error>,
) -> bool {
    let before = out.len();
    if table.len() != rows {
        out.push(Error::IncompleteTable {
            table: name.to_string(),
            detail: format!("expected {rows} rows, found {}", table.len()),
        });
    }
    for (i, row) in table.iter().enumerate() {
        check_table_1d(&format!("{name}[{i}]"), row, cols, codomain, out);
    }
    out.len() == before
}

/// Checks that fixing either argument of `table` leaves a one-to-one map.
fn check_injective_each_argument(name: &str, table: &[Vec<usize>], out: &mut Vec<Error>) {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    for a in 0..rows {
        for b1 in 0..cols {
            for b2 in b1 + 1..cols {
                if table[a][b1] == table[a][b2] {
                    out.push(Error::NonInjective {
                        function: name.to_string(),
                        fixed: format!("first argument = {a}"),
                        first: b1,
                        second: b2,
                        image: table[a][b1],
                    });
                }
            }
        }
    }
    for b in 0..cols {
        for a1 in 0..rows {
            for a2 in a1 + 1..rows {
                if table[a1][b] == table[a2][b] {
                    out.push(Error::NonInjective {
                        function: name.to_string(),
                        fixed: format!("second argument = {b}"),
                        first: a1,
                        second: a2,
                        image: table[a1][b],
                    });
                }
            }
        }
    }
}

/// Validates totality, injectivity in each argument of `h_l` and `f_l`, and
/// row-stochasticity of the noise kernels. Every violation is reported.
pub fn validate_channel(spec: ChannelSpec) -> std::result::Result<ValidatedChannel, Violations> {
    let mut out = Vec::new();
    let a = &spec.alphabets;
    let sizes = a
        .x
        .iter()
        .chain(a.x_link.iter().flatten())
        .chain(a.s.iter())
        .chain(a.s_noisy.iter())
        .chain(a.y.iter());
    if sizes.into_iter().any(|&n| n == 0) {
        out.push(Error::InvalidParameter("alphabet sizes must be positive".into()));
        return Err(Violations(out));
    }
    for (name, len) in [("g", spec.g.len()), ("h", spec.h.len()), ("f", spec.f.len()), ("noise", spec.noise.len())] {
        if len != USERS {
            out.push(Error::IncompleteTable {
                table: name.to_string(),
                detail: format!("expected {USERS} entries, found {len}"),
            });
        }
    }
    if !out.is_empty() {
        return Err(Violations(out));
    }
    for l in 0..USERS {
        if spec.g[l].len() != USERS {
            out.push(Error::IncompleteTable {
                table: format!("g[{l}]"),
                detail: format!("expected {USERS} link maps, found {}", spec.g[l].len()),
            });
            continue;
        }
        for k in 0..USERS {
            check_table_1d(&format!("g{}{}", l + 1, k + 1), &spec.g[l][k], a.x[l], a.x_link[l][k], &mut out);
        }
    }
    for l in 0..USERS {
        let (m, n) = interferers(l);
        let name = format!("h{}", l + 1);
        if check_table_2d(&name, &spec.h[l], a.x_link[m][l], a.x_link[n][l], a.s[l], &mut out) {
            check_injective_each_argument(&name, &spec.h[l], &mut out);
        }
        let name = format!("f{}", l + 1);
        if check_table_2d(&name, &spec.f[l], a.x_link[l][l], a.s_noisy[l], a.y[l], &mut out) {
            check_injective_each_argument(&name, &spec.f[l], &mut out);
        }
        let kernel = &spec.noise[l];
        let kname = format!("noise{}", l + 1);
        if kernel.len() != a.s[l] {
            out.push(Error::IncompleteTable {
                table: kname.clone(),
                detail: format!("expected {} rows, found {}", a.s[l], kernel.len()),
            });
        }
        for (row_idx, row) in kernel.iter().enumerate() {
            if row.len() != a.s_noisy[l] {
                out.push(Error::IncompleteTable {
                    table: format!("{kname}[{row_idx}]"),
                    detail: format!("expected {} entries, found {}", a.s_noisy[l], row.len()),
                });
                continue;
            }
            if let Some(p) = row.iter().find(|p| p.is_negative()) {
                out.push(Error::InvalidProbability(format!("{kname}[{row_idx}] has negative entry {p}")));
            }
            let sum = sum_probs(row);
            if !sums_to_one(&sum) {
                out.push(Error::NonStochastic { kernel: kname.clone(), row: row_idx, sum: sum.to_string() });
            }
        }
    }
    if !out.is_empty() {
        return Err(Violations(out));
    }
    let noise_f64 = spec
        .noise
        .iter()
        .map(|k| k.iter().map(|row| row.iter().map(Prob::to_f64).collect()).collect())
        .collect();
    let exact = spec.noise.iter().flatten().flatten().all(Prob::is_exact);
    Ok(ValidatedChannel { spec, noise_f64, exact })
}

/// All alphabets `Z_q`, identity links, addition mod `q` for `h` and `f`,
/// and a `q`-ary symmetric noise kernel with error probability `flip`.
pub fn build_modulo_example(q: usize, flip: Prob) -> Result<ChannelSpec> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!("q must be at least 2, got {q}")));
    }
    let f = flip.to_f64();
    if !(0.0..=1.0).contains(&f) || flip.is_negative() {
        return Err(Error::InvalidParameter(format!("noise_flip must lie in [0, 1], got {flip}")));
    }
    let keep = Prob::one().sub(&flip);
    let wrong = flip.div_int(q as i64 - 1);
    let kernel: Vec<Vec<Prob>> = (0..q)
        .map(|s| (0..q).map(|t| if s == t { keep.clone() } else { wrong.clone() }).collect())
        .collect();
    let add: Vec<Vec<usize>> = (0..q).map(|a| (0..q).map(|b| (a + b) % q).collect()).collect();
    let identity: Vec<usize> = (0..q).collect();
    Ok(ChannelSpec {
        alphabets: Alphabets { x: [q; 3], x_link: [[q; 3]; 3], s: [q; 3], s_noisy: [q; 3], y: [q; 3] },
        g: vec![vec![identity; USERS]; USERS],
        h: vec![add.clone(); USERS],
        f: vec![add; USERS],
        noise: vec![kernel; USERS],
    })
}

/// Removes the third user pair: `|X_3| = 1` and senders 1 and 2 send a
/// constant symbol towards receiver 3. Declared codomains are kept, so the
/// combiners at receivers 1 and 2 stay injective in the surviving argument.
pub fn degenerate_third_pair(spec: &ChannelSpec) -> ChannelSpec {
    let mut out = spec.clone();
    out.alphabets.x[2] = 1;
    for k in 0..USERS {
        let first = spec.g[2][k].first().copied().unwrap_or(0);
        out.g[2][k] = vec![first];
    }
    for l in 0..2 {
        let first = spec.g[l][2].first().copied().unwrap_or(0);
        out.g[l][2] = vec![first; spec.alphabets.x[l]];
    }
    out
}

/// Shape of randomly drawn instances used by the property tests and suite.
#[derive(Clone, Debug)]
pub struct RandomChannelConfig {
    /// Largest input alphabet; sizes are drawn from `2..=max_input`.
    pub max_input: usize,
    /// Identity noise kernels when set.
    pub noiseless: bool,
    /// Rational kernels when set, floats otherwise.
    pub exact: bool,
}

impl Default for RandomChannelConfig {
    fn default() -> Self {
        RandomChannelConfig { max_input: 3, noiseless: false, exact: true }
    }
}

fn random_injective_table<R: Rng>(rng: &mut R, rows: usize, cols: usize, codomain: usize) -> Vec<Vec<usize>> {
    let mut shift_a: Vec<usize> = (0..codomain).collect();
    let mut shift_b: Vec<usize> = (0..codomain).collect();
    let mut relabel: Vec<usize> = (0..codomain).collect();
    shuffle(rng, &mut shift_a);
    shuffle(rng, &mut shift_b);
    shuffle(rng, &mut relabel);
    (0..rows)
        .map(|a| (0..cols).map(|b| relabel[(shift_a[a] + shift_b[b]) % codomain]).collect())
        .collect()
}

fn shuffle<R: Rng, T>(rng: &mut R, v: &mut [T]) {
    for i in (1..v.len()).rev() {
        let j = rng.random_range(0..=i);
        v.swap(i, j);
    }
}

/// A random stochastic row with small integer weights (never all zero).
pub fn random_row<R: Rng>(rng: &mut R, len: usize, exact: bool) -> Vec<Prob> {
    loop {
        let w: Vec<i64> = (0..len).map(|_| rng.random_range(0..=4)).collect();
        let total: i64 = w.iter().sum();
        if total == 0 {
            continue;
        }
        return w
            .into_iter()
            .map(|v| if exact { Prob::ratio(v, total) } else { Prob::Float(v as f64 / total as f64) })
            .collect();
    }
}

/// Draws a random valid channel: arbitrary link maps, combiners and receiver
/// maps that are injective in each argument, and random noise kernels.
pub fn random_channel<R: Rng>(rng: &mut R, cfg: &RandomChannelConfig) -> ChannelSpec {
    let max_input = cfg.max_input.max(2);
    let x: [usize; 3] = std::array::from_fn(|_| rng.random_range(2..=max_input));
    let x_link: [[usize; 3]; 3] = std::array::from_fn(|l| std::array::from_fn(|_| rng.random_range(1..=x[l])));
    let g: Vec<Vec<Vec<usize>>> = (0..USERS)
        .map(|l| (0..USERS).map(|k| (0..x[l]).map(|_| rng.random_range(0..x_link[l][k])).collect()).collect())
        .collect();
    let mut s = [0; 3];
    let mut s_noisy = [0; 3];
    let mut y = [0; 3];
    let mut h = Vec::new();
    let mut f = Vec::new();
    let mut noise = Vec::new();
    for l in 0..USERS {
        let (m, n) = interferers(l);
        let (ra, rb) = (x_link[m][l], x_link[n][l]);
        s[l] = ra.max(rb) + rng.random_range(0..=1);
        h.push(random_injective_table(rng, ra, rb, s[l]));
        s_noisy[l] = if cfg.noiseless { s[l] } else { rng.random_range(2..=3) };
        let own = x_link[l][l];
        y[l] = own.max(s_noisy[l]) + rng.random_range(0..=1);
        f.push(random_injective_table(rng, own, s_noisy[l], y[l]));
        let kernel = if cfg.noiseless {
            (0..s[l]).map(|i| (0..s[l]).map(|j| if i == j { Prob::one() } else { Prob::zero() }).collect()).collect()
        } else {
            (0..s[l]).map(|_| random_row(rng, s_noisy[l], cfg.exact)).collect()
        };
        noise.push(kernel);
    }
    ChannelSpec { alphabets: Alphabets { x, x_link, s, s_noisy, y }, g, h, f, noise }
}

impl ChannelSpec {
    pub fn from_json_str(text: &str) -> Result<Self> {
        crate::io::parse_json(text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn and_gate() -> Vec<Vec<usize>> {
        vec![vec![0, 0], vec![0, 1]]
    }

    #[test]
    fn modular_addition_is_accepted() {
        for q in 2..=5 {
            for flip in ["0", "0.1", "0.5", "1"] {
                let spec = build_modulo_example(q, flip.parse().unwrap()).unwrap();
                assert!(validate_channel(spec).is_ok(), "q={q} flip={flip}");
            }
        }
    }

    #[test]
    fn logical_and_is_rejected() {
        let mut spec = build_modulo_example(2, Prob::zero()).unwrap();
        spec.h[0] = and_gate();
        let err = validate_channel(spec).unwrap_err();
        let first = &err.0[0];
        match first {
            Error::NonInjective { function, fixed, first, second, image } => {
                assert_eq!(function, "h1");
                assert_eq!(fixed, "first argument = 0");
                assert_eq!((*first, *second, *image), (0, 1, 0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_stochastic_row_is_reported_with_sum() {
        let mut spec = build_modulo_example(2, Prob::zero()).unwrap();
        spec.noise[1][0] = vec!["0.5".parse().unwrap(), "0.6".parse().unwrap()];
        let err = validate_channel(spec).unwrap_err();
        assert!(err.0.iter().any(|e| matches!(e,
            Error::NonStochastic { kernel, row: 0, sum } if kernel == "noise2" && sum == "11/10")));
    }

    #[test]
    fn float_kernels_use_tolerance() {
        let mut spec = build_modulo_example(2, Prob::zero()).unwrap();
        spec.noise[0] = vec![vec![Prob::Float(0.9), Prob::Float(0.1)], vec![Prob::Float(0.1), Prob::Float(0.9)]];
        let ch = validate_channel(spec.clone()).unwrap();
        assert!(!ch.is_exact());
        spec.noise[0][0][0] = Prob::Float(0.9 + 1e-10);
        assert!(validate_channel(spec).is_err());
    }

    #[test]
    fn incomplete_tables_are_reported() {
        let mut spec = build_modulo_example(3, Prob::zero()).unwrap();
        spec.g[0][1] = vec![0, 1];
        spec.f[2][1][1] = 7;
        let err = validate_channel(spec).unwrap_err();
        assert!(err.0.iter().any(|e| matches!(e, Error::IncompleteTable { table, .. } if table == "g12")));
        assert!(err.0.iter().any(|e| matches!(e, Error::IncompleteTable { table, .. } if table == "f3[1]")));
    }

    #[test]
    fn modulo_kernels_match_definition() {
        let spec = build_modulo_example(2, Prob::zero()).unwrap();
        assert_eq!(spec.noise[0], vec![vec![Prob::one(), Prob::zero()], vec![Prob::zero(), Prob::one()]]);
        assert!(validate_channel(spec).unwrap().is_noiseless());

        let spec = build_modulo_example(2, "0.1".parse().unwrap()).unwrap();
        assert_eq!(spec.noise[2][0], vec![Prob::ratio(9, 10), Prob::ratio(1, 10)]);
        assert_eq!(spec.noise[2][1], vec![Prob::ratio(1, 10), Prob::ratio(9, 10)]);

        let spec = build_modulo_example(3, "0.3".parse().unwrap()).unwrap();
        assert_eq!(spec.noise[1][2], vec![Prob::ratio(15, 100), Prob::ratio(15, 100), Prob::ratio(7, 10)]);
        assert!(build_modulo_example(3, "1.5".parse().unwrap()).is_err());
        assert!(build_modulo_example(1, Prob::zero()).is_err());
    }

    #[test]
    fn degenerate_third_pair_is_idempotent_and_valid() {
        let spec = build_modulo_example(2, Prob::zero()).unwrap();
        let once = degenerate_third_pair(&spec);
        assert_eq!(once.alphabets.x[2], 1);
        assert_eq!(once.g[2][0], vec![0]);
        // S1 = X21 + X31 with X31 fixed to 0, i.e. S1 = g21(X2)
        let ch = validate_channel(once.clone()).unwrap();
        assert!(ch.is_third_pair_degenerate());
        for x2 in 0..2 {
            let s = ch.combine(0, ch.link(1, 0, x2), ch.link(2, 0, 0));
            assert_eq!(s, ch.link(1, 0, x2));
        }
        assert_eq!(degenerate_third_pair(&once), once);
    }

    #[test]
    fn random_channels_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..200 {
            let cfg = RandomChannelConfig { max_input: 4, noiseless: i % 3 == 0, exact: i % 2 == 0 };
            let spec = random_channel(&mut rng, &cfg);
            let ch = validate_channel(spec.clone()).expect("random channel valid");
            assert_eq!(ch.is_noiseless(), cfg.noiseless);
            validate_channel(degenerate_third_pair(&spec)).expect("degenerate channel valid");
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let spec = build_modulo_example(3, "1/7".parse().unwrap()).unwrap();
        let text = spec.to_json_string();
        let back = ChannelSpec::from_json_str(&text).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.to_json_string(), text);
    }
}
