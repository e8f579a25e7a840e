//! CSS code constructions, validation and the text manifest format.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::bp::TannerGraph;
use crate::error::CodeError;
use crate::gf2::{BitVector, RowSpace, SparseBitMatrix};

/// Environment variable that overrides where shipped code data is read from.
pub const DATA_DIR_ENV: &str = "QLDPC_DATA_DIR";

/// A CSS code given by its X-type (`hx`) and Z-type (`hz`) check matrices.
///
/// `d` is declared metadata; it is never recomputed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CssCode {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub hx: SparseBitMatrix,
    pub hz: SparseBitMatrix,
}

impl CssCode {
    /// Validates commutation and computes `k` from the ranks.
    pub fn new(
        name: impl Into<String>,
        hx: SparseBitMatrix,
        hz: SparseBitMatrix,
        d: usize,
    ) -> Result<Self, CodeError> {
        if hx.cols() != hz.cols() {
            return Err(CodeError::LengthMismatch {
                declared: hx.cols(),
                found: hz.cols(),
            });
        }
        let product = hx.mul(&hz.transpose())?;
        if !product.is_zero() {
            return Err(CodeError::CommutationViolated {
                nonzero: product.nnz(),
            });
        }
        let n = hx.cols();
        let k = n - hx.rank() - hz.rank();
        Ok(Self {
            name: name.into(),
            n,
            k,
            d,
            hx,
            hz,
        })
    }

    /// Like [`CssCode::new`], additionally checking a declared `n` and `k`.
    pub fn with_declared(
        name: impl Into<String>,
        n: usize,
        k: usize,
        d: usize,
        hx: SparseBitMatrix,
        hz: SparseBitMatrix,
    ) -> Result<Self, CodeError> {
        if hx.cols() != n || hz.cols() != n {
            return Err(CodeError::LengthMismatch {
                declared: n,
                found: if hx.cols() != n { hx.cols() } else { hz.cols() },
            });
        }
        let code = Self::new(name, hx, hz, d)?;
        if code.k != k {
            return Err(CodeError::LogicalCountMismatch {
                declared: k,
                computed: code.k,
            });
        }
        Ok(code)
    }

    /// Correction capability `floor((d - 1) / 2)`.
    pub fn t(&self) -> usize {
        self.d.saturating_sub(1) / 2
    }

    /// Maximum column weight of `hx`: the most X checks one Z error can flip.
    pub fn xi_x(&self) -> usize {
        self.hx.max_column_weight()
    }

    /// Maximum column weight of `hz`, used when decoding X errors.
    pub fn xi_z(&self) -> usize {
        self.hz.max_column_weight()
    }

    /// Decoding problem for Z errors: checks `hx`, harmless residuals in rowspace(`hz`).
    pub fn z_sector(&self) -> Sector {
        Sector::new(SectorKind::Z, self.hx.clone(), &self.hz, self.t())
    }

    /// Decoding problem for X errors: checks `hz`, harmless residuals in rowspace(`hx`).
    pub fn x_sector(&self) -> Sector {
        Sector::new(SectorKind::X, self.hz.clone(), &self.hx, self.t())
    }

    pub fn label(&self) -> String {
        format!("{} [[{},{},{}]]", self.name, self.n, self.k, self.d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SectorKind {
    /// Z errors, detected by X-type checks.
    Z,
    /// X errors, detected by Z-type checks.
    X,
}

/// One half of a CSS decoding problem, with everything decoders need precomputed.
#[derive(Clone, Debug)]
pub struct Sector {
    pub kind: SectorKind,
    pub checks: SparseBitMatrix,
    pub graph: TannerGraph,
    pub t: usize,
    pub xi: usize,
    stabilizers: RowSpace,
}

impl Sector {
    pub fn new(
        kind: SectorKind,
        checks: SparseBitMatrix,
        stabilizers: &SparseBitMatrix,
        t: usize,
    ) -> Self {
        let graph = TannerGraph::new(&checks);
        let xi = checks.max_column_weight();
        Self {
            kind,
            graph,
            t,
            xi,
            stabilizers: RowSpace::new(stabilizers),
            checks,
        }
    }

    pub fn n(&self) -> usize {
        self.checks.cols()
    }

    pub fn syndrome(&self, error: &BitVector) -> BitVector {
        self.graph.syndrome(error)
    }

    /// Row space of the opposite-type checks (errors there act trivially).
    pub fn stabilizers(&self) -> &RowSpace {
        &self.stabilizers
    }
}

/// Parity-check matrix of the length-`len` repetition code, `(len-1) x len`.
pub fn repetition(len: usize) -> SparseBitMatrix {
    let rows = (0..len.saturating_sub(1)).map(|i| vec![i, i + 1]).collect();
    SparseBitMatrix::new(len.saturating_sub(1), len, rows).expect("valid repetition matrix")
}

/// Hypergraph product of a classical check matrix with itself.
///
/// For `H` of shape `m x n`: `Hx = [H ⊗ I_n | I_m ⊗ Hᵀ]` and
/// `Hz = [I_n ⊗ H | Hᵀ ⊗ I_m]`, on `n² + m²` qubits.
pub fn build_hgp(name: &str, h: &SparseBitMatrix, d: usize) -> Result<CssCode, CodeError> {
    if h.rows() == 0 || h.cols() == 0 {
        return Err(CodeError::InvalidParameter(
            "hypergraph product needs a non-empty seed matrix".into(),
        ));
    }
    let (m, n) = (h.rows(), h.cols());
    let ht = h.transpose();
    let hx = h
        .kron(&SparseBitMatrix::identity(n))
        .hstack(&SparseBitMatrix::identity(m).kron(&ht))?;
    let hz = SparseBitMatrix::identity(n)
        .kron(h)
        .hstack(&ht.kron(&SparseBitMatrix::identity(m)))?;
    CssCode::new(name, hx, hz, d)
}

/// Unrotated planar surface code of odd distance `d`: `[[d² + (d-1)², 1, d]]`.
pub fn build_surface(d: usize) -> Result<CssCode, CodeError> {
    if d < 3 || d % 2 == 0 {
        return Err(CodeError::InvalidParameter(format!(
            "surface code distance must be odd and at least 3, got {d}"
        )));
    }
    build_hgp(&format!("surface-d{d}"), &repetition(d), d)
}

/// Sum of monomials `x^i y^j` acting on the group algebra of `Z_l x Z_m`.
///
/// Basis element `(i, j)` sits at index `i * m + j`.
pub fn circulant_sum(l: usize, m: usize, terms: &[(usize, usize)]) -> Result<SparseBitMatrix, CodeError> {
    if l == 0 || m == 0 {
        return Err(CodeError::InvalidParameter("group orders must be at least 1".into()));
    }
    for (idx, &(a, b)) in terms.iter().enumerate() {
        if a >= l || b >= m {
            return Err(CodeError::InvalidParameter(format!(
                "exponent pair ({a},{b}) not reduced modulo ({l},{m})"
            )));
        }
        if terms[..idx].contains(&(a, b)) {
            return Err(CodeError::InvalidParameter(format!(
                "duplicate monomial x^{a} y^{b} cancels over GF(2)"
            )));
        }
    }
    let size = l * m;
    let mut rows = vec![Vec::with_capacity(terms.len()); size];
    for i in 0..l {
        for j in 0..m {
            let src = i * m + j;
            for &(a, b) in terms {
                let dst = ((i + a) % l) * m + (j + b) % m;
                rows[dst].push(src);
            }
        }
    }
    Ok(SparseBitMatrix::new(size, size, rows)?)
}

/// Bivariate bicycle code: `Hx = [A | B]`, `Hz = [Bᵀ | Aᵀ]`. `m = 1` gives a
/// generalized bicycle code.
pub fn build_bicycle(
    name: &str,
    l: usize,
    m: usize,
    a_terms: &[(usize, usize)],
    b_terms: &[(usize, usize)],
    d: usize,
) -> Result<CssCode, CodeError> {
    let a = circulant_sum(l, m, a_terms)?;
    let b = circulant_sum(l, m, b_terms)?;
    if a.mul(&b)? != b.mul(&a)? {
        return Err(CodeError::InvalidParameter("bicycle blocks do not commute".into()));
    }
    let hx = a.hstack(&b)?;
    let hz = b.transpose().hstack(&a.transpose())?;
    CssCode::new(name, hx, hz, d)
}

/// The four benchmark codes and the branch count each uses with Restart Belief.
pub const BENCHMARKS: [(&str, usize); 4] = [("gross", 35), ("surface-d7", 8), ("hgp-145", 6), ("gb-48", 48)];

/// Tuned branch count for a named builtin, if one is recorded.
pub fn default_eta(name: &str) -> Option<usize> {
    BENCHMARKS.iter().find(|(n, _)| *n == name).map(|&(_, eta)| eta)
}

const GROSS_DATA: &str = include_str!("../../../data/gross.bb");
const GB48_DATA: &str = include_str!("../../../data/gb-48.bb");
const HGP145_DATA: &str = include_str!("../../../data/hgp-145.seed");

fn data_source(file: &str, embedded: &'static str, data_dir: Option<&Path>) -> Result<(String, String), CodeError> {
    let dir = data_dir
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from));
    match dir {
        Some(dir) => {
            let path = dir.join(file);
            let text = fs::read_to_string(&path).map_err(|source| CodeError::Io {
                path: path.clone(),
                source,
            })?;
            Ok((path.display().to_string(), text))
        }
        None => Ok((format!("<builtin>/{file}"), embedded.to_string())),
    }
}

/// Builds a builtin code by name: `gross`, `gb-48`, `hgp-145`, or `surface-d<odd d>`.
///
/// Data-backed codes are read from `data_dir`, else from `$QLDPC_DATA_DIR`,
/// else from the copies compiled into the library.
pub fn builtin(name: &str, data_dir: Option<&Path>) -> Result<CssCode, CodeError> {
    if let Some(d) = name.strip_prefix("surface-d") {
        let d: usize = d
            .parse()
            .map_err(|_| CodeError::UnknownCode(name.to_string()))?;
        return build_surface(d);
    }
    let (file, embedded) = match name {
        "gross" => ("gross.bb", GROSS_DATA),
        "gb-48" => ("gb-48.bb", GB48_DATA),
        "hgp-145" => ("hgp-145.seed", HGP145_DATA),
        _ => return Err(CodeError::UnknownCode(name.to_string())),
    };
    let (origin, text) = data_source(file, embedded, data_dir)?;
    parse_data_file(&origin, &text)
}

/// Resolves either a builtin name or a path to a code manifest.
pub fn resolve(spec: &str, data_dir: Option<&Path>) -> Result<CssCode, CodeError> {
    match builtin(spec, data_dir) {
        Err(CodeError::UnknownCode(_)) if Path::new(spec).is_file() => load_code(Path::new(spec)),
        other => other,
    }
}

fn parse_err(origin: &str, line: usize, message: impl Into<String>) -> CodeError {
    CodeError::Parse {
        path: origin.to_string(),
        line,
        message: message.into(),
    }
}

fn parse_usize(origin: &str, line: usize, tok: &str) -> Result<usize, CodeError> {
    tok.parse()
        .map_err(|_| parse_err(origin, line, format!("expected a non-negative integer, found '{tok}'")))
}

/// Parses a shipped data file describing a bicycle code (`bicycle` directive)
/// or a hypergraph-product seed matrix (`seed` directive).
///
/// ```text
/// # comment
/// name gross
/// n 144
/// k 12
/// d 12
/// bicycle 12 6        # group orders l, m
/// a 3 0               # monomial x^3 y^0 in A
/// b 0 3
/// ```
///
/// A seed file uses `seed <rows> <cols>` followed by one line of column
/// indices per row. Declared `n` and `k` are checked against the construction.
pub fn parse_data_file(origin: &str, text: &str) -> Result<CssCode, CodeError> {
    let mut name = None;
    let (mut n, mut k, mut d) = (None, None, None);
    let mut group = None;
    let mut a_terms = Vec::new();
    let mut b_terms = Vec::new();
    let mut seed: Option<(usize, usize, Vec<Vec<usize>>)> = None;

    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    while let Some((ln, raw)) = lines.next() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let arity = |want: usize| {
            if toks.len() == want + 1 {
                Ok(())
            } else {
                Err(parse_err(origin, ln, format!("'{}' takes {want} argument(s)", toks[0])))
            }
        };
        match toks[0] {
            "name" => {
                arity(1)?;
                name = Some(toks[1].to_string());
            }
            "n" => {
                arity(1)?;
                n = Some(parse_usize(origin, ln, toks[1])?);
            }
            "k" => {
                arity(1)?;
                k = Some(parse_usize(origin, ln, toks[1])?);
            }
            "d" => {
                arity(1)?;
                d = Some(parse_usize(origin, ln, toks[1])?);
            }
            "bicycle" => {
                arity(2)?;
                group = Some((parse_usize(origin, ln, toks[1])?, parse_usize(origin, ln, toks[2])?));
            }
            "a" | "b" => {
                arity(2)?;
                let term = (parse_usize(origin, ln, toks[1])?, parse_usize(origin, ln, toks[2])?);
                if toks[0] == "a" {
                    a_terms.push(term);
                } else {
                    b_terms.push(term);
                }
            }
            "seed" => {
                arity(2)?;
                let rows = parse_usize(origin, ln, toks[1])?;
                let cols = parse_usize(origin, ln, toks[2])?;
                let mut support = Vec::with_capacity(rows);
                for _ in 0..rows {
                    let (rl, row) = lines
                        .next()
                        .ok_or_else(|| parse_err(origin, ln, "seed matrix truncated"))?;
                    let row = row.split('#').next().unwrap_or("");
                    support.push(
                        row.split_whitespace()
                            .map(|t| parse_usize(origin, rl, t))
                            .collect::<Result<Vec<_>, _>>()?,
                    );
                }
                seed = Some((rows, cols, support));
            }
            other => return Err(parse_err(origin, ln, format!("unknown directive '{other}'"))),
        }
    }

    let name = name.ok_or_else(|| parse_err(origin, 0, "missing 'name'"))?;
    let d = d.ok_or_else(|| parse_err(origin, 0, "missing 'd'"))?;
    let code = match (group, seed) {
        (Some((l, m)), None) => build_bicycle(&name, l, m, &a_terms, &b_terms, d)?,
        (None, Some((rows, cols, support))) => {
            let h = SparseBitMatrix::new(rows, cols, support)?;
            build_hgp(&name, &h, d)?
        }
        _ => {
            return Err(parse_err(
                origin,
                0,
                "expected exactly one of 'bicycle' or 'seed'",
            ))
        }
    };
    if let Some(n) = n {
        if code.n != n {
            return Err(CodeError::LengthMismatch {
                declared: n,
                found: code.n,
            });
        }
    }
    if let Some(k) = k {
        if code.k != k {
            return Err(CodeError::LogicalCountMismatch {
                declared: k,
                computed: code.k,
            });
        }
    }
    Ok(code)
}

fn write_matrix(out: &mut String, tag: &str, m: &SparseBitMatrix) {
    let _ = writeln!(out, "{tag} {} {}", m.rows(), m.cols());
    for r in 0..m.rows() {
        let row: Vec<String> = m.row(r).iter().map(usize::to_string).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

/// Serializes a code in the manifest format:
///
/// ```text
/// name n k d
/// Hx rows cols
/// <column indices of row 0>
/// ...
/// Hz rows cols
/// ...
/// ```
pub fn to_manifest(code: &CssCode) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {} {}", code.name, code.n, code.k, code.d);
    write_matrix(&mut out, "Hx", &code.hx);
    write_matrix(&mut out, "Hz", &code.hz);
    out
}

/// Parses a manifest and re-validates every code invariant.
pub fn parse_manifest(origin: &str, text: &str) -> Result<CssCode, CodeError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut pos = 0usize;
    let header = lines.first().ok_or_else(|| parse_err(origin, 1, "empty manifest"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 4 {
        return Err(parse_err(origin, 1, "header must be 'name n k d'"));
    }
    let name = toks[0].to_string();
    let n = parse_usize(origin, 1, toks[1])?;
    let k = parse_usize(origin, 1, toks[2])?;
    let d = parse_usize(origin, 1, toks[3])?;
    pos += 1;

    let mut read_matrix = |tag: &str| -> Result<SparseBitMatrix, CodeError> {
        let ln = pos + 1;
        let line = lines
            .get(pos)
            .ok_or_else(|| parse_err(origin, ln, format!("missing '{tag}' block")))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != tag {
            return Err(parse_err(origin, ln, format!("expected '{tag} rows cols'")));
        }
        let rows = parse_usize(origin, ln, toks[1])?;
        let cols = parse_usize(origin, ln, toks[2])?;
        pos += 1;
        let mut support = Vec::with_capacity(rows);
        for _ in 0..rows {
            let ln = pos + 1;
            let line = lines
                .get(pos)
                .ok_or_else(|| parse_err(origin, ln, format!("'{tag}' block truncated")))?;
            support.push(
                line.split_whitespace()
                    .map(|t| parse_usize(origin, ln, t))
                    .collect::<Result<Vec<_>, _>>()?,
            );
            pos += 1;
        }
        SparseBitMatrix::new(rows, cols, support).map_err(|e| parse_err(origin, ln, e.to_string()))
    };
    let hx = read_matrix("Hx")?;
    let hz = read_matrix("Hz")?;
    if lines[pos..].iter().any(|l| !l.trim().is_empty()) {
        return Err(parse_err(origin, pos + 1, "trailing content after Hz block"));
    }
    CssCode::with_declared(name, n, k, d, hx, hz)
}

pub fn save_code(code: &CssCode, path: &Path) -> Result<(), CodeError> {
    fs::write(path, to_manifest(code)).map_err(|source| CodeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_code(path: &Path) -> Result<CssCode, CodeError> {
    let text = fs::read_to_string(path).map_err(|source| CodeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_manifest(&path.display().to_string(), &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surface_parameters() {
        for (d, n) in [(3, 13), (5, 41), (7, 85)] {
            let c = build_surface(d).unwrap();
            assert_eq!((c.n, c.k, c.d), (n, 1, d));
            assert_eq!(c.t(), (d - 1) / 2);
        }
    }

    #[test]
    fn surface_rejects_bad_distance() {
        assert!(build_surface(4).is_err());
        assert!(build_surface(1).is_err());
    }

    #[test]
    fn hgp_of_repetition_is_small_surface() {
        let h = SparseBitMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        let c = build_hgp("rep3", &h, 3).unwrap();
        assert_eq!((c.n, c.k), (13, 1));
    }

    #[test]
    fn hgp_degenerate_single_entry() {
        let h = SparseBitMatrix::from_dense(&[vec![1]]).unwrap();
        let c = build_hgp("unit", &h, 1).unwrap();
        assert_eq!((c.n, c.k), (2, 0));
    }

    #[test]
    fn hgp_rejects_empty_seed() {
        assert!(build_hgp("empty", &SparseBitMatrix::zeros(0, 3), 1).is_err());
    }

    #[test]
    fn toy_bicycle() {
        let c = build_bicycle("toy", 2, 1, &[(0, 0), (1, 0)], &[(0, 0), (1, 0)], 2).unwrap();
        assert_eq!(c.n, 4);
        // A = B = [[1,1],[1,1]] so both Hx and Hz have rank 1.
        assert_eq!(c.k, 2);
    }

    #[test]
    fn bicycle_rejects_duplicate_term() {
        let err = build_bicycle("dup", 3, 1, &[(1, 0), (1, 0)], &[(0, 0)], 1).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        assert!(circulant_sum(3, 2, &[(3, 0)]).is_err());
    }

    #[test]
    fn builtin_benchmarks() {
        let gross = builtin("gross", None).unwrap();
        assert_eq!((gross.n, gross.k, gross.d), (144, 12, 12));
        let gb = builtin("gb-48", None).unwrap();
        assert_eq!((gb.n, gb.k, gb.d), (48, 6, 8));
        let hgp = builtin("hgp-145", None).unwrap();
        assert_eq!((hgp.n, hgp.k, hgp.d), (145, 5, 6));
        assert!(matches!(builtin("nope", None), Err(CodeError::UnknownCode(_))));
    }

    #[test]
    fn manifest_round_trip() {
        let c = build_surface(3).unwrap();
        let back = parse_manifest("mem", &to_manifest(&c)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn manifest_rejects_broken_commutation() {
        let c = build_surface(3).unwrap();
        let text = to_manifest(&c);
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        // first Hx row: drop its first column index
        let row: Vec<&str> = lines[2].split_whitespace().collect();
        lines[2] = row[1..].join(" ");
        let err = parse_manifest("mem", &(lines.join("\n") + "\n")).unwrap_err();
        assert!(err.to_string().contains("CSS commutation violated"), "{err}");
    }

    #[test]
    fn manifest_rejects_wrong_k() {
        let c = build_surface(3).unwrap();
        let text = to_manifest(&c).replacen("surface-d3 13 1 3", "surface-d3 13 2 3", 1);
        assert!(matches!(
            parse_manifest("mem", &text),
            Err(CodeError::LogicalCountMismatch { declared: 2, computed: 1 })
        ));
    }
}
