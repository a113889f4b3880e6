"""Dense real matrix arithmetic for small matrices (n <= 8).

Conventions used throughout the package:

* Vectors are ROWS and matrices act on the right: ``gamma @ A``.
* The real Jordan form of ``A`` is the pair ``(J, P)`` with
  ``P @ A @ inv(P) == J``; equivalently ``A = Q J inv(Q)`` with
  ``Q = inv(P)`` holding the (generalized) eigenvectors as columns.
* Jordan coordinates of a row vector are ``c = gamma @ Q``; the action
  in those coordinates is ``c -> c @ J``.
* A 2x2 rotation-scaling block for the complex pair ``a +/- i b``
  (``b > 0``) is ``D = [[a, b], [-b, a]]``, so ``exp(t*Omega_b)`` with
  ``Omega_b = [[0, b], [-b, 0]]`` rotates rows counterclockwise by
  ``b*t``.

Computing a Jordan form in floating point is intrinsically delicate
(the form is a discontinuous function of the matrix), so the solver
clusters eigenvalues over a ladder of radii and accepts the first
clustering whose chain structure is consistent and whose reassembly
residual passes the tolerance.  Ambiguity is an error, never a guess.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IllConditioned, Overflow, Singular

DEFAULT_TOL = 1e-9
MAX_DIM = 8

# Clustering radii tried in order, as multiples of the matrix scale.
# Defective eigenvalues of a conjugated matrix split like eps**(1/m), so
# the ladder has to climb well past machine epsilon.
_CLUSTER_LADDER = (1e-12, 1e-9, 1e-8, 3e-8, 1e-7, 1e-6, 1e-5, 1e-4)


def as_matrix(a) -> np.ndarray:
    """Validate and return a square float matrix (1 <= n <= 8)."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    n = m.shape[0]
    if not 1 <= n <= MAX_DIM:
        raise ValueError(f"dimension {n} outside supported range 1..{MAX_DIM}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def matrix_to_json(a) -> dict:
    a = as_matrix(a)
    return {"n": int(a.shape[0]), "rows": [[float(x) for x in row] for row in a]}


def matrix_from_json(obj) -> np.ndarray:
    if not isinstance(obj, dict) or "rows" not in obj:
        raise ValueError("matrix JSON must be an object with a 'rows' field")
    m = as_matrix(obj["rows"])
    if "n" in obj and int(obj["n"]) != m.shape[0]:
        raise ValueError("matrix JSON 'n' does not match row count")
    return m


@dataclass(frozen=True)
class JordanBlock:
    """One real Jordan block.

    ``re`` / ``im`` are the real and imaginary part of the eigenvalue
    the block belongs to (``im > 0`` for complex pairs, ``im == 0.0``
    for real eigenvalues).  ``chain`` is the Jordan chain length, so the
    block occupies ``chain`` rows for a real eigenvalue and ``2*chain``
    rows for a complex pair.  ``offset`` is the starting index of the
    block inside the Jordan coordinate vector.
    """

    re: float
    im: float
    chain: int
    offset: int

    @property
    def is_complex(self) -> bool:
        return self.im != 0.0

    @property
    def size(self) -> int:
        return 2 * self.chain if self.is_complex else self.chain

    @property
    def nilpotent(self) -> bool:
        return self.chain >= 2

    @property
    def modulus(self) -> float:
        """Eigenvalue modulus (discrete-action reading)."""
        return math.hypot(self.re, self.im) if self.is_complex else abs(self.re)

    @property
    def argument(self) -> float:
        """Eigenvalue argument in [0, pi] (0 or pi for real eigenvalues)."""
        return math.atan2(self.im, self.re) if self.is_complex else (0.0 if self.re >= 0 else math.pi)

    @property
    def alpha(self) -> float:
        """Generator reading: real part of the eigenvalue of B."""
        return self.re

    @property
    def beta(self) -> float:
        """Generator reading: rotation rate (imaginary part), > 0 if complex."""
        return self.im

    def to_json(self) -> dict:
        kind = "complex_pair" if self.is_complex else "real"
        return {
            "kind": kind,
            "re": self.re,
            "im": self.im,
            "chain": self.chain,
            "size": self.size,
            "offset": self.offset,
            "nilpotent": self.nilpotent,
        }


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalue summary: (modulus, argument, multiplicity, max chain length)."""

    entries: tuple

    def moduli(self):
        return [e[0] for e in self.entries]

    def total_multiplicity(self) -> int:
        return sum(e[2] for e in self.entries)


@dataclass(frozen=True)
class RealJordanForm:
    """Real Jordan decomposition ``P A P^{-1} = J`` of a real matrix.

    ``conjugator`` is ``P``; ``conjugator_inverse`` is ``Q = P^{-1}``
    whose columns are the Jordan basis.  Jordan coordinates of a row
    vector ``gamma`` are ``gamma @ Q``.
    """

    matrix: np.ndarray
    blocks: tuple
    conjugator: np.ndarray
    conjugator_inverse: np.ndarray
    tol: float
    residual: float

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def jordan_matrix(self) -> np.ndarray:
        return assemble_jordan_matrix(self.blocks, self.n)

    def to_jordan(self, gamma) -> np.ndarray:
        """Map an ambient row vector (or stack of rows) to Jordan coordinates."""
        return np.asarray(gamma, dtype=float) @ self.conjugator_inverse

    def from_jordan(self, coords) -> np.ndarray:
        """Inverse of :meth:`to_jordan`."""
        return np.asarray(coords, dtype=float) @ self.conjugator

    def spectrum(self) -> Spectrum:
        seen = {}
        for b in self.blocks:
            key = (b.re, b.im)
            mult, chain = seen.get(key, (0, 0))
            seen[key] = (mult + b.chain, max(chain, b.chain))
        entries = tuple(
            (math.hypot(re, im) if im else abs(re),
             math.atan2(im, re) if im else (0.0 if re >= 0 else math.pi),
             mult, chain)
            for (re, im), (mult, chain) in seen.items()
        )
        return Spectrum(entries=entries)

    def to_json(self) -> dict:
        return {
            "matrix": matrix_to_json(self.matrix),
            "blocks": [b.to_json() for b in self.blocks],
            "conjugator": matrix_to_json(self.conjugator),
            "conjugator_inverse": matrix_to_json(self.conjugator_inverse),
            "residual": self.residual,
        }


def assemble_jordan_matrix(blocks, n) -> np.ndarray:
    J = np.zeros((n, n))
    for b in blocks:
        o = b.offset
        if b.is_complex:
            D = np.array([[b.re, b.im], [-b.im, b.re]])
            for i in range(b.chain):
                J[o + 2 * i : o + 2 * i + 2, o + 2 * i : o + 2 * i + 2] = D
            for i in range(b.chain - 1):
                J[o + 2 * i : o + 2 * i + 2, o + 2 * i + 2 : o + 2 * i + 4] = np.eye(2)
        else:
            for i in range(b.chain):
                J[o + i, o + i] = b.re
            for i in range(b.chain - 1):
                J[o + i, o + i + 1] = 1.0
    return J


def _spectral_scale(a) -> float:
    return max(float(np.linalg.norm(a, 2)), 1.0)


def _cluster(eigs, radius):
    """Group eigenvalues into connected components of the radius graph."""
    n = len(eigs)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(eigs[i] - eigs[j]) <= radius:
                pi, pj = find(i), find(j)
                if pi != pj:
                    parent[pi] = pj
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


class _Inconsistent(Exception):
    """Internal: this clustering radius does not yield a coherent structure."""


def _rank_with_gap(m, threshold):
    """Rank by singular-value threshold; ambiguity near the threshold fails."""
    if m.size == 0:
        return 0
    svals = np.linalg.svd(m, compute_uv=False)
    lo, hi = threshold / 10.0, threshold * 10.0
    if np.any((svals > lo) & (svals < hi)):
        raise _Inconsistent("singular value inside the ambiguity window")
    return int(np.count_nonzero(svals >= hi))


def _chain_sizes(a, lam, m_alg, tol):
    """Chain-length multiset for eigenvalue ``lam`` (complex arithmetic)."""
    n = a.shape[0]
    shifted = a.astype(complex) - lam * np.eye(n)
    base = max(float(np.linalg.norm(shifted, 2)), 1.0)
    nullities = [0]
    power = np.eye(n, dtype=complex)
    for j in range(1, m_alg + 1):
        power = power @ shifted
        rank = _rank_with_gap(power, tol * base**j)
        nullities.append(n - rank)
        if nullities[-1] == m_alg:
            break
    if nullities[-1] != m_alg:
        raise _Inconsistent("generalized eigenspace does not reach multiplicity")
    deltas = [nullities[j] - nullities[j - 1] for j in range(1, len(nullities))]
    if any(d <= 0 for d in deltas) or any(deltas[j] < deltas[j + 1] for j in range(len(deltas) - 1)):
        raise _Inconsistent("nullity increments not monotone")
    deltas.append(0)
    # number of chains of length exactly j
    sizes = []
    for j in range(1, len(deltas)):
        for _ in range(deltas[j - 1] - deltas[j]):
            sizes.append(j)
    if sum(sizes) != m_alg:
        raise _Inconsistent("chain sizes do not sum to the multiplicity")
    return sorted(sizes, reverse=True)


def _null_basis(m, threshold):
    """Orthonormal basis (columns) of the numerical null space."""
    u, s, vh = np.linalg.svd(m)
    rank = int(np.count_nonzero(s >= threshold))
    return vh[rank:].conj().T


def _jordan_chains(a, lam, sizes, tol):
    """Jordan chains for eigenvalue ``lam``; each chain is a list of columns
    ordered eigenvector first."""
    n = a.shape[0]
    complex_mode = abs(lam.imag) > 0
    dtype = complex if complex_mode else float
    shifted = (a.astype(dtype) - (lam if complex_mode else lam.real) * np.eye(n, dtype=dtype))
    base = max(float(np.linalg.norm(shifted, 2)), 1.0)
    p = max(sizes)
    null_bases = [np.zeros((n, 0), dtype=dtype)]
    power = np.eye(n, dtype=dtype)
    for j in range(1, p + 1):
        power = power @ shifted
        null_bases.append(_null_basis(power, tol * base**j))
    chains = []
    for height in range(p, 0, -1):
        need = sizes.count(height)
        if need == 0:
            continue
        # span to avoid: null(shifted^(height-1)) plus the height-level
        # vectors of every taller chain
        avoid = [null_bases[height - 1]]
        for ch in chains:
            if len(ch) > height:
                avoid.append(ch[height - 1].reshape(n, 1))
        avoid_m = np.hstack(avoid) if avoid else np.zeros((n, 0), dtype=dtype)
        if avoid_m.shape[1]:
            q, _ = np.linalg.qr(avoid_m)
        else:
            q = np.zeros((n, 0), dtype=dtype)
        cand = null_bases[height]
        resid = cand - q @ (q.conj().T @ cand)
        u, s, _ = np.linalg.svd(resid, full_matrices=False)
        if int(np.count_nonzero(s > 0.5)) < need:
            raise _Inconsistent("could not extract enough chain tops")
        for idx in range(need):
            top = u[:, idx]
            chain = [top]
            for _ in range(height - 1):
                chain.append(shifted @ chain[-1])
            chain.reverse()  # eigenvector first
            chains.append(_normalize_chain(chain))
    # deterministic order: taller chains first (already), stable otherwise
    return chains


def _normalize_chain(chain):
    """Canonicalize one Jordan chain.

    The chain map fixes relative phases, so the only freedoms are a
    global scalar and Toeplitz shifts of the higher vectors by lower
    ones.  Use them to (a) make every higher vector orthogonal to the
    eigenvector and (b) pin the eigenvector's dominant entry to +1.
    A matrix already in canonical form then reproduces the identity
    basis, so coordinates match the textbook block layout.
    """
    m = len(chain)
    eig = chain[0]
    denom = np.vdot(eig, eig)
    for d in range(1, m):
        c = np.vdot(eig, chain[d]) / denom
        for i in range(m - d):
            chain[d + i] = chain[d + i] - c * chain[i]
    mags = np.abs(chain[0])
    # first entry within tolerance of the dominant one, so exact ties in a
    # canonical eigenvector (|u_j| == |v_j|) break toward the lower index
    idx = int(np.argmax(mags >= (1.0 - 1e-6) * mags.max()))
    z = chain[0][idx]
    return [v / z for v in chain]


def real_jordan_form(a, tol=DEFAULT_TOL, *, require_invertible=True) -> RealJordanForm:
    """Compute the real Jordan decomposition ``P A P^{-1} = J``.

    Eigenvalues closer than the clustering radius are treated as one;
    the radius is raised along a fixed ladder until the implied chain
    structure is consistent and the reassembly residual is below
    ``tol * max(||A||, 1)``.  If no radius works the matrix is reported
    as ill-conditioned rather than misclassified.
    """
    a = as_matrix(a)
    n = a.shape[0]
    scale = _spectral_scale(a)
    if require_invertible and abs(np.linalg.det(a)) <= (tol * scale) ** n:
        raise Singular(f"matrix is numerically singular (|det| = {abs(np.linalg.det(a)):.3e})")
    eigs = np.linalg.eigvals(a)

    last_error = None
    for rel_radius in _CLUSTER_LADDER:
        if rel_radius < tol / 10:
            continue
        radius = rel_radius * scale
        try:
            form = _attempt(a, eigs, radius, tol, scale)
        except _Inconsistent as exc:
            last_error = exc
            continue
        if form is not None:
            return form
    gaps = sorted(
        abs(eigs[i] - eigs[j]) for i in range(n) for j in range(i + 1, n)
    )
    raise IllConditioned(
        "eigenvalue clustering is ambiguous at every tested radius "
        f"(pairwise gaps: {[f'{g:.3e}' for g in gaps[:5]]}); last failure: {last_error}",
        gap=gaps[0] if gaps else None,
    )


def _attempt(a, eigs, radius, tol, scale):
    n = a.shape[0]
    groups = _cluster(eigs, radius)
    # classify clusters as real or one half of a conjugate pair
    cluster_specs = []  # (lam complex, m_alg, first_index) in first-occurrence order
    used = set()
    for g in sorted(groups, key=min):
        if min(g) in used:
            continue
        vals = eigs[g]
        mean = complex(np.mean(vals))
        if abs(mean.imag) <= radius:
            cluster_specs.append((complex(mean.real, 0.0), len(g), min(g)))
            used.update(g)
        else:
            # find conjugate partner cluster
            partner = None
            for h in groups:
                if min(h) in used or h is g:
                    continue
                if abs(complex(np.mean(eigs[h])) - mean.conjugate()) <= 2 * radius:
                    partner = h
                    break
            if partner is None or len(partner) != len(g):
                raise _Inconsistent("complex cluster lacks a conjugate partner")
            used.update(g)
            used.update(partner)
            plus = mean if mean.imag > 0 else complex(np.mean(eigs[partner]))
            cluster_specs.append((plus, len(g), min(min(g), min(partner))))
    cluster_specs.sort(key=lambda c: c[2])

    columns = []
    blocks = []
    offset = 0
    for lam, m_alg, _ in cluster_specs:
        sizes = _chain_sizes(a, lam, m_alg, tol)
        chains = _jordan_chains(a, lam, sizes, tol)
        for chain in chains:
            if abs(lam.imag) > 0:
                for v in chain:
                    columns.append(np.real(v))
                    columns.append(np.imag(v))
                blocks.append(JordanBlock(re=lam.real, im=lam.imag, chain=len(chain), offset=offset))
                offset += 2 * len(chain)
            else:
                for v in chain:
                    columns.append(np.real(v))
                blocks.append(JordanBlock(re=lam.real, im=0.0, chain=len(chain), offset=offset))
                offset += len(chain)
    if offset != n:
        raise _Inconsistent("block sizes do not sum to the dimension")
    q = np.column_stack(columns)
    if abs(np.linalg.det(q)) < 1e-300:
        raise _Inconsistent("Jordan basis is numerically singular")
    # A nearly parallel basis signals a defective eigenvalue read as split:
    # refuse and let the clustering ladder merge it instead.
    if np.linalg.cond(q) > 0.01 / tol:
        raise _Inconsistent("Jordan basis is too ill-conditioned")
    p = np.linalg.inv(q)
    j = assemble_jordan_matrix(blocks, n)
    residual = float(np.linalg.norm(p @ a @ q - j, 2))
    if residual > tol * scale:
        raise _Inconsistent(f"reassembly residual {residual:.3e} exceeds tolerance")
    return RealJordanForm(
        matrix=a,
        blocks=tuple(blocks),
        conjugator=p,
        conjugator_inverse=q,
        tol=tol,
        residual=residual,
    )


def _factorial_row(t, m):
    """Upper-triangular Toeplitz matrix with t^k/k! on the k-th superdiagonal."""
    out = np.zeros((m, m))
    coeff = 1.0
    tk = 1.0
    for k in range(m):
        if k:
            tk *= t
            coeff /= k
        for i in range(m - k):
            out[i, i + k] = tk * coeff
    return out


def jordan_flow_matrix(bform: RealJordanForm, t: float) -> np.ndarray:
    """``exp(t*J)`` assembled block by block (Jordan coordinates).

    Block-diagonal, so coordinate scales never mix across blocks."""
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    n = bform.n
    jt = np.zeros((n, n))
    for b in bform.blocks:
        lam_t = math.exp(b.alpha * t)
        if not math.isfinite(lam_t):
            raise Overflow(f"exp({b.alpha} * {t}) overflows")
        toep = _factorial_row(t, b.chain)
        o = b.offset
        if b.is_complex:
            c, s = math.cos(b.beta * t), math.sin(b.beta * t)
            rot = np.array([[c, s], [-s, c]])
            jt[o : o + b.size, o : o + b.size] = lam_t * np.kron(toep, rot)
        else:
            jt[o : o + b.chain, o : o + b.chain] = lam_t * toep
    if not np.all(np.isfinite(jt)):
        raise Overflow("matrix exponential overflowed")
    return jt


def one_parameter_power(bform: RealJordanForm, t: float) -> np.ndarray:
    """``exp(t*B)`` from the closed per-block formula, conjugated back.

    Each real block contributes ``exp(alpha t)`` times the unipotent
    Toeplitz factor; a complex-pair block additionally rotates each 2x2
    cell by ``beta*t``.  The exact one-parameter group law holds up to
    floating-point accumulation.
    """
    out = bform.conjugator_inverse @ jordan_flow_matrix(bform, t) @ bform.conjugator
    if not np.all(np.isfinite(out)):
        raise Overflow("matrix exponential overflowed")
    return out


def jordan_flow_batch(bform: RealJordanForm, ts) -> np.ndarray:
    """Vectorized ``exp(t*J)`` (Jordan coordinates); returns (len(ts), n, n)."""
    ts = np.asarray(ts, dtype=float)
    n = bform.n
    jt = np.zeros((ts.shape[0], n, n))
    for b in bform.blocks:
        with np.errstate(over="ignore"):
            lam_t = np.exp(b.alpha * ts)
        o = b.offset
        if b.is_complex:
            c, s = np.cos(b.beta * ts), np.sin(b.beta * ts)
            for i in range(b.chain):
                for k in range(b.chain - i):
                    w = lam_t * ts**k / math.factorial(k)
                    r, cidx = o + 2 * i, o + 2 * (i + k)
                    jt[:, r, cidx] = w * c
                    jt[:, r, cidx + 1] = w * s
                    jt[:, r + 1, cidx] = -w * s
                    jt[:, r + 1, cidx + 1] = w * c
        else:
            for i in range(b.chain):
                for k in range(b.chain - i):
                    jt[:, o + i, o + i + k] = lam_t * ts**k / math.factorial(k)
    if not np.all(np.isfinite(jt)):
        raise Overflow("matrix exponential overflowed")
    return jt


def one_parameter_power_batch(bform: RealJordanForm, ts) -> np.ndarray:
    """Vectorized ``exp(t*B)`` for an array of times; returns (len(ts), n, n)."""
    jt = jordan_flow_batch(bform, ts)
    return np.einsum("ij,sjk,kl->sil", bform.conjugator_inverse, jt, bform.conjugator)


def integer_power(a, k: int) -> np.ndarray:
    """``A^k`` by binary exponentiation (``A^0 = I``, negative via solves)."""
    a = as_matrix(a)
    k = int(k)
    if abs(k) > 10**6:
        raise ValueError(f"|k| = {abs(k)} exceeds the supported range 1e6")
    if k < 0 and abs(np.linalg.det(a)) == 0.0:
        raise Singular("negative power of a singular matrix")
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.linalg.matrix_power(a, k)
    if not np.all(np.isfinite(out)):
        raise Overflow(f"A^{k} overflows the floating-point range")
    return out


def conjugate_point(gamma, p) -> np.ndarray:
    """Transport a row vector by a conjugator: ``gamma @ P``.

    If ``S`` is a cross-section for the action of ``A`` then ``S @ P``
    is one for ``P^{-1} A P``, and membership transports accordingly.
    """
    return np.asarray(gamma, dtype=float) @ as_matrix(p)


def power_range(a, k_lo: int, k_hi: int) -> dict:
    """Dict ``k -> A^k`` for an integer window, built by repeated multiplies."""
    a = as_matrix(a)
    n = a.shape[0]
    powers = {0: np.eye(n)}
    for k in range(1, max(k_hi, 0) + 1):
        powers[k] = powers[k - 1] @ a
    if k_lo < 0:
        ainv = np.linalg.inv(a)
        for k in range(-1, k_lo - 1, -1):
            powers[k] = powers[k + 1] @ ainv
    return {k: powers[k] for k in range(k_lo, k_hi + 1)}
