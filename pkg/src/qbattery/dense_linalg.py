"""Self-contained dense complex linear algebra kernels.

Everything here is written against plain numpy arrays (matmul/kron only, no
``numpy.linalg`` solvers): matrix exponential by scaling-and-squaring with a
fixed-order Pade core, Hermitian eigendecomposition by Householder
tridiagonalization plus implicit QL, general eigenvalues by Hessenberg
reduction plus shifted QR, and a rank-based defectiveness test.

The dimensions of interest are small (<= 2**12), so O(n^3) dense kernels with
vectorized inner loops are the right tool.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, ConvergenceError, NumericRangeError
from .tensor_core import Operator

_EPS = float(np.finfo(float).eps)

# Pade-13 numerator/denominator coefficients and the corresponding 1-norm
# threshold for scaling (Higham's scaling-and-squaring constants).
_PADE13_COEFFS = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA13 = 5.371920351148152

# Off-diagonal convergence threshold for the Hermitian eigensolver and the
# subdiagonal deflation threshold for the QR iteration, both relative.
_EIG_OFFDIAG_TOL = 1e-13
_QR_DEFLATION_TOL = 1e-13
_QL_MAX_ITER = 60
_QR_SWEEP_FACTOR = 100

# Imaginary parts below this (relative) level classify a spectrum as real.
REAL_SPECTRUM_TOL = 1e-8


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (ascending, real) and optional orthonormal eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray | None = None


def _as_matrix(m) -> np.ndarray:
    if isinstance(m, Operator):
        return m.matrix
    return np.asarray(m, dtype=complex)


def _one_norm_batch(a: np.ndarray) -> np.ndarray:
    return np.abs(a).sum(axis=-2).max(axis=-1)


def _frobenius(a: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(a) ** 2)))


def _solve_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a[i] @ x[i] = b[i] by LU with partial pivoting, batched."""
    a = a.copy()
    x = b.copy()
    nbatch, d, _ = a.shape
    batch_idx = np.arange(nbatch)
    pivot_floor = 1e3 * _EPS * max(1.0, float(np.max(np.abs(a))))
    for col in range(d):
        piv = np.argmax(np.abs(a[:, col:, col]), axis=1) + col
        swap = piv != col
        if np.any(swap):
            rows = np.where(swap)[0]
            pr = piv[rows]
            a[rows, pr], a[rows, col] = a[rows, col].copy(), a[rows, pr].copy()
            x[rows, pr], x[rows, col] = x[rows, col].copy(), x[rows, pr].copy()
        pivots = a[batch_idx, col, col]
        if np.min(np.abs(pivots)) < pivot_floor:
            raise NumericRangeError("near-singular system in Pade solve")
        if col + 1 < d:
            factors = a[:, col + 1 :, col] / pivots[:, None]
            a[:, col + 1 :, col:] -= factors[:, :, None] * a[:, None, col, col:]
            x[:, col + 1 :, :] -= factors[:, :, None] * x[:, None, col, :]
    for col in range(d - 1, -1, -1):
        if col + 1 < d:
            x[:, col, :] -= np.einsum(
                "bk,bkj->bj", a[:, col, col + 1 :], x[:, col + 1 :, :]
            )
        x[:, col, :] /= a[:, col, col, None]
    return x


def _pade13_batch(a: np.ndarray) -> np.ndarray:
    b = _PADE13_COEFFS
    d = a.shape[-1]
    ident = np.eye(d, dtype=complex)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (
        a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
        + b[7] * a6
        + b[5] * a4
        + b[3] * a2
        + b[1] * ident
    )
    v = (
        a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
        + b[6] * a6
        + b[4] * a4
        + b[2] * a2
        + b[0] * ident
    )
    return _solve_batch(v - u, u + v)


def _expm_chunk(a: np.ndarray) -> np.ndarray:
    """exp of a (m, d, d) stack; per-matrix scaling, shared Pade-13 core."""
    norms = _one_norm_batch(a)
    if not np.all(np.isfinite(norms)):
        raise NumericRangeError("non-finite input to matrix exponential")
    squarings = np.zeros(a.shape[0], dtype=int)
    large = norms > _THETA13
    squarings[large] = np.ceil(np.log2(norms[large] / _THETA13)).astype(int)
    out = np.empty_like(a)
    # Group by squaring count so every sub-batch runs one vectorized path.
    with np.errstate(over="ignore", invalid="ignore"):
        for s in np.unique(squarings):
            idx = np.where(squarings == s)[0]
            sub = a[idx] * (0.5**s) if s else a[idx]
            r = _pade13_batch(sub)
            for _ in range(int(s)):
                r = r @ r
            out[idx] = r
    if not np.all(np.isfinite(out.view(float))):
        raise NumericRangeError("matrix exponential overflowed")
    return out


def expm_batch(stack: np.ndarray, max_chunk_elems: int = 1 << 20) -> np.ndarray:
    """Matrix exponential of a stack of square matrices, chunked for memory."""
    stack = np.asarray(stack, dtype=complex)
    if stack.ndim != 3 or stack.shape[-1] != stack.shape[-2]:
        raise ValueError(f"expected a (m, d, d) stack, got shape {stack.shape}")
    nbatch, d, _ = stack.shape
    chunk = max(1, max_chunk_elems // (d * d))
    if nbatch <= chunk:
        return _expm_chunk(stack)
    out = np.empty_like(stack)
    for start in range(0, nbatch, chunk):
        out[start : start + chunk] = _expm_chunk(stack[start : start + chunk])
    return out


def expm_array(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of a single square matrix."""
    a = np.asarray(a, dtype=complex)
    return _expm_chunk(a[None, :, :])[0]


def matrix_exponential(m: Operator, scale: complex = 1.0) -> Operator:
    """exp(scale * M) for a dense operator."""
    if not isinstance(m, Operator):
        raise TypeError("matrix_exponential expects an Operator; use expm_array for raw arrays")
    with np.errstate(invalid="ignore"):
        scaled = np.complex128(scale) * m.matrix
    if not np.all(np.isfinite(scaled.view(float))):
        raise NumericRangeError("scale * M has non-finite entries")
    return Operator(expm_array(scaled), n_sites=m.n_sites, hermitian=False)


def _check_hermitian(a: np.ndarray) -> None:
    norm = _frobenius(a)
    dev = _frobenius(a - a.conj().T)
    if dev > 1e-10 * max(norm, 1e-300):
        raise ValueError(
            f"matrix is not Hermitian: ||M - M^dag|| = {dev:.3e} vs ||M|| = {norm:.3e}"
        )


def _tridiagonalize(a: np.ndarray, want_q: bool):
    """Reduce Hermitian a to real symmetric tridiagonal form.

    Returns (diag, offdiag, q) with a = q T q^dag; q is None when not wanted.
    """
    a = a.copy()
    n = a.shape[0]
    q = np.eye(n, dtype=complex) if want_q else None
    scale = max(1.0, _frobenius(a))
    for k in range(n - 2):
        x = a[k + 1 :, k]
        xnorm = math.sqrt(float(np.sum(np.abs(x) ** 2)))
        if xnorm < 1e3 * _EPS * scale / max(n, 1):
            a[k + 1 :, k] = 0.0
            a[k, k + 1 :] = 0.0
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if abs(x0) > 0 else 1.0
        beta = -phase * xnorm
        v = x.copy()
        v[0] -= beta
        vnorm = math.sqrt(float(np.sum(np.abs(v) ** 2)))
        if vnorm == 0.0:
            continue
        v /= vnorm
        # Two-sided reflection P B P on the trailing block, P = I - 2 v v^dag.
        block = a[k + 1 :, k + 1 :]
        w = block @ v
        tau = float(np.real(v.conj() @ w))
        block -= 2.0 * np.outer(v, w.conj()) + 2.0 * np.outer(w, v.conj())
        block += (4.0 * tau) * np.outer(v, v.conj())
        a[k + 1 :, k + 1 :] = block
        a[k + 1, k] = beta
        a[k + 2 :, k] = 0.0
        a[k, k + 1 :] = np.conj(a[k + 1 :, k])
        if want_q:
            q[:, k + 1 :] -= 2.0 * np.outer(q[:, k + 1 :] @ v, v.conj())
    diag = np.real(np.diag(a)).copy()
    off = np.diag(a, -1).copy() if n > 1 else np.zeros(0, dtype=complex)
    # Phase-rotate so the sub-diagonal becomes real non-negative.
    e = np.abs(off)
    if n > 1:
        phases = np.ones(n, dtype=complex)
        for k in range(n - 1):
            if e[k] > 0.0:
                phases[k + 1] = off[k] * phases[k] / e[k]
            else:
                phases[k + 1] = phases[k]
        if want_q:
            q = q * phases[None, :]
    return diag, e, q


def _ql_implicit(diag, off, q, off_tol):
    """Implicit-shift QL on a real symmetric tridiagonal matrix.

    Rotations within one iteration are accumulated into a small dense block
    applied to the (complex) transform columns in a single matmul.
    """
    n = diag.size
    d = diag.copy()
    e = np.zeros(n)
    e[: n - 1] = off
    for l in range(n):
        iters = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= max(off_tol, _EPS * dd):
                    break
                m += 1
            if m == l:
                break
            iters += 1
            if iters > _QL_MAX_ITER:
                raise ConvergenceError(
                    f"QL iteration failed to converge for dimension {n}"
                )
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            denom = g + (math.copysign(r, g) if g != 0.0 else r)
            g = d[m] - d[l] + e[l] / denom
            s = c = 1.0
            p = 0.0
            width = m - l + 1
            rot = np.eye(width) if q is not None else None
            broke = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    broke = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if rot is not None:
                    j = i - l
                    col_i = rot[:, j].copy()
                    col_n = rot[:, j + 1]
                    rot[:, j] = c * col_i - s * col_n
                    rot[:, j + 1] = s * col_i + c * col_n
            if rot is not None:
                q[:, l : m + 1] = q[:, l : m + 1] @ rot
            if broke:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d, q


def hermitian_eig(m, compute_vectors: bool = True) -> EigenDecomposition:
    """Full spectrum (ascending) and orthonormal eigenvectors of a Hermitian matrix."""
    a = _as_matrix(m)
    _check_hermitian(a)
    n = a.shape[0]
    if n == 1:
        vals = np.array([float(np.real(a[0, 0]))])
        vecs = np.ones((1, 1), dtype=complex) if compute_vectors else None
        return EigenDecomposition(vals, vecs)
    herm = 0.5 * (a + a.conj().T)
    off_tol = _EIG_OFFDIAG_TOL * _frobenius(herm)
    diag, off, q = _tridiagonalize(herm, want_q=compute_vectors)
    vals, q = _ql_implicit(diag, off, q, off_tol)
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    vecs = q[:, order] if compute_vectors else None
    return EigenDecomposition(vals, vecs)


def _hessenberg(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    n = a.shape[0]
    scale = max(1.0, _frobenius(a))
    for k in range(n - 2):
        x = a[k + 1 :, k]
        xnorm = math.sqrt(float(np.sum(np.abs(x) ** 2)))
        if xnorm < 1e3 * _EPS * scale / max(n, 1):
            a[k + 2 :, k] = 0.0
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if abs(x0) > 0 else 1.0
        beta = -phase * xnorm
        v = x.copy()
        v[0] -= beta
        vnorm = math.sqrt(float(np.sum(np.abs(v) ** 2)))
        if vnorm == 0.0:
            continue
        v /= vnorm
        a[k + 1 :, k:] -= 2.0 * np.outer(v, v.conj() @ a[k + 1 :, k:])
        a[:, k + 1 :] -= 2.0 * np.outer(a[:, k + 1 :] @ v, v.conj())
        a[k + 1, k] = beta
        a[k + 2 :, k] = 0.0
    return a


def _eig2x2(a, b, c, d) -> tuple[complex, complex]:
    half_tr = 0.5 * (a + d)
    disc = np.lib.scimath.sqrt(0.25 * (a - d) ** 2 + b * c)
    return complex(half_tr + disc), complex(half_tr - disc)


def _wilkinson_shift(h, hi) -> complex:
    mu1, mu2 = _eig2x2(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
    return mu1 if abs(mu1 - h[hi, hi]) <= abs(mu2 - h[hi, hi]) else mu2


def _qr_step(h, lo, hi, mu) -> None:
    """One explicit shifted QR step on the active Hessenberg block, in place."""
    idx = np.arange(lo, hi + 1)
    block = h[np.ix_(idx, idx)].copy()
    w = block.shape[0]
    for j in range(w):
        block[j, j] -= mu
    givens = []
    for k in range(w - 1):
        f = block[k, k]
        g = block[k + 1, k]
        dnorm = math.hypot(abs(f), abs(g))
        if dnorm < 1e-300:
            givens.append((1.0 + 0.0j, 0.0 + 0.0j, dnorm))
            continue
        fc = np.conj(f) / dnorm
        gc = np.conj(g) / dnorm
        row_k = block[k, k:].copy()
        row_n = block[k + 1, k:].copy()
        block[k, k:] = fc * row_k + gc * row_n
        block[k + 1, k:] = (-g / dnorm) * row_k + (f / dnorm) * row_n
        givens.append((f / dnorm, g / dnorm, dnorm))
    # R @ G_0^dag @ ... and the shift restored on the diagonal.
    for k in range(w - 1):
        fd, gd, dnorm = givens[k]
        if dnorm < 1e-300:
            continue
        col_k = block[: k + 2, k].copy()
        col_n = block[: k + 2, k + 1].copy()
        block[: k + 2, k] = fd * col_k + gd * col_n
        block[: k + 2, k + 1] = -np.conj(gd) * col_k + np.conj(fd) * col_n
    for j in range(w):
        block[j, j] += mu
    h[np.ix_(idx, idx)] = block


def general_eigenvalues(m) -> np.ndarray:
    """All eigenvalues of a general complex matrix, sorted by (real, imag)."""
    a = _as_matrix(m)
    if not np.all(np.isfinite(a.view(float))):
        raise NumericRangeError("non-finite input to eigenvalue iteration")
    n = a.shape[0]
    if n == 0:
        return np.zeros(0, dtype=complex)
    if n == 1:
        return np.array([complex(a[0, 0])])
    trace_in = complex(np.trace(a))
    h = _hessenberg(a)
    values: list[complex] = []
    hi = n - 1
    steps = 0
    cap = _QR_SWEEP_FACTOR * n
    stagnation = 0
    while hi >= 0:
        if hi == 0:
            values.append(complex(h[0, 0]))
            hi -= 1
            continue
        # Deflate negligible subdiagonal entries in the active tail.
        k = hi
        while k > 0:
            thr = _QR_DEFLATION_TOL * (abs(h[k - 1, k - 1]) + abs(h[k, k]))
            if abs(h[k, k - 1]) <= max(thr, 1e-300):
                h[k, k - 1] = 0.0
                break
            k -= 1
        lo = k
        if lo == hi:
            values.append(complex(h[hi, hi]))
            hi -= 1
            stagnation = 0
            continue
        if hi - lo == 1:
            mu1, mu2 = _eig2x2(
                h[lo, lo], h[lo, hi], h[hi, lo], h[hi, hi]
            )
            values.extend([mu1, mu2])
            hi -= 2
            stagnation = 0
            continue
        steps += 1
        stagnation += 1
        if steps > cap:
            raise ConvergenceError(
                f"QR iteration exceeded {cap} sweeps for a {n}x{n} matrix"
            )
        if stagnation % 12 == 0:
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        else:
            mu = _wilkinson_shift(h, hi)
        _qr_step(h, lo, hi, mu)
    vals = np.array(values, dtype=complex)
    order = np.lexsort((vals.imag, vals.real))
    vals = vals[order]
    tr_err = abs(np.sum(vals) - trace_in)
    if tr_err > 1e-8 * (1.0 + abs(trace_in)):
        raise ConsistencyError(
            f"eigenvalue sum deviates from trace by {tr_err:.3e} for n={n}"
        )
    return vals


def _rank(a: np.ndarray, tol: float) -> int:
    """Numerical rank via Gaussian elimination with complete pivoting."""
    work = a.copy()
    n = min(a.shape)
    rank = 0
    for _ in range(n):
        sub = np.abs(work[rank:, rank:])
        if sub.size == 0:
            break
        flat = int(np.argmax(sub))
        i, j = divmod(flat, sub.shape[1])
        if sub[i, j] <= tol:
            break
        i += rank
        j += rank
        work[[rank, i], :] = work[[i, rank], :]
        work[:, [rank, j]] = work[:, [j, rank]]
        pivot = work[rank, rank]
        factors = work[rank + 1 :, rank] / pivot
        work[rank + 1 :, rank:] -= np.outer(factors, work[rank, rank:])
        rank += 1
    return rank


def is_defective_at(m, cluster_tol: float) -> bool:
    """True when some eigenvalue cluster has deficient geometric multiplicity."""
    a = _as_matrix(m)
    vals = general_eigenvalues(a)
    n = vals.size
    # Group eigenvalues into clusters of pairwise distance < cluster_tol.
    assigned = [-1] * n
    clusters: list[list[int]] = []
    for i in range(n):
        if assigned[i] >= 0:
            continue
        group = [i]
        assigned[i] = len(clusters)
        queue = [i]
        while queue:
            p = queue.pop()
            for j in range(n):
                if assigned[j] < 0 and abs(vals[p] - vals[j]) < cluster_tol:
                    assigned[j] = assigned[i]
                    group.append(j)
                    queue.append(j)
        clusters.append(group)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    for group in clusters:
        if len(group) < 2:
            continue
        lam = np.mean(vals[group])
        rank = _rank(a - lam * np.eye(a.shape[0], dtype=complex), cluster_tol * scale)
        if a.shape[0] - rank < len(group):
            return True
    return False
