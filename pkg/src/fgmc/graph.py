"""Weighted undirected graphs, Laplacians, and truncated spectral bases.

Everything here works on dense adjacency matrices; the intended scale is a
few thousand nodes at most.  Graphs are immutable after construction and all
generators are deterministic given their seed.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "Graph",
    "SpectralBasis",
    "GraphFormatError",
    "build_laplacian",
    "spectral_decompose",
    "generate_community_graph",
    "perturb_graph",
    "knn_graph",
    "load_adjacency",
    "save_adjacency",
]

SYMMETRY_ATOL = 1e-12


class GraphFormatError(ValueError):
    """Raised when an adjacency file cannot be parsed."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Graph:
    """Weighted undirected graph stored as a dense adjacency matrix.

    The adjacency must be symmetric (within 1e-12), nonnegative, and have a
    zero diagonal; construction fails otherwise.
    """

    n: int
    W: np.ndarray
    labels: list[str] | None = None

    def __post_init__(self):
        W = _readonly(self.W)
        object.__setattr__(self, "W", W)
        if W.ndim != 2 or W.shape != (self.n, self.n):
            raise ValueError(f"adjacency must be {self.n}x{self.n}, got {W.shape}")
        if np.max(np.abs(W - W.T), initial=0.0) > SYMMETRY_ATOL:
            raise ValueError("adjacency matrix is not symmetric")
        if np.any(W < 0):
            raise ValueError("adjacency matrix has negative weights")
        if np.any(np.diag(W) != 0):
            raise ValueError("adjacency matrix has nonzero diagonal entries")
        if self.labels is not None and len(self.labels) != self.n:
            raise ValueError("labels length does not match node count")

    @classmethod
    def from_adjacency(cls, W: np.ndarray, labels: list[str] | None = None) -> "Graph":
        W = np.asarray(W, dtype=float)
        return cls(n=W.shape[0], W=W, labels=labels)


@dataclass(frozen=True)
class SpectralBasis:
    """Truncated eigenpairs of a graph Laplacian.

    ``vectors`` holds the k eigenvectors as columns (orthonormal), ``values``
    the matching eigenvalues in ascending order.
    """

    vectors: np.ndarray
    values: np.ndarray
    k: int = field(default=0)

    def __post_init__(self):
        vecs = _readonly(self.vectors)
        vals = _readonly(self.values)
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "values", vals)
        k = vecs.shape[1]
        object.__setattr__(self, "k", k)
        if vals.shape != (k,):
            raise ValueError("eigenvalue vector length must match eigenvector count")
        gram = vecs.T @ vecs
        if np.max(np.abs(gram - np.eye(k))) > 1e-8:
            raise ValueError("eigenvector columns are not orthonormal")
        if vals[0] < -1e-10:
            raise ValueError(f"leading eigenvalue {vals[0]} is significantly negative")
        if np.any(np.diff(vals) < 0):
            raise ValueError("eigenvalues are not in ascending order")

    @property
    def n(self) -> int:
        return self.vectors.shape[0]


def build_laplacian(g: Graph) -> np.ndarray:
    """Return the combinatorial Laplacian L = D - W of ``g``.

    L is symmetric positive semi-definite with zero row sums.
    """
    W = g.W
    return np.diag(W.sum(axis=1)) - W


def _fix_signs(vectors: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    # Deterministic orientation: first component with magnitude above tol
    # is made positive.
    out = vectors.copy()
    for j in range(out.shape[1]):
        nz = np.flatnonzero(np.abs(out[:, j]) > tol)
        if nz.size and out[nz[0], j] < 0:
            out[:, j] = -out[:, j]
    return out


def spectral_decompose(L: np.ndarray, k: int) -> SpectralBasis:
    """Compute the k smallest eigenpairs of a symmetric PSD Laplacian.

    Args:
        L: dense symmetric Laplacian matrix.
        k: number of eigenpairs, 1 <= k <= n.

    Returns:
        SpectralBasis with eigenvalues ascending and a deterministic
        eigenvector sign convention.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError("Laplacian must be square")
    if not 1 <= k <= n:
        raise ValueError(f"basis size k={k} must be in [1, {n}]")
    vals, vecs = scipy.linalg.eigh(L, subset_by_index=(0, k - 1))
    vecs = _fix_signs(vecs)
    residual = np.linalg.norm(L @ vecs - vecs * vals[None, :])
    if residual > 1e-8 * max(1.0, np.linalg.norm(L)):
        raise np.linalg.LinAlgError(
            f"eigendecomposition residual {residual:.3e} exceeds tolerance"
        )
    return SpectralBasis(vectors=vecs, values=vals)


def generate_community_graph(
    n: int,
    n_communities: int,
    p_in: float,
    p_out: float,
    weight_in: float = 1.0,
    weight_out: float = 1.0,
    seed: int = 0,
) -> Graph:
    """Sample a stochastic-block-model graph with near-equal communities.

    Nodes are partitioned into ``n_communities`` contiguous blocks of
    near-equal size.  Pairs inside a block are connected with probability
    ``p_in`` (weight ``weight_in``), pairs across blocks with probability
    ``p_out`` (weight ``weight_out``).  Deterministic given ``seed``.
    """
    if not 0.0 <= p_out <= p_in <= 1.0:
        raise ValueError(f"need 0 <= p_out <= p_in <= 1, got p_in={p_in}, p_out={p_out}")
    if not 1 <= n_communities <= n:
        raise ValueError(f"n_communities={n_communities} must be in [1, {n}]")
    if weight_in < 0 or weight_out < 0:
        raise ValueError("edge weights must be nonnegative")

    base, rem = divmod(n, n_communities)
    sizes = [base + 1] * rem + [base] * (n_communities - rem)
    membership = np.repeat(np.arange(n_communities), sizes)

    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    same = membership[iu] == membership[ju]
    prob = np.where(same, p_in, p_out)
    wts = np.where(same, weight_in, weight_out)
    u = rng.random(iu.size)
    w = np.where(u < prob, wts, 0.0)

    W = np.zeros((n, n))
    W[iu, ju] = w
    W = W + W.T
    return Graph(n=n, W=W, labels=None)


def perturb_graph(g: Graph, sigma: float, seed: int = 0) -> Graph:
    """Add N(0, sigma^2) noise to every off-diagonal adjacency entry.

    Noise is drawn i.i.d. for the upper triangle, entries that become
    negative are clipped to zero, and the result is symmetrized by copying
    the upper triangle.  The diagonal stays zero.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    n = g.n
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    w = np.maximum(g.W[iu, ju] + rng.normal(0.0, sigma, size=iu.size), 0.0)
    W = np.zeros((n, n))
    W[iu, ju] = w
    W = W + W.T
    return Graph(n=n, W=W, labels=g.labels)


def knn_graph(rows: np.ndarray, k_nn: int, metric: str = "cosine") -> Graph:
    """Build a k-nearest-neighbor similarity graph over the rows of a matrix.

    Each node connects to its ``k_nn`` most cosine-similar rows (ties broken
    by lower index), the edge set is union-symmetrized, and edge weights are
    max(similarity, 0).  All-zero rows have similarity 0 to everything.
    """
    X = np.asarray(rows, dtype=float)
    if X.ndim != 2:
        raise ValueError("rows must be a 2-D matrix")
    m = X.shape[0]
    if not 1 <= k_nn < m:
        raise ValueError(f"k_nn={k_nn} must be in [1, {m - 1}]")
    if metric != "cosine":
        raise ValueError(f"unsupported metric {metric!r}")

    norms = np.linalg.norm(X, axis=1)
    unit = X / np.where(norms > 0, norms, 1.0)[:, None]
    sim = unit @ unit.T
    np.fill_diagonal(sim, -np.inf)

    # stable sort on -sim: equal similarities resolve to the lower index
    order = np.argsort(-sim, axis=1, kind="stable")
    W = np.zeros((m, m))
    for i in range(m):
        nbrs = order[i, :k_nn]
        W[i, nbrs] = np.maximum(sim[i, nbrs], 0.0)
    W = np.maximum(W, W.T)
    return Graph(n=m, W=W, labels=None)


def _parse_float(token: str, path, line_no: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise GraphFormatError(f"{path}, line {line_no}: invalid number {token!r}") from None


def load_adjacency(path, format: str = "dense") -> Graph:
    """Load an adjacency matrix from disk.

    ``format="dense"`` reads comma-separated rows of a square matrix.
    ``format="triplet"`` reads whitespace-separated, 1-indexed ``i j w``
    lines; the node count is inferred from the largest index.  Both formats
    are symmetrized with max(W_ij, W_ji) and reject negative weights.
    """
    if format == "dense":
        rows = []
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                row = [_parse_float(tok, path, line_no) for tok in line.split(",")]
                if rows and len(row) != len(rows[0]):
                    raise GraphFormatError(
                        f"{path}, line {line_no}: expected {len(rows[0])} columns, got {len(row)}"
                    )
                rows.append(row)
        W = np.array(rows, dtype=float)
        if W.size == 0 or W.shape[0] != W.shape[1]:
            raise GraphFormatError(f"{path}: dense adjacency must be a non-empty square matrix")
    elif format == "triplet":
        entries = []
        n = 0
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                toks = line.split()
                if len(toks) != 3:
                    raise GraphFormatError(
                        f"{path}, line {line_no}: expected 'i j w', got {len(toks)} fields"
                    )
                try:
                    i, j = int(toks[0]), int(toks[1])
                except ValueError:
                    raise GraphFormatError(
                        f"{path}, line {line_no}: node indices must be integers"
                    ) from None
                w = _parse_float(toks[2], path, line_no)
                if i < 1 or j < 1:
                    raise GraphFormatError(f"{path}, line {line_no}: indices are 1-based")
                if i == j:
                    raise GraphFormatError(f"{path}, line {line_no}: self-loops are not allowed")
                entries.append((i - 1, j - 1, w))
                n = max(n, i, j)
        W = np.zeros((n, n))
        for i, j, w in entries:
            W[i, j] = max(W[i, j], w)
    else:
        raise ValueError(f"unknown adjacency format {format!r}")

    if np.any(W < 0):
        raise GraphFormatError(f"{path}: negative edge weights are not allowed")
    if np.any(np.diag(W) != 0):
        raise GraphFormatError(f"{path}: diagonal entries must be zero")
    W = np.maximum(W, W.T)
    return Graph(n=W.shape[0], W=W, labels=None)


def save_adjacency(g: Graph, path, format: str = "dense") -> None:
    """Write a graph's adjacency to disk in ``dense`` or ``triplet`` format.

    Floats are written with 17 significant digits so a save/load round trip
    reproduces the matrix exactly.  The triplet format only stores nonzero
    edges, so trailing isolated nodes do not survive a round trip.
    """
    if format == "dense":
        with open(path, "w", encoding="utf-8") as fh:
            for row in g.W:
                fh.write(",".join(f"{w:.17g}" for w in row) + "\n")
    elif format == "triplet":
        iu, ju = np.triu_indices(g.n, k=1)
        with open(path, "w", encoding="utf-8") as fh:
            for i, j in zip(iu, ju):
                w = g.W[i, j]
                if w != 0:
                    fh.write(f"{i + 1} {j + 1} {w:.17g}\n")
    else:
        raise ValueError(f"unknown adjacency format {format!r}")
