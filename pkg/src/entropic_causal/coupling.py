"""Greedy minimum-entropy coupling of discrete marginals.

Given m marginal distributions, a coupling is a joint mass assignment over
the product state space whose projections reproduce every marginal. Joint
entropy is concave, so its minimum over the transportation polytope sits at
a vertex; finding it is intractable in general. The greedy construction
below repeatedly takes r = min over variables of the current largest
residual mass and places one atom of mass r at the tuple of argmax states.
Each round exhausts at least one residual entry, so the atom count is at
most m * (n_max - 1) + 1 and the coupling entropy is at most
log2(m) + log2(n_max).

Tie rules are fixed so runs are reproducible: equal residual maxima resolve
to the lowest state index, and equal row maxima resolve to the lowest
variable index. Instead of re-sorting residuals every round, each variable
keeps a max-heap of untouched entries plus its current top; observable
behavior is identical to the sort-based formulation.

For two variables the greedy output is a local optimum of the entropy
minimization problem: its support is acyclic (a forest in the bipartite
row/column graph) and equals a masked submatrix of a rank-1 matrix u v^T.
``verify_local_optimum`` checks both properties. ``brute_force_min_coupling``
certifies tiny instances by enumerating all transportation-polytope
vertices via spanning trees.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .distributions import Distribution, JointMatrix, entropy_bits
from .validation import EPS_RESIDUAL, EPS_SUM, EPS_ZERO, as_prob_vector

__all__ = [
    "Atom",
    "Coupling",
    "CouplingResult",
    "LocalOptimumCheck",
    "greedy_coupling",
    "greedy_atom_masses",
    "greedy_joint_matrix",
    "verify_local_optimum",
    "brute_force_min_coupling",
    "write_coupling",
    "read_coupling",
]

BRUTE_FORCE_CELL_CAP = 20


class Atom(NamedTuple):
    """One (mass, cell) entry of a sparse coupling."""

    mass: float
    cell: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Coupling:
    """A sparse joint mass assignment consistent with m marginals.

    ``atoms`` are stored in creation order; every mass is strictly positive
    and they sum to 1 within ``EPS_SUM``. Atom cells index into the state
    spaces listed in ``marginal_dims`` (0-based).
    """

    atoms: tuple[Atom, ...]
    marginal_dims: tuple[int, ...]

    def __post_init__(self):
        atoms = tuple(Atom(float(m), tuple(int(i) for i in c)) for m, c in self.atoms)
        dims = tuple(int(n) for n in self.marginal_dims)
        if len(dims) < 1 or any(n < 1 for n in dims):
            raise ValueError(f"invalid marginal dims {dims}")
        if not atoms:
            raise ValueError("coupling must have at least one atom")
        n_max = max(dims)
        if len(atoms) > len(dims) * (n_max - 1) + 1:
            raise ValueError(
                f"{len(atoms)} atoms exceeds the m*(n_max-1)+1 bound for dims {dims}"
            )
        total = 0.0
        for mass, cell in atoms:
            if not mass > 0:
                raise ValueError(f"atom mass {mass!r} is not strictly positive")
            if len(cell) != len(dims) or any(
                not 0 <= i < n for i, n in zip(cell, dims)
            ):
                raise ValueError(f"atom cell {cell} out of range for dims {dims}")
            total += mass
        if abs(total - 1.0) > EPS_SUM:
            raise ValueError(f"atom masses sum to {total!r}, not 1 within {EPS_SUM}")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "marginal_dims", dims)

    @property
    def n_variables(self) -> int:
        return len(self.marginal_dims)

    @property
    def masses(self) -> np.ndarray:
        """Atom masses in creation order."""
        return np.array([a.mass for a in self.atoms])

    def atoms_by_mass(self) -> tuple[Atom, ...]:
        """Atoms sorted by descending mass, ties kept in creation order."""
        return tuple(sorted(self.atoms, key=lambda a: -a.mass))

    def atom_distribution(self) -> Distribution:
        """The atom-mass vector as a distribution (the exogenous candidate)."""
        return Distribution(self.masses)

    def project(self, i: int) -> np.ndarray:
        """Marginal of variable ``i`` implied by the atoms."""
        out = np.zeros(self.marginal_dims[i])
        for mass, cell in self.atoms:
            out[cell[i]] += mass
        return out

    def to_dense(self) -> np.ndarray:
        """Dense array of the coupling; intended for small variable counts."""
        out = np.zeros(self.marginal_dims)
        for mass, cell in self.atoms:
            out[cell] += mass
        return out


@dataclass(frozen=True, eq=False)
class CouplingResult:
    """A coupling plus its entropy bookkeeping.

    ``lower_bound_bits`` is the largest marginal entropy, which every
    coupling entropy dominates; ``excess_bits`` is the gap above it.
    """

    coupling: Coupling
    entropy_bits: float
    lower_bound_bits: float
    excess_bits: float

    def __post_init__(self):
        if self.entropy_bits < self.lower_bound_bits - EPS_SUM:
            raise ValueError(
                f"coupling entropy {self.entropy_bits!r} below the marginal "
                f"lower bound {self.lower_bound_bits!r}"
            )
        if abs(self.excess_bits - (self.entropy_bits - self.lower_bound_bits)) > EPS_SUM:
            raise ValueError("excess_bits inconsistent with entropy and lower bound")


def _validated_marginals(marginals) -> list[np.ndarray]:
    arrs = []
    for k, marg in enumerate(marginals):
        vec = (
            np.array(marg.masses, copy=True)
            if isinstance(marg, Distribution)
            else as_prob_vector(marg, name=f"marginal {k}")
        )
        # Exact renormalization keeps per-variable residual totals aligned
        # far below EPS_RESIDUAL even when inputs carry EPS_SUM-level noise.
        arrs.append(vec / vec.sum())
    return arrs


def _greedy_atoms(
    arrs: Sequence[np.ndarray], want_cells: bool
) -> tuple[list[float], list[np.ndarray] | None]:
    """Core greedy loop over validated, renormalized marginals.

    Returns atom masses in creation order and, if requested, the matching
    cell index vectors. Every atom takes exactly r = min over variables of
    the current max residual; the loop ends once the remaining per-variable
    mass drops below ``EPS_RESIDUAL``, discarding that dust. Keeping atom
    masses equal to exact residual values means clean inputs produce clean
    atom masses (no tracker rounding leaks in).
    """
    m = len(arrs)
    heaps: list[list[tuple[float, int]]] = []
    top_val = np.empty(m)
    top_state = np.empty(m, dtype=np.int64)
    peek_val = np.empty(m)
    peek_state = np.empty(m, dtype=np.int64)
    for i, arr in enumerate(arrs):
        heap = [(-v, s) for s, v in enumerate(arr) if v > 0.0]
        heapq.heapify(heap)
        neg_v, s = heapq.heappop(heap)
        top_val[i], top_state[i] = -neg_v, s
        if heap:
            peek_val[i], peek_state[i] = -heap[0][0], heap[0][1]
        else:
            peek_val[i], peek_state[i] = -1.0, -1
        heaps.append(heap)

    masses: list[float] = []
    cells: list[np.ndarray] | None = [] if want_cells else None
    remaining = 1.0
    while remaining > EPS_RESIDUAL:
        r = float(top_val.min())
        if r <= 0.0:
            break
        if cells is not None:
            cells.append(top_state.copy())
        masses.append(r)
        remaining -= r
        top_val -= r
        for i in np.flatnonzero(top_val <= peek_val):
            t = top_val[i]
            if t == peek_val[i] and top_state[i] < peek_state[i]:
                continue  # current top keeps the tie (lowest state index)
            heap = heaps[i]
            neg_v, s = heapq.heappop(heap)
            if t > 0.0:
                heapq.heappush(heap, (-t, int(top_state[i])))
            top_val[i], top_state[i] = -neg_v, s
            if heap:
                peek_val[i], peek_state[i] = -heap[0][0], heap[0][1]
            else:
                peek_val[i], peek_state[i] = -1.0, -1
    return masses, cells


def greedy_atom_masses(marginals) -> np.ndarray:
    """Atom masses of the greedy coupling, without materializing cells.

    Same construction as :func:`greedy_coupling` but memory-light, for
    large instances where only the entropy of the coupling is needed.
    """
    arrs = _validated_marginals(marginals)
    if len(arrs) < 2:
        raise ValueError(f"need at least 2 marginals, got {len(arrs)}")
    masses, _ = _greedy_atoms(arrs, want_cells=False)
    out = np.array(masses)
    if abs(out.sum() - 1.0) > EPS_SUM:
        raise RuntimeError(f"greedy masses sum to {out.sum()!r}; not a coupling")
    return out


def _result_from_atoms(
    masses: Sequence[float],
    cells: Sequence[np.ndarray],
    dims: tuple[int, ...],
    lower_bound: float,
) -> CouplingResult:
    atoms = tuple(
        Atom(float(m), tuple(int(i) for i in c)) for m, c in zip(masses, cells)
    )
    coupling = Coupling(atoms=atoms, marginal_dims=dims)
    entropy = entropy_bits(coupling.masses)
    return CouplingResult(
        coupling=coupling,
        entropy_bits=entropy,
        lower_bound_bits=lower_bound,
        excess_bits=entropy - lower_bound,
    )


def greedy_coupling(marginals) -> CouplingResult:
    """Greedily couple ``marginals`` into a low-entropy joint distribution.

    Parameters
    ----------
    marginals : sequence of Distribution or array-like
        At least two probability vectors; lengths may differ.

    Returns
    -------
    CouplingResult
        Coupling atoms in creation order with entropy, the max-marginal
        entropy lower bound, and the excess above it.

    Notes
    -----
    Per round, r = min over variables of the largest residual mass is
    removed from each variable's argmax state and recorded as one atom at
    the tuple of argmax indices. Identical inputs produce identical atom
    sequences.
    """
    arrs = _validated_marginals(marginals)
    if len(arrs) < 2:
        raise ValueError(f"need at least 2 marginals, got {len(arrs)}")
    masses, cells = _greedy_atoms(arrs, want_cells=True)
    assert cells is not None
    if abs(sum(masses) - 1.0) > EPS_SUM:
        raise RuntimeError(f"greedy masses sum to {sum(masses)!r}; not a coupling")
    dims = tuple(a.size for a in arrs)
    lower = max(entropy_bits(a) for a in arrs)
    return _result_from_atoms(masses, cells, dims, lower)


def greedy_joint_matrix(p, q) -> JointMatrix:
    """Two-variable greedy coupling laid out densely.

    Rows index states of ``p``, columns states of ``q``; row sums equal
    ``p`` and column sums equal ``q`` within ``EPS_SUM``.
    """
    result = greedy_coupling([p, q])
    return JointMatrix(result.coupling.to_dense())


@dataclass(frozen=True, eq=False)
class LocalOptimumCheck:
    """Outcome of the two-variable local-optimum structure test.

    ``acyclic`` reports whether the support graph is a forest. When it is,
    ``u`` and ``v`` satisfy u[i] * v[k] = cell[i, k] on every support cell
    (one valid normalization; entries untouched by any support cell are 0).
    Otherwise ``cycle`` lists the cells of a witness cycle, alternating
    row-mates and column-mates.
    """

    acyclic: bool
    u: np.ndarray | None = None
    v: np.ndarray | None = None
    cycle: tuple[tuple[int, int], ...] | None = None
    max_rel_error: float = 0.0


def _support_cycle(
    support: np.ndarray,
) -> tuple[tuple[int, int], ...] | None:
    """Find a cycle in the bipartite support graph, or None if a forest.

    Vertices are rows 0..R-1 and columns R..R+C-1; each support cell is an
    edge. Returns the cycle as matrix coordinates.
    """
    n_rows, n_cols = support.shape
    adj: list[list[int]] = [[] for _ in range(n_rows + n_cols)]
    for i, k in zip(*np.nonzero(support)):
        adj[i].append(n_rows + k)
        adj[n_rows + k].append(int(i))
    parent = {}
    for start in range(n_rows + n_cols):
        if start in parent or not adj[start]:
            continue
        parent[start] = -1
        stack = [(start, -1)]
        while stack:
            node, par = stack.pop()
            for nxt in adj[node]:
                if nxt == par:
                    continue
                if nxt in parent:
                    # Walk both endpoints up to their common ancestor.
                    path_a, path_b = [node], [nxt]
                    seen = {node}
                    cur = node
                    while parent[cur] != -1:
                        cur = parent[cur]
                        path_a.append(cur)
                        seen.add(cur)
                    cur = nxt
                    while cur not in seen:
                        cur = parent[cur]
                        path_b.append(cur)
                    meet = path_b[-1]
                    cycle_nodes = path_a[: path_a.index(meet) + 1]
                    cycle_nodes += list(reversed(path_b[:-1]))
                    cells = []
                    for a, b in zip(cycle_nodes, cycle_nodes[1:] + cycle_nodes[:1]):
                        row, col = (a, b) if a < n_rows else (b, a)
                        cells.append((int(row), int(col - n_rows)))
                    return tuple(cells)
                parent[nxt] = node
                stack.append((nxt, node))
    return None


def verify_local_optimum(j: JointMatrix | np.ndarray) -> LocalOptimumCheck:
    """Check the local-optimum structure of a two-variable coupling matrix.

    The support graph (edge (i, k) iff cell > ``EPS_ZERO``) must contain no
    cycle, and the support cells must factor as a masked rank-1 matrix.
    The u, v witness is built by propagation: seed u = 1 at the first
    support cell's row, assign v along that row, then alternate across the
    forest. A cyclic support returns ``acyclic=False`` with a witness cycle.
    """
    cells = j.cells if isinstance(j, JointMatrix) else np.asarray(j, dtype=float)
    support = cells > EPS_ZERO
    cycle = _support_cycle(support)
    if cycle is not None:
        return LocalOptimumCheck(acyclic=False, cycle=cycle)

    n_rows, n_cols = cells.shape
    u = np.zeros(n_rows)
    v = np.zeros(n_cols)
    assigned_row = np.zeros(n_rows, dtype=bool)
    assigned_col = np.zeros(n_cols, dtype=bool)
    support_rows = [np.flatnonzero(support[i]) for i in range(n_rows)]
    support_cols = [np.flatnonzero(support[:, k]) for k in range(n_cols)]
    for i0 in range(n_rows):
        if assigned_row[i0] or support_rows[i0].size == 0:
            continue
        u[i0] = 1.0
        assigned_row[i0] = True
        queue = [("row", i0)]
        while queue:
            kind, idx = queue.pop()
            if kind == "row":
                for k in support_rows[idx]:
                    if not assigned_col[k]:
                        v[k] = cells[idx, k] / u[idx]
                        assigned_col[k] = True
                        queue.append(("col", int(k)))
            else:
                for i in support_cols[idx]:
                    if not assigned_row[i]:
                        u[i] = cells[i, idx] / v[idx]
                        assigned_row[i] = True
                        queue.append(("row", int(i)))

    max_rel = 0.0
    for i, k in zip(*np.nonzero(support)):
        rel = abs(u[i] * v[k] - cells[i, k]) / cells[i, k]
        max_rel = max(max_rel, float(rel))
    return LocalOptimumCheck(acyclic=True, u=u, v=v, max_rel_error=max_rel)


def _solve_spanning_tree(
    edges: tuple[tuple[int, int], ...], p: np.ndarray, q: np.ndarray
) -> np.ndarray | None:
    """Unique mass assignment for a spanning-tree support, or None if infeasible."""
    n, m_ = p.size, q.size
    supply = np.concatenate([p, q]).astype(float)
    incident: list[list[int]] = [[] for _ in range(n + m_)]
    for e, (i, k) in enumerate(edges):
        incident[i].append(e)
        incident[n + k].append(e)
    degree = np.array([len(lst) for lst in incident])
    removed = np.zeros(len(edges), dtype=bool)
    masses = np.zeros(len(edges))
    leaves = [vtx for vtx in range(n + m_) if degree[vtx] == 1]
    while leaves:
        vtx = leaves.pop()
        if degree[vtx] != 1:
            continue
        e = next(ei for ei in incident[vtx] if not removed[ei])
        i, k = edges[e]
        masses[e] = supply[vtx]
        other = n + k if vtx == i else i
        supply[other] -= supply[vtx]
        supply[vtx] = 0.0
        removed[e] = True
        degree[vtx] -= 1
        degree[other] -= 1
        if degree[other] == 1:
            leaves.append(other)
    if masses.min() < -EPS_RESIDUAL:
        return None
    return np.clip(masses, 0.0, None)


def brute_force_min_coupling(p, q) -> CouplingResult:
    """Exact minimum-entropy coupling of two small marginals.

    Joint entropy is concave, so the minimum over the transportation
    polytope is attained at a vertex, and every vertex is the unique
    solution of some spanning-tree support of the complete bipartite graph.
    All spanning trees are enumerated, infeasible (negative-mass) ones
    discarded, and the minimum-entropy vertex returned.

    The instance is capped at ``len(p) * len(q) <= 20`` cells.
    """
    arrs = _validated_marginals([p, q])
    pa, qa = arrs
    n, m_ = pa.size, qa.size
    if n * m_ > BRUTE_FORCE_CELL_CAP:
        raise ValueError(
            f"{n}x{m_} exceeds the brute-force cap of {BRUTE_FORCE_CELL_CAP} cells"
        )
    all_edges = [(i, k) for i in range(n) for k in range(m_)]
    n_vertices = n + m_
    best_entropy = np.inf
    best_masses: np.ndarray | None = None
    best_edges: tuple[tuple[int, int], ...] | None = None
    for subset in itertools.combinations(all_edges, n_vertices - 1):
        root = list(range(n_vertices))

        def find(x: int) -> int:
            while root[x] != x:
                root[x] = root[root[x]]
                x = root[x]
            return x

        acyclic = True
        for i, k in subset:
            ri, rk = find(i), find(n + k)
            if ri == rk:
                acyclic = False
                break
            root[ri] = rk
        if not acyclic:
            continue
        masses = _solve_spanning_tree(subset, pa, qa)
        if masses is None:
            continue
        ent = entropy_bits(masses)
        if ent < best_entropy:
            best_entropy = ent
            best_masses = masses
            best_edges = subset
    assert best_masses is not None and best_edges is not None
    atom_masses, atom_cells = [], []
    for mass, (i, k) in zip(best_masses, best_edges):
        if mass > 0:
            atom_masses.append(mass)
            atom_cells.append(np.array([i, k]))
    lower = max(entropy_bits(pa), entropy_bits(qa))
    return _result_from_atoms(atom_masses, atom_cells, (n, m_), lower)


def write_coupling(coupling: Coupling | CouplingResult, fp) -> None:
    """Write a coupling in the line-oriented text format.

    Header line ``dims<TAB>n1,n2,...,nm`` followed by one atom per line,
    ``mass<TAB>i1,i2,...,im`` with 0-based state indices. Masses are
    printed with 17 significant digits, which round-trips float64 exactly.
    """
    if isinstance(coupling, CouplingResult):
        coupling = coupling.coupling
    fp.write("dims\t" + ",".join(str(n) for n in coupling.marginal_dims) + "\n")
    for mass, cell in coupling.atoms:
        fp.write(f"{mass:.17g}\t" + ",".join(str(i) for i in cell) + "\n")


def read_coupling(fp) -> Coupling:
    """Parse the text format written by :func:`write_coupling`."""
    lines = [line.strip() for line in fp if line.strip()]
    if not lines or not lines[0].startswith("dims\t"):
        raise ValueError("coupling file must start with a 'dims' header line")
    dims = tuple(int(tok) for tok in lines[0].split("\t", 1)[1].split(","))
    atoms = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            mass_tok, cell_tok = line.split("\t")
            atoms.append(
                Atom(float(mass_tok), tuple(int(t) for t in cell_tok.split(",")))
            )
        except ValueError as exc:
            raise ValueError(f"line {lineno}: malformed atom {line!r}") from exc
    return Coupling(atoms=tuple(atoms), marginal_dims=dims)
