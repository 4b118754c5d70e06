"""A small compiler for unidirectional quantum networks.

Network elements are (S, L, H) triplets: a numeric unitary scattering matrix
between the element's ports, a vector of coupling operators (one per port),
and an internal Hamiltonian.  Elements compose by the series product
(outputs of the first feed inputs of the second) and the parallel product
(ports stacked).  Compiling the two driven qubit-cavity chains, their lossy
lines, and the amplification-detection stage yields the master-equation
generators of the joint measurement.

Scattering matrices are numeric throughout (every element here scatters
passively); coupling operators carry both a dense matrix and a symbolic
(coefficient x elementary-operator-label) form so compiled networks can be
checked coefficient by coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cavity import SystemParams

UNITARITY_TOL = 1e-12
HERM_TOL = 1e-12

#: 0-based indices of the I- and Q-monitored channels of the compiled network
MONITORED_CHANNELS = (1, 4)


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor product of labeled subsystems."""

    subsystems: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        labels = [lab for lab, _ in self.subsystems]
        if len(set(labels)) != len(labels):
            raise ValueError("subsystem labels must be unique")
        if any(d < 2 for _, d in self.subsystems):
            raise ValueError("subsystem dimensions must be >= 2")

    @property
    def dim(self) -> int:
        return math.prod(d for _, d in self.subsystems)

    def embed(self, label: str, local: np.ndarray) -> np.ndarray:
        """kron the local operator into its slot, identities elsewhere."""
        out = np.array([[1.0 + 0.0j]])
        for lab, d in self.subsystems:
            factor = local if lab == label else np.eye(d)
            out = np.kron(out, factor)
        return out

    def destroy(self, label: str) -> np.ndarray:
        d = dict(self.subsystems)[label]
        return self.embed(label, np.diag(np.sqrt(np.arange(1, d)), 1).astype(complex))

    def sigma_z(self, label: str) -> np.ndarray:
        return self.embed(label, np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex))

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)


@dataclass(frozen=True)
class OperatorExpr:
    """Dense operator bound to a Hilbert space."""

    matrix: np.ndarray
    space: HilbertSpace

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.space.dim, self.space.dim):
            raise ValueError("matrix does not match the space dimension")
        object.__setattr__(self, "matrix", m)

    def is_hermitian(self, tol: float = HERM_TOL) -> bool:
        scale = max(1.0, np.abs(self.matrix).max())
        return np.abs(self.matrix - self.matrix.conj().T).max() <= tol * scale

    def __add__(self, other: "OperatorExpr") -> "OperatorExpr":
        _require_same_space(self.space, other.space)
        return OperatorExpr(self.matrix + other.matrix, self.space)

    @classmethod
    def zero(cls, space: HilbertSpace) -> "OperatorExpr":
        return cls(np.zeros((space.dim, space.dim), dtype=complex), space)


@dataclass(frozen=True)
class CouplingOp:
    """Coupling-vector entry: sum of (complex coefficient x labeled operator).

    The label "1" denotes the identity (a c-number displacement, e.g. a
    semiclassical drive); elementary mode operators use labels like "a1".
    """

    terms: tuple[tuple[str, complex], ...]
    matrix: np.ndarray
    space: HilbertSpace

    @classmethod
    def zero(cls, space: HilbertSpace) -> "CouplingOp":
        return cls((), np.zeros((space.dim, space.dim), dtype=complex), space)

    @classmethod
    def from_terms(
        cls, space: HilbertSpace, terms: dict[str, complex], ops: dict[str, np.ndarray]
    ) -> "CouplingOp":
        terms = {lab: c for lab, c in terms.items() if c != 0.0}
        mat = np.zeros((space.dim, space.dim), dtype=complex)
        for lab, c in terms.items():
            mat = mat + c * (space.identity() if lab == "1" else ops[lab])
        return cls(tuple(sorted(terms.items())), mat, space)

    @property
    def is_zero(self) -> bool:
        return len(self.terms) == 0

    def terms_dict(self) -> dict[str, complex]:
        return dict(self.terms)

    def scaled(self, c: complex) -> "CouplingOp":
        if c == 0.0 or self.is_zero:
            return CouplingOp.zero(self.space)
        return CouplingOp(
            tuple((lab, c * v) for lab, v in self.terms), c * self.matrix, self.space
        )

    def __add__(self, other: "CouplingOp") -> "CouplingOp":
        _require_same_space(self.space, other.space)
        merged = self.terms_dict()
        for lab, v in other.terms:
            merged[lab] = merged.get(lab, 0.0) + v
        merged = {lab: v for lab, v in merged.items() if v != 0.0}
        return CouplingOp(tuple(sorted(merged.items())), self.matrix + other.matrix, self.space)


def _require_same_space(a: HilbertSpace, b: HilbertSpace) -> None:
    if a != b:
        raise ValueError("operands live on different Hilbert spaces")


@dataclass(frozen=True)
class SLHTriplet:
    """(scattering matrix, coupling vector, Hamiltonian) of a network element."""

    s: np.ndarray
    l: tuple[CouplingOp, ...]
    h: OperatorExpr

    def __post_init__(self) -> None:
        s = np.asarray(self.s, dtype=complex)
        n = s.shape[0]
        if s.shape != (n, n):
            raise ValueError("S must be square")
        if len(self.l) != n:
            raise ValueError("coupling vector length must equal the port count")
        if n > 0 and np.abs(s.conj().T @ s - np.eye(n)).max() > UNITARITY_TOL:
            raise ValueError("S is not unitary within tolerance")
        if not self.h.is_hermitian():
            raise ValueError("H is not Hermitian within tolerance")
        object.__setattr__(self, "s", s)

    @property
    def n_ports(self) -> int:
        return self.s.shape[0]

    @property
    def space(self) -> HilbertSpace:
        return self.h.space


def identity_triplet(space: HilbertSpace, n: int) -> SLHTriplet:
    """n parallel pass-through ports (n may be 0)."""
    return SLHTriplet(
        np.eye(n, dtype=complex),
        tuple(CouplingOp.zero(space) for _ in range(n)),
        OperatorExpr.zero(space),
    )


def permutation_triplet(space: HilbertSpace, perm) -> SLHTriplet:
    """Wire crossing: output k carries input perm[k]."""
    n = len(perm)
    s = np.zeros((n, n), dtype=complex)
    for k, p in enumerate(perm):
        s[k, p] = 1.0
    return SLHTriplet(s, tuple(CouplingOp.zero(space) for _ in range(n)), OperatorExpr.zero(space))


def cascade(g2: SLHTriplet, g1: SLHTriplet) -> SLHTriplet:
    """Series product: g1's outputs feed g2's inputs.

    S = S2 S1;  L = S2 L1 + L2;
    H = H1 + H2 - (i/2)(L2^dag S2 L1 - L1^dag S2^dag L2).
    """
    _require_same_space(g1.space, g2.space)
    if g1.n_ports != g2.n_ports:
        raise ValueError(f"port-count mismatch: {g1.n_ports} vs {g2.n_ports}")
    n = g1.n_ports
    s = g2.s @ g1.s

    s2l1 = []
    for k in range(n):
        acc = CouplingOp.zero(g1.space)
        for j in range(n):
            if g2.s[k, j] != 0.0 and not g1.l[j].is_zero:
                acc = acc + g1.l[j].scaled(g2.s[k, j])
        s2l1.append(acc)

    l_new = tuple(s2l1[k] + g2.l[k] for k in range(n))

    m = np.zeros((g1.space.dim, g1.space.dim), dtype=complex)
    for k in range(n):
        if not (g2.l[k].is_zero or s2l1[k].is_zero):
            m = m + g2.l[k].matrix.conj().T @ s2l1[k].matrix
    h = OperatorExpr(g1.h.matrix + g2.h.matrix - 0.5j * (m - m.conj().T), g1.space)
    return SLHTriplet(s, l_new, h)


def concatenate(g1: SLHTriplet, g2: SLHTriplet) -> SLHTriplet:
    """Parallel product: block-diagonal S, stacked L, summed H."""
    _require_same_space(g1.space, g2.space)
    n1, n2 = g1.n_ports, g2.n_ports
    s = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    s[:n1, :n1] = g1.s
    s[n1:, n1:] = g2.s
    return SLHTriplet(s, g1.l + g2.l, g1.h + g2.h)


def concat(*gs: SLHTriplet) -> SLHTriplet:
    out = gs[0]
    for g in gs[1:]:
        out = concatenate(out, g)
    return out


def permute_ports(g: SLHTriplet, perm) -> SLHTriplet:
    """Relabel ports: new port k is old port perm[k] (inputs and outputs)."""
    perm = list(perm)
    s = g.s[np.ix_(perm, perm)]
    return SLHTriplet(s, tuple(g.l[p] for p in perm), g.h)


# ---------------------------------------------------------------------------
# element library


def element(kind: str, space: HilbertSpace, **params) -> SLHTriplet:
    """Construct a library element on the given space.

    Kinds: ``identity(n)``, ``drive(eps, kappa_in)``,
    ``qubit_cavity(cavity, qubit, chi, kappa, kappa_in, delta)``,
    ``line_loss(etabar)``, ``amp_loss(eta_g)``, ``beamsplitter``.
    """
    zero_l = CouplingOp.zero(space)
    zero_h = OperatorExpr.zero(space)

    if kind == "identity":
        return identity_triplet(space, params["n"])

    if kind == "drive":
        kappa_in = params["kappa_in"]
        if kappa_in <= 0.0:
            raise ValueError("drive element needs kappa_in > 0 (use the limit form otherwise)")
        coeff = params["eps"] / math.sqrt(kappa_in)
        l0 = CouplingOp.from_terms(space, {"1": coeff}, {})
        return SLHTriplet(np.eye(1, dtype=complex), (l0,), zero_h)

    if kind == "qubit_cavity":
        cav, qub = params["cavity"], params["qubit"]
        chi, kappa = params["chi"], params["kappa"]
        kappa_in = params.get("kappa_in", 0.0)
        delta = params.get("delta", 0.0)
        if kappa < 0.0 or kappa_in < 0.0:
            raise ValueError("rates must be >= 0")
        a = space.destroy(cav)
        label = "a" + cav[-1]
        l_in = CouplingOp.from_terms(space, {label: math.sqrt(kappa_in)}, {label: a})
        l_out = CouplingOp.from_terms(space, {label: math.sqrt(kappa)}, {label: a})
        num = a.conj().T @ a
        h = OperatorExpr((delta * np.eye(space.dim) + 0.5 * chi * space.sigma_z(qub)) @ num, space)
        return SLHTriplet(np.eye(2, dtype=complex), (l_in, l_out), h)

    if kind == "line_loss":
        etabar = params["etabar"]
        if not 0.0 < etabar <= 1.0:
            raise ValueError("etabar must lie in (0, 1]")
        t = math.sqrt(etabar)
        r = math.sqrt(1.0 - etabar)
        s = np.array([[t, r], [-r, t]], dtype=complex)
        return SLHTriplet(s, (zero_l, zero_l), zero_h)

    if kind == "amp_loss":
        eta_g = params["eta_g"]
        if not 0.0 < eta_g <= 1.0:
            raise ValueError("eta_g must lie in (0, 1]")
        t = math.sqrt(eta_g)
        r = math.sqrt(1.0 - eta_g)
        s = np.array([[t, 0.0, r], [0.0, 1.0, 0.0], [-r, 0.0, t]], dtype=complex)
        return SLHTriplet(s, (zero_l,) * 3, zero_h)

    if kind == "beamsplitter":
        c = 1.0 / math.sqrt(2.0)
        s = np.array(
            [
                [c, 0.0, 0.0, c],
                [0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
                [-c, 0.0, 0.0, c],
            ],
            dtype=complex,
        )
        return SLHTriplet(s, (zero_l,) * 4, zero_h)

    raise ValueError(f"unknown element kind {kind!r}")


def absorb_drives(g: SLHTriplet) -> SLHTriplet:
    """Move c-number components of L into H.

    A displacement beta riding on a coupling entry L = C + beta contributes
    exactly the Hamiltonian (i/2)(conj(beta) C - beta C^dag) once removed
    from the dissipator; innovation operators are unchanged by it.
    """
    h = g.h.matrix.copy()
    new_l = []
    changed = False
    for entry in g.l:
        beta = entry.terms_dict().get("1", 0.0)
        if beta == 0.0:
            new_l.append(entry)
            continue
        changed = True
        c_mat = entry.matrix - beta * np.eye(g.space.dim)
        h = h + 0.5j * (np.conj(beta) * c_mat - beta * c_mat.conj().T)
        terms = {lab: v for lab, v in entry.terms if lab != "1"}
        new_l.append(CouplingOp(tuple(sorted(terms.items())), c_mat, g.space))
    if not changed:
        return g
    return SLHTriplet(g.s, tuple(new_l), OperatorExpr(h, g.space))


def network_space(n_fock: int) -> HilbertSpace:
    return HilbertSpace((("q1", 2), ("q2", 2), ("c1", n_fock), ("c2", n_fock)))


def build_network(
    sys: SystemParams,
    eps1: complex = 0.0,
    eps2: complex = 0.0,
    n_fock: int = 4,
    space: HilbertSpace | None = None,
) -> SLHTriplet:
    """Compile the full two-pair + amplifier network at fixed drive values.

    Channel ordering of the result (0-based):

        0: sqrt(kappa1 (1 - etabar1)) a1          line-1 loss
        1: (sqrt(kappa1 etabar1) a1 + sqrt(kappa2 etabar2 eta_g) a2)/sqrt(2)
        2: sqrt(kappa1_in) a1                     weak input 1
        3: sqrt(kappa2_in) a2                     weak input 2
        4: (sqrt(kappa1 etabar1) a1 - sqrt(kappa2 etabar2 eta_g) a2)/sqrt(2)
        5: sqrt(kappa2 (1 - etabar2)) a2          line-2 loss
        6: sqrt(kappa2 etabar2 (1 - eta_g)) a2    amplifier loss

    Channels 1 and 4 (:data:`MONITORED_CHANNELS`) are the heterodyne I and Q
    channels.  Drives are absorbed into H, which comes out exactly as
    sum_j (Delta_j + chi_j sz_j / 2) n_j + eps_j a_j^dag + conj(eps_j) a_j;
    the drive elements carry i*eps so the absorbed phase lands there.
    """
    if space is None:
        space = network_space(n_fock)

    def ident(n):
        return identity_triplet(space, n)

    def pair(j):
        jj = j - 1
        return element(
            "qubit_cavity", space,
            cavity=f"c{j}", qubit=f"q{j}",
            chi=sys.chi[jj], kappa=sys.kappa[jj],
            kappa_in=sys.kappa_in[jj], delta=sys.delta[jj],
        )

    # chain 1: loss element sees (vacuum, cavity output); kappa port first
    g1 = permute_ports(pair(1), (1, 0))
    gt1 = cascade(
        concat(element("line_loss", space, etabar=sys.etabar[0]), ident(1)),
        concat(ident(1), g1),
    )
    # chain 2: printed port order already lines up; loss element port-reversed
    # so its loss output carries the + sign
    loss2 = permute_ports(element("line_loss", space, etabar=sys.etabar[1]), (1, 0))
    gt2 = cascade(
        concat(ident(1), loss2, ident(1)),
        concat(pair(2), ident(2)),
    )

    # semiclassical drives through the weak ports; kappa_in = 0 takes the
    # analytic limit (drive Hamiltonian added directly below)
    drive_h = np.zeros((space.dim, space.dim), dtype=complex)
    for j, eps in ((1, eps1), (2, eps2)):
        jj = j - 1
        if eps == 0.0:
            continue
        if sys.kappa_in[jj] > 0.0:
            dr = element("drive", space, eps=1j * eps, kappa_in=sys.kappa_in[jj])
            if j == 1:
                gt1 = cascade(gt1, concat(ident(2), dr))
            else:
                gt2 = cascade(gt2, concat(dr, ident(3)))
        else:
            a = space.destroy(f"c{j}")
            drive_h += eps * a.conj().T + np.conj(eps) * a

    # amplification-detection stage: one-output loss (ports reversed so the
    # retained path carries +), a wire crossing, then the 50-50 splitter
    amp = permute_ports(element("amp_loss", space, eta_g=sys.eta_g), (2, 1, 0))
    swap = list(range(7))
    swap[1], swap[4] = 4, 1
    ga = cascade(
        concat(ident(1), element("beamsplitter", space), ident(2)),
        cascade(permutation_triplet(space, swap), concat(ident(4), amp)),
    )

    total = absorb_drives(cascade(ga, concatenate(gt1, gt2)))
    if drive_h.any():
        total = SLHTriplet(total.s, total.l, OperatorExpr(total.h.matrix + drive_h, space))
    return total


# ---------------------------------------------------------------------------
# master-equation generators


@dataclass(frozen=True)
class SMEGenerator:
    """Drift superoperator and innovation operators of a monitored network."""

    h: np.ndarray
    ls: tuple[np.ndarray, ...]
    m_i: np.ndarray
    m_q: np.ndarray

    def drift(self, rho: np.ndarray) -> np.ndarray:
        """-i[H, rho] + sum_k D(L_k) rho."""
        out = -1j * (self.h @ rho - rho @ self.h)
        for lk in self.ls:
            ld = lk.conj().T
            out = out + lk @ rho @ ld - 0.5 * (ld @ lk @ rho + rho @ ld @ lk)
        return out

    @staticmethod
    def _innovation(m: np.ndarray, rho: np.ndarray) -> np.ndarray:
        x = m @ rho + rho @ m.conj().T
        return x - np.trace(x) * rho

    def innovation_i(self, rho: np.ndarray) -> np.ndarray:
        return self._innovation(self.m_i, rho)

    def innovation_q(self, rho: np.ndarray) -> np.ndarray:
        return self._innovation(self.m_q, rho)


def generator_from_triplet(
    g: SLHTriplet,
    monitored: tuple[int, int] = MONITORED_CHANNELS,
    eta: float = 1.0,
) -> SMEGenerator:
    """Generators for homodyne monitoring of two channels at efficiency eta.

    The I-channel innovation operator is sqrt(eta) L_i, the Q-channel one is
    i sqrt(eta) L_q; all channels dissipate regardless of monitoring.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    ch_i, ch_q = monitored
    for ch in (ch_i, ch_q):
        if not 0 <= ch < g.n_ports:
            raise ValueError(f"channel index {ch} out of range")
        if g.l[ch].is_zero:
            raise ValueError(f"monitored channel {ch} has zero coupling")
    root = math.sqrt(eta)
    return SMEGenerator(
        h=g.h.matrix,
        ls=tuple(entry.matrix for entry in g.l if not entry.is_zero),
        m_i=root * g.l[ch_i].matrix,
        m_q=1j * root * g.l[ch_q].matrix,
    )
