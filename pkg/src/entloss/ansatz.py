"""Layered circuit families and their expressivity statistics.

Four hardware-style ansatz families over n qubits, each built from layers
of parameterized rotations plus a fixed or parameterized entangling block.
Conventions used throughout:

* qubit 0 occupies the most significant bit of the basis index,
* RX(t) = exp(-i t X / 2), same half-angle form for RY, RZ, and the
  controlled RX,
* layer 0 is applied to the state first, so the full circuit matrix is
  the product L_{l-1} ... L_1 L_0.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .losses import loss_from_fidelity, sample_loss
from .samples import TrainingSample

FAMILY_NO_ENTANGLEMENT = "no_entanglement"
FAMILY_CZ = "cz_entanglement"
FAMILY_CIRCULAR = "circular_entanglement"
FAMILY_CRX = "crx_entanglement"

FAMILIES = (
    FAMILY_NO_ENTANGLEMENT,
    FAMILY_CZ,
    FAMILY_CIRCULAR,
    FAMILY_CRX,
)


@dataclass(frozen=True)
class AnsatzSpec:
    """Circuit family, qubit count, and layer count."""

    family: str
    qubits: int
    layers: int

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown ansatz family {self.family!r}")
        if self.qubits < 1:
            raise ValueError("qubits must be >= 1")
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if self.family == FAMILY_CRX and self.qubits < 2:
            raise ValueError("crx_entanglement needs at least 2 qubits")

    @property
    def dim(self) -> int:
        return 2**self.qubits


def params_per_layer(spec: AnsatzSpec) -> int:
    n = spec.qubits
    if spec.family == FAMILY_NO_ENTANGLEMENT:
        return 2 * n
    if spec.family == FAMILY_CRX:
        return 2 * n + 1
    return n


def param_count(spec: AnsatzSpec) -> int:
    return spec.layers * params_per_layer(spec)


def _rx(t: float) -> np.ndarray:
    c, s = np.cos(t / 2.0), np.sin(t / 2.0)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _ry(t: float) -> np.ndarray:
    c, s = np.cos(t / 2.0), np.sin(t / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(t: float) -> np.ndarray:
    return np.array([[np.exp(-1j * t / 2.0), 0.0], [0.0, np.exp(1j * t / 2.0)]])


_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


def _column(gates: list[np.ndarray]) -> np.ndarray:
    return functools.reduce(np.kron, gates)


@functools.lru_cache(maxsize=None)
def _hadamard_column(n: int) -> np.ndarray:
    m = _column([_HADAMARD] * n)
    m.setflags(write=False)
    return m


@functools.lru_cache(maxsize=None)
def _cz_chain_signs(n: int) -> np.ndarray:
    """Diagonal of the chain of CZ gates on pairs (0,1), (1,2), ..."""
    d = 2**n
    signs = np.ones(d)
    for b in range(d):
        bits = [(b >> (n - 1 - j)) & 1 for j in range(n)]
        parity = sum(bits[j] * bits[j + 1] for j in range(n - 1))
        if parity % 2:
            signs[b] = -1.0
    signs.setflags(write=False)
    return signs


@functools.lru_cache(maxsize=None)
def _cx_ring(n: int) -> np.ndarray:
    """Chain of CX gates on pairs (0,1), ..., (n-2,n-1), (n-1,0)."""
    d = 2**n
    pairs = [(j, j + 1) for j in range(n - 1)] + [(n - 1, 0)]
    dest = np.arange(d)
    for control, target in pairs:
        control_mask = 1 << (n - 1 - control)
        target_mask = 1 << (n - 1 - target)
        dest = np.where(dest & control_mask, dest ^ target_mask, dest)
    m = np.zeros((d, d), dtype=complex)
    m[dest, np.arange(d)] = 1.0
    m.setflags(write=False)
    return m


def _controlled_rx(n: int, control: int, target: int, theta: float) -> np.ndarray:
    d = 2**n
    control_mask = 1 << (n - 1 - control)
    target_mask = 1 << (n - 1 - target)
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    m = np.zeros((d, d), dtype=complex)
    for b in range(d):
        if b & control_mask:
            m[b, b] = c
            m[b ^ target_mask, b] = -1j * s
        else:
            m[b, b] = 1.0
    return m


def _layer_matrix(spec: AnsatzSpec, p: np.ndarray) -> np.ndarray:
    n = spec.qubits
    if spec.family == FAMILY_NO_ENTANGLEMENT:
        rx_col = _column([_rx(t) for t in p[:n]])
        rz_col = _column([_rz(t) for t in p[n:]])
        return rz_col @ rx_col
    if spec.family == FAMILY_CZ:
        base = _cz_chain_signs(n)[:, None] * _hadamard_column(n)
        return _column([_rx(t) for t in p]) @ base
    if spec.family == FAMILY_CIRCULAR:
        ry_col = _column([_ry(t) for t in p])
        if n == 1:
            return ry_col
        return _cx_ring(n) @ ry_col
    # crx: a chain of controlled rotations over all adjacent pairs, sharing
    # the layer's single entangling angle
    ry_col = _column([_ry(t) for t in p[:n]])
    rz_col = _column([_rz(t) for t in p[n : 2 * n]])
    m = rz_col @ ry_col
    for control in range(n - 1):
        m = _controlled_rx(n, control, control + 1, p[2 * n]) @ m
    return m


def _checked_parameters(spec: AnsatzSpec, theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    expected = param_count(spec)
    if theta.shape != (expected,):
        raise ValueError(
            f"parameter vector has shape {theta.shape}, expected ({expected},)"
        )
    return theta


def build_unitary(spec: AnsatzSpec, theta: np.ndarray) -> np.ndarray:
    """Materialize the circuit as a dense 2^n x 2^n unitary."""
    theta = _checked_parameters(spec, theta)
    per = params_per_layer(spec)
    u = np.eye(spec.dim, dtype=complex)
    for i in range(spec.layers):
        u = _layer_matrix(spec, theta[i * per : (i + 1) * per]) @ u
    return u


def loss_gradient(
    spec: AnsatzSpec,
    theta: np.ndarray,
    u: np.ndarray,
    sample: TrainingSample,
    step: float = 1e-6,
) -> np.ndarray:
    """Central finite-difference gradient of the sample loss in theta."""
    theta = _checked_parameters(spec, theta)
    grad = np.zeros(theta.size)
    for j in range(theta.size):
        shift = np.zeros(theta.size)
        shift[j] = step
        plus = sample_loss(u, build_unitary(spec, theta + shift), sample).loss
        minus = sample_loss(u, build_unitary(spec, theta - shift), sample).loss
        grad[j] = (plus - minus) / (2.0 * step)
    return grad


# ---------------------------------------------------------------------------
# Fast circuit application and adjoint-mode gradients
#
# Optimizer loops evaluate the loss tens of thousands of times per sweep,
# so the circuit is applied directly to the d x r column block carrying the
# sample's Schmidt factors instead of materializing the d x d unitary, and
# the gradient is computed by one forward and one backward pass through the
# layers rather than by finite differences.
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _qubit_bits(n: int) -> np.ndarray:
    d = 2**n
    bits = np.array(
        [[(b >> (n - 1 - j)) & 1 for b in range(d)] for j in range(n)], dtype=float
    )
    bits.setflags(write=False)
    return bits


@functools.lru_cache(maxsize=None)
def _cz_base(n: int) -> tuple[np.ndarray, np.ndarray]:
    base = _cz_chain_signs(n)[:, None] * _hadamard_column(n)
    adj = base.conj().T.copy()
    base.setflags(write=False)
    adj.setflags(write=False)
    return base, adj


@functools.lru_cache(maxsize=None)
def _cx_ring_maps(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-gather maps equivalent to multiplying by the ring and its inverse."""
    d = 2**n
    dest = np.nonzero(_cx_ring(n).T.real)[1]
    src = np.argsort(dest)
    src.setflags(write=False)
    dest.setflags(write=False)
    return src, dest


@functools.lru_cache(maxsize=None)
def _crx_rows(n: int, control: int, target: int) -> tuple[np.ndarray, np.ndarray]:
    d = 2**n
    control_mask = 1 << (n - 1 - control)
    target_mask = 1 << (n - 1 - target)
    rows = np.flatnonzero(np.arange(d) & control_mask)
    flipped = rows ^ target_mask
    rows.setflags(write=False)
    flipped.setflags(write=False)
    return rows, flipped


def _rx_gates(thetas: np.ndarray) -> np.ndarray:
    c, s = np.cos(thetas / 2.0), np.sin(thetas / 2.0)
    g = np.empty((thetas.size, 2, 2), dtype=complex)
    g[:, 0, 0] = c
    g[:, 1, 1] = c
    g[:, 0, 1] = -1j * s
    g[:, 1, 0] = -1j * s
    return g


def _ry_gates(thetas: np.ndarray) -> np.ndarray:
    c, s = np.cos(thetas / 2.0), np.sin(thetas / 2.0)
    g = np.empty((thetas.size, 2, 2), dtype=complex)
    g[:, 0, 0] = c
    g[:, 1, 1] = c
    g[:, 0, 1] = -s
    g[:, 1, 0] = s
    return g


def _rz_phases(thetas: np.ndarray, n: int) -> np.ndarray:
    return np.exp(1j * (thetas @ _qubit_bits(n) - 0.5 * thetas.sum()))


def _apply_gate_column(gates: np.ndarray, block: np.ndarray) -> np.ndarray:
    """Apply one single-qubit gate per qubit to a (d, r) column block."""
    d, r = block.shape
    t = block
    pre = 1
    for g in gates:
        t = np.einsum("ab,pbq->paq", g, t.reshape(pre, 2, -1))
        pre *= 2
    return t.reshape(d, r)


def _apply_crx(
    n: int, control: int, theta: float, block: np.ndarray
) -> np.ndarray:
    rows, flipped = _crx_rows(n, control, control + 1)
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    out = block.copy()
    out[rows] = c * block[rows] - 1j * s * block[flipped]
    return out


def _layer_apply(spec: AnsatzSpec, p: np.ndarray, block: np.ndarray) -> np.ndarray:
    n = spec.qubits
    if spec.family == FAMILY_NO_ENTANGLEMENT:
        block = _apply_gate_column(_rx_gates(p[:n]), block)
        return _rz_phases(p[n:], n)[:, None] * block
    if spec.family == FAMILY_CZ:
        return _apply_gate_column(_rx_gates(p), _cz_base(n)[0] @ block)
    if spec.family == FAMILY_CIRCULAR:
        block = _apply_gate_column(_ry_gates(p), block)
        if n == 1:
            return block
        return block[_cx_ring_maps(n)[0]]
    block = _apply_gate_column(_ry_gates(p[:n]), block)
    block = _rz_phases(p[n : 2 * n], n)[:, None] * block
    for control in range(n - 1):
        block = _apply_crx(n, control, p[2 * n], block)
    return block


def apply_circuit(spec: AnsatzSpec, theta: np.ndarray, block: np.ndarray) -> np.ndarray:
    """Circuit action on a (d, r) block of column vectors.

    Equals build_unitary(spec, theta) @ block without forming the matrix.
    """
    theta = _checked_parameters(spec, theta)
    block = np.asarray(block, dtype=complex)
    if block.ndim != 2 or block.shape[0] != spec.dim:
        raise ValueError(f"block must have shape ({spec.dim}, r)")
    per = params_per_layer(spec)
    for i in range(spec.layers):
        block = _layer_apply(spec, theta[i * per : (i + 1) * per], block)
    return block


def _rotation_grads(t_block: np.ndarray, s_block: np.ndarray, kind: str) -> np.ndarray:
    """vdot(T, -i/2 sigma_j S) for the rotation generator on each qubit j."""
    d = s_block.shape[0]
    n = d.bit_length() - 1
    out = np.empty(n, dtype=complex)
    pre = 1
    for j in range(n):
        tv = t_block.reshape(pre, 2, -1)
        sv = s_block.reshape(pre, 2, -1)
        if kind == "z":
            q = np.sum(tv[:, 0].conj() * sv[:, 0]) - np.sum(tv[:, 1].conj() * sv[:, 1])
        else:
            a = np.sum(tv[:, 0].conj() * sv[:, 1])
            b = np.sum(tv[:, 1].conj() * sv[:, 0])
            q = (-1j * a + 1j * b) if kind == "y" else (a + b)
        out[j] = -0.5j * q
        pre *= 2
    return out


def _layer_backward(
    spec: AnsatzSpec, p: np.ndarray, x_in: np.ndarray, b: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Per-parameter dz contributions for one layer plus the pulled-back
    cotangent block, given the layer's input block and the cotangent of
    its output."""
    n = spec.qubits
    if spec.family == FAMILY_NO_ENTANGLEMENT:
        s1 = _apply_gate_column(_rx_gates(p[:n]), x_in)
        s2 = _rz_phases(p[n:], n)[:, None] * s1
        t1 = _rz_phases(p[n:], n).conj()[:, None] * b
        grads = np.concatenate(
            [_rotation_grads(t1, s1, "x"), _rotation_grads(b, s2, "z")]
        )
        return grads, _apply_gate_column(_rx_gates(-p[:n]), t1)
    if spec.family == FAMILY_CZ:
        base, base_adj = _cz_base(n)
        s1 = base @ x_in
        s2 = _apply_gate_column(_rx_gates(p), s1)
        grads = _rotation_grads(b, s2, "x")
        return grads, base_adj @ _apply_gate_column(_rx_gates(-p), b)
    if spec.family == FAMILY_CIRCULAR:
        s1 = _apply_gate_column(_ry_gates(p), x_in)
        if n == 1:
            t1 = b
        else:
            t1 = b[_cx_ring_maps(n)[1]]
        grads = _rotation_grads(t1, s1, "y")
        return grads, _apply_gate_column(_ry_gates(-p), t1)
    # crx family
    s1 = _apply_gate_column(_ry_gates(p[:n]), x_in)
    phases = _rz_phases(p[n : 2 * n], n)
    s2 = phases[:, None] * s1
    stages = [s2]
    for control in range(n - 1):
        stages.append(_apply_crx(n, control, p[2 * n], stages[-1]))
    chain_grad = 0.0 + 0.0j
    t = b
    for control in range(n - 2, -1, -1):
        rows, flipped = _crx_rows(n, control, control + 1)
        s = stages[control + 1]
        chain_grad += -0.5j * np.sum(t[rows].conj() * s[flipped])
        t = _apply_crx(n, control, -p[2 * n], t)
    t2 = t
    t1 = phases.conj()[:, None] * t2
    grads = np.concatenate(
        [
            _rotation_grads(t1, s1, "y"),
            _rotation_grads(t2, s2, "z"),
            np.array([chain_grad]),
        ]
    )
    return grads, _apply_gate_column(_ry_gates(-p[:n]), t1)


class SampleLossObjective:
    """Loss of a circuit against a fixed target and training sample, with
    an exact gradient, packaged for optimizer loops.

    __call__ returns sample_loss(u, build_unitary(spec, theta), sample)
    evaluated without forming the circuit matrix; gradient returns its
    derivative from one forward and one backward pass.
    """

    def __init__(self, u: np.ndarray, spec: AnsatzSpec, sample: TrainingSample) -> None:
        u = np.asarray(u, dtype=complex)
        if u.shape != (spec.dim, spec.dim):
            raise ValueError("target operator shape does not match the circuit")
        if sample.state.dim_x != spec.dim:
            raise ValueError("sample dimension does not match the circuit")
        self.spec = spec
        schmidt = sample.schmidt
        self._columns = schmidt.basis_x * schmidt.coefficients
        m = sample.state.reshaped()
        self._target = (u @ m) @ schmidt.basis_y.conj()

    def _overlap_and_blocks(self, theta: np.ndarray) -> tuple[complex, list[np.ndarray]]:
        per = params_per_layer(self.spec)
        blocks = [self._columns]
        for i in range(self.spec.layers):
            blocks.append(
                _layer_apply(self.spec, theta[i * per : (i + 1) * per], blocks[-1])
            )
        return complex(np.vdot(self._target, blocks[-1])), blocks

    def __call__(self, theta: np.ndarray) -> float:
        theta = _checked_parameters(self.spec, theta)
        block = self._columns
        per = params_per_layer(self.spec)
        for i in range(self.spec.layers):
            block = _layer_apply(self.spec, theta[i * per : (i + 1) * per], block)
        z = np.vdot(self._target, block)
        return loss_from_fidelity(abs(z) ** 2).loss

    def gradient(self, theta: np.ndarray) -> np.ndarray:
        theta = _checked_parameters(self.spec, theta)
        z, blocks = self._overlap_and_blocks(theta)
        per = params_per_layer(self.spec)
        dz = np.empty(theta.size, dtype=complex)
        cotangent = self._target
        for i in range(self.spec.layers - 1, -1, -1):
            sl = slice(i * per, (i + 1) * per)
            dz[sl], cotangent = _layer_backward(self.spec, theta[sl], blocks[i], cotangent)
        return -2.0 * np.real(np.conj(z) * dz)


# ---------------------------------------------------------------------------
# Expressivity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpressivityReport:
    """KL divergence of sampled state fidelities against the Haar law."""

    expressivity: float
    histogram: tuple[int, ...]
    n_samples: int
    n_bins: int


def haar_bin_probability(a: float, b: float, d: int) -> float:
    """Mass the Haar fidelity density (d-1)(1-F)^(d-2) puts on [a, b]."""
    if not 0.0 <= a < b <= 1.0:
        raise ValueError(f"bad bin endpoints ({a}, {b})")
    if d < 2:
        raise ValueError("dimension must be >= 2")
    return float((1.0 - a) ** (d - 1) - (1.0 - b) ** (d - 1))


def fidelity_samples(
    spec: AnsatzSpec, n_pairs: int, rng: np.random.Generator | int | None = None
) -> np.ndarray:
    """Fidelities |<0|V(theta)^dag V(rho)|0>|^2 over uniform parameter pairs."""
    rng = np.random.default_rng(rng)
    p = param_count(spec)
    out = np.empty(n_pairs)
    for i in range(n_pairs):
        first = build_unitary(spec, rng.uniform(0.0, 2.0 * np.pi, p))[:, 0]
        second = build_unitary(spec, rng.uniform(0.0, 2.0 * np.pi, p))[:, 0]
        out[i] = abs(np.vdot(first, second)) ** 2
    return np.clip(out, 0.0, 1.0)


def fidelity_kl(
    fidelities: np.ndarray, dim: int, n_bins: int
) -> tuple[float, np.ndarray]:
    """Discrete KL divergence of binned fidelities against the Haar masses.

    Bins partition [0, 1] evenly; numpy's histogram closes the last bin so
    fidelity 1 is counted. Empty bins contribute zero.
    """
    fidelities = np.clip(np.asarray(fidelities, dtype=float), 0.0, 1.0)
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    counts, _ = np.histogram(fidelities, bins=edges)
    empirical = counts / fidelities.size
    haar = (1.0 - edges[:-1]) ** (dim - 1) - (1.0 - edges[1:]) ** (dim - 1)
    mask = empirical > 0.0
    kl = float(np.sum(empirical[mask] * np.log(empirical[mask] / haar[mask])))
    return kl, counts


def expressivity(
    spec: AnsatzSpec,
    n_samples: int = 5000,
    n_bins: int = 75,
    rng: np.random.Generator | int | None = None,
) -> ExpressivityReport:
    if n_samples < n_bins:
        raise ValueError("n_samples must be at least n_bins")
    fids = fidelity_samples(spec, n_samples, rng)
    kl, counts = fidelity_kl(fids, spec.dim, n_bins)
    return ExpressivityReport(
        expressivity=kl,
        histogram=tuple(int(c) for c in counts),
        n_samples=n_samples,
        n_bins=n_bins,
    )


# ---------------------------------------------------------------------------
# JSON form
# ---------------------------------------------------------------------------


def spec_to_json(spec: AnsatzSpec) -> dict:
    return {"family": spec.family, "qubits": spec.qubits, "layers": spec.layers}


def spec_from_json(blob: dict) -> AnsatzSpec:
    if set(blob) != {"family", "qubits", "layers"}:
        raise ValueError(f"ansatz spec needs exactly family/qubits/layers, got {sorted(blob)}")
    family = blob["family"]
    qubits = blob["qubits"]
    layers = blob["layers"]
    if not isinstance(family, str):
        raise ValueError("family must be a string")
    for name, value in (("qubits", qubits), ("layers", layers)):
        if not isinstance(value, int) or isinstance(value, bool):
            raise ValueError(f"{name} must be an integer")
    return AnsatzSpec(family=family, qubits=qubits, layers=layers)
