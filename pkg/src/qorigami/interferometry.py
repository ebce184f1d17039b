"""Bosonic interferometry identities on truncated Fock spaces.

Dense verification of the measurement toolbox: tunneling-pulse SWAP,
beamsplitters, SWAP-as-parity in the antisymmetric mode, twist operators
via mode Fourier transform, controlled-SWAP, the logical Hadamard test,
the analytic error estimators, and the linear solver reconstructing a
modular S matrix from superposition measurements.

All identities are number conserving, so they are exact on the subspace
with total occupation at most the per-mode cutoff; leakage outside that
subspace is measured, never silently ignored.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, logm

from . import anyons


class InterferometryError(ValueError):
    """Raised for identity violations, bad systems, or missing data."""


# -- truncated Fock systems ----------------------------------------------


@dataclass(frozen=True)
class FockSystem:
    """Dense bosonic system: `sites` x `modes_per_site` modes, occupation
    capped per mode at `cutoff` and optionally in total at `total_cap`."""

    sites: int
    modes_per_site: int
    cutoff: int = 2
    total_cap: int | None = None
    max_dim: int = 4096

    def __post_init__(self) -> None:
        if self.sites < 1 or self.modes_per_site < 1 or self.cutoff < 1:
            raise InterferometryError("sites, modes and cutoff must be >= 1")
        if self.dim > self.max_dim:
            raise InterferometryError(
                f"dimension {self.dim} exceeds the cap {self.max_dim}")

    @property
    def n_modes(self) -> int:
        return self.sites * self.modes_per_site

    @property
    def basis(self) -> tuple[tuple[int, ...], ...]:
        states = []
        for occ in itertools.product(range(self.cutoff + 1),
                                     repeat=self.n_modes):
            if self.total_cap is None or sum(occ) <= self.total_cap:
                states.append(occ)
        return tuple(states)

    @property
    def dim(self) -> int:
        if self.total_cap is None:
            return (self.cutoff + 1) ** self.n_modes
        return len(self.basis)

    def index(self) -> dict:
        return {occ: i for i, occ in enumerate(self.basis)}

    def mode(self, site: int, layer: int) -> int:
        if not (0 <= site < self.sites and 0 <= layer < self.modes_per_site):
            raise InterferometryError(f"no mode (site {site}, layer {layer})")
        return site * self.modes_per_site + layer

    def annihilation(self, m: int) -> np.ndarray:
        basis = self.basis
        idx = self.index()
        a = np.zeros((len(basis), len(basis)), dtype=complex)
        for i, occ in enumerate(basis):
            if occ[m] == 0:
                continue
            target = list(occ)
            target[m] -= 1
            j = idx.get(tuple(target))
            if j is not None:
                a[j, i] = math.sqrt(occ[m])
        return a

    def creation(self, m: int) -> np.ndarray:
        return self.annihilation(m).conj().T

    def number(self, m: int) -> np.ndarray:
        return np.diag(np.array([occ[m] for occ in self.basis], dtype=complex))

    def vacuum(self) -> np.ndarray:
        state = np.zeros(self.dim, dtype=complex)
        state[self.index()[(0,) * self.n_modes]] = 1.0
        return state

    def basis_state(self, occ) -> np.ndarray:
        state = np.zeros(self.dim, dtype=complex)
        state[self.index()[tuple(occ)]] = 1.0
        return state

    def random_state(self, rng: np.random.Generator,
                     max_total: int | None = None) -> np.ndarray:
        """Normalized random state, optionally capped in total occupation."""
        amps = rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)
        if max_total is not None:
            for i, occ in enumerate(self.basis):
                if sum(occ) > max_total:
                    amps[i] = 0.0
        return amps / np.linalg.norm(amps)

    def occupation_projector(self, max_total: int) -> np.ndarray:
        diag = np.array([1.0 if sum(occ) <= max_total else 0.0
                         for occ in self.basis])
        return np.diag(diag).astype(complex)


def permutation_unitary(sys: FockSystem, mode_perm: dict) -> np.ndarray:
    """Unitary permuting mode occupations per the given mode mapping."""
    idx = self_index = sys.index()
    u = np.zeros((sys.dim, sys.dim), dtype=complex)
    for i, occ in enumerate(sys.basis):
        target = list(occ)
        for src, dst in mode_perm.items():
            target[dst] = occ[src]
        j = self_index.get(tuple(target))
        if j is None:
            raise InterferometryError("mode permutation leaves the basis")
        u[j, i] = 1.0
    del idx
    return u


def swap_unitary(sys: FockSystem, m1: int, m2: int) -> np.ndarray:
    return permutation_unitary(sys, {m1: m2, m2: m1})


def leakage(sys: FockSystem, u: np.ndarray) -> float:
    """Unitarity defect of u on the total-occupation <= cutoff subspace."""
    p = sys.occupation_projector(sys.cutoff)
    probe = p @ u.conj().T @ u @ p
    return float(np.max(np.abs(probe - p)))


# -- tunneling pulses -----------------------------------------------------


def _tunneling_generator(sys: FockSystem, m1: int, m2: int) -> np.ndarray:
    a, b = sys.annihilation(m1), sys.annihilation(m2)
    return a.conj().T @ b + b.conj().T @ a


def tunneling_swap(sys: FockSystem, site: int,
                   layers: tuple[int, int] = (0, 1)) -> np.ndarray:
    """Half tunneling pulse plus phase correction; equals the mode SWAP."""
    m1, m2 = sys.mode(site, layers[0]), sys.mode(site, layers[1])
    h = _tunneling_generator(sys, m1, m2)
    u1 = expm(-1j * (math.pi / 2) * h)
    u2 = expm(1j * (math.pi / 2) * (sys.number(m1) + sys.number(m2)))
    u = u2 @ u1
    p = sys.occupation_projector(sys.cutoff)
    defect = np.max(np.abs(p @ (u - swap_unitary(sys, m1, m2)) @ p))
    if defect > 1e-9:
        raise InterferometryError(
            f"tunneling pulse fails to realize SWAP (defect {defect:.2e})")
    return u


def beamsplitter(sys: FockSystem, site: int,
                 layers: tuple[int, int] = (0, 1)) -> np.ndarray:
    """Quarter tunneling pulse plus phase correction.

    Conjugation sends a1 to (a1 + a2)/sqrt(2) and a2 to (a2 - a1)/sqrt(2):
    the second output port carries the antisymmetric combination.
    """
    m1, m2 = sys.mode(site, layers[0]), sys.mode(site, layers[1])
    h = _tunneling_generator(sys, m1, m2)
    u1 = expm(-1j * (math.pi / 4) * h)
    phase = expm(1j * (math.pi / 2) * sys.number(m2))
    return phase.conj().T @ u1 @ phase


def antisymmetric_number(sys: FockSystem, site: int,
                         layers: tuple[int, int] = (0, 1)) -> np.ndarray:
    """Number operator of the antisymmetric combination of two layers."""
    m1, m2 = sys.mode(site, layers[0]), sys.mode(site, layers[1])
    a, b = sys.annihilation(m1), sys.annihilation(m2)
    d = (a - b) / math.sqrt(2.0)
    return d.conj().T @ d


def swap_expectation_via_parity(sys: FockSystem, state: np.ndarray,
                                tol: float = 1e-9) -> dict:
    """SWAP expectation as antisymmetric-mode parity, with a direct check."""
    if sys.modes_per_site < 2:
        raise InterferometryError("need two layers per site")
    state = np.asarray(state, dtype=complex)
    parity = np.eye(sys.dim, dtype=complex)
    direct = np.eye(sys.dim, dtype=complex)
    for site in range(sys.sites):
        parity = parity @ expm(1j * math.pi * antisymmetric_number(sys, site))
        direct = direct @ swap_unitary(
            sys, sys.mode(site, 0), sys.mode(site, 1))
    val_parity = complex(state.conj() @ parity @ state)
    val_direct = complex(state.conj() @ direct @ state)
    diff = abs(val_parity - val_direct)
    if diff > tol:
        raise InterferometryError(
            f"parity identity violated by {diff:.2e}")
    return {"parity": val_parity, "direct": val_direct, "difference": diff}


# -- twist operators ------------------------------------------------------


def _mode_transform_unitary(sys: FockSystem, single: np.ndarray,
                            modes: list[int]) -> np.ndarray:
    """Many-body unitary realizing a single-particle mode transform."""
    h = logm(single)
    gen = np.zeros((sys.dim, sys.dim), dtype=complex)
    ops = [sys.annihilation(m) for m in modes]
    for k in range(len(modes)):
        for l in range(len(modes)):
            if abs(h[k, l]) > 1e-15:
                gen += h[k, l] * ops[k].conj().T @ ops[l]
    return expm(gen)


def twist_expectation(sys: FockSystem, state: np.ndarray, site: int = 0,
                      tol: float = 1e-9) -> dict:
    """Twist (cyclic layer permutation) expectation, two ways.

    Direct: permutation operator on layer occupations.  Fourier: transform
    the site's layers with the unitary DFT, then evaluate the phase-weighted
    number formula prod_k exp(i 2 pi k n_k / N).
    """
    n = sys.modes_per_site
    if n < 2:
        raise InterferometryError("twist needs at least two layers")
    state = np.asarray(state, dtype=complex)
    modes = [sys.mode(site, layer) for layer in range(n)]
    perm = {modes[k]: modes[(k + 1) % n] for k in range(n)}
    direct_op = permutation_unitary(sys, perm)
    direct = complex(state.conj() @ direct_op @ state)

    dft = np.array([[np.exp(2j * np.pi * k * l / n) for l in range(n)]
                    for k in range(n)]) / math.sqrt(n)
    f = _mode_transform_unitary(sys, dft, modes)
    phases = np.zeros((sys.dim, sys.dim), dtype=complex)
    for k, m in enumerate(modes):
        phases = phases + (2j * np.pi * k / n) * sys.number(m)
    fourier_op = f.conj().T @ expm(phases) @ f
    fourier = complex(state.conj() @ fourier_op @ state)
    diff = abs(direct - fourier)
    if diff > tol:
        raise InterferometryError(f"twist identity violated by {diff:.2e}")
    return {"direct": direct, "fourier": fourier, "difference": diff}


# -- controlled SWAP ------------------------------------------------------


def cswap(sys: FockSystem, ancilla_dim: int = 2,
          tol: float = 1e-10) -> np.ndarray:
    """exp(-i pi n_C sum_j n_tilde_j), block I on |0>, SWAP on |1>."""
    if ancilla_dim < 2:
        raise InterferometryError("ancilla needs at least two levels")
    total = np.zeros((sys.dim, sys.dim), dtype=complex)
    swap_all = np.eye(sys.dim, dtype=complex)
    for site in range(sys.sites):
        total = total + antisymmetric_number(sys, site)
        swap_all = swap_all @ swap_unitary(
            sys, sys.mode(site, 0), sys.mode(site, 1))
    n_c = np.diag(np.arange(ancilla_dim)).astype(complex)
    u = expm(-1j * math.pi * np.kron(n_c, total))
    d = sys.dim
    block0 = u[:d, :d]
    block1 = u[d:2 * d, d:2 * d]
    if np.max(np.abs(block0 - np.eye(d))) > tol:
        raise InterferometryError("ancilla-0 block is not the identity")
    if np.max(np.abs(block1 - swap_all)) > tol:
        raise InterferometryError("ancilla-1 block is not SWAP")
    return u


# -- logical Hadamard test ------------------------------------------------


def hadamard_test(model: anyons.ModularData, word,
                  state_spec) -> tuple[float, float]:
    """Ramsey-circuit estimate of Re and Im of <psi|U(word)|psi>.

    state_spec is a label, or a mapping label -> amplitude.
    """
    u = anyons.rep_on_torus(model, word)
    psi = np.zeros(model.n, dtype=complex)
    if isinstance(state_spec, str):
        psi[model.index(state_spec)] = 1.0
    else:
        for label, amp in state_spec.items():
            psi[model.index(label)] = amp
    norm = np.linalg.norm(psi)
    if norm < 1e-12:
        raise InterferometryError("state_spec is the zero vector")
    psi = psi / norm
    # Ancilla in (|0> + |1>)/sqrt(2), controlled-U, then X / Y readout.
    joint = np.concatenate([psi, u @ psi]) / math.sqrt(2.0)
    d = model.n
    x_val = 2.0 * np.real(np.vdot(joint[:d], joint[d:]))
    y_val = 2.0 * np.imag(np.vdot(joint[:d], joint[d:]))
    direct = complex(np.vdot(psi, u @ psi))
    if abs(complex(x_val, y_val) - direct) > 1e-10:
        raise InterferometryError("Ramsey readout disagrees with <U>")
    return (x_val, y_val)


# -- error estimators -----------------------------------------------------


@dataclass(frozen=True)
class ErrorBudget:
    N: int = 1
    J: float = 1.0
    dt: float = 0.0
    gap: float = 1.0
    temperature: float = 0.0
    readout: float = 1.0
    distance: int | None = None

    def __post_init__(self) -> None:
        if self.N < 1 or self.J < 0 or self.dt < 0 or self.gap < 0 \
                or self.temperature < 0:
            raise InterferometryError("physical parameters must be nonnegative")
        if not (0 < self.readout <= 1):
            raise InterferometryError("readout fidelity must be in (0, 1]")


def timing_error_overlap(budget: ErrorBudget) -> float:
    """First-order overlap 1 - 2 N^2 J^2 dt^2 for a mistimed half pulse."""
    jdt = budget.J * budget.dt
    return 1.0 - 2.0 * (budget.N ** 2) * (jdt ** 2)


def thermal_fidelity(budget: ErrorBudget) -> float:
    if budget.temperature == 0:
        return 1.0
    return 1.0 - (budget.N ** 2) * math.exp(-budget.gap / budget.temperature)


def readout_fidelity(budget: ErrorBudget) -> float:
    return budget.readout ** budget.N


def validity_warnings(budget: ErrorBudget) -> list[str]:
    warnings = []
    if budget.N * budget.J * budget.dt >= 0.5:
        warnings.append("timing expansion outside validity (N J dt >= 0.5)")
    if thermal_fidelity(budget) < 0:
        warnings.append("thermal estimate negative: regime break")
    return warnings


def split_mode_fock_state(sys: FockSystem, site: int, quanta: int,
                          sign: int = -1) -> np.ndarray:
    """State with `quanta` excitations in the site's antisymmetric
    (sign=-1) or symmetric (sign=+1) layer combination."""
    m1, m2 = sys.mode(site, 0), sys.mode(site, 1)
    d_dag = (sys.creation(m1) + sign * sys.creation(m2)) / math.sqrt(2.0)
    state = sys.vacuum()
    for _ in range(quanta):
        state = d_dag @ state
    norm = np.linalg.norm(state)
    if norm < 1e-12:
        raise InterferometryError("cutoff too small for requested quanta")
    return state / norm


def timing_error_brute_force(j_dt: float, sites: int = 2) -> float:
    """Dense overlap of a mistimed SWAP on an entangled two-quanta state.

    The probe is a GHZ-type state over `sites` sites, superposing two
    symmetric quanta against two antisymmetric quanta per site.  The two
    branches pick up opposite timing phases, so the overlap with the ideal
    outcome is cos(2 N J dt) = 1 - 2 N^2 (J dt)^2 + O(dt^4).
    """
    sys = FockSystem(sites=sites, modes_per_site=2, cutoff=2,
                     total_cap=2 * sites, max_dim=8000)
    comp_sym = np.ones(1, dtype=complex)
    comp_anti = np.ones(1, dtype=complex)
    # Build the product states site by site, using that the full product
    # basis factorizes over sites in order.
    per_site = FockSystem(sites=1, modes_per_site=2, cutoff=2)
    s_sym = split_mode_fock_state(per_site, 0, 2, sign=+1)
    s_anti = split_mode_fock_state(per_site, 0, 2, sign=-1)
    for _ in range(sites):
        comp_sym = np.kron(comp_sym, s_sym)
        comp_anti = np.kron(comp_anti, s_anti)
    # Re-embed the product vectors into the capped basis.
    full = FockSystem(sites=sites, modes_per_site=2, cutoff=2)
    ghz_full = (comp_sym + comp_anti) / math.sqrt(2.0)
    idx = sys.index()
    ghz = np.zeros(sys.dim, dtype=complex)
    for i, occ in enumerate(full.basis):
        if abs(ghz_full[i]) > 1e-14 and tuple(occ) in idx:
            ghz[idx[tuple(occ)]] = ghz_full[i]
    ghz = ghz / np.linalg.norm(ghz)

    u_err = np.eye(sys.dim, dtype=complex)
    for site in range(sites):
        m1, m2 = sys.mode(site, 0), sys.mode(site, 1)
        h = _tunneling_generator(sys, m1, m2)
        u1 = expm(-1j * (math.pi / 2 + j_dt) * h)
        u2 = expm(1j * (math.pi / 2) * (sys.number(m1) + sys.number(m2)))
        u_err = u_err @ u2 @ u1
    return abs(complex(ghz.conj() @ u_err @ ghz))


def timing_scaling_exponent(j_dts=(0.02, 0.01, 0.005), sites: int = 2) -> float:
    """Fitted power of the residual between brute force and the estimator."""
    residuals = []
    for j_dt in j_dts:
        brute = timing_error_brute_force(j_dt, sites=sites)
        est = timing_error_overlap(ErrorBudget(N=sites, J=1.0, dt=j_dt))
        residuals.append(abs(brute - est))
    logs_x = np.log(np.asarray(j_dts, dtype=float))
    logs_y = np.log(np.maximum(np.asarray(residuals), 1e-300))
    slope = np.polyfit(logs_x, logs_y, 1)[0]
    return float(slope)


# -- four-beamsplitter composition ----------------------------------------


def four_beamsplitter_check(seed: int = 0, samples: int = 20,
                            tol: float = 1e-9) -> float:
    """Product-parity observable after four beamsplitters versus the
    double-SWAP expectation, on a two-site four-layer toy system."""
    sys = FockSystem(sites=2, modes_per_site=4, cutoff=2, total_cap=2,
                     max_dim=4096)
    pairs = {0: [(0, 3), (2, 1)], 1: [(2, 3), (0, 1)]}
    bm = np.eye(sys.dim, dtype=complex)
    parity = np.eye(sys.dim, dtype=complex)
    direct = np.eye(sys.dim, dtype=complex)
    for site, site_pairs in pairs.items():
        for la, lb in site_pairs:
            bm = beamsplitter(sys, site, (la, lb)) @ bm
            parity = parity @ expm(
                1j * math.pi * sys.number(sys.mode(site, lb)))
            direct = direct @ swap_unitary(
                sys, sys.mode(site, la), sys.mode(site, lb))
    observable = bm.conj().T @ parity @ bm
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        state = sys.random_state(rng)
        lhs = complex(state.conj() @ observable @ state)
        rhs = complex(state.conj() @ direct @ state)
        worst = max(worst, abs(lhs - rhs))
    if worst > tol:
        raise InterferometryError(
            f"four-beamsplitter composition violated by {worst:.2e}")
    return worst


# -- measurement records and S-matrix extraction ---------------------------


@dataclass(frozen=True)
class MeasurementRecord:
    name: str
    value: complex
    variance: float | None = None
    provenance: str = "analytic"

    def to_dict(self) -> dict:
        return {"name": self.name, "re": self.value.real,
                "im": self.value.imag, "variance": self.variance,
                "provenance": self.provenance}


def records_to_json(records) -> str:
    return json.dumps([r.to_dict() for r in records], sort_keys=True)


def records_from_json(text: str):
    return [MeasurementRecord(d["name"], complex(d["re"], d["im"]),
                              d.get("variance"), d.get("provenance", "file"))
            for d in json.loads(text)]


def synthetic_measurements(model: anyons.ModularData) -> dict:
    """Noiseless forward map: every preparation's exact <psi|S|psi>."""
    s = model.s_matrix
    n = model.n
    out: dict[str, complex] = {}
    for a in range(n):
        out[f"diag:{a}"] = complex(s[a, a])
    for a in range(n):
        for b in range(a + 1, n):
            plus = (s[a, a] + s[b, b] + s[a, b] + s[b, a]) / 2.0
            imix = (s[a, a] + s[b, b] + 1j * s[a, b] - 1j * s[b, a]) / 2.0
            out[f"plus:{a},{b}"] = complex(plus)
            out[f"imag:{a},{b}"] = complex(imix)
    if not all(c == i for i, c in enumerate(model.conj)):
        cs = model.conj_matrix @ s
        for a in range(n):
            out[f"conj_diag:{a}"] = complex(s[a, a] + cs[a, a])
            for b in range(a + 1, n):
                plus = (s[a, a] + s[b, b] + s[a, b] + s[b, a]
                        + cs[a, a] + cs[b, b] + cs[a, b] + cs[b, a]) / 2.0
                out[f"conj_plus:{a},{b}"] = complex(plus)
    return out


def extract_matrix_elements(measurements: dict, conj: tuple[int, ...],
                            tol: float = 1e-10) -> dict:
    """Reconstruct S from superposition measurements by a linear solve.

    For self-conjugate models the diagonal, plus and i-superposition rows
    determine every entry; otherwise the rows built on (I + C) S join an
    overdetermined least-squares system.  Missing preparations raise with
    an explicit list.
    """
    n = len(conj)
    needed = [f"diag:{a}" for a in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            needed.append(f"plus:{a},{b}")
            needed.append(f"imag:{a},{b}")
    missing = [k for k in needed if k not in measurements]
    if missing:
        raise InterferometryError(
            "insufficient measurements; missing preparations: "
            + ", ".join(missing))

    def var(a, b):
        return a * n + b

    rows = []
    rhs = []
    for a in range(n):
        row = np.zeros(n * n, dtype=complex)
        row[var(a, a)] = 1.0
        rows.append(row)
        rhs.append(measurements[f"diag:{a}"])
    for a in range(n):
        for b in range(a + 1, n):
            row = np.zeros(n * n, dtype=complex)
            row[var(a, a)] = row[var(b, b)] = 0.5
            row[var(a, b)] = row[var(b, a)] = 0.5
            rows.append(row)
            rhs.append(measurements[f"plus:{a},{b}"])
            row = np.zeros(n * n, dtype=complex)
            row[var(a, a)] = row[var(b, b)] = 0.5
            row[var(a, b)] = 0.5j
            row[var(b, a)] = -0.5j
            rows.append(row)
            rhs.append(measurements[f"imag:{a},{b}"])
    nontrivial_conj = not all(c == i for i, c in enumerate(conj))
    if nontrivial_conj:
        for a in range(n):
            key = f"conj_diag:{a}"
            if key in measurements:
                row = np.zeros(n * n, dtype=complex)
                row[var(a, a)] += 1.0
                row[var(conj[a], a)] += 1.0
                rows.append(row)
                rhs.append(measurements[key])
    mat = np.array(rows)
    vec = np.array(rhs)
    if np.linalg.matrix_rank(mat, tol=1e-8) < n * n:
        raise InterferometryError(
            "insufficient measurements: linear system is singular")
    sol, *_ = np.linalg.lstsq(mat, vec, rcond=None)
    s = sol.reshape(n, n)
    residual = float(np.linalg.norm(mat @ sol - vec))
    if residual > tol:
        raise InterferometryError(
            f"extraction residual {residual:.2e} exceeds {tol:.1e}")
    return {"s_matrix": s, "residual": residual}
