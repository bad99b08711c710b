"""Pure multiqubit states and the gauge-fixed binary measurements.

Amplitudes are indexed lexicographically by outcome string with party 1 the
most significant digit. Outcome "+" is index 0 and "-" is index 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

FORMAT_TAG = "gmn/v1"
NORM_TOL = 1e-12

# Closed-form optimum of the three-party family at alpha_i = pi/2.
A_STAR_3 = 0.5 * math.sqrt((316.0 - 17.0 * math.sqrt(158.0)) / 1106.0)
S_STAR_3 = (2.0 * (7.0 * A_STAR_3 * math.sqrt(1.0 - 7.0 * A_STAR_3 ** 2)
                   - 17.0 * A_STAR_3 ** 2) - 1.0) / 8.0

# Converged four-party optimum of the constrained family (phases gauged to 0);
# regenerate with ``maximize_constrained(4)``.
PSI_STAR_4_PARAMS = {
    "a": 0.06882081840751825,
    "alphas": [1.5705954596616] * 4,
    "delta": math.pi,
}


def _check_format(data, expected_type):
    if not isinstance(data, dict):
        raise ValueError(f"expected a JSON object for {expected_type}")
    if data.get("format") != FORMAT_TAG:
        raise ValueError(f"unsupported format tag {data.get('format')!r}, expected {FORMAT_TAG!r}")
    if data.get("type") != expected_type:
        raise ValueError(f"expected type {expected_type!r}, got {data.get('type')!r}")


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state on a tensor product of local spaces."""

    num_parties: int
    local_dims: tuple
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.local_dims)
        object.__setattr__(self, "local_dims", dims)
        if self.num_parties < 2 or len(dims) != self.num_parties:
            raise ValueError("num_parties must be >= 2 and match local_dims")
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != math.prod(dims):
            raise ValueError(f"expected {math.prod(dims)} amplitudes, got {amps.size}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, local_dims=None, normalize=True):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if local_dims is None:
            n = int(round(math.log2(amps.size)))
            if 1 << n != amps.size:
                raise ValueError("cannot infer qubit count from amplitude length")
            local_dims = (2,) * n
        if normalize:
            nrm = np.linalg.norm(amps)
            if nrm == 0:
                raise ValueError("zero vector")
            amps = amps / nrm
        return cls(len(local_dims), tuple(local_dims), amps)

    def tensor(self):
        return self.amplitudes.reshape(self.local_dims)

    def to_dict(self):
        return {
            "format": FORMAT_TAG,
            "type": "StateVector",
            "num_parties": self.num_parties,
            "local_dims": list(self.local_dims),
            "amplitudes": [[float(z.real), float(z.imag)] for z in self.amplitudes],
        }

    @classmethod
    def from_dict(cls, data):
        _check_format(data, "StateVector")
        amps = np.array([complex(re, im) for re, im in data["amplitudes"]])
        return cls(int(data["num_parties"]), tuple(data["local_dims"]), amps)


@dataclass(frozen=True)
class MeasurementBasis:
    """One party's pair of binary projective measurements.

    Setting 0 is the computational basis; setting 1 has "+" vector
    ``(cos(alpha/2), e^{i phi} sin(alpha/2))``.
    """

    alpha: float
    phi: float = 0.0

    def __post_init__(self):
        alpha = float(self.alpha)
        if not 0.0 < alpha < math.pi:
            raise ValueError(f"alpha must lie in the open interval (0, pi), got {alpha!r}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "phi", float(self.phi) % (2.0 * math.pi))

    def vectors(self, setting):
        """Rows are the "+" and "-" basis vectors for ``setting``."""
        if setting == 0:
            return np.eye(2, dtype=complex)
        if setting != 1:
            raise ValueError("setting must be 0 or 1")
        c, s = math.cos(self.alpha / 2), math.sin(self.alpha / 2)
        ph = complex(math.cos(self.phi), math.sin(self.phi))
        return np.array([[c, ph * s], [-s, ph * c]], dtype=complex)

    def projectors(self):
        """Array of shape (2 settings, 2 outcomes, 2, 2)."""
        out = np.empty((2, 2, 2, 2), dtype=complex)
        for setting in (0, 1):
            vecs = self.vectors(setting)
            for x in (0, 1):
                out[setting, x] = np.outer(vecs[x], vecs[x].conj())
        return out

    def to_dict(self):
        return {"format": FORMAT_TAG, "type": "MeasurementBasis", "alpha": self.alpha, "phi": self.phi}

    @classmethod
    def from_dict(cls, data):
        _check_format(data, "MeasurementBasis")
        return cls(float(data["alpha"]), float(data.get("phi", 0.0)))


def build_measurement_basis(alpha, phi=0.0):
    return MeasurementBasis(alpha, phi)


@dataclass(frozen=True)
class ConstrainedFamilyParams:
    num_parties: int
    a: float
    alphas: tuple
    delta: float = 0.0
    phis: tuple = None

    def __post_init__(self):
        n = int(self.num_parties)
        alphas = tuple(float(x) for x in self.alphas)
        phis = tuple(0.0 for _ in range(n)) if self.phis is None else tuple(float(x) for x in self.phis)
        if n < 2 or len(alphas) != n or len(phis) != n:
            raise ValueError("alphas and phis must have one entry per party")
        for al in alphas:
            if not 0.0 < al < math.pi:
                raise ValueError(f"alpha must lie in (0, pi), got {al!r}")
        if not 0.0 <= self.a <= 1.0:
            raise ValueError("a must lie in [0, 1]")
        object.__setattr__(self, "num_parties", n)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "phis", phis)
        object.__setattr__(self, "delta", float(self.delta))

    def radicand(self):
        """Weight left for the all-ones amplitude, ``1 - a^2 * sum_{x != 1..1} prod cot^2``."""
        cot2 = [1.0 / math.tan(al / 2) ** 2 for al in self.alphas]
        return 1.0 - self.a ** 2 * (math.prod(1.0 + t for t in cot2) - math.prod(cot2))

    def bases(self):
        return [MeasurementBasis(al, ph) for al, ph in zip(self.alphas, self.phis)]

    def to_dict(self):
        return {
            "format": FORMAT_TAG,
            "type": "ConstrainedFamilyParams",
            "num_parties": self.num_parties,
            "a": self.a,
            "delta": self.delta,
            "alphas": list(self.alphas),
            "phis": list(self.phis),
        }

    @classmethod
    def from_dict(cls, data):
        _check_format(data, "ConstrainedFamilyParams")
        return cls(int(data["num_parties"]), float(data["a"]), tuple(data["alphas"]),
                   float(data.get("delta", 0.0)), tuple(data["phis"]) if "phis" in data else None)


def build_constrained_state(params: ConstrainedFamilyParams) -> StateVector:
    """State whose amplitudes zero every cyclic "+ at setting 1, + at setting 0" marginal.

    Each non-all-ones string of Hamming weight k gets
    ``a * (-1)^k * e^{i sum phi} * prod cot(alpha/2)`` over its flipped parties; the
    all-ones amplitude absorbs the remaining norm with phase ``delta``.
    """
    rad = params.radicand()
    if rad < -NORM_TOL:
        raise ValueError(f"infeasible family parameters: radicand {rad!r} < 0")
    amps = np.array([params.a], dtype=complex)
    for al, ph in zip(params.alphas, params.phis):
        factor = -complex(math.cos(ph), math.sin(ph)) / math.tan(al / 2)
        amps = np.kron(amps, [1.0, factor])
    amps[-1] = complex(math.cos(params.delta), math.sin(params.delta)) * math.sqrt(max(rad, 0.0))
    n = params.num_parties
    return StateVector.from_amplitudes(amps, (2,) * n, normalize=True)


def _ghz(n):
    amps = np.zeros(1 << n)
    amps[0] = amps[-1] = 1.0
    return StateVector.from_amplitudes(amps)


def _w(n):
    amps = np.zeros(1 << n)
    for k in range(n):
        amps[1 << k] = 1.0
    return StateVector.from_amplitudes(amps)


def psi_star_params(n):
    if n == 3:
        return ConstrainedFamilyParams(3, A_STAR_3, (math.pi / 2,) * 3, 0.0)
    if n == 4:
        p = PSI_STAR_4_PARAMS
        return ConstrainedFamilyParams(4, p["a"], tuple(p["alphas"]), p["delta"])
    raise ValueError(f"no stored optimum for N={n}")


NAMED_STATES = ("GHZ3", "W3", "GHZ4", "W4", "PSI_STAR_3", "PSI_STAR_4")


def build_named_state(name: str) -> StateVector:
    key = name.upper()
    if key == "GHZ3":
        return _ghz(3)
    if key == "GHZ4":
        return _ghz(4)
    if key == "W3":
        return _w(3)
    if key == "W4":
        return _w(4)
    if key == "PSI_STAR_3":
        return build_constrained_state(psi_star_params(3))
    if key == "PSI_STAR_4":
        return build_constrained_state(psi_star_params(4))
    raise ValueError(f"unknown state {name!r}; expected one of {', '.join(NAMED_STATES)}")


def product_state(single_qubit_vectors) -> StateVector:
    amps = np.array([1.0], dtype=complex)
    for v in single_qubit_vectors:
        v = np.asarray(v, dtype=complex)
        amps = np.kron(amps, v / np.linalg.norm(v))
    return StateVector.from_amplitudes(amps)


def random_state(num_parties, rng, local_dims=None) -> StateVector:
    dims = (2,) * num_parties if local_dims is None else tuple(local_dims)
    size = math.prod(dims)
    amps = rng.normal(size=size) + 1j * rng.normal(size=size)
    return StateVector.from_amplitudes(amps, dims)


def random_product_state(num_parties, rng) -> StateVector:
    return product_state([rng.normal(size=2) + 1j * rng.normal(size=2) for _ in range(num_parties)])


def load_state(data):
    """Build a state from a StateVector, ConstrainedFamilyParams or named-state JSON object."""
    kind = data.get("type") if isinstance(data, dict) else None
    if kind == "ConstrainedFamilyParams":
        return build_constrained_state(ConstrainedFamilyParams.from_dict(data))
    if kind == "NamedState":
        _check_format(data, "NamedState")
        return build_named_state(data["name"])
    return StateVector.from_dict(data)
