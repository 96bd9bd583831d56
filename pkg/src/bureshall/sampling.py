"""Monte Carlo engines for the unconstrained and Bures-Hall eigenvalue ensembles.

Random numbers come from numpy's PCG64.  Chain ``c`` of a run seeded with
``seed`` draws from ``SeedSequence(seed, spawn_key=(c,))``, so a chain's
stream does not depend on how many chains run beside it.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import entr

from .closed_form import Dims, EnsembleParams
from .errors import ConvergenceError, ParameterError

RNG_NAME = f"numpy.random.PCG64 (numpy {np.__version__})"

DEFAULT_STEP_SCALE = 0.35
DEFAULT_THINNING = 5
DEFAULT_CHAINS = 100
BATCH_MEANS_BATCHES = 50
ACCEPTANCE_WINDOW = (0.05, 0.95)

SIMPLEX_STATISTICS = ("S_P", "S_vN")
POSITIVE_STATISTICS = ("T_P", "T_vN", "trace_sum")
STATISTICS = SIMPLEX_STATISTICS + POSITIVE_STATISTICS


class ChainWarning(UserWarning):
    """MCMC acceptance rate fell outside the healthy window."""


def default_burn_in(m: int) -> int:
    """Burn-in in single-component updates: 10 * m * 1000, i.e. 10000 sweeps."""
    return 10 * m * 1000


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PositiveSpectrum:
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) < 1 or any(not v > 0 for v in self.values):
            raise ParameterError("positive spectrum needs at least one entry, all > 0")


@dataclass(frozen=True)
class SimplexSpectrum:
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) < 1 or any(v < 0 or v > 1 for v in self.values):
            raise ParameterError("simplex spectrum entries must lie in [0, 1]")
        if abs(math.fsum(self.values) - 1.0) > 1e-12:
            raise ParameterError("simplex spectrum must sum to 1")


@dataclass(frozen=True, eq=False)
class SpectrumSet:
    """A stack of spectra, one per row.

    ``kind`` is 'positive' (unconstrained eigenvalues) or 'simplex'
    (unit-trace eigenvalues).  ``independent`` rows get the plain standard
    error, correlated (MCMC) rows get batch means.
    """

    values: np.ndarray
    kind: str
    independent: bool
    seed: int | None = None
    method: str = "unknown"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ParameterError("spectra must be a non-empty count x m array")
        if self.kind == "positive":
            if not np.all(v > 0):
                raise ParameterError("positive spectra must be strictly positive")
        elif self.kind == "simplex":
            if np.any(v < 0) or np.any(np.abs(v.sum(axis=1) - 1.0) > 1e-12):
                raise ParameterError("simplex spectra must be non-negative with unit sum")
        else:
            raise ParameterError(f"kind must be 'positive' or 'simplex', got {self.kind!r}")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_spectra(cls, spectra, independent: bool = True) -> "SpectrumSet":
        spectra = list(spectra)
        if not spectra:
            raise ParameterError("empty sample set")
        kinds = {type(s) for s in spectra}
        if kinds == {PositiveSpectrum}:
            kind = "positive"
        elif kinds == {SimplexSpectrum}:
            kind = "simplex"
        else:
            raise ParameterError("mixed or unknown spectrum types")
        return cls(np.array([s.values for s in spectra], dtype=float), kind, independent)

    def __len__(self):
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class SampleBatch:
    params: EnsembleParams
    samples: np.ndarray
    seed: int
    burn_in: int
    thinning: int
    acceptance_rate: float
    method: str
    step_scale: float | None = None
    n_chains: int = 1
    status: str = "ok"
    experimental: bool = False

    def __post_init__(self):
        if self.method not in ("mcmc_unconstrained", "matrix_model"):
            raise ParameterError(f"unknown method {self.method!r}")
        if self.method == "matrix_model" and self.acceptance_rate != 1.0:
            raise ParameterError("matrix-model batches record acceptance rate 1")
        if self.method == "mcmc_unconstrained" and not 0 < self.acceptance_rate < 1:
            raise ParameterError("MCMC acceptance rate must lie in (0, 1)")

    def spectra(self) -> SpectrumSet:
        if self.method == "matrix_model":
            return SpectrumSet(self.samples, "simplex", True, self.seed, self.method)
        return SpectrumSet(self.samples, "positive", False, self.seed, self.method)

    def metadata(self) -> dict:
        return {
            "m": self.params.m, "alpha": self.params.alpha, "seed": self.seed,
            "burn_in": self.burn_in, "thinning": self.thinning,
            "acceptance_rate": self.acceptance_rate, "method": self.method,
            "step_scale": self.step_scale, "n_chains": self.n_chains,
            "status": self.status, "experimental": self.experimental,
            "count": int(self.samples.shape[0]), "rng": RNG_NAME,
        }

    def save(self, path) -> Path:
        """Write one CSV row per sample plus a ``.meta.json`` sidecar."""
        path = Path(path)
        m = self.params.m
        header = ",".join(f"x{i + 1}" for i in range(m))
        np.savetxt(path, self.samples, delimiter=",", header=header, comments="", fmt="%.17g")
        meta = path.with_name(path.name + ".meta.json")
        meta.write_text(json.dumps(self.metadata(), indent=2, sort_keys=True) + "\n")
        return meta

    @classmethod
    def load(cls, path) -> "SampleBatch":
        path = Path(path)
        meta = json.loads(path.with_name(path.name + ".meta.json").read_text())
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(EnsembleParams(meta["m"], meta["alpha"]), data, meta["seed"], meta["burn_in"],
                   meta["thinning"], meta["acceptance_rate"], meta["method"], meta["step_scale"],
                   meta["n_chains"], meta["status"], meta["experimental"])


@dataclass(frozen=True)
class EntropyStats:
    statistic: str
    mean: float
    std_err: float
    count: int
    seed: int | None
    method: str

    def __post_init__(self):
        if self.statistic not in STATISTICS:
            raise ParameterError(f"unknown statistic {self.statistic!r}")
        if not self.std_err >= 0 or self.count < 1:
            raise ParameterError("std_err must be >= 0 and count >= 1")


# ---------------------------------------------------------------------------
# MCMC on the unconstrained ensemble
# ---------------------------------------------------------------------------

def _chain_rngs(seed: int, n_chains: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(c,))))
            for c in range(n_chains)]


def _component_delta(x: np.ndarray, i: int, new: np.ndarray) -> np.ndarray:
    """Change in the pair part of the log-density when x[:, i] moves to ``new``."""
    old = x[:, i:i + 1]
    others = np.delete(x, i, axis=1)
    nw = new[:, None]
    with np.errstate(divide="ignore"):
        d = (2 * np.log(np.abs(nw - others)) - np.log(nw + others)
             - 2 * np.log(np.abs(old - others)) + np.log(old + others))
    return d.sum(axis=1)


def sample_unconstrained_mcmc(params: EnsembleParams, count: int, burn_in: int | None = None,
                              thinning: int = DEFAULT_THINNING, seed: int = 0,
                              step_scale: float = DEFAULT_STEP_SCALE,
                              n_chains: int = DEFAULT_CHAINS, block: int = 500) -> SampleBatch:
    """Component-wise random-walk Metropolis in u = ln x.

    Target in u: sum_{i<j} [2 ln|x_i - x_j| - ln(x_i + x_j)] + (alpha + 1) sum u_i - sum x_i.
    ``burn_in`` counts single-component updates per chain; ``thinning`` counts
    sweeps (m updates) between kept states.  Rows are chain-major.
    """
    m, a = params.m, params.alpha
    if burn_in is None:
        burn_in = default_burn_in(m)
    if count < 1 or burn_in < 0 or thinning < 1 or not step_scale > 0 or n_chains < 1:
        raise ParameterError("need count >= 1, burn_in >= 0, thinning >= 1, step_scale > 0, n_chains >= 1")
    n_chains = min(n_chains, count)
    per_chain = -(-count // n_chains)
    burn_sweeps = -(-burn_in // m)
    total_sweeps = burn_sweeps + per_chain * thinning
    rngs = _chain_rngs(seed, n_chains)

    # spread-out start, then jitter per chain
    start = np.log((np.arange(m) + 1.0) * (m + a + 1) / m)
    u = start[None, :] + 0.1 * np.stack([r.standard_normal(m) for r in rngs])
    x = np.exp(u)
    out = np.empty((n_chains, per_chain, m))
    accepted = 0
    proposed = 0
    kept = 0
    sweep = 0
    while sweep < total_sweeps:
        nb = min(block, total_sweeps - sweep)
        steps = np.stack([r.standard_normal((nb, m)) for r in rngs], axis=1) * step_scale
        logu = np.log(np.stack([r.random((nb, m)) for r in rngs], axis=1))
        for s in range(nb):
            for i in range(m):
                un = u[:, i] + steps[s, :, i]
                xn = np.exp(un)
                delta = (a + 1) * (un - u[:, i]) - (xn - x[:, i])
                if m > 1:
                    delta = delta + _component_delta(x, i, xn)
                acc = logu[s, :, i] < delta
                u[:, i] = np.where(acc, un, u[:, i])
                x[:, i] = np.where(acc, xn, x[:, i])
                if sweep >= burn_sweeps:
                    accepted += int(acc.sum())
                    proposed += n_chains
            sweep += 1
            if sweep > burn_sweeps and (sweep - burn_sweeps) % thinning == 0:
                out[:, kept] = x
                kept += 1
    rate = accepted / proposed
    status = "ok"
    if not ACCEPTANCE_WINDOW[0] <= rate <= ACCEPTANCE_WINDOW[1]:
        status = "warning"
        warnings.warn(f"MCMC acceptance rate {rate:.3f} outside {ACCEPTANCE_WINDOW}", ChainWarning)
    samples = out.reshape(-1, m)[:count]
    return SampleBatch(params, samples, seed, burn_in, thinning, rate, "mcmc_unconstrained",
                       step_scale, n_chains, status)


def constrain(batch: SampleBatch) -> tuple[SpectrumSet, np.ndarray]:
    """lambda = x / theta with theta = sum x, for every row of an unconstrained batch."""
    if batch.method != "mcmc_unconstrained":
        raise ParameterError("constrain needs an unconstrained (MCMC) batch")
    theta = batch.samples.sum(axis=1)
    lam = batch.samples / theta[:, None]
    # unit sum to the last ulp: put the rounding residue on the largest entry
    idx = lam.argmax(axis=1)
    rows = np.arange(lam.shape[0])
    lam[rows, idx] += 1.0 - lam.sum(axis=1)
    return SpectrumSet(lam, "simplex", False, batch.seed, batch.method), theta


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def statistic_values(spectra: SpectrumSet, statistic: str) -> np.ndarray:
    """Per-row statistic; simplex statistics are clipped to their exact ranges."""
    v = spectra.values
    m = v.shape[1]
    if statistic in SIMPLEX_STATISTICS:
        if spectra.kind != "simplex":
            raise ParameterError(f"{statistic} needs simplex samples")
        if statistic == "S_P":
            return np.clip((v * v).sum(axis=1), 1.0 / m, 1.0)
        return np.clip(entr(v).sum(axis=1), 0.0, math.log(m))
    if statistic in POSITIVE_STATISTICS:
        if spectra.kind != "positive":
            raise ParameterError(f"{statistic} needs positive (unconstrained) samples")
        if statistic == "T_P":
            return (v * v).sum(axis=1)
        if statistic == "T_vN":
            return -entr(v).sum(axis=1)
        return v.sum(axis=1)
    raise ParameterError(f"statistic must be one of {STATISTICS}, got {statistic!r}")


def mean_and_stderr(values: np.ndarray, independent: bool) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    n = values.size
    mean = float(values.mean())
    if n < 2 or np.all(values == values[0]):
        return mean, 0.0
    if independent or n < 2 * BATCH_MEANS_BATCHES:
        return mean, float(values.std(ddof=1) / math.sqrt(n))
    b = n // BATCH_MEANS_BATCHES
    means = values[: b * BATCH_MEANS_BATCHES].reshape(BATCH_MEANS_BATCHES, b).mean(axis=1)
    return mean, float(means.std(ddof=1) / math.sqrt(BATCH_MEANS_BATCHES))


def estimate_entropy_stats(samples, statistic: str) -> EntropyStats:
    """Mean and standard error of a statistic over a sample set.

    ``samples`` is a SpectrumSet, a SampleBatch, or a sequence of
    PositiveSpectrum / SimplexSpectrum (treated as independent draws).
    """
    if isinstance(samples, SampleBatch):
        samples = samples.spectra()
    elif not isinstance(samples, SpectrumSet):
        samples = SpectrumSet.from_spectra(samples)
    vals = statistic_values(samples, statistic)
    mean, se = mean_and_stderr(vals, samples.independent)
    method = "plain" if samples.independent else "batch_means"
    return EntropyStats(statistic, mean, se, len(samples), samples.seed, f"{samples.method}/{method}")


# ---------------------------------------------------------------------------
# matrix model
# ---------------------------------------------------------------------------

def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    # real and imaginary parts N(0, 1/2): unit-variance complex entries
    g = rng.standard_normal(shape + (2,)) * math.sqrt(0.5)
    return g[..., 0] + 1j * g[..., 1]


def _haar_from_gaussian(g: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(g)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def haar_unitary(m: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary: QR of a Ginibre matrix with R's diagonal made positive."""
    if m < 1:
        raise ParameterError("m must be >= 1")
    return _haar_from_gaussian(_complex_gaussian(rng, (m, m)))


def hermitian_eigenvalues(matrix) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, descending, with a reconstruction check."""
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError("matrix must be square")
    scale = max(float(np.linalg.norm(a)), 1e-300)
    if np.max(np.abs(a - a.conj().T)) > 1e-10 * max(scale, 1.0):
        raise ParameterError("matrix is not Hermitian")
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver failed: {exc}") from None
    if np.linalg.norm((v * w) @ v.conj().T - a) > 1e-10 * scale:
        raise ConvergenceError("eigen-decomposition residual too large")
    return w[::-1].copy()


def sample_bures_matrix_model(dims: Dims, count: int, seed: int = 0, block: int = 10000) -> SampleBatch:
    """Spectra of rho = W W^dag / tr(W W^dag), W = (I + U) Z.

    Z is m x n complex Ginibre and U an m x m Haar unitary.  For m < n the
    measure on U is not pinned down, so those batches are flagged
    experimental.
    """
    if count < 1:
        raise ParameterError("count must be >= 1")
    m, n = dims.m, dims.n
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    out = np.empty((count, m))
    eye = np.eye(m)
    done = 0
    while done < count:
        b = min(block, count - done)
        z = _complex_gaussian(rng, (b, m, n))
        u = _haar_from_gaussian(_complex_gaussian(rng, (b, m, m)))
        w = (eye + u) @ z
        rho = w @ np.conj(np.swapaxes(w, -1, -2))
        try:
            ev = np.linalg.eigvalsh(rho)[:, ::-1]
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"eigensolver failed: {exc}") from None
        ev = np.clip(ev, 0.0, None)
        ev /= ev.sum(axis=1, keepdims=True)
        out[done:done + b] = ev
        done += b
    # unit sum to the last ulp, residue on the largest entry
    out[:, 0] += 1.0 - out.sum(axis=1)
    return SampleBatch(dims.params(), out, seed, 0, 1, 1.0, "matrix_model",
                       experimental=dims.m < dims.n)
