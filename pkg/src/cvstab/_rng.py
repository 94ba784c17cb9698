"""Counter-based random substreams shared by both compute backends.

Every Monte-Carlo replication owns a 64-bit key derived from the user's
stream via ``numpy.random.SeedSequence``. Within a replication, draw i is a
pure function of (key, counter): a splitmix64-style mix of ``key + (i+1)*GOLDEN``.
This makes results independent of batching, scheduling, and worker count.

The numba backend re-implements the exact same integer pipeline with scalar
ops (see kernels/numba_backend.py); the uint64 streams are bit-identical
across backends, while transcendental steps (Box-Muller, gamma rejection)
may differ by an ulp between libm and numpy's vector math.

Fixed consumption conventions (identical in both backends):
  * normals come from Box-Muller pairs; a request for c normals consumes
    2*ceil(c/2) counters (pair j uses counters 2j and 2j+1);
  * one gamma variate reserves a stride of GAMMA_STRIDE counters:
    rejection round t uses offsets 3t..3t+2, the small-shape boost uniform
    sits at offset GAMMA_STRIDE - 2.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

U64 = np.uint64
GOLDEN = U64(0x9E3779B97F4A7C15)
MIX_A = U64(0xBF58476D1CE4E5B9)
MIX_B = U64(0x94D049BB133111EB)
TWO_PI = 6.283185307179586476925286766559
INV_2_53 = 2.0 ** -53

GAMMA_STRIDE = 128
GAMMA_MAX_ROUNDS = 40

Stream = Union[int, Sequence[int], np.random.SeedSequence]


def as_seedseq(stream: Stream) -> np.random.SeedSequence:
    if isinstance(stream, np.random.SeedSequence):
        return stream
    return np.random.SeedSequence(stream)


def rep_keys(stream: Stream, count: int) -> np.ndarray:
    """One uint64 key per replication, derived from the stream."""
    return as_seedseq(stream).generate_state(count, dtype=np.uint64)


def philox(stream: Stream) -> np.random.Generator:
    """Generator for non-hot sampling paths (datasets, fold plans)."""
    return np.random.Generator(np.random.Philox(as_seedseq(stream)))


def mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> U64(30))) * MIX_A
    z = (z ^ (z >> U64(27))) * MIX_B
    return z ^ (z >> U64(31))


def uniforms(key: np.uint64, start: int, count: int) -> np.ndarray:
    """Uniforms in (0, 1] at counters start..start+count-1."""
    idx = U64(start) + np.arange(count, dtype=np.uint64)
    bits = mix64(U64(key) + (idx + U64(1)) * GOLDEN)
    return ((bits >> U64(11)) + U64(1)).astype(np.float64) * INV_2_53


def normals(key: np.uint64, start: int, count: int) -> tuple[np.ndarray, int]:
    """Standard normals; returns (values, counters consumed)."""
    m = (count + 1) // 2
    u = uniforms(key, start, 2 * m)
    r = np.sqrt(-2.0 * np.log(u[0::2]))
    t = TWO_PI * u[1::2]
    z = np.empty(2 * m)
    z[0::2] = r * np.cos(t)
    z[1::2] = r * np.sin(t)
    return z[:count], 2 * m


def gamma(key: np.uint64, start: int, shape: float) -> float:
    """Gamma(shape, 1) via Marsaglia-Tsang inside a fixed counter stride.

    Consumes exactly GAMMA_STRIDE counters regardless of the number of
    rejection rounds; the acceptance probability per round is ~0.95+, so
    GAMMA_MAX_ROUNDS is unreachable in practice.
    """
    if shape <= 0.0:
        raise RuntimeError("gamma sampler needs a positive shape")
    boost = 1.0
    a = shape
    if a < 1.0:
        u = uniforms(key, start + GAMMA_STRIDE - 2, 1)[0]
        boost = u ** (1.0 / a)
        a += 1.0
    d = a - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    for t in range(GAMMA_MAX_ROUNDS):
        u = uniforms(key, start + 3 * t, 3)
        x = np.sqrt(-2.0 * np.log(u[0])) * np.cos(TWO_PI * u[1])
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        if np.log(u[2]) < 0.5 * x * x + d - d * v + d * np.log(v):
            return boost * d * v
    raise RuntimeError("gamma sampler exhausted its counter stride")


def chi2(key: np.uint64, start: int, dof: float) -> float:
    return 2.0 * gamma(key, start, 0.5 * dof)
